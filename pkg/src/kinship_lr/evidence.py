"""Combining likelihood ratios across items of evidence.

Every ratio is P(E | H1) / P(E | H0) with H1 the alternative ("the tomb is
not the hypothesised family").  Under conditional independence given the
hypothesis, item ratios multiply.  ``inf`` and ``nan`` carry the degenerate
cases through the algebra (see :mod:`kinship_lr.lr`).
"""

from __future__ import annotations

import copy
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import stats

from .factors import Network, log_evidence_likelihood
from .lr import log_likelihood_ratio

DNA = "dna"
ONOMASTICON = "onomasticon"
DIRECT = "direct"
NETWORK = "network"


@dataclass(frozen=True)
class HypothesisPair:
    null_label: str = "Tomb=NTped"
    alt_label: str = "Tomb≠NTped"
    prior_odds: float = 1.0
    prior_odds_given: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not (self.prior_odds > 0 and math.isfinite(self.prior_odds)):
            raise ValueError("prior odds must be positive and finite")


@dataclass(frozen=True)
class EvidenceItem:
    item_id: str
    kind: str
    lr: float
    provenance: str = ""


@dataclass(frozen=True)
class CombinedResult:
    per_item: tuple[tuple[str, float], ...]
    overall_lr: float
    posterior_odds: float
    posterior_prob_alt: float


def combine_lrs(items: Sequence[EvidenceItem], hypotheses: HypothesisPair | None = None) -> CombinedResult:
    """Product rule over conditionally independent items.

    A zero and an infinity together (or any undefined item) give ``nan``.
    """
    hypotheses = hypotheses or HypothesisPair()
    values = [it.lr for it in items]
    if any(math.isnan(v) for v in values):
        overall = math.nan
    else:
        has_inf = any(math.isinf(v) for v in values)
        has_zero = any(v == 0.0 for v in values)
        if has_inf and has_zero:
            overall = math.nan
        elif has_inf:
            overall = math.inf
        elif has_zero:
            overall = 0.0
        else:
            overall = math.prod(values)
            if overall == 0.0 or math.isinf(overall):
                # intermediate under/overflow; redo in log space
                overall = math.exp(math.fsum(math.log(v) for v in values))
    odds, prob = posterior_from_lr(hypotheses, overall)
    return CombinedResult(tuple((it.item_id, it.lr) for it in items), overall, odds, prob)


def posterior_from_lr(hypotheses: HypothesisPair, overall_lr: float) -> tuple[float, float]:
    """Posterior odds of H1 against H0 and the posterior probability of H1."""
    if math.isnan(overall_lr):
        return math.nan, math.nan
    if math.isinf(overall_lr):
        return math.inf, 1.0
    odds = hypotheses.prior_odds * overall_lr
    if math.isinf(odds):
        return math.inf, 1.0
    return odds, odds / (1.0 + odds)


def selection_adjust(p: float, trials: int) -> float:
    """Probability that at least one of ``trials`` independent cases shows an event of probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials={trials} must be an integer >= 1")
    if p == 1.0:
        return 1.0
    return -math.expm1(trials * math.log1p(-p))


POINT = "point"
UNIFORM = "uniform-integer-range"
POISSON = "poisson"


@dataclass(frozen=True)
class CountPrior:
    """Uncertainty about a count such as the number of inscribed ossuaries."""

    quantity: str
    kind: str
    value: int | None = None
    lo: int | None = None
    hi: int | None = None
    mean: float | None = None

    def __post_init__(self):
        if self.kind == POINT:
            if self.value is None or self.value < 1:
                raise ValueError("point prior needs a positive value")
        elif self.kind == UNIFORM:
            if self.lo is None or self.hi is None or self.lo < 1 or self.lo > self.hi:
                raise ValueError("uniform prior needs 1 <= lo <= hi")
        elif self.kind == POISSON:
            if self.mean is None or not self.mean > 0:
                raise ValueError("poisson prior needs a positive mean")
        else:
            raise ValueError(f"unknown count prior kind {self.kind!r}")

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Support points and normalized weights (Poisson truncated at mean ± 10 sd, at least 1)."""
        if self.kind == POINT:
            return np.array([self.value]), np.array([1.0])
        if self.kind == UNIFORM:
            n = np.arange(self.lo, self.hi + 1)
            return n, np.full(len(n), 1.0 / len(n))
        spread = 10.0 * math.sqrt(self.mean)
        lo = max(1, int(math.floor(self.mean - spread)))
        hi = int(math.floor(self.mean + spread))
        n = np.arange(lo, hi + 1)
        if len(n) == 0:
            raise ValueError("count prior has empty support")
        w = stats.poisson.pmf(n, self.mean)
        return n, w / w.sum()

    def expected(self) -> float:
        return integrate_over_count(self, float)


def integrate_over_count(prior: CountPrior, f: Callable[[int], float]) -> float:
    """E[f(n)] under the (truncated, renormalized) count prior."""
    if prior.kind == POINT:
        return f(int(prior.value))
    n, w = prior.support()
    return math.fsum(float(wi) * f(int(ni)) for ni, wi in zip(n, w))


def network_lr(net: Network, hypothesis: str, null_state: int | str, alt_state: int | str,
               evidence: Mapping[str, int | str]) -> float:
    """LR from one network by clamping the hypothesis node to each state.

    P(e | h) = P(e, h) / P(h), both by variable elimination.
    """
    if hypothesis in evidence:
        raise ValueError("the hypothesis node cannot also be evidence")

    def log_cond(state):
        joint = log_evidence_likelihood(net, {**evidence, hypothesis: state})
        prior = log_evidence_likelihood(net, {hypothesis: state})
        if prior == -math.inf:
            raise ValueError(f"hypothesis state {state!r} has zero prior probability")
        return joint - prior

    return log_likelihood_ratio(log_cond(alt_state), log_cond(null_state))


def network_items(net: Network, hypothesis: str, null_state, alt_state,
                  items: Mapping[str, Mapping[str, int | str]]) -> list[EvidenceItem]:
    """One evidence item per named group of observations on a network."""
    return [
        EvidenceItem(item_id, NETWORK, network_lr(net, hypothesis, null_state, alt_state, ev),
                     provenance=f"network:{hypothesis}")
        for item_id, ev in items.items()
    ]


def get_path(obj: Any, path: str) -> Any:
    for part in path.split("."):
        if isinstance(obj, list):
            try:
                obj = obj[int(part)]
            except (ValueError, IndexError):
                raise KeyError(f"unresolvable path {path!r} at {part!r}") from None
        elif isinstance(obj, dict) and part in obj:
            obj = obj[part]
        else:
            raise KeyError(f"unresolvable path {path!r} at {part!r}")
    return obj


def set_path(obj: Any, path: str, value: Any) -> None:
    *head, last = path.split(".")
    parent = get_path(obj, ".".join(head)) if head else obj
    if isinstance(parent, list):
        parent[int(last)] = value
    elif isinstance(parent, dict) and last in parent:
        parent[last] = value
    else:
        raise KeyError(f"unresolvable path {path!r} at {last!r}")


@dataclass(frozen=True)
class SweepRow:
    indices: tuple[int, ...]
    values: tuple[Any, ...]
    result: Any


def sensitivity_sweep(scenario: Mapping, axes: Sequence[tuple[str, Sequence[Any]]],
                      evaluate: Callable[[Mapping], Any], workers: int = 1) -> list[SweepRow]:
    """Evaluate the scenario at every point of the Cartesian grid of ``axes``.

    Rows come back in lexicographic order of grid indices whatever the
    evaluation order; ``workers > 1`` evaluates points on a thread pool.
    """
    if not axes:
        raise ValueError("at least one sweep axis is required")
    for path, grid in axes:
        if len(grid) == 0:
            raise ValueError(f"axis {path!r} has an empty grid")
        get_path(scenario, path)
    points = list(itertools.product(*[range(len(g)) for _, g in axes]))

    def run(idx):
        sc = copy.deepcopy(scenario)
        for (path, grid), i in zip(axes, idx):
            set_path(sc, path, grid[i])
        return evaluate(sc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(idx) for idx in points]
    return [
        SweepRow(idx, tuple(grid[i] for (_, grid), i in zip(axes, idx)), res)
        for idx, res in zip(points, results)
    ]
