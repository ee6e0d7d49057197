"""Name-frequency evidence with Dirichlet uncertainty on the frequencies.

Published name tables are empirical frequencies from a finite sample, not
known probabilities.  Each table is turned back into counts, a Dirichlet
prior is put on the category probabilities, and names are then drawn by the
Polya urn: every draw is scored with the posterior predictive and added to
the counts before the next one.  Family structure enters through two optional
constraints: siblings in one group never share a name, and a child's name can
be boosted when an ancestor bears it.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .diagnostics import Diagnostic
from .lr import likelihood_ratio

OTHER = "Other"
SUM_TOLERANCE = 0.005
SYNTHETIC_PREFIX = "SYNTHETIC"
DATA_DIR = Path(__file__).parent / "data"


class ClampedCountsWarning(UserWarning):
    """The table's non-Other counts already exceed its sample size."""


class ImpossibleConfigurationWarning(UserWarning):
    """Naming constraints leave no admissible name for some member."""


@dataclass(frozen=True)
class NameTable:
    source_label: str
    categories: tuple[str, ...]
    frequencies: tuple[float, ...]
    sample_size: int

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))

    @property
    def synthetic(self) -> bool:
        return self.source_label.upper().startswith(SYNTHETIC_PREFIX)

    def frequency(self, name: str) -> float:
        return self.frequencies[self.categories.index(name)]

    def category_of(self, name: str) -> str:
        """The table category for an observed name (unlisted names are ``Other``)."""
        return name if name in self.categories else OTHER

    def model_frequencies(self) -> np.ndarray:
        """Frequencies with ``Other`` recomputed as one minus the listed names.

        Published columns are rounded and do not sum to one; the residual
        definition of ``Other`` restores an exact distribution.
        """
        f = np.array(self.frequencies)
        listed = np.array([c != OTHER for c in self.categories])
        f[~listed] = max(0.0, 1.0 - f[listed].sum())
        return f / f.sum()


def validate_table(t: NameTable) -> list[Diagnostic]:
    diags = []

    def add(code, msg):
        diags.append(Diagnostic(1, 1, code, msg))

    if len(t.categories) != len(t.frequencies):
        add("N_LENGTH", "one frequency per category is required")
    if len(set(t.categories)) != len(t.categories):
        add("N_DUPLICATE", "category labels repeat")
    if t.categories.count(OTHER) != 1 or (t.categories and t.categories[-1] != OTHER):
        add("N_OTHER", f"{OTHER!r} must appear exactly once, as the last category")
    if any(f < 0 or not math.isfinite(f) for f in t.frequencies):
        add("N_NEGATIVE", "frequencies must be finite and nonnegative")
    total = sum(t.frequencies)
    if abs(total - 1.0) > SUM_TOLERANCE:
        add("N_SUM", f"frequencies sum to {total:.6g}, not 1 within {SUM_TOLERANCE}")
    if not isinstance(t.sample_size, int) or t.sample_size < 1:
        add("N_SAMPLE_SIZE", "sample size must be a positive integer")
    return diags


_META = re.compile(r"#\s*source=(?P<label>.*?)\s+n=(?P<n>\d+)\s*$")


def read_name_table(path: str | Path) -> NameTable:
    """Load a ``name,frequency`` CSV with a ``# source=<label> n=<N>`` line."""
    path = Path(path)
    label, n = None, None
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("#"):
                m = _META.match(stripped)
                if m:
                    label, n = m.group("label"), int(m.group("n"))
            elif stripped:
                body.append(stripped)
    if label is None:
        raise ValueError(f"{path}: missing '# source=<label> n=<N>' metadata line")
    reader = csv.reader(body)
    header = [h.strip() for h in next(reader, [])]
    if header != ["name", "frequency"]:
        raise ValueError(f"{path}: header must be name,frequency")
    names, freqs = [], []
    for rec in reader:
        names.append(rec[0].strip())
        freqs.append(float(rec[1]))
    return NameTable(label, tuple(names), tuple(freqs), n)


def bundled_table(name: str) -> NameTable:
    """One of the tables shipped in ``kinship_lr/data`` (file stem)."""
    return read_name_table(DATA_DIR / f"{name}.csv")


def mix_tables(tables: Sequence[NameTable], weights: Sequence[float], label: str | None = None) -> NameTable:
    """Weighted mixture of columns over the same categories."""
    if not tables or len(tables) != len(weights):
        raise ValueError("one weight per table")
    cats = tables[0].categories
    if any(t.categories != cats for t in tables):
        raise ValueError("tables must share categories in the same order")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative and not all zero")
    w = w / w.sum()
    freqs = sum(wi * np.array(t.frequencies) for wi, t in zip(w, tables))
    n = int(round(sum(wi * t.sample_size for wi, t in zip(w, tables))))
    label = label or " + ".join(f"{wi:g}*{t.source_label}" for wi, t in zip(w, tables))
    return NameTable(label, cats, tuple(freqs.tolist()), n)


def counts_from_frequencies(t: NameTable) -> np.ndarray:
    """Recover integer counts: round f*N per listed name, ``Other`` takes the rest."""
    counts = np.zeros(len(t.categories), dtype=np.int64)
    other = t.categories.index(OTHER)
    for i, f in enumerate(t.frequencies):
        if i != other:
            counts[i] = int(math.floor(f * t.sample_size + 0.5))
    rest = t.sample_size - int(counts.sum())
    if rest < 0:
        warnings.warn(f"{t.source_label}: listed counts exceed N={t.sample_size}; Other clamped to 0",
                      ClampedCountsWarning, stacklevel=2)
        rest = 0
    counts[other] = rest
    return counts


@dataclass(frozen=True)
class DirichletPrior:
    categories: tuple[str, ...]
    concentrations: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "concentrations", tuple(float(a) for a in self.concentrations))
        if len(self.categories) != len(self.concentrations):
            raise ValueError("one concentration per category")
        if any(not (a > 0 and math.isfinite(a)) for a in self.concentrations):
            raise ValueError("concentrations must be positive and finite")

    @classmethod
    def uniform(cls, categories: Sequence[str], alpha: float = 1.0) -> "DirichletPrior":
        return cls(tuple(categories), (alpha,) * len(categories))

    @classmethod
    def from_frequencies(cls, table: NameTable, total: float) -> "DirichletPrior":
        """Prior centred on the table with total concentration ``total``."""
        f = table.model_frequencies()
        return cls(table.categories, tuple((total * f).tolist()))

    @property
    def alpha(self) -> np.ndarray:
        return np.array(self.concentrations)

    @property
    def total(self) -> float:
        return float(sum(self.concentrations))

    def index(self, name: str | int) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.categories.index(name)
        except ValueError:
            raise ValueError(f"unknown name category {name!r}") from None


def predictive_distribution(prior: DirichletPrior, counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (len(prior.categories),):
        raise ValueError("counts must align with the prior's categories")
    return (prior.alpha + counts) / (prior.total + counts.sum())


def posterior_predictive(prior: DirichletPrior, counts, name: str | int) -> float:
    """(alpha_i + c_i) / (alpha_0 + N)."""
    counts = np.asarray(counts, dtype=float)
    i = prior.index(name)
    return float((prior.concentrations[i] + counts[i]) / (prior.total + counts.sum()))


def sequence_likelihood(prior: DirichletPrior, counts, names: Sequence[str | int]) -> float:
    """Probability of drawing ``names`` in order from the Polya urn."""
    counts = np.array(counts, dtype=float)
    p = 1.0
    for name in names:
        i = prior.index(name)
        p *= (prior.concentrations[i] + counts[i]) / (prior.total + counts.sum())
        counts[i] += 1
    return p


def log_marginal_likelihood(prior: DirichletPrior, counts, name_counts) -> float:
    """Log probability of one ordered sequence with multiplicities ``name_counts``.

    Ratio of rising factorials, via log-gamma; agrees with
    :func:`sequence_likelihood` for any ordering of the same multiset.
    """
    a = prior.alpha + np.asarray(counts, dtype=float)
    m = np.asarray(name_counts, dtype=float)
    return float(np.sum(gammaln(a + m) - gammaln(a)) - (gammaln(a.sum() + m.sum()) - gammaln(a.sum())))


@dataclass(frozen=True)
class NameModel:
    """One sex's name table together with its prior."""

    table: NameTable
    prior: DirichletPrior
    use_counts: bool = True

    @classmethod
    def default(cls, table: NameTable) -> "NameModel":
        return cls(table, DirichletPrior.uniform(table.categories))

    @property
    def counts(self) -> np.ndarray:
        if not self.use_counts:
            return np.zeros(len(self.table.categories))
        return counts_from_frequencies(self.table).astype(float)


@dataclass(frozen=True)
class Member:
    id: str
    sex: str
    name: str
    role: str = ""


@dataclass(frozen=True)
class FamilyConfiguration:
    members: tuple[Member, ...]
    sibling_groups: tuple[frozenset, ...] = ()
    parent_links: Mapping[str, tuple[str | None, str | None]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "sibling_groups", tuple(frozenset(g) for g in self.sibling_groups))
        ids = [m.id for m in self.members]
        if len(set(ids)) != len(ids):
            raise ValueError("member ids must be unique")
        seen: set[str] = set()
        for g in self.sibling_groups:
            if g & seen:
                raise ValueError("sibling groups must be disjoint")
            if not g <= set(ids):
                raise ValueError(f"sibling group mentions unknown members {sorted(g - set(ids))}")
            seen |= g
        for child, parents in self.parent_links.items():
            if child not in ids or any(p is not None and p not in ids for p in parents):
                raise ValueError(f"parent link for {child!r} mentions unknown members")
        self.order()  # raises on cycles

    def member(self, mid: str) -> Member:
        for m in self.members:
            if m.id == mid:
                return m
        raise KeyError(mid)

    def parents_of(self, mid: str) -> list[str]:
        return [p for p in self.parent_links.get(mid, (None, None)) if p is not None]

    def ancestors(self, mid: str) -> set[str]:
        out: set[str] = set()
        stack = self.parents_of(mid)
        while stack:
            p = stack.pop()
            if p not in out:
                out.add(p)
                stack.extend(self.parents_of(p))
        return out

    def order(self) -> list[str]:
        """Parents before children; otherwise by member id."""
        indeg = {m.id: len(self.parents_of(m.id)) for m in self.members}
        kids: dict[str, list[str]] = {m.id: [] for m in self.members}
        for m in self.members:
            for p in self.parents_of(m.id):
                kids[p].append(m.id)
        ready = [i for i, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        out = []
        while ready:
            i = heapq.heappop(ready)
            out.append(i)
            for c in kids[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(out) != len(self.members):
            raise ValueError("parent links are cyclic")
        return out


@dataclass(frozen=True)
class NamingConstraints:
    sibling_distinct: bool = False
    ancestor_naming_boost: float = 0.0

    def __post_init__(self):
        b = self.ancestor_naming_boost
        if not (math.isfinite(b) and b >= 0):
            raise ValueError("ancestor_naming_boost must be finite and >= 0")


@dataclass(frozen=True)
class IdentificationAssumption:
    """Under the null, ``member`` bears ``name`` with probability ``weight``.

    When the identification fails the name is treated as an ordinary draw.
    """

    member: str
    name: str
    weight: float = 1.0
    assumption_id: str = ""
    alternative: str = "draw"

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight {self.weight} outside [0, 1]")
        if self.alternative != "draw":
            raise ValueError(f"unsupported alternative {self.alternative!r}")


def _family_path(config: FamilyConfiguration, models: Mapping[str, NameModel],
                 constraints: NamingConstraints, fixed: frozenset = frozenset()) -> float:
    counts = {sex: m.counts for sex, m in models.items()}
    group_of = {mid: gi for gi, g in enumerate(config.sibling_groups) for mid in g}
    used: dict[int, set[str]] = {gi: set() for gi in range(len(config.sibling_groups))}
    category = {}
    for m in config.members:
        if m.sex not in models:
            raise ValueError(f"no name table for sex {m.sex!r} (member {m.id!r})")
        category[m.id] = models[m.sex].table.category_of(m.name)
    beta = constraints.ancestor_naming_boost
    p = 1.0
    for mid in config.order():
        member = config.member(mid)
        cat = category[mid]
        gi = group_of.get(mid)
        if mid not in fixed:
            model = models[member.sex]
            cats = model.table.categories
            w = predictive_distribution(model.prior, counts[member.sex])
            if beta > 0:
                borne = {category[a] for a in config.ancestors(mid)}
                w = w * (1.0 + beta * np.array([c in borne for c in cats], dtype=float))
            if constraints.sibling_distinct and gi is not None:
                w = w * np.array([c not in used[gi] for c in cats], dtype=float)
            total = w.sum()
            if total <= 0.0:
                warnings.warn(f"no admissible name left for member {mid!r}",
                              ImpossibleConfigurationWarning, stacklevel=3)
                return 0.0
            i = cats.index(cat)
            p *= w[i] / total
            counts[member.sex] = counts[member.sex].copy()
            counts[member.sex][i] += 1
        if gi is not None:
            used[gi].add(cat)
    return p


def _check_sibling_capacity(config, models, constraints) -> bool:
    if not constraints.sibling_distinct:
        return True
    for g in config.sibling_groups:
        cats = set()
        for mid in g:
            cats |= set(models[config.member(mid).sex].table.categories)
        if len(g) > len(cats):
            warnings.warn(f"sibling group of {len(g)} exceeds {len(cats)} available names",
                          ImpossibleConfigurationWarning, stacklevel=3)
            return False
    return True


def family_likelihood_alt(config: FamilyConfiguration, models: Mapping[str, NameModel],
                          constraints: NamingConstraints | None = None) -> float:
    """Probability of the observed names for a random family of this shape."""
    constraints = constraints or NamingConstraints()
    if not _check_sibling_capacity(config, models, constraints):
        return 0.0
    return _family_path(config, models, constraints)


def family_likelihood_alt_mixture(configs: Sequence[tuple[float, FamilyConfiguration]],
                                  models: Mapping[str, NameModel],
                                  constraints: NamingConstraints | None = None) -> float:
    """Weighted average over alternative family structures."""
    weights = np.array([w for w, _ in configs], dtype=float)
    if len(weights) == 0 or np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("alternative weights must be nonnegative and not all zero")
    weights = weights / weights.sum()
    return float(sum(w * family_likelihood_alt(c, models, constraints) for w, (_, c) in zip(weights, configs)))


MAX_UNCERTAIN_ASSUMPTIONS = 20


def family_likelihood_null(config: FamilyConfiguration, nt_spec: Sequence[IdentificationAssumption],
                           models: Mapping[str, NameModel],
                           constraints: NamingConstraints | None = None) -> float:
    """Probability of the observed names if the family is the hypothesised one.

    Each identification holds with its weight, forcing the member's name; the
    exact mixture over which identifications hold is enumerated.  Members not
    forced are drawn as under the alternative, still seeing forced names as
    sibling and ancestor names.
    """
    constraints = constraints or NamingConstraints()
    ids = {m.id for m in config.members}
    by_member: dict[str, IdentificationAssumption] = {}
    for a in nt_spec:
        if a.member not in ids:
            raise ValueError(f"assumption {a.assumption_id or a.name!r} names unknown member {a.member!r}")
        if a.member in by_member:
            raise ValueError(f"member {a.member!r} has more than one identification")
        by_member[a.member] = a
    certain = [a for a in by_member.values() if a.weight == 1.0]
    uncertain = [a for a in by_member.values() if 0.0 < a.weight < 1.0]
    if len(uncertain) > MAX_UNCERTAIN_ASSUMPTIONS:
        raise ValueError(f"more than {MAX_UNCERTAIN_ASSUMPTIONS} uncertain identifications")

    def matches(a: IdentificationAssumption) -> bool:
        return config.member(a.member).name == a.name

    if not all(matches(a) for a in certain):
        return 0.0
    total = 0.0
    for held in itertools.product((True, False), repeat=len(uncertain)):
        weight = 1.0
        forced = {a.member for a in certain}
        for a, h in zip(uncertain, held):
            if h:
                if not matches(a):
                    weight = 0.0
                    break
                weight *= a.weight
                forced.add(a.member)
            else:
                weight *= 1.0 - a.weight
        if weight == 0.0:
            continue
        with warnings.catch_warnings():
            # an empty branch is a legitimate zero inside the mixture
            warnings.simplefilter("ignore", ImpossibleConfigurationWarning)
            total += weight * _family_path(config, models, constraints, frozenset(forced))
    return total


def onomasticon_lr(config: FamilyConfiguration, nt_spec: Sequence[IdentificationAssumption],
                   models: Mapping[str, NameModel], constraints: NamingConstraints | None = None,
                   alternatives: Sequence[tuple[float, FamilyConfiguration]] | None = None) -> float:
    """P(names | not the hypothesised family) / P(names | hypothesised family).

    ``inf`` when only the denominator vanishes, ``nan`` for 0/0.
    """
    if alternatives:
        alt = family_likelihood_alt_mixture(alternatives, models, constraints)
    else:
        alt = family_likelihood_alt(config, models, constraints)
    null = family_likelihood_null(config, nt_spec, models, constraints)
    return likelihood_ratio(alt, null)
