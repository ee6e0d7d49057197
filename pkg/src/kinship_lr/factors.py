"""Discrete factors, Bayesian networks and exact inference.

A :class:`Factor` is a dense nonnegative table over an ordered scope of
variable ids, stored as a numpy array whose axes follow the scope (so the
flattened values are row-major in scope order).  A :class:`Network` holds one
conditional probability table per variable; the child variable is always the
*last* axis of its CPT, so each row of a CPT is one distribution.

Exact inference is by variable elimination with a min-degree ordering.
:func:`enumerate_joint` builds the full joint and serves as a brute-force
oracle for everything else.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_JOINT_SIZE = 2**22
CPT_TOLERANCE = 1e-9
# Intermediate factors below this are rescaled and the scale kept in log space.
# Chosen well above 1e-300 so that a product of two rescaled tables cannot underflow.
_RESCALE_BELOW = 1e-150


@dataclass(frozen=True)
class DiscreteVariable:
    id: str
    states: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.name:
            object.__setattr__(self, "name", self.id)
        if len(self.states) < 2:
            raise ValueError(f"variable {self.id!r} needs at least 2 states")
        if len(set(self.states)) != len(self.states) or any(not s for s in self.states):
            raise ValueError(f"variable {self.id!r} has empty or repeated state labels")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise ValueError(f"{label!r} is not a state of {self.id!r}") from None


class Factor:
    """Nonnegative table over an ordered scope.

    ``values`` is reshaped to the scope cardinalities; a factor with an empty
    scope is a scalar.  Factors are treated as immutable.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Sequence[str], values, cards: Sequence[int] | None = None):
        scope = tuple(scope)
        if len(set(scope)) != len(scope):
            raise ValueError(f"repeated variable in scope {scope}")
        arr = np.array(values, dtype=float)
        if cards is not None:
            cards = tuple(int(c) for c in cards)
            if arr.size != math.prod(cards):
                raise ValueError(f"{arr.size} values do not fit cardinalities {cards}")
            arr = arr.reshape(cards)
        elif arr.ndim != len(scope):
            raise ValueError("values must be shaped by scope or cards must be given")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("factor values must be finite and nonnegative")
        arr.setflags(write=False)
        self.scope = scope
        self.values = arr

    @classmethod
    def scalar(cls, value: float = 1.0) -> "Factor":
        return cls((), np.array(value, dtype=float))

    @property
    def cards(self) -> tuple[int, ...]:
        return self.values.shape

    def card_of(self, var: str) -> int:
        return self.values.shape[self.scope.index(var)]

    def total(self) -> float:
        return float(self.values.sum())

    def aligned(self, scope: Sequence[str]) -> np.ndarray:
        """Values transposed to ``scope`` (a permutation of this scope)."""
        scope = tuple(scope)
        if sorted(scope) != sorted(self.scope):
            raise ValueError(f"{scope} is not a permutation of {self.scope}")
        return np.transpose(self.values, [self.scope.index(v) for v in scope])

    def __mul__(self, other: "Factor") -> "Factor":
        return factor_product(self, other)

    def __repr__(self):
        return f"Factor(scope={self.scope}, values={self.values.tolist()})"


def _broadcast(f: Factor, scope: tuple[str, ...]) -> np.ndarray:
    present = [v for v in scope if v in f.scope]
    arr = f.aligned(present) if present else f.values
    shape = [f.card_of(v) if v in f.scope else 1 for v in scope]
    return arr.reshape(shape)


def factor_product(a: Factor, b: Factor) -> Factor:
    for v in set(a.scope) & set(b.scope):
        if a.card_of(v) != b.card_of(v):
            raise ValueError(f"cardinality mismatch on shared variable {v!r}")
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    return Factor(scope, _broadcast(a, scope) * _broadcast(b, scope))


def factor_marginalize(f: Factor, var: str) -> Factor:
    if var not in f.scope:
        raise ValueError(f"{var!r} not in scope {f.scope}")
    axis = f.scope.index(var)
    return Factor(f.scope[:axis] + f.scope[axis + 1:], f.values.sum(axis=axis))


def factor_reduce(f: Factor, evidence: Mapping[str, int]) -> Factor:
    index = []
    scope = []
    for var, card in zip(f.scope, f.cards):
        if var in evidence:
            state = evidence[var]
            if not 0 <= state < card:
                raise ValueError(f"state {state} out of range for {var!r} (cardinality {card})")
            index.append(state)
        else:
            index.append(slice(None))
            scope.append(var)
    return Factor(scope, f.values[tuple(index)])


class Network:
    """A discrete Bayesian network.

    ``cpts[v]`` has scope ``parents(v) + (v,)``.  Construction checks shapes,
    row normalization (within 1e-9) and acyclicity.
    """

    def __init__(self, variables: Iterable[DiscreteVariable], cpts: Mapping[str, Factor],
                 aliases: Mapping[str, str] | None = None):
        self.variables: dict[str, DiscreteVariable] = {}
        for var in variables:
            if var.id in self.variables:
                raise ValueError(f"duplicate variable id {var.id!r}")
            self.variables[var.id] = var
        if set(cpts) != set(self.variables):
            raise ValueError("exactly one CPT per variable is required")
        self.cpts: dict[str, Factor] = {}
        for vid in self.variables:
            cpt = cpts[vid]
            if not cpt.scope or cpt.scope[-1] != vid:
                raise ValueError(f"CPT of {vid!r} must have the child as its last axis")
            for u, card in zip(cpt.scope, cpt.cards):
                if u not in self.variables:
                    raise ValueError(f"CPT of {vid!r} mentions unknown variable {u!r}")
                if self.variables[u].cardinality != card:
                    raise ValueError(f"CPT of {vid!r} has wrong cardinality for {u!r}")
            rows = cpt.values.sum(axis=-1)
            if np.any(np.abs(rows - 1.0) > CPT_TOLERANCE):
                raise ValueError(f"CPT of {vid!r} is not normalized")
            self.cpts[vid] = cpt
        self.order = self._topological_order()
        self.aliases = dict(aliases or {})
        for alias, target in self.aliases.items():
            if target not in self.variables or alias in self.variables:
                raise ValueError(f"bad alias {alias!r} -> {target!r}")

    def canonical(self, vid: str) -> str:
        """Variable id behind a possibly aliased name."""
        vid = self.aliases.get(vid, vid)
        if vid not in self.variables:
            raise KeyError(f"unknown variable {vid!r}")
        return vid

    def parents(self, vid: str) -> tuple[str, ...]:
        return self.cpts[vid].scope[:-1]

    def children(self, vid: str) -> list[str]:
        return [v for v in self.variables if vid in self.parents(v)]

    def _topological_order(self) -> tuple[str, ...]:
        indegree = {v: len(self.parents(v)) for v in self.variables}
        kids: dict[str, list[str]] = {v: [] for v in self.variables}
        for v in self.variables:
            for p in self.parents(v):
                kids[p].append(v)
        ready = sorted(v for v, d in indegree.items() if d == 0)
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for c in kids[v]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != len(self.variables):
            raise ValueError("parent relation is cyclic")
        return tuple(order)

    def state_index(self, assignments: Mapping[str, int | str]) -> dict[str, int]:
        """Convert an evidence mapping with labels or indices to indices."""
        out = {}
        for name, state in assignments.items():
            vid = self.canonical(name)
            if vid in out:
                raise ValueError(f"variable {vid!r} assigned twice")
            var = self.variables[vid]
            idx = var.index(state) if isinstance(state, str) else int(state)
            if not 0 <= idx < var.cardinality:
                raise ValueError(f"state {idx} out of range for {vid!r}")
            out[vid] = idx
        return out

    def __repr__(self):
        return f"Network({len(self.variables)} variables)"


def _moral_graph(net: Network) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {v: set() for v in net.variables}
    for v in net.variables:
        family = list(net.cpts[v].scope)
        for i, a in enumerate(family):
            for b in family[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def elimination_order(net: Network, keep: Iterable[str] = ()) -> list[str]:
    """Min-degree order over the variables not in ``keep``.

    Degrees are taken on the moralized graph, updated with fill-in edges as
    variables are eliminated; ties go to the lexicographically smallest name.
    """
    keep = set(keep)
    unknown = keep - set(net.variables)
    if unknown:
        raise KeyError(f"unknown variables {sorted(unknown)}")
    adj = _moral_graph(net)
    todo = set(net.variables) - keep
    name = {v: net.variables[v].name for v in net.variables}
    order = []
    while todo:
        v = min(todo, key=lambda u: (len(adj[u]), name[u], u))
        nbrs = adj[v]
        for a in nbrs:
            adj[a] |= nbrs - {a}
            adj[a].discard(v)
        del adj[v]
        todo.remove(v)
        order.append(v)
    return order


def _eliminate(factors: list[Factor], order: Sequence[str]) -> tuple[list[Factor], float]:
    """Sum out ``order`` from a factor list; returns remaining factors and a log scale."""
    log_scale = 0.0
    factors = list(factors)
    for var in order:
        bucket = [f for f in factors if var in f.scope]
        if not bucket:
            continue
        factors = [f for f in factors if var not in f.scope]
        prod, s = _combine(bucket)
        log_scale += s
        factors.append(factor_marginalize(prod, var))
    return factors, log_scale


def _combine(factors: Sequence[Factor]) -> tuple[Factor, float]:
    """Product of ``factors`` as (factor, log scale), rescaling the running product."""
    log_scale = 0.0
    prod = Factor.scalar()
    for f in factors:
        f, s = _rescaled(f)
        prod, t = _rescaled(factor_product(prod, f))
        log_scale += s + t
    return prod, log_scale


def _rescaled(f: Factor) -> tuple[Factor, float]:
    peak = float(f.values.max()) if f.values.size else 0.0
    if 0.0 < peak < _RESCALE_BELOW:
        return Factor(f.scope, f.values / peak), math.log(peak)
    return f, 0.0


@dataclass(frozen=True)
class QueryResult:
    """Outcome of :func:`query`.

    When the evidence has probability zero, ``posterior`` is ``None`` and
    ``impossible`` is true; callers branch on it rather than catching.
    """

    posterior: Factor | None
    evidence_prob: float
    log_evidence_prob: float = field(default=-math.inf)

    @property
    def impossible(self) -> bool:
        return self.posterior is None


def _check_evidence(net: Network, evidence: Mapping[str, int | str] | None) -> dict[str, int]:
    return net.state_index(evidence or {})


def query(net: Network, targets: Sequence[str], evidence: Mapping[str, int | str] | None = None,
          order: Sequence[str] | None = None) -> QueryResult:
    """Posterior over ``targets`` given ``evidence`` by variable elimination."""
    if not targets:
        raise ValueError("targets must be nonempty")
    targets = tuple(net.canonical(t) for t in targets)
    ev = _check_evidence(net, evidence)
    clash = set(targets) & set(ev)
    if clash:
        raise ValueError(f"targets {sorted(clash)} are also observed")
    factors = [factor_reduce(cpt, ev) for cpt in net.cpts.values()]
    if order is None:
        order = elimination_order(net, keep=set(targets) | set(ev))
    remaining, log_scale = _eliminate(factors, order)
    joint, s = _combine(remaining)
    log_scale += s
    total = joint.total()
    if total <= 0.0:
        return QueryResult(None, 0.0, -math.inf)
    log_p = math.log(total) + log_scale
    posterior = Factor(targets, joint.aligned(targets) / total)
    return QueryResult(posterior, math.exp(log_p), log_p)


def log_evidence_likelihood(net: Network, evidence: Mapping[str, int | str] | None = None,
                            order: Sequence[str] | None = None) -> float:
    ev = _check_evidence(net, evidence)
    factors = [factor_reduce(cpt, ev) for cpt in net.cpts.values()]
    if order is None:
        order = elimination_order(net, keep=set(ev))
    remaining, log_scale = _eliminate(factors, order)
    for f in remaining:
        f, s = _rescaled(f)
        t = f.total()
        if t <= 0.0:
            return -math.inf
        log_scale += s + math.log(t)
    return log_scale


def evidence_likelihood(net: Network, evidence: Mapping[str, int | str] | None = None,
                        order: Sequence[str] | None = None) -> float:
    """P(evidence), computed by variable elimination."""
    return math.exp(log_evidence_likelihood(net, evidence, order))


def enumerate_joint(net: Network, max_size: int = MAX_JOINT_SIZE) -> Factor:
    """Full joint distribution as one factor (brute-force oracle)."""
    size = math.prod(v.cardinality for v in net.variables.values())
    if size > max_size:
        raise ValueError(f"joint has {size} entries, above the guard of {max_size}")
    joint = Factor.scalar()
    for vid in net.order:
        joint = factor_product(joint, net.cpts[vid])
    return joint


def joint_query(joint: Factor, targets: Sequence[str], evidence: Mapping[str, int]) -> QueryResult:
    """Posterior and evidence probability read off a full joint table."""
    reduced = factor_reduce(joint, evidence)
    for v in [v for v in reduced.scope if v not in targets]:
        reduced = factor_marginalize(reduced, v)
    total = reduced.total()
    if total <= 0.0:
        return QueryResult(None, 0.0)
    return QueryResult(Factor(tuple(targets), reduced.aligned(targets) / total), total,
                       math.log(total))
