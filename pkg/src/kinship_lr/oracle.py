"""Random small networks and the elimination-versus-enumeration check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .factors import (
    DiscreteVariable,
    Factor,
    Network,
    enumerate_joint,
    evidence_likelihood,
    joint_query,
    query,
)

ORACLE_TOLERANCE = 1e-9


def network_to_dict(net: Network) -> dict:
    """Plain-data form of a network, loadable with :func:`network_from_dict`."""
    return {
        "variables": [
            {"id": v.id, "name": v.name, "states": list(v.states)} for v in net.variables.values()
        ],
        "cpts": {
            vid: {"scope": list(cpt.scope), "values": cpt.values.ravel().tolist()}
            for vid, cpt in net.cpts.items()
        },
    }


def network_from_dict(data: dict) -> Network:
    variables = [DiscreteVariable(v["id"], tuple(v["states"]), v.get("name", "")) for v in data["variables"]]
    cards = {v.id: v.cardinality for v in variables}
    cpts = {
        vid: Factor(c["scope"], c["values"], cards=[cards[u] for u in c["scope"]])
        for vid, c in data["cpts"].items()
    }
    return Network(variables, cpts)


def random_network(rng: np.random.Generator, n_vars: int | None = None, max_parents: int = 3,
                   max_joint: int = 2**20, zero_prob: float = 0.1) -> Network:
    """Random DAG with cardinalities 2-4 and random CPTs.

    Some CPT entries are zeroed (``zero_prob``) so impossible evidence occurs.
    The joint size is capped at ``max_joint`` so the enumeration oracle runs.
    """
    if n_vars is None:
        n_vars = int(rng.integers(1, 13))
    cards: list[int] = []
    for _ in range(n_vars):
        room = max_joint // max(1, math.prod(cards))
        hi = min(4, room)
        cards.append(int(rng.integers(2, hi + 1)) if hi >= 2 else 2)
    names = [f"v{i:02d}" for i in range(n_vars)]
    variables = [DiscreteVariable(n, tuple(f"s{k}" for k in range(c))) for n, c in zip(names, cards)]
    cpts = {}
    for i, var in enumerate(variables):
        k = int(rng.integers(0, min(i, max_parents) + 1))
        parents = sorted(rng.choice(i, size=k, replace=False).tolist()) if k else []
        scope = [names[p] for p in parents] + [var.id]
        shape = [cards[p] for p in parents] + [var.cardinality]
        table = rng.gamma(1.0, size=shape)
        table[rng.random(shape) < zero_prob] = 0.0
        # keep at least one positive entry per row
        rows = table.reshape(-1, var.cardinality)
        for row in rows:
            if row.sum() == 0.0:
                row[rng.integers(var.cardinality)] = 1.0
        table = rows / rows.sum(axis=1, keepdims=True)
        cpts[var.id] = Factor(scope, table.reshape(shape))
    return Network(variables, cpts)


def random_case(rng: np.random.Generator, **kwargs) -> tuple[Network, list[str], dict[str, int]]:
    """A random network with random targets and evidence (disjoint)."""
    net = random_network(rng, **kwargs)
    ids = list(net.variables)
    rng.shuffle(ids)
    n_ev = int(rng.integers(0, len(ids)))
    evidence = {v: int(rng.integers(net.variables[v].cardinality)) for v in ids[:n_ev]}
    rest = ids[n_ev:]
    n_t = int(rng.integers(1, min(3, len(rest)) + 1))
    targets = sorted(rest[:n_t])
    return net, targets, evidence


@dataclass
class OracleMismatch:
    network: Network
    targets: list[str]
    evidence: dict[str, int]
    detail: str

    def fixture(self) -> dict:
        return {
            "network": network_to_dict(self.network),
            "targets": self.targets,
            "evidence": self.evidence,
            "detail": self.detail,
        }


def check_case(net: Network, targets, evidence, tol: float = ORACLE_TOLERANCE) -> str | None:
    """Compare elimination with enumeration; returns a description on mismatch."""
    joint = enumerate_joint(net)
    ref = joint_query(joint, targets, evidence)
    got = query(net, targets, evidence)
    p_e = evidence_likelihood(net, evidence)
    if abs(p_e - ref.evidence_prob) > tol:
        return f"evidence_likelihood {p_e!r} != enumeration {ref.evidence_prob!r}"
    if abs(got.evidence_prob - ref.evidence_prob) > tol:
        return f"query evidence_prob {got.evidence_prob!r} != enumeration {ref.evidence_prob!r}"
    if ref.impossible or got.impossible:
        if ref.impossible != got.impossible:
            return "impossible-evidence status disagrees"
        return None
    diff = np.max(np.abs(got.posterior.aligned(targets) - ref.posterior.aligned(targets)))
    if diff > tol:
        return f"posterior differs by {diff:.3e}"
    if abs(got.posterior.total() - 1.0) > tol:
        return "posterior not normalized"
    return None


def run_oracle(seed: int, count: int) -> tuple[int, OracleMismatch | None]:
    """Check ``count`` random cases from ``seed``; returns (cases run, first mismatch)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    for i in range(count):
        net, targets, evidence = random_case(rng)
        problem = check_case(net, targets, evidence)
        if problem is not None:
            return i + 1, OracleMismatch(net, targets, evidence, problem)
    return count, None
