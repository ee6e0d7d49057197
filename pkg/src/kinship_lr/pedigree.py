"""Pedigrees and lineage-marker (mtDNA / Y) evidence.

mtDNA passes from mother to child and Y from father to son, unchanged except
for mutation.  A marker network has one haplotype variable per individual who
carries the marker; founders (and anyone whose carrying parent is absent) take
the population frequencies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .diagnostics import Diagnostic
from .factors import DiscreteVariable, Factor, Network, log_evidence_likelihood
from .lr import likelihood_ratio, log_likelihood_ratio

MTDNA = "mtDNA"
Y = "Y"
MARKERS = (MTDNA, Y)
DEFAULT_MUTATION_RATE = 0.001


@dataclass(frozen=True)
class Individual:
    id: str
    sex: str
    mother: str | None = None
    father: str | None = None
    line: int = field(default=0, compare=False)

    @property
    def is_founder(self) -> bool:
        return self.mother is None and self.father is None


@dataclass(frozen=True)
class Pedigree:
    individuals: tuple[Individual, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "individuals", tuple(self.individuals))

    @property
    def ids(self) -> list[str]:
        return [i.id for i in self.individuals]

    def get(self, ind_id: str) -> Individual:
        for ind in self.individuals:
            if ind.id == ind_id:
                return ind
        raise KeyError(ind_id)

    def __contains__(self, ind_id: str) -> bool:
        return any(i.id == ind_id for i in self.individuals)

    @property
    def founders(self) -> list[str]:
        return [i.id for i in self.individuals if i.is_founder]


@dataclass(frozen=True)
class HaplotypePopulation:
    marker: str
    labels: tuple[str, ...]
    frequencies: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if self.marker not in MARKERS:
            raise ValueError(f"marker must be one of {MARKERS}, got {self.marker!r}")
        if len(self.labels) < 2 or len(set(self.labels)) != len(self.labels):
            raise ValueError("need at least 2 distinct haplotype labels")
        if len(self.frequencies) != len(self.labels):
            raise ValueError("one frequency per haplotype label")
        if any(f < 0 for f in self.frequencies) or abs(sum(self.frequencies) - 1.0) > 1e-9:
            raise ValueError("haplotype frequencies must be nonnegative and sum to 1")


@dataclass(frozen=True)
class MutationModel:
    rate: float = DEFAULT_MUTATION_RATE
    kind: str = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValueError(f"mutation rate {self.rate} outside [0, 1)")
        if self.kind != "uniform":
            raise ValueError(f"unsupported mutation kind {self.kind!r}")


@dataclass(frozen=True)
class DnaObservation:
    marker: str
    readings: Mapping[str, str]

    def __post_init__(self):
        if self.marker not in MARKERS:
            raise ValueError(f"marker must be one of {MARKERS}, got {self.marker!r}")


def validate_pedigree(ped: Pedigree) -> list[Diagnostic]:
    diags = []
    by_id: dict[str, Individual] = {}
    for ind in ped.individuals:
        if ind.id in by_id:
            diags.append(Diagnostic(ind.line, 1, "P_DUPLICATE_ID", f"individual {ind.id!r} listed twice"))
        by_id[ind.id] = ind
        if ind.sex not in ("F", "M"):
            diags.append(Diagnostic(ind.line, 1, "P_BAD_SEX", f"sex of {ind.id!r} must be F or M"))
    for ind in ped.individuals:
        for role, pid, sex in (("mother", ind.mother, "F"), ("father", ind.father, "M")):
            if pid is None:
                continue
            parent = by_id.get(pid)
            if parent is None:
                diags.append(Diagnostic(ind.line, 1, "P_UNKNOWN_PARENT", f"{role} {pid!r} of {ind.id!r} not listed"))
            elif parent.sex != sex:
                diags.append(Diagnostic(ind.line, 1, "P_SEX_MISMATCH",
                                        f"{role} {pid!r} of {ind.id!r} has sex {parent.sex}"))
    state: dict[str, int] = {}

    def visit(i: str) -> bool:
        state[i] = 1
        ind = by_id[i]
        for pid in (ind.mother, ind.father):
            if pid not in by_id:
                continue
            if state.get(pid) == 1 or (pid not in state and visit(pid)):
                return True
        state[i] = 2
        return False

    for i in by_id:
        if i not in state and visit(i):
            diags.append(Diagnostic(by_id[i].line, 1, "P_CYCLE", f"{i!r} is its own ancestor"))
            break
    return diags


def transmit_cpt(mu: float, k: int) -> np.ndarray:
    """Transmission matrix, rows indexed by parent haplotype, columns by child.

    The child keeps the parent's haplotype with probability ``1 - mu`` and
    otherwise moves to each of the other ``k - 1`` haplotypes equally.
    """
    if k < 2:
        raise ValueError("need at least 2 haplotypes")
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mutation rate {mu} outside [0, 1)")
    off = mu / (k - 1)
    m = np.full((k, k), off)
    np.fill_diagonal(m, 1.0 - mu)
    # put rounding residue on the diagonal so rows sum to 1 exactly
    m[np.diag_indices(k)] += 1.0 - m.sum(axis=1)
    return m


def _carrier_parent(ind: Individual, marker: str) -> str | None:
    return ind.mother if marker == MTDNA else ind.father


def marker_carriers(ped: Pedigree, marker: str) -> list[Individual]:
    if marker == MTDNA:
        return list(ped.individuals)
    return [i for i in ped.individuals if i.sex == "M"]


def build_marker_network(ped: Pedigree, pop: HaplotypePopulation, mut: MutationModel | None = None) -> Network:
    mut = mut or MutationModel()
    carriers = marker_carriers(ped, pop.marker)
    ids = {i.id for i in carriers}
    k = len(pop.labels)
    variables = [DiscreteVariable(i.id, pop.labels) for i in carriers]
    cpts = {}
    founder = np.array(pop.frequencies)
    move = transmit_cpt(mut.rate, k)
    for ind in carriers:
        parent = _carrier_parent(ind, pop.marker)
        if parent in ids:
            cpts[ind.id] = Factor((parent, ind.id), move)
        else:
            cpts[ind.id] = Factor((ind.id,), founder)
    return Network(variables, cpts)


def _evidence(net: Network, pop: HaplotypePopulation, obs: DnaObservation, ped: Pedigree) -> dict[str, int]:
    if obs.marker != pop.marker:
        raise ValueError(f"observation marker {obs.marker} does not match population marker {pop.marker}")
    ev = {}
    for ind_id, label in obs.readings.items():
        if ind_id not in ped:
            raise ValueError(f"observed individual {ind_id!r} is not in pedigree {ped.label!r}")
        if ind_id not in net.variables:
            raise ValueError(f"{ind_id!r} cannot carry a {obs.marker} haplotype")
        if label not in pop.labels:
            raise ValueError(f"unknown haplotype {label!r}")
        ev[ind_id] = pop.labels.index(label)
    return ev


def log_dna_likelihood(ped: Pedigree, pop: HaplotypePopulation, mut: MutationModel | None,
                       obs: DnaObservation) -> float:
    net = build_marker_network(ped, pop, mut)
    return log_evidence_likelihood(net, _evidence(net, pop, obs, ped))


def dna_likelihood(ped: Pedigree, pop: HaplotypePopulation, mut: MutationModel | None,
                   obs: DnaObservation) -> float:
    """P(observed haplotypes | pedigree); unobserved carriers are summed out."""
    return math.exp(log_dna_likelihood(ped, pop, mut, obs))


def dna_lr(obs: DnaObservation, pop: HaplotypePopulation, mut: MutationModel | None,
           ped_null: Pedigree, ped_alt: Pedigree) -> float:
    """LR of the alternative pedigree against the null; ``inf``/``nan`` flag degeneracy."""
    return log_likelihood_ratio(log_dna_likelihood(ped_alt, pop, mut, obs),
                                log_dna_likelihood(ped_null, pop, mut, obs))


@dataclass(frozen=True)
class PedigreePosterior:
    labels: tuple[str, ...]
    log_likelihoods: tuple[float, ...]
    prior: tuple[float, ...]
    posterior: tuple[float, ...] | None
    argmax: int | None

    @property
    def undefined(self) -> bool:
        return self.posterior is None

    @property
    def likelihoods(self) -> tuple[float, ...]:
        return tuple(math.exp(x) for x in self.log_likelihoods)


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def most_probable_pedigree(candidates: Sequence[Pedigree], pop, mut: MutationModel | None, obs,
                           prior: Sequence[float] | None = None) -> PedigreePosterior:
    """Posterior over candidate pedigrees given marker data.

    ``pop`` and ``obs`` may be single objects or equal-length sequences (one
    entry per marker); markers are treated as independent.  Ties for the
    argmax go to the earliest candidate.
    """
    if not candidates:
        raise ValueError("need at least one candidate pedigree")
    pops, obss = _as_list(pop), _as_list(obs)
    if len(pops) != len(obss):
        raise ValueError("one population per observation set")
    prior = [1.0] * len(candidates) if prior is None else [float(p) for p in prior]
    if len(prior) != len(candidates) or any(p < 0 for p in prior) or sum(prior) <= 0:
        raise ValueError("prior must be nonnegative, not all zero, one entry per candidate")
    loglik = [sum(log_dna_likelihood(ped, p, mut, o) for p, o in zip(pops, obss)) for ped in candidates]
    logpost = np.array([
        (lp + math.log(w)) if w > 0 else -math.inf for lp, w in zip(loglik, prior)
    ])
    labels = tuple(ped.label or f"candidate{i + 1}" for i, ped in enumerate(candidates))
    total = sum(prior)
    prior_t = tuple(w / total for w in prior)
    if np.all(logpost == -math.inf):
        return PedigreePosterior(labels, tuple(loglik), prior_t, None, None)
    top = float(logpost.max())
    weights = np.exp(logpost - top)
    post = weights / weights.sum()
    return PedigreePosterior(labels, tuple(loglik), prior_t, tuple(post.tolist()), int(np.argmax(post)))


def simulate_observation(ped: Pedigree, pop: HaplotypePopulation, mut: MutationModel | None,
                         rng: np.random.Generator, observed: Sequence[str] | None = None) -> DnaObservation:
    """Forward-sample haplotypes down the pedigree and return the observed ones."""
    mut = mut or MutationModel()
    net = build_marker_network(ped, pop, mut)
    draw: dict[str, int] = {}
    for vid in net.order:
        cpt = net.cpts[vid]
        row = cpt.values[tuple(draw[p] for p in cpt.scope[:-1])]
        draw[vid] = int(rng.choice(len(pop.labels), p=row))
    keep = list(net.variables) if observed is None else [i for i in observed if i in net.variables]
    return DnaObservation(pop.marker, {i: pop.labels[draw[i]] for i in keep})


def mirror(ped: Pedigree) -> Pedigree:
    """Swap sexes and the mother/father roles (maps the Y problem onto mtDNA)."""
    flip = {"F": "M", "M": "F"}
    return Pedigree(
        tuple(Individual(i.id, flip.get(i.sex, i.sex), i.father, i.mother, i.line) for i in ped.individuals),
        ped.label,
    )


def read_pedigree(path: str | Path) -> Pedigree:
    """Load ``id,sex,mother,father`` CSV; empty parent fields mean unlisted."""
    path = Path(path)
    label = path.stem
    rows: list[Individual] = []
    with open(path, newline="", encoding="utf-8") as fh:
        lines = list(enumerate(fh, start=1))
    data = []
    for lineno, text in lines:
        stripped = text.strip()
        if stripped.startswith("#"):
            if stripped[1:].strip().startswith("label="):
                label = stripped[1:].strip()[len("label="):].strip()
            continue
        if stripped:
            data.append((lineno, text))
    if not data:
        raise ValueError(f"{path}: empty pedigree file")
    reader = csv.reader([t for _, t in data])
    header = [h.strip() for h in next(reader)]
    if header != ["id", "sex", "mother", "father"]:
        raise ValueError(f"{path}: header must be id,sex,mother,father")
    for (lineno, _), rec in zip(data[1:], reader):
        rec = [r.strip() for r in rec] + [""] * (4 - len(rec))
        ind_id, sex, mother, father = rec[:4]
        rows.append(Individual(ind_id, sex, mother or None, father or None, lineno))
    return Pedigree(tuple(rows), label)


def write_pedigree(ped: Pedigree, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# label={ped.label}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "sex", "mother", "father"])
        for i in ped.individuals:
            w.writerow([i.id, i.sex, i.mother or "", i.father or ""])


__all__ = [
    "DEFAULT_MUTATION_RATE",
    "DnaObservation",
    "HaplotypePopulation",
    "Individual",
    "MTDNA",
    "MutationModel",
    "Pedigree",
    "PedigreePosterior",
    "Y",
    "build_marker_network",
    "dna_likelihood",
    "dna_lr",
    "likelihood_ratio",
    "log_dna_likelihood",
    "marker_carriers",
    "mirror",
    "most_probable_pedigree",
    "read_pedigree",
    "simulate_observation",
    "transmit_cpt",
    "validate_pedigree",
    "write_pedigree",
]
