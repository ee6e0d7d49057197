"""kinship-lr: exact likelihood ratios for identification evidence.

Name-frequency evidence (Dirichlet-multinomial over name tables) and
mtDNA / Y-chromosome evidence over pedigrees are combined into overall
likelihood ratios, either by the product rule or through a joint network
assembled from object-oriented fragments (``.oobn`` files).

LRs are oriented P(E | H1) / P(E | H0), alternative on top.
"""

from .evidence import (
    CombinedResult,
    CountPrior,
    EvidenceItem,
    HypothesisPair,
    combine_lrs,
    network_lr,
    posterior_from_lr,
    selection_adjust,
    sensitivity_sweep,
)
from .factors import DiscreteVariable, Factor, Network, evidence_likelihood, query
from .lr import inverse, likelihood_ratio, lr_state
from .onomasticon import (
    DirichletPrior,
    FamilyConfiguration,
    IdentificationAssumption,
    NameTable,
    bundled_table,
    onomasticon_lr,
    read_name_table,
    sequence_likelihood,
)
from .oobn import flatten, parse, validate
from .pedigree import (
    DnaObservation,
    HaplotypePopulation,
    MutationModel,
    Pedigree,
    dna_likelihood,
    dna_lr,
    most_probable_pedigree,
    read_pedigree,
)
from .scenario import evaluate, load_scenario

__version__ = "0.1.0"

__all__ = [
    "CombinedResult", "CountPrior", "EvidenceItem", "HypothesisPair", "combine_lrs", "network_lr",
    "posterior_from_lr", "selection_adjust", "sensitivity_sweep",
    "DiscreteVariable", "Factor", "Network", "evidence_likelihood", "query",
    "inverse", "likelihood_ratio", "lr_state",
    "DirichletPrior", "FamilyConfiguration", "IdentificationAssumption", "NameTable", "bundled_table",
    "onomasticon_lr", "read_name_table", "sequence_likelihood",
    "flatten", "parse", "validate",
    "DnaObservation", "HaplotypePopulation", "MutationModel", "Pedigree", "dna_likelihood", "dna_lr",
    "most_probable_pedigree", "read_pedigree",
    "evaluate", "load_scenario",
]
