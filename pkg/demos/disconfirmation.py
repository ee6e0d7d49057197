"""A single mismatch can exclude a relationship; a match cannot prove one.

Mother and son are typed for mtDNA. Under the mother-son pedigree with no
mutation, different haplotypes are impossible, so the null likelihood is 0
and the LR is infinite. A matching pair only moves the LR by a factor set
by the haplotype frequency.
"""

from pathlib import Path

import kinship_lr
from kinship_lr import DnaObservation, HaplotypePopulation, MutationModel, dna_likelihood, dna_lr, read_pedigree
from kinship_lr.lr import lr_to_json

examples = Path(kinship_lr.__file__).parent / "examples"
mother_son = read_pedigree(examples / "mother_child.csv")
unrelated = read_pedigree(examples / "unrelated_pair.csv")
pop = HaplotypePopulation("mtDNA", ("A", "B"), (0.6, 0.4))

for mu in (0.0, 0.001, 0.01):
    mut = MutationModel(mu)
    for son in ("A", "B"):
        obs = DnaObservation("mtDNA", {"mother": "A", "son": son})
        null = dna_likelihood(mother_son, pop, mut, obs)
        alt = dna_likelihood(unrelated, pop, mut, obs)
        lr = lr_to_json(dna_lr(obs, pop, mut, mother_son, unrelated))
        lr = f"{lr:.4g}" if isinstance(lr, float) else lr
        print(f"mu={mu:<6} mother=A son={son}  P(E|mother-son)={null:.6f}  P(E|unrelated)={alt:.4f}  LR={lr}")
