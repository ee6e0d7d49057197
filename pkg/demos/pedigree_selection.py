"""Which family tree best explains the DNA?

Nine people, three candidate pedigrees. Haplotypes are simulated down the
true (family) pedigree, then each candidate is scored on mtDNA and Y data.
"""

import numpy as np

from kinship_lr.pedigree import MutationModel, most_probable_pedigree, simulate_observation
from kinship_lr.scenario import compile_scenario, load_scenario

compiled = compile_scenario(load_scenario("examples/romanov_toy.scn"))
peds, pops = compiled.pedigrees["candidates"], compiled.pedigrees["pops"]
mut = MutationModel(0.001)

wins = np.zeros(len(peds), dtype=int)
for seed in range(200):
    rng = np.random.default_rng(seed)
    obs = [simulate_observation(peds[0], pop, mut, rng) for pop in pops]
    wins[most_probable_pedigree(peds, pops, mut, obs).argmax] += 1

for ped, n in zip(peds, wins):
    print(f"{ped.label:<22} argmax in {n:3d} / 200 simulations")
