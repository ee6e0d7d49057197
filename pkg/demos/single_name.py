"""How much does one common name tell us?

An ossuary inscribed "Mary" is compared under two hypotheses: the tomb
belongs to a named family whose mother was certainly called Mary (null),
or it belongs to an ordinary family (alternative). The LR is the chance
an ordinary woman is called Mary. With little trust in the table the
estimate is pulled toward the raw counts; with strong trust it settles
on the table value 0.242.
"""

from kinship_lr import DirichletPrior, FamilyConfiguration, IdentificationAssumption, bundled_table, onomasticon_lr
from kinship_lr.onomasticon import Member, NameModel

table = bundled_table("ilan_nonossuary_female")
family = FamilyConfiguration((Member("mother", "F", "Mary"),), (), {})
nt = [IdentificationAssumption("mother", "Mary")]

print(f"{'prior total':>12}  {'LR (alt/null)':>14}")
for total in (1, 10, 100, 1e3, 1e6, 1e9):
    model = NameModel(table, DirichletPrior.from_frequencies(table, total))
    print(f"{total:>12g}  {onomasticon_lr(family, nt, {'F': model}):>14.6f}")

uniform = NameModel(table, DirichletPrior.uniform(table.categories, 1.0))
print(f"\nuniform alpha=1 prior plus counts: {onomasticon_lr(family, nt, {'F': uniform}):.6f} (= 78/328)")
