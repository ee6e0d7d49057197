import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinship_lr.pedigree import (
    DnaObservation,
    HaplotypePopulation,
    Individual,
    MutationModel,
    Pedigree,
    build_marker_network,
    dna_likelihood,
    dna_lr,
    mirror,
    most_probable_pedigree,
    read_pedigree,
    simulate_observation,
    transmit_cpt,
    validate_pedigree,
    write_pedigree,
)

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "kinship_lr" / "examples"
POP = HaplotypePopulation("mtDNA", ("A", "B", "C"), (0.5, 0.3, 0.2))
# uniform frequencies are stationary under uniform mutation
FLAT = HaplotypePopulation("mtDNA", ("A", "B", "C"), (1 / 3, 1 / 3, 1 / 3))


def ped(*rows, label="p"):
    return Pedigree(tuple(Individual(*r) for r in rows), label)


MOTHER_SON = ped(("mother", "F", None, None), ("son", "M", "mother", None))
UNRELATED = ped(("mother", "F", None, None), ("son", "M", None, None))


def brute_force(pedigree, pop, mu, readings):
    """Sum over every haplotype assignment of carriers (no networks involved)."""
    carriers = [i for i in pedigree.individuals if pop.marker == "mtDNA" or i.sex == "M"]
    ids = {i.id for i in carriers}
    k = len(pop.labels)
    tx = np.full((k, k), mu / (k - 1))
    np.fill_diagonal(tx, 1 - mu)
    total = 0.0
    for assign in itertools.product(range(k), repeat=len(carriers)):
        h = {c.id: a for c, a in zip(carriers, assign)}
        if any(h[i] != pop.labels.index(lab) for i, lab in readings.items()):
            continue
        p = 1.0
        for c in carriers:
            parent = c.mother if pop.marker == "mtDNA" else c.father
            p *= tx[h[parent], h[c.id]] if parent in ids else pop.frequencies[h[c.id]]
        total += p
    return total


def test_transmit_cpt_rows():
    m = transmit_cpt(0.003, 4)
    assert m.shape == (4, 4)
    np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=0)
    assert m[0, 0] == pytest.approx(0.997)
    assert m[0, 1] == pytest.approx(0.001)
    np.testing.assert_array_equal(transmit_cpt(0.0, 3), np.eye(3))
    with pytest.raises(ValueError):
        transmit_cpt(1.0, 3)


def test_validation_codes():
    bad = ped(("a", "X", None, None), ("b", "F", "c", None), ("d", "F", None, "a"),
              ("d", "M", None, None))
    codes = sorted(d.code for d in validate_pedigree(bad))
    assert codes == ["P_BAD_SEX", "P_DUPLICATE_ID", "P_SEX_MISMATCH", "P_UNKNOWN_PARENT"]
    loop = ped(("a", "F", "b", None), ("b", "F", "a", None))
    assert [d.code for d in validate_pedigree(loop)] == ["P_CYCLE"]


def test_y_network_skips_females():
    p = ped(("dad", "M", None, None), ("mum", "F", None, None), ("girl", "F", "mum", "dad"),
            ("boy", "M", "mum", "dad"))
    net = build_marker_network(p, HaplotypePopulation("Y", ("r", "s"), (0.6, 0.4)))
    assert sorted(net.variables) == ["boy", "dad"]
    assert net.parents("boy") == ("dad",)


def test_mismatch_at_zero_mutation():
    obs = DnaObservation("mtDNA", {"mother": "A", "son": "B"})
    mut = MutationModel(0.0)
    assert dna_likelihood(MOTHER_SON, POP, mut, obs) == 0.0
    assert dna_likelihood(UNRELATED, POP, mut, obs) == pytest.approx(0.5 * 0.3, abs=1e-15)
    assert math.isinf(dna_lr(obs, POP, mut, MOTHER_SON, UNRELATED))


def test_match_likelihoods():
    obs = DnaObservation("mtDNA", {"mother": "A", "son": "A"})
    mut = MutationModel(0.001)
    assert dna_likelihood(MOTHER_SON, POP, mut, obs) == pytest.approx(0.5 * 0.999, abs=1e-15)
    assert dna_lr(obs, POP, mut, MOTHER_SON, UNRELATED) == pytest.approx(0.25 / (0.5 * 0.999))


def test_uninformative_data_give_lr_one():
    obs = DnaObservation("mtDNA", {"son": "C"})
    assert dna_lr(obs, FLAT, MutationModel(0.01), MOTHER_SON, UNRELATED) == pytest.approx(1.0, abs=1e-12)
    assert dna_lr(obs, POP, MutationModel(0.0), MOTHER_SON, UNRELATED) == pytest.approx(1.0, abs=1e-12)


FAMILY = read_pedigree(EXAMPLES / "romanov_family.csv")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.001, 0.05]))
def test_matches_brute_force(seed, mu):
    rng = np.random.default_rng(seed)
    small = ped(("gran", "F", None, None), ("mum", "F", "gran", None), ("kid", "M", "mum", None),
                ("aunt", "F", "gran", None), ("x", "F", None, None))
    ids = [i.id for i in small.individuals]
    keep = [i for i in ids if rng.random() < 0.6]
    readings = {i: POP.labels[int(rng.integers(3))] for i in keep}
    got = dna_likelihood(small, POP, MutationModel(mu), DnaObservation("mtDNA", readings))
    assert got == pytest.approx(brute_force(small, POP, mu, readings), abs=1e-12)


def test_marginal_consistency():
    # summing the likelihood over one individual's readings drops that individual
    mut = MutationModel(0.01)
    base = {"alexandra": "A", "olga": "B"}
    total = sum(dna_likelihood(FAMILY, POP, mut, DnaObservation("mtDNA", {**base, "tatiana": h}))
                for h in POP.labels)
    assert total == pytest.approx(dna_likelihood(FAMILY, POP, mut, DnaObservation("mtDNA", base)), abs=1e-15)


def test_mismatch_likelihood_increases_with_mutation_rate():
    obs = DnaObservation("mtDNA", {"mother": "A", "son": "B"})
    values = [dna_likelihood(MOTHER_SON, POP, MutationModel(mu), obs) for mu in (0.0, 1e-4, 1e-3, 1e-2, 0.1)]
    assert values == sorted(values)
    assert values[0] == 0.0


def test_y_is_mtdna_on_the_mirrored_pedigree():
    y_pop = HaplotypePopulation("Y", POP.labels, POP.frequencies)
    readings = {"nicholas": "A", "alexei": "B"}
    y = dna_likelihood(FAMILY, y_pop, MutationModel(0.02), DnaObservation("Y", readings))
    mt = dna_likelihood(mirror(FAMILY), POP, MutationModel(0.02), DnaObservation("mtDNA", readings))
    assert y == pytest.approx(mt, abs=1e-15)


def test_y_reading_on_female_is_rejected():
    y_pop = HaplotypePopulation("Y", ("r", "s"), (0.5, 0.5))
    with pytest.raises(ValueError):
        dna_likelihood(FAMILY, y_pop, None, DnaObservation("Y", {"olga": "r"}))


def test_population_validation():
    with pytest.raises(ValueError):
        HaplotypePopulation("mtDNA", ("A", "B"), (0.5, 0.6))
    with pytest.raises(ValueError):
        HaplotypePopulation("mtDNA", ("A", "A"), (0.5, 0.5))
    with pytest.raises(ValueError):
        HaplotypePopulation("X", ("A", "B"), (0.5, 0.5))


def test_pedigree_posterior_ordering_and_ties():
    obs = DnaObservation("mtDNA", {"son": "A"})
    res = most_probable_pedigree([UNRELATED, MOTHER_SON], POP, MutationModel(0.0), obs)
    # son alone is uninformative: a tie goes to the first candidate
    assert res.argmax == 0
    assert res.posterior == pytest.approx((0.5, 0.5))


def test_single_candidate_has_posterior_one():
    res = most_probable_pedigree([MOTHER_SON], POP, None, DnaObservation("mtDNA", {"son": "A"}))
    assert res.posterior == (1.0,)


def test_incompatible_candidate_gets_zero_and_all_zero_is_undefined():
    obs = DnaObservation("mtDNA", {"mother": "A", "son": "B"})
    res = most_probable_pedigree([MOTHER_SON, UNRELATED], POP, MutationModel(0.0), obs)
    assert res.posterior == (0.0, 1.0)
    assert res.argmax == 1
    none = most_probable_pedigree([MOTHER_SON], POP, MutationModel(0.0), obs)
    assert none.undefined and none.argmax is None


def test_simulation_is_seeded():
    a = simulate_observation(FAMILY, POP, None, np.random.default_rng(5))
    b = simulate_observation(FAMILY, POP, None, np.random.default_rng(5))
    assert a == b
    assert set(a.readings) == set(FAMILY.ids)


def test_pedigree_csv_round_trip(tmp_path):
    write_pedigree(FAMILY, tmp_path / "f.csv")
    again = read_pedigree(tmp_path / "f.csv")
    assert again.label == FAMILY.label
    assert [(i.id, i.sex, i.mother, i.father) for i in again.individuals] == \
        [(i.id, i.sex, i.mother, i.father) for i in FAMILY.individuals]


def test_bundled_pedigrees_validate():
    for name in ("romanov_family", "romanov_unrelated", "romanov_alt_mother", "mother_child", "unrelated_pair"):
        assert validate_pedigree(read_pedigree(EXAMPLES / f"{name}.csv")) == []
