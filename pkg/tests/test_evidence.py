import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinship_lr.evidence import (
    CountPrior,
    EvidenceItem,
    HypothesisPair,
    combine_lrs,
    get_path,
    integrate_over_count,
    network_items,
    network_lr,
    posterior_from_lr,
    selection_adjust,
    sensitivity_sweep,
    set_path,
)
from kinship_lr.factors import evidence_likelihood
from kinship_lr.lr import INFINITE, UNDEFINED, inverse, likelihood_ratio, lr_state, lr_to_json
from kinship_lr.oobn import flatten, parse

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "kinship_lr" / "examples"


def items(*lrs):
    return [EvidenceItem(f"e{i}", "direct", lr) for i, lr in enumerate(lrs)]


def test_likelihood_ratio_flags():
    assert likelihood_ratio(0.3, 0.6) == 0.5
    assert likelihood_ratio(0.3, 0.0) == math.inf
    assert math.isnan(likelihood_ratio(0.0, 0.0))
    assert likelihood_ratio(0.0, 0.5) == 0.0
    assert [lr_state(x) for x in (0.5, math.inf, math.nan)] == ["finite", INFINITE, UNDEFINED]
    assert lr_to_json(math.inf) == "+infinity"
    assert inverse(0.0) == math.inf and inverse(math.inf) == 0.0 and inverse(4.0) == 0.25


def test_product_of_two_items():
    assert combine_lrs(items(2.0, 0.25)).overall_lr == 0.5


def test_degenerate_products():
    assert combine_lrs(items(3.0, math.inf)).overall_lr == math.inf
    assert math.isnan(combine_lrs(items(0.0, math.inf)).overall_lr)
    assert math.isnan(combine_lrs(items(math.nan, 2.0)).overall_lr)
    assert combine_lrs(items()).overall_lr == 1.0


def test_product_survives_intermediate_overflow():
    lrs = [1e300, 1e300, 1e-300, 1e-300, 5.0]
    assert combine_lrs(items(*lrs)).overall_lr == pytest.approx(5.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=8), st.randoms(use_true_random=False))
def test_product_is_order_free(lrs, rnd):
    a = combine_lrs(items(*lrs)).overall_lr
    rnd.shuffle(lrs)
    assert combine_lrs(items(*lrs)).overall_lr == pytest.approx(a, rel=1e-12)


def test_posterior_hand_values():
    hyp = HypothesisPair(prior_odds=0.25)
    odds, prob = posterior_from_lr(hyp, 8.0)
    assert odds == 2.0 and prob == pytest.approx(2 / 3)
    assert posterior_from_lr(hyp, math.inf) == (math.inf, 1.0)
    with pytest.raises(ValueError):
        HypothesisPair(prior_odds=0.0)


def test_selection_closed_form():
    assert selection_adjust(0.001, 1000) == pytest.approx(0.632305, abs=1e-6)
    assert selection_adjust(0.5, 1) == 0.5
    assert selection_adjust(0.0, 10) == 0.0
    assert selection_adjust(1.0, 3) == 1.0
    assert selection_adjust(1e-15, 10) == pytest.approx(1e-14, rel=1e-9)
    with pytest.raises(ValueError):
        selection_adjust(0.1, 0)
    with pytest.raises(ValueError):
        selection_adjust(1.2, 3)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(1, 500))
def test_selection_is_monotone_in_trials(p, t):
    assert selection_adjust(p, t) <= selection_adjust(p, t + 1) + 1e-15
    assert p - 1e-15 <= selection_adjust(p, t) <= 1.0


def test_count_priors():
    assert CountPrior("T", "point", value=7).expected() == 7
    u = CountPrior("T", "uniform-integer-range", lo=2, hi=4)
    assert u.expected() == pytest.approx(3.0)
    pois = CountPrior("T", "poisson", mean=1100)
    n, w = pois.support()
    assert w.sum() == pytest.approx(1.0)
    assert n.min() >= 1
    assert pois.expected() == pytest.approx(1100, rel=1e-6)
    with pytest.raises(ValueError):
        CountPrior("T", "uniform-integer-range", lo=5, hi=2)
    with pytest.raises(ValueError):
        CountPrior("T", "gamma", mean=3)


def test_integrate_selection_over_uniform_count():
    prior = CountPrior("T", "uniform-integer-range", lo=1, hi=2)
    got = integrate_over_count(prior, lambda t: selection_adjust(0.5, t))
    assert got == pytest.approx((0.5 + 0.75) / 2)


def test_network_lr_two_witnesses():
    net = flatten(parse((EXAMPLES / "two_witnesses.oobn").read_text()))
    # P(favours_h1 | h1) = 0.8*0.9 + 0.2*0.5, P(favours_h1 | h0) = 0.8*0.1 + 0.2*0.5
    one = network_lr(net, "hypothesis", "h0", "h1", {"w1.report": "favours_h1"})
    assert one == pytest.approx(0.82 / 0.18, abs=1e-12)
    both = network_lr(net, "hypothesis", "h0", "h1", {"w1.report": 1, "w2.report": 1})
    assert both == pytest.approx((0.82 / 0.18) ** 2, abs=1e-9)
    with pytest.raises(ValueError):
        network_lr(net, "hypothesis", "h0", "h1", {"hypothesis": 0})


def test_shared_parent_product_rule_only_when_clamped():
    net = flatten(parse((EXAMPLES / "shared_frequency.oobn").read_text()))
    # there is no hypothesis node here, so use the shared source as one
    its = network_items(net, "source", "col_a", "col_b", {"a": {"first.name": "Mary"}, "b": {"second.name": "Mary"}})
    joint = network_lr(net, "source", "col_a", "col_b", {"first.name": "Mary", "second.name": "Mary"})
    assert combine_lrs(its).overall_lr == pytest.approx(joint, abs=1e-12)
    # clamping the shared node makes them independent; marginalising it does not
    p1 = evidence_likelihood(net, {"first.name": "Mary"})
    p12 = evidence_likelihood(net, {"first.name": "Mary", "second.name": "Mary"})
    assert abs(p12 - p1 * p1) > 1e-4


def test_paths():
    doc = {"a": {"b": [10, {"c": 3}]}}
    assert get_path(doc, "a.b.1.c") == 3
    set_path(doc, "a.b.0", 11)
    assert doc["a"]["b"][0] == 11
    with pytest.raises(KeyError):
        get_path(doc, "a.x")
    with pytest.raises(KeyError):
        set_path(doc, "a.b.1.zz", 1)


def test_sweep_rows_in_lexicographic_order():
    base = {"x": 0, "y": 0}
    rows = sensitivity_sweep(base, [("x", [1, 2]), ("y", [10, 20, 30])], lambda s: s["x"] * s["y"], workers=3)
    assert [r.indices for r in rows] == [(i, j) for i in range(2) for j in range(3)]
    assert [r.result for r in rows] == [10, 20, 30, 20, 40, 60]
    assert base == {"x": 0, "y": 0}
    with pytest.raises(ValueError):
        sensitivity_sweep(base, [], lambda s: 0)
    with pytest.raises(KeyError):
        sensitivity_sweep(base, [("z", [1])], lambda s: 0)


def test_selection_monte_carlo_small():
    rng = np.random.default_rng(11)
    hits = (rng.random((20000, 20)) < 0.05).any(axis=1).mean()
    exact = selection_adjust(0.05, 20)
    se = math.sqrt(exact * (1 - exact) / 20000)
    assert abs(hits - exact) < 3 * se
