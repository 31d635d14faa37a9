import math

import numpy as np
import pytest

from prophetbox import engine, model
from prophetbox.errors import NotPerfectSquare, UsageError
from prophetbox.model import Box, Instance, Objective, VariantSpec
from prophetbox.distributions import make_distribution
from prophetbox.oracles import expected_prophet_enumerated

E_RATIO = math.e / (math.e - 1)


def test_variant_cells_are_distinct():
    cells = list(model.all_variants())
    assert len(cells) == 16 and len(set(cells)) == 16


def test_instance_rules():
    d = make_distribution([(1, 1.0)])
    free = VariantSpec(Objective.MAX, False, False, False)
    with pytest.raises(UsageError):
        Instance(free, (Box(1.0, d),))
    with pytest.raises(UsageError):
        Instance(free, ())
    with pytest.raises(UsageError):
        Box(-1.0, d)


# --- generators ----------------------------------------------------------------


def test_max_cost_family():
    inst = model.gen_example_max_cost(4)
    assert inst.n == 4 and inst.costs == (1.0,) * 4
    assert inst.dists[0].pairs == [(0.0, 7 / 8), (4.0, 1 / 8)]
    assert inst.variant == VariantSpec(Objective.MAX, True, True, False)
    assert model.gen_example_max_cost(2).dists[0].probs[1] == pytest.approx(2**-1.5)
    with pytest.raises(UsageError):
        model.gen_example_max_cost(1)


def test_min_orderselect_family():
    inst = model.gen_example_min_orderselect(4)
    assert inst.dists[0].pairs == [(0.0, 0.5), (4.0, 0.5)] and inst.n == 4
    assert model.gen_example_min_orderselect(16).dists[0].pairs == [(0.0, 0.25), (16.0, 0.75)]
    assert inst.variant == VariantSpec(Objective.MIN, False, True, True)
    with pytest.raises(NotPerfectSquare):
        model.gen_example_min_orderselect(5)


def test_tightness_family():
    inst = model.gen_tightness_instance(2)
    assert inst.dists[0].pairs == [(0.0, 0.5), (2.0, 0.5)] and inst.costs == (1.0, 1.0)
    assert model.gen_tightness_instance(10).dists[0].pairs == [(0.0, 0.1), (10.0, 0.9)]
    with pytest.raises(UsageError):
        model.gen_tightness_instance(1)


# --- geometric sums --------------------------------------------------------------


def test_geom_examples():
    assert model.geom_weighted_sum(3, 0.0) == 1.0
    assert model.geom_weighted_sum(4, 0.5) == pytest.approx(3.25, rel=1e-15)
    assert model.geom_weighted_sum(2, 0.9) == pytest.approx(2.8, rel=1e-15)
    assert model.geom_tail(0, 0.5) == 2.0
    assert model.geom_tail(2, 0.5) == 0.5
    assert model.geom_tail(5, 0.0) == 0.0


def test_geom_against_direct_sums():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        k = int(rng.integers(1, 51))
        q = float(rng.uniform(0, 0.999))
        direct = math.fsum(i * q ** (i - 1) for i in range(1, k + 1))
        assert model.geom_weighted_sum(k, q) == pytest.approx(direct, rel=1e-12)
        terms = int(60 / (1 - q)) + 100  # q**terms < 1e-26
        tail = math.fsum(np.power(q, np.arange(k, k + terms, dtype=float)).tolist())
        assert model.geom_tail(k, q) == pytest.approx(tail, rel=1e-12, abs=1e-300)


# --- closed forms ----------------------------------------------------------------


def test_example32_frozen():
    r = model.closed_form_example32(4)
    assert r.prophet == pytest.approx(0.103271484375, rel=1e-12)
    assert r.alg == -0.5
    big = model.closed_form_example32(10**6)
    assert big.prophet > 0 > big.alg
    assert big.extras["prophet_orderselect"] > 0


def test_example32_prophets_match_enumeration():
    for order in (False, True):
        inst = model.gen_example_max_cost(5, order_selection=order)
        key = "prophet_orderselect" if order else None
        closed = model.closed_form_example32(5)
        want = closed.extras[key] if key else closed.prophet
        assert expected_prophet_enumerated(inst) == pytest.approx(want, rel=1e-12)


def test_example41_frozen():
    r = model.closed_form_example41(4)
    assert r.prophet == 1.25 and r.alg == 2.125
    big = model.closed_form_example41(10**4)
    assert big.alg == pytest.approx(100.0, abs=1e-6)
    assert big.prophet == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(NotPerfectSquare):
        model.closed_form_example41(8)


@pytest.mark.parametrize("n", [4, 16, 64, 256])
def test_example41_against_exact_evaluation(n):
    inst = model.gen_example_min_orderselect(n)
    closed = model.closed_form_example41(n)
    assert engine.exact_eval(engine.WeitzmanPolicy(inst), inst) == pytest.approx(closed.alg, rel=1e-9)
    assert engine.expected_prophet(inst) == pytest.approx(closed.prophet, rel=1e-9)


def test_tightness_frozen():
    r = model.closed_form_tightness(2)
    assert r.prophet == 1.75 and r.alg == 2.0
    assert r.extras["weak_prophet"] == 1.75
    assert r.ratio == pytest.approx(8 / 7, rel=1e-15)
    assert model.closed_form_tightness(10**6).ratio == pytest.approx(E_RATIO, abs=1e-3)


@pytest.mark.parametrize("n", range(2, 13))
def test_tightness_prophet_against_enumeration(n):
    inst = model.gen_tightness_instance(n)
    closed = model.closed_form_tightness(n)
    assert closed.extras["weitzman"] == n
    assert expected_prophet_enumerated(inst) == pytest.approx(closed.prophet, rel=1e-12)


def test_tightness_ratio_increases_toward_limit():
    sweep = [2] + [10**k for k in range(1, 7)]
    ratios = [model.closed_form_tightness(n).ratio for n in sweep]
    assert all(1.1 <= r <= E_RATIO for r in ratios)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_prophet_half_closed_form():
    inst = model.gen_prophet_half(10)
    closed = model.closed_form_prophet_half(10)
    assert engine.expected_prophet(inst) == pytest.approx(closed.prophet, rel=1e-12)
    assert engine.exact_eval(engine.ThresholdPolicy(inst), inst) == closed.alg
