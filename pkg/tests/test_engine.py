import math

import numpy as np
import pytest

from prophetbox import engine, model
from prophetbox.distributions import make_distribution, point_mass
from prophetbox.errors import (
    ComputationError,
    IllegalAction,
    RandomizedPolicyUnsupported,
    StateSpaceTooLarge,
    UsageError,
)
from prophetbox.model import Box, Instance, Objective, VariantSpec
from prophetbox.policies import Open, OpenAllPolicy, Policy, StopSelect, ThresholdPolicy, WeitzmanPolicy

MIN_ORDER = VariantSpec(Objective.MIN, False, True, True)
MIN_FIXED = VariantSpec(Objective.MIN, False, True, False)
MAX_COMMIT_FREE = VariantSpec(Objective.MAX, True, False, False)


class Scripted(Policy):
    name = "scripted"

    def __init__(self, instance, actions):
        super().__init__(instance)
        self.actions = actions

    def decide(self, state):
        return self.actions[len(state.opened)]


# --- referee ---------------------------------------------------------------------


def test_trace_examples():
    free_min = VariantSpec(Objective.MIN, False, False, False)
    d = make_distribution([(1, 0.3), (3, 0.3), (5, 0.4)])
    inst = Instance(free_min, (Box(0.0, d),) * 3)
    t = engine.run_trace(OpenAllPolicy(inst), inst, [3.0, 1.0, 5.0])
    assert (t.net, t.payments, t.forced) == (1.0, 0.0, True)

    tight = model.gen_tightness_instance(2)
    t = engine.run_trace(WeitzmanPolicy(tight), tight, [2.0, 0.0])
    assert (t.payments, t.selected_index, t.net) == (2.0, 1, 2.0)

    two = Instance(MAX_COMMIT_FREE, (Box(0.0, point_mass(1.0)), Box(0.0, make_distribution([(0, 0.5), (2, 0.5)]))))
    t = engine.run_trace(ThresholdPolicy(two, tau=1.5), two, [1.0, 2.0])
    assert t.actions == [Open(0), Open(1), StopSelect(1)] and t.net == 2.0


@pytest.mark.parametrize(
    "variant,actions,reason",
    [
        (MIN_FIXED, [StopSelect(0)], "before opening"),
        (MIN_FIXED, [Open(1)], "out of arrival order"),
        (MIN_ORDER, [Open(0), Open(0)], "not unopened"),
        (MIN_ORDER, [Open(0), StopSelect(2)], "never opened"),
        (VariantSpec(Objective.MAX, True, True, True), [Open(0), Open(1), StopSelect(0)], "last box"),
        (MIN_FIXED, ["jump"], "unknown action"),
    ],
)
def test_referee_rejects_illegal_actions(variant, actions, reason):
    d = make_distribution([(0, 0.5), (1, 0.5)])
    inst = Instance(variant, (Box(1.0, d),) * 3)
    with pytest.raises(IllegalAction, match=reason):
        engine.run_trace(Scripted(inst, actions), inst, [0.0, 1.0, 1.0])


def test_trace_payments_and_net_for_max():
    inst = model.gen_example_max_cost(4, order_selection=True, commitment=False)
    t = engine.run_trace(Scripted(inst, [Open(2), Open(0), StopSelect(2)]), inst, [0.0, 0.0, 4.0, 0.0])
    assert (t.payments, t.selected_value, t.net) == (2.0, 4.0, 2.0)


# --- exact evaluation ---------------------------------------------------------------


def test_exact_eval_examples():
    tight = model.gen_tightness_instance(2)
    assert engine.exact_eval(WeitzmanPolicy(tight), tight) == 2.0
    free_min = VariantSpec(Objective.MIN, False, False, True)
    inst = model.random_instance(np.random.default_rng(0), free_min, 4)
    assert engine.exact_eval(OpenAllPolicy(inst), inst) == pytest.approx(engine.expected_prophet(inst), rel=1e-12)


def test_exact_eval_refuses_randomized_and_huge():
    tight = model.gen_tightness_instance(3)
    with pytest.raises(RandomizedPolicyUnsupported):
        engine.exact_eval(engine.make_policy("ski-rental", tight), tight)
    free = model.gen_no_cost_instance(30)
    with pytest.raises(StateSpaceTooLarge):
        engine.exact_eval(OpenAllPolicy(free), free, limit=10_000)
    with pytest.raises(StateSpaceTooLarge):
        engine.exact_eval(engine.WeakProphetPolicy(model.gen_tightness_instance(30)), model.gen_tightness_instance(30))


def test_tree_walk_handles_huge_product_spaces():
    # 2^256 outcomes, but Weitzman's tree has only n + 1 leaves here
    inst = model.gen_example_min_orderselect(256)
    assert engine.exact_eval(WeitzmanPolicy(inst), inst, limit=1000) == pytest.approx(
        model.closed_form_example41(256).alg, rel=1e-9
    )


# --- dynamic programming ------------------------------------------------------------


def test_dp_examples():
    assert engine.dp_optimal_value(model.gen_tightness_instance(2)).value == 2.0
    assert engine.dp_optimal_value(model.gen_example_max_cost(4)).value == pytest.approx(-0.5, abs=1e-12)
    d = make_distribution([(1, 0.25), (5, 0.75)])
    for variant in model.all_variants():
        cost = 0.5 if variant.observation_cost else 0.0
        value = engine.dp_optimal_value(Instance(variant, (Box(cost, d),))).value
        assert value == pytest.approx(4.0 + cost if variant.is_min else 4.0 - cost)


def test_dp_tightness_prefers_opening():
    res = engine.dp_optimal_value(model.gen_tightness_instance(2))
    assert res.policy_table[(1, 2.0)] == ("open", 1)
    assert res.policy_table[(1, 0.0)] == ("stop",)


def test_dp_policy_reproduces_its_value():
    rng = np.random.default_rng(12)
    for variant in model.all_variants():
        inst = model.random_instance(rng, variant, 4, support=3)
        policy = engine.DPPolicy(inst)
        assert engine.exact_eval(policy, inst) == pytest.approx(policy.result.value, rel=1e-9, abs=1e-12)


def test_recall_never_hurts():
    rng = np.random.default_rng(13)
    for variant in model.all_variants():
        if variant.commitment:
            continue
        for _ in range(5):
            inst = model.random_instance(rng, variant, int(rng.integers(1, 6)), support=3)
            recall = engine.dp_optimal_value(inst).value
            commit = engine.dp_optimal_value(inst.with_variant(commitment=True)).value
            if variant.is_min:
                assert commit >= recall - 1e-9
            else:
                assert commit <= recall + 1e-9


def test_dp_matches_weitzman_on_random_instances():
    rng = np.random.default_rng(14)
    for _ in range(10):
        inst = model.random_instance(rng, MIN_ORDER, int(rng.integers(1, 6)))
        assert engine.exact_eval(WeitzmanPolicy(inst), inst) == pytest.approx(
            engine.dp_optimal_value(inst).value, rel=1e-9
        )


def test_dp_size_limits():
    with pytest.raises(StateSpaceTooLarge):
        engine.dp_optimal_value(model.gen_example_min_orderselect(16))
    with pytest.raises(StateSpaceTooLarge):
        engine.dp_optimal_value(model.gen_tightness_instance(26))


# --- Monte Carlo ------------------------------------------------------------------------


def test_single_trial_has_infinite_half_width():
    alg, orc = engine.monte_carlo("weitzman", model.gen_tightness_instance(3), trials=1, seed=4)
    assert alg.half_width == math.inf and orc.trials == 1


def test_open_all_equals_prophet_each_trial():
    inst = model.gen_no_cost_instance(20, Objective.MIN)
    alg, orc = engine.simulate_paired("open-all", inst, "prophet", 2000, seed=3)
    assert np.array_equal(alg, orc)
    assert engine.ratio_of_means(alg, orc)[0] == 1.0


def _mc_cases():
    rng = np.random.default_rng(15)
    cases = []
    for _ in range(5):
        cases.append(("weitzman", model.random_instance(rng, MIN_ORDER, 4)))
        cases.append(("threshold", model.random_instance(rng, MAX_COMMIT_FREE, 4)))
        cases.append(("ski-rental-deterministic", model.random_instance(rng, MIN_FIXED, 4)))
        cases.append(("dp-optimal", model.random_instance(rng, VariantSpec(Objective.MAX, True, True, False), 4)))
    cases += [
        ("weitzman", model.gen_tightness_instance(5)),
        ("weitzman", model.gen_example_min_orderselect(9)),
        ("dp-optimal", model.gen_example_max_cost(5)),
    ]
    return cases


@pytest.mark.parametrize("policy,inst", _mc_cases())
def test_monte_carlo_agrees_with_exact(policy, inst):
    alg, orc = engine.monte_carlo(policy, inst, trials=20_000, seed=17)
    p = engine.make_policy(policy, inst)
    exact_alg = p.result.value if isinstance(p, engine.DPPolicy) else engine.exact_eval(p, inst)
    assert abs(alg.mean - exact_alg) <= 4 * alg.half_width + 1e-12
    assert abs(orc.mean - engine.expected_prophet(inst)) <= 4 * orc.half_width + 1e-12


@pytest.mark.parametrize("policy,inst", _mc_cases())
def test_prophet_dominates_every_trial(policy, inst):
    alg, orc = engine.simulate_paired(policy, inst, "prophet", 5000, seed=2)
    assert engine.dominance_violations(inst, alg, orc) == 0


def test_randomized_ski_rental_dominated_by_prophet():
    inst = model.gen_tightness_instance(50)
    alg, orc = engine.simulate_paired("ski-rental", inst, "prophet", 5000, seed=2)
    assert engine.dominance_violations(inst, alg, orc) == 0


def test_determinism_across_chunks_and_workers():
    inst = model.gen_tightness_instance(40)
    base = engine.simulate_paired("ski-rental", inst, "prophet", 3000, seed=9)
    for chunk, workers in [(40 * 7, 1), (40 * 1000, 3), (40, 2)]:
        other = engine.simulate_paired("ski-rental", inst, "prophet", 3000, seed=9, chunk_elems=chunk, workers=workers)
        assert base[0].tobytes() == other[0].tobytes() and base[1].tobytes() == other[1].tobytes()
    first = engine.simulate_paired("ski-rental", inst, "prophet", 1000, seed=9)
    assert first[0].tobytes() == base[0][:1000].tobytes()


def test_different_seeds_differ():
    inst = model.gen_tightness_instance(40)
    a = engine.simulate_paired("weitzman", inst, None, 500, seed=1)[0]
    b = engine.simulate_paired("weitzman", inst, None, 500, seed=2)[0]
    assert not np.array_equal(a, b)


def test_oracle_must_be_deterministic():
    inst = model.gen_tightness_instance(4)
    with pytest.raises(UsageError):
        engine.simulate_paired("weitzman", inst, engine.make_policy("ski-rental", inst), 10)


def test_ratio_of_means_interval():
    rng = np.random.default_rng(0)
    orc = rng.uniform(1, 2, 10_000)
    alg = 1.5 * orc
    ratio, half = engine.ratio_of_means(alg, orc)
    assert ratio == pytest.approx(1.5) and half == pytest.approx(0.0, abs=1e-12)


def test_ski_rental_harness():
    est, opt, ratio = engine.ski_rental_harness([math.inf] + [4.0] * 20, [1.0] * 20, trials=20_000, seed=1)
    assert opt == 5.0 and ratio <= math.e / (math.e - 1) + 0.02
    est, opt, ratio = engine.ski_rental_harness([math.inf] + [4.0] * 20, [1.0] * 20, randomized=False)
    assert est.trials == 1 and ratio <= 2.0


# --- reports ------------------------------------------------------------------------


def test_ratio_report_rows():
    rows = engine.ratio_report("tightness", [10, 10**6], trials=500, seed=1)
    assert [r["n"] for r in rows] == [10, 10**6]
    assert rows[0]["alg_mc"] is not None and rows[1]["alg_mc"] is None
    assert rows[1]["ratio"] == pytest.approx(math.e / (math.e - 1), abs=1e-3)
    rows = engine.ratio_report("example32", [4, 100], trials=200)
    assert all(r["prophet_exact"] > 0 > r["alg_exact"] for r in rows)
    assert rows[0]["alg_mc"] is not None


def test_ratio_report_rejects_unknown_family():
    with pytest.raises(UsageError):
        engine.ratio_report("nope", [4])


def test_closed_form_disagreement_is_a_computation_error():
    with pytest.raises(ComputationError):
        engine._agree(1.0, 2.0, "check")
