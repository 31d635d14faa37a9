"""Referee, exact evaluation, backward-induction optimum and Monte Carlo."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import model
from .distributions import sample_array
from .errors import (
    ComputationError,
    IllegalAction,
    RandomizedPolicyUnsupported,
    StateSpaceTooLarge,
    UsageError,
)
from .model import Instance
from .oracles import (
    ENUMERATION_LIMIT,
    WeakProphetPolicy,
    db_ski_offline_opt,
    enumerate_realizations,
    expected_prophet,
    prophet_batch,
    prophet_payoff,
)
from .policies import (
    BreakEvenPolicy,
    Open,
    OpenAllPolicy,
    Policy,
    PolicyState,
    SkiRentalPolicy,
    StopSelect,
    ThresholdPolicy,
    WeitzmanPolicy,
    db_ski_rental_costs,
)

TIE_TOL = 1e-12
DP_MAX_FIXED = 25
DP_MAX_ORDER = 12
Z95 = 1.959963984540054


# --- referee -----------------------------------------------------------------


@dataclass
class Trace:
    actions: list
    payments: float
    selected_index: int
    selected_value: float
    net: float
    forced: bool = False


def forced_selection(state: PolicyState) -> int:
    if state.variant.commitment:
        return state.last()[0]
    return state.best()[0]


def _check_action(state: PolicyState, action, step: int):
    if isinstance(action, Open):
        if action.index not in state.remaining:
            raise IllegalAction(step, f"box {action.index} is not unopened")
        if not state.variant.order_selection and action.index != state.next_in_order():
            raise IllegalAction(step, f"box {action.index} opened out of arrival order")
    elif isinstance(action, StopSelect):
        if not state.opened:
            raise IllegalAction(step, "cannot select before opening a box")
        opened = [i for i, _ in state.opened]
        if action.index not in opened:
            raise IllegalAction(step, f"box {action.index} was never opened")
        if state.variant.commitment and action.index != opened[-1]:
            raise IllegalAction(step, "commitment allows selecting only the last box opened")
    else:
        raise IllegalAction(step, f"unknown action {action!r}")


def _net(state: PolicyState, value: float, payments: float) -> float:
    return value + payments if state.variant.is_min else value - payments


def run_trace(policy: Policy, instance: Instance, realization, u: float | None = None) -> Trace:
    """Step ``policy`` against one realization, enforcing every rule of the variant."""
    if len(realization) != instance.n:
        raise UsageError("realization length does not match the instance")
    policy.start_trial(u=u, realization=realization)
    state = PolicyState.initial(instance)
    actions = []
    payments = 0.0
    step = 0
    while True:
        if not state.remaining:
            index = forced_selection(state)
            actions.append(StopSelect(index))
            value = dict(state.opened)[index]
            return Trace(actions, payments, index, value, _net(state, value, payments), forced=True)
        action = policy.decide(state)
        _check_action(state, action, step)
        actions.append(action)
        if isinstance(action, StopSelect):
            value = dict(state.opened)[action.index]
            return Trace(actions, payments, action.index, value, _net(state, value, payments))
        payments += instance.costs[action.index]
        state = state.after_open(action.index, realization[action.index])
        step += 1


def exact_eval(policy: Policy, instance: Instance, limit: int = ENUMERATION_LIMIT) -> float:
    """Exact expected objective of a deterministic policy.

    Walks the policy's decision tree, branching only on boxes it opens, so
    the cost is the number of reachable leaves rather than the full product
    space.  Policies that peek at the realization fall back to full
    enumeration.
    """
    if policy.randomized:
        raise RandomizedPolicyUnsupported(f"{policy.name} is randomized; use monte_carlo")
    if policy.clairvoyant:
        return math.fsum(p * run_trace(policy, instance, vals).net for p, vals in enumerate_realizations(instance, limit))
    policy.start_trial()
    terms = []
    stack = [(1.0, PolicyState.initial(instance), 0.0, 0)]
    while stack:
        prob, state, payments, step = stack.pop()
        if not state.remaining:
            index = forced_selection(state)
            terms.append(prob * _net(state, dict(state.opened)[index], payments))
            continue
        action = policy.decide(state)
        _check_action(state, action, step)
        if isinstance(action, StopSelect):
            terms.append(prob * _net(state, dict(state.opened)[action.index], payments))
            if len(terms) > limit:
                raise StateSpaceTooLarge(f"decision tree exceeds {limit} leaves")
            continue
        box = instance.boxes[action.index]
        paid = payments + box.cost
        for value, p in box.dist.pairs:
            stack.append((prob * p, state.after_open(action.index, value), paid, step + 1))
        if len(stack) + len(terms) > limit:
            raise StateSpaceTooLarge(f"decision tree exceeds {limit} nodes")
    return math.fsum(terms)


# --- dynamic programming -----------------------------------------------------


@dataclass
class DPResult:
    value: float
    policy_table: dict = field(repr=False)
    order_selection: bool = False


def _expect(pairs, fn) -> float:
    return math.fsum(p * fn(v) for v, p in pairs)


def dp_optimal_value(instance: Instance) -> DPResult:
    """Optimal online expected objective by backward induction.

    Fixed order: state (boxes opened, key value); order selection: state
    (unopened set as a bitmask, key value).  The key value is the best value
    seen, or the last value under commitment; ``None`` before the first
    opening.  Exact ties between opening and stopping go to opening.
    """
    variant = instance.variant
    n = instance.n
    if variant.order_selection and n > DP_MAX_ORDER:
        raise StateSpaceTooLarge(f"order-selection DP supports n <= {DP_MAX_ORDER}")
    if not variant.order_selection and n > DP_MAX_FIXED:
        raise StateSpaceTooLarge(f"fixed-order DP supports n <= {DP_MAX_FIXED}")
    is_min = variant.is_min
    sign = 1.0 if is_min else -1.0  # work in cost units: minimize sign * objective
    costs = instance.costs
    pairs = [b.dist.pairs for b in instance.boxes]

    if variant.commitment:
        def update(key, x):
            return x
    elif is_min:
        def update(key, x):
            return x if key is None or x < key else key
    else:
        def update(key, x):
            return x if key is None or x > key else key

    memo: dict = {}
    table: dict = {}

    def choose(state, stop_cost, options):
        # options: list of (box, cost-to-go); lowest index wins exact ties
        best_box, best = None, math.inf
        for box, val in options:
            if val < best:
                best_box, best = box, val
        if stop_cost is not None and stop_cost < best - TIE_TOL * max(1.0, abs(stop_cost)):
            table[state] = ("stop",)
            return stop_cost
        table[state] = ("open", best_box)
        return best

    if variant.order_selection:
        def solve(mask, key):
            state = (mask, key)
            if state in memo:
                return memo[state]
            if mask == 0:
                res = sign * key
                table[state] = ("stop",)
            else:
                options = []
                for i in range(n):
                    if mask >> i & 1:
                        rest = mask & ~(1 << i)
                        val = costs[i] + _expect(pairs[i], lambda x, rest=rest: solve(rest, update(key, x)))
                        options.append((i, val))
                res = choose(state, None if key is None else sign * key, options)
            memo[state] = res
            return res

        root = solve((1 << n) - 1, None)
    else:
        def solve(t, key):
            state = (t, key)
            if state in memo:
                return memo[state]
            if t == n:
                res = sign * key
                table[state] = ("stop",)
            else:
                val = costs[t] + _expect(pairs[t], lambda x: solve(t + 1, update(key, x)))
                res = choose(state, None if key is None else sign * key, [(t, val)])
            memo[state] = res
            return res

        root = solve(0, None)
    return DPResult(sign * root, table, variant.order_selection)


class DPPolicy(Policy):
    """Plays the action table of :func:`dp_optimal_value`."""

    name = "dp-optimal"

    def __init__(self, instance, result: DPResult | None = None):
        super().__init__(instance)
        self.result = result or dp_optimal_value(instance)

    def _key(self, state):
        if not state.opened:
            return None
        return state.last()[1] if state.variant.commitment else state.best()[1]

    def decide(self, state):
        if self.result.order_selection:
            mask = sum(1 << i for i in state.remaining)
            entry = self.result.policy_table[(mask, self._key(state))]
        else:
            entry = self.result.policy_table[(len(state.opened), self._key(state))]
        if entry[0] == "open":
            return Open(entry[1])
        return StopSelect(forced_selection(state))


POLICIES = {
    "weitzman": WeitzmanPolicy,
    "ski-rental": SkiRentalPolicy,
    "ski-rental-deterministic": BreakEvenPolicy,
    "threshold": ThresholdPolicy,
    "open-all": OpenAllPolicy,
    "dp-optimal": DPPolicy,
}

ORACLES = ("prophet", "weak-prophet", "dp-optimal")


def make_policy(name: str, instance: Instance) -> Policy:
    try:
        cls = POLICIES[name]
    except KeyError:
        raise UsageError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
    return cls(instance)


class ProphetOracle(Policy):
    """The full-information prophet as an evaluator (no actions, payoff only)."""

    name = "prophet"
    clairvoyant = True

    def payoff(self, realization) -> float:
        return prophet_payoff(self.instance.variant, realization, self.instance.costs)

    def batch_net(self, values, uniforms=None):
        return prophet_batch(self.instance, values)


def make_oracle(name: str, instance: Instance) -> Policy:
    if name == "prophet":
        return ProphetOracle(instance)
    if name == "weak-prophet":
        return WeakProphetPolicy(instance)
    if name == "dp-optimal":
        return DPPolicy(instance)
    raise UsageError(f"unknown oracle {name!r}; choose from {list(ORACLES)}")


def exact_oracle_value(oracle: Policy | str, instance: Instance) -> float:
    if isinstance(oracle, str):
        oracle = make_oracle(oracle, instance)
    if isinstance(oracle, ProphetOracle):
        return expected_prophet(instance)
    if isinstance(oracle, DPPolicy):
        return oracle.result.value
    return exact_eval(oracle, instance)


# --- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width: float  # 95% normal approximation
    trials: int
    seed: int

    @property
    def stderr(self) -> float:
        return self.half_width / Z95


def estimate_from(samples: np.ndarray, seed: int) -> Estimate:
    trials = len(samples)
    if trials < 1:
        raise ValueError("need at least one trial")
    mean = math.fsum(samples.tolist()) / trials
    if trials == 1:
        return Estimate(mean, math.inf, 1, seed)
    sd = float(np.std(samples, ddof=1))
    return Estimate(mean, Z95 * sd / math.sqrt(trials), trials, seed)


def trial_uniforms(seed: int, trial: int, n: int, stream: int = 0) -> np.ndarray:
    """Counter-based substream for one trial: depends only on (seed, stream, trial)."""
    bitgen = np.random.Philox(key=seed, counter=[0, 0, stream, trial])
    return np.random.Generator(bitgen).random(n)


def sample_realizations(instance: Instance, seed: int, start: int, stop: int, with_policy_draws: bool = False):
    """Values for trials [start, stop) (rows) and, optionally, one policy draw per trial."""
    n = instance.n
    u = np.empty((stop - start, n))
    for row, trial in enumerate(range(start, stop)):
        u[row] = trial_uniforms(seed, trial, n)
    groups = instance.dist_groups
    if len(groups) == 1:
        values = sample_array(instance.dists[0], u)
    else:
        values = np.empty_like(u)
        for dist, cols in groups.items():
            values[:, cols] = sample_array(dist, u[:, cols])
    draws = None
    if with_policy_draws:
        draws = np.array([trial_uniforms(seed, t, 1, stream=1)[0] for t in range(start, stop)])
    return values, draws


def _evaluate(evaluator: Policy, instance: Instance, values, draws, use_batch: bool) -> np.ndarray:
    if use_batch and evaluator.batch_net is not None:
        return np.asarray(evaluator.batch_net(values, draws), dtype=float)
    if isinstance(evaluator, ProphetOracle):
        return np.array([evaluator.payoff(row) for row in values.tolist()])
    out = np.empty(len(values))
    for r, row in enumerate(values.tolist()):
        u = None if draws is None else float(draws[r])
        out[r] = run_trace(evaluator, instance, row, u=u).net
    return out


def _as_evaluator(obj, instance, factory):
    if obj is None:
        return None
    if isinstance(obj, str):
        return factory(obj, instance)
    return obj


def simulate_paired(
    policy,
    instance: Instance,
    oracle="prophet",
    trials: int = 1000,
    seed: int = 0,
    *,
    use_batch: bool = True,
    workers: int = 1,
    chunk_elems: int = 1 << 21,
):
    """Per-trial objectives of policy and oracle on common realizations.

    Trial t always sees the same values whatever the chunking or the number
    of workers; the returned arrays are in trial order.
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    policy = _as_evaluator(policy, instance, make_policy)
    oracle = _as_evaluator(oracle, instance, make_oracle)
    if oracle is not None and oracle.randomized:
        raise UsageError("oracle must be deterministic")
    rows = max(1, chunk_elems // instance.n)
    bounds = [(s, min(s + rows, trials)) for s in range(0, trials, rows)]
    randomized = policy is not None and policy.randomized

    def run_chunk(span):
        # evaluators keep per-trial state, so each chunk gets its own copies
        local_policy = _fresh(policy)
        local_oracle = _fresh(oracle)
        values, draws = sample_realizations(instance, seed, span[0], span[1], randomized)
        alg = None if local_policy is None else _evaluate(local_policy, instance, values, draws, use_batch)
        orc = None if local_oracle is None else _evaluate(local_oracle, instance, values, None, use_batch)
        return alg, orc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run_chunk, bounds))
    else:
        parts = [run_chunk(b) for b in bounds]
    alg = None if policy is None else np.concatenate([p[0] for p in parts])
    orc = None if oracle is None else np.concatenate([p[1] for p in parts])
    return alg, orc


def _fresh(evaluator):
    if evaluator is None:
        return None
    clone = object.__new__(type(evaluator))
    clone.__dict__.update(evaluator.__dict__)
    return clone


def monte_carlo(policy, instance, oracle="prophet", trials=1000, seed=0, **kwargs) -> tuple[Estimate, Estimate]:
    alg, orc = simulate_paired(policy, instance, oracle, trials, seed, **kwargs)
    return estimate_from(alg, seed), estimate_from(orc, seed)


def ratio_of_means(alg: np.ndarray, orc: np.ndarray) -> tuple[float, float]:
    """E[ALG]/E[oracle] and a delta-method 95% half-width from paired samples."""
    trials = len(alg)
    ma = math.fsum(alg.tolist()) / trials
    mo = math.fsum(orc.tolist()) / trials
    ratio = ma / mo
    if trials < 2:
        return ratio, math.inf
    resid = (alg - ratio * orc) / mo
    return ratio, Z95 * float(np.std(resid, ddof=1)) / math.sqrt(trials)


def dominance_violations(instance: Instance, alg: np.ndarray, orc: np.ndarray) -> int:
    """Trials where the policy beat the prophet (must be zero)."""
    if instance.variant.is_min:
        return int(np.count_nonzero(orc > alg))
    return int(np.count_nonzero(orc < alg))


# --- ski-rental harness ------------------------------------------------------


def ski_rental_harness(a, p, trials: int = 100_000, seed: int = 0, randomized: bool = True):
    """Mean cost of the DB ski-rental strategy on one buy-price sequence.

    Returns (Estimate of cost, offline optimum, measured ratio).
    """
    opt = db_ski_offline_opt(a, p)
    if randomized:
        u = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 2, 0])).random(trials)
        costs = db_ski_rental_costs(a, p, u)
    else:
        costs = db_ski_rental_costs(a, p)
    est = estimate_from(costs, seed)
    return est, opt, est.mean / opt


# --- ratio report ------------------------------------------------------------

TRENDS = {
    "example32": "sign split: ALG < 0 < prophet, ratio -> -inf",
    "example41": "ratio grows like sqrt(n) -> inf",
    "tightness": "ratio -> e/(e-1) = 1.581977",
    "prophet-half": "ratio -> 1/2",
}
REPORT_COLUMNS = ("family", "n", "prophet_exact", "alg_exact", "prophet_mc", "alg_mc", "ratio", "ci")
EXACT_CHECK_MAX_N = 4096
REL_CHECK = 1e-9


def _family_policy(family: str, instance: Instance) -> Policy | None:
    if family in ("tightness", "example41"):
        return WeitzmanPolicy(instance)
    if family == "prophet-half":
        return ThresholdPolicy(instance)
    if family == "example32" and instance.n <= DP_MAX_FIXED:
        return DPPolicy(instance)
    return None


def _agree(a: float, b: float, what: str):
    if abs(a - b) > REL_CHECK * max(1.0, abs(b)):
        raise ComputationError(f"{what}: closed form {b!r} disagrees with exact evaluation {a!r}")


def ratio_report(family: str, n_list, trials: int = 10_000, seed: int = 0, mc_max_n: int = 10**4, workers: int = 1):
    """One row per n: closed forms (cross-checked exactly where feasible) and
    paired Monte Carlo estimates where n <= ``mc_max_n``."""
    if family not in model.CLOSED_FORMS:
        raise UsageError(f"unknown family {family!r}; choose from {sorted(model.CLOSED_FORMS)}")
    rows = []
    for n in n_list:
        n = int(n)
        closed = model.CLOSED_FORMS[family](n)
        row = dict.fromkeys(REPORT_COLUMNS)
        row.update(family=family, n=n, prophet_exact=closed.prophet, alg_exact=closed.alg, ratio=closed.ratio)
        needs_instance = n <= max(mc_max_n, EXACT_CHECK_MAX_N)
        instance = model.FAMILIES[family](n) if needs_instance else None
        policy = _family_policy(family, instance) if instance is not None else None
        if instance is not None and n <= EXACT_CHECK_MAX_N:
            _agree(expected_prophet(instance), closed.prophet, f"{family} n={n} prophet")
            if isinstance(policy, DPPolicy):
                _agree(policy.result.value, closed.alg, f"{family} n={n} DP value")
            elif policy is not None:
                _agree(exact_eval(policy, instance), closed.alg, f"{family} n={n} ALG")
        if instance is not None and n <= mc_max_n and trials > 0:
            alg, orc = simulate_paired(policy, instance, "prophet", trials, seed, workers=workers)
            row["prophet_mc"] = estimate_from(orc, seed).mean
            if alg is not None:
                row["alg_mc"] = estimate_from(alg, seed).mean
                row["ci"] = ratio_of_means(alg, orc)[1]
        rows.append(row)
    return rows
