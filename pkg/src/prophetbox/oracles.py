"""Benchmarks: the prophet of every cell, the weak prophet and the ski prophets.

Prophet cost accounting for cells with observation cost:

* fixed order: the prophet walks the arrival order and stops where
  value -/+ accumulated cost is best, i.e. max_t (v_t - C_t) or
  min_t (v_t + C_t) with C_t = c_1 + ... + c_t;
* order selection: it opens the single best box, max_i (v_i - c_i) or
  min_i (v_i + c_i).

Commitment never changes these values; the prophet already knows where to stop.
"""

from __future__ import annotations

import itertools
import math
from itertools import accumulate

import numpy as np

from .distributions import expected_max_independent, expected_min_independent
from .errors import LengthMismatch, NotDecreasing, StateSpaceTooLarge, UnsupportedInstance, VariantMismatch
from .model import Instance, VariantSpec
from .policies import Open, Policy, PolicyState, StopSelect

ENUMERATION_LIMIT = 10**7


def _prophet_shifts(variant: VariantSpec, costs) -> list[float]:
    if not variant.observation_cost:
        return [0.0] * len(costs)
    if variant.order_selection:
        return [float(c) for c in costs]
    return list(accumulate(float(c) for c in costs))


def prophet_payoff(variant: VariantSpec, realization, costs) -> float:
    """Prophet's realized objective on one vector of values (arrival order)."""
    if len(realization) != len(costs):
        raise LengthMismatch(f"{len(realization)} values for {len(costs)} boxes")
    shifts = _prophet_shifts(variant, costs)
    if variant.is_min:
        return min(v + s for v, s in zip(realization, shifts))
    return max(v - s for v, s in zip(realization, shifts))


def prophet_batch(instance: Instance, values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`prophet_payoff` over rows of ``values``."""
    shifts = np.asarray(_prophet_shifts(instance.variant, instance.costs), dtype=float)
    if instance.variant.is_min:
        return (values + shifts).min(axis=1)
    return (values - shifts).max(axis=1)


def expected_prophet(instance: Instance) -> float:
    """Exact E[prophet] via the law of the extreme of independent shifted values."""
    shifts = _prophet_shifts(instance.variant, instance.costs)
    if instance.variant.is_min:
        return expected_min_independent(instance.dists, shifts)
    return expected_max_independent(instance.dists, [-s for s in shifts])


def outcome_count(instance: Instance) -> int:
    return math.prod(len(d) for d in instance.dists)


def enumerate_realizations(instance: Instance, limit: int = ENUMERATION_LIMIT):
    """Yield (probability, values) over the full product outcome space."""
    if outcome_count(instance) > limit:
        raise StateSpaceTooLarge(f"{outcome_count(instance)} outcomes exceed the limit {limit}")
    for combo in itertools.product(*(d.pairs for d in instance.dists)):
        yield math.prod(p for _, p in combo), tuple(v for v, _ in combo)


def expected_prophet_enumerated(instance: Instance) -> float:
    """Brute-force E[prophet]; independent check of :func:`expected_prophet`."""
    return math.fsum(
        p * prophet_payoff(instance.variant, vals, instance.costs) for p, vals in enumerate_realizations(instance)
    )


# --- weak prophet ------------------------------------------------------------


def _check_weak_variant(variant: VariantSpec):
    if not (variant.is_min and not variant.commitment and variant.observation_cost and not variant.order_selection):
        raise VariantMismatch(f"weak prophet does not apply to variant {variant.label()}")


def _two_point_support(dists):
    first = dists[0]
    if any(d != first for d in dists) or len(first) > 2:
        raise UnsupportedInstance("weak prophet is defined for i.i.d. boxes with at most two support points")
    return first


def weak_prophet_decide(state: PolicyState, multiset):
    """Knows the multiset of values but not where they sit.

    If the low support value is present it opens boxes in order until one
    shows up and takes it; otherwise it takes the first box.
    """
    _check_weak_variant(state.variant)
    dist = _two_point_support(state.dists)
    low = dist.values[0]
    k = len(state.opened)
    if min(multiset) == low:
        for index, value in state.opened:
            if value == low:
                return StopSelect(index)
        return Open(state.next_in_order())
    if k == 0:
        return Open(state.next_in_order())
    return StopSelect(state.opened[0][0])


class WeakProphetPolicy(Policy):
    name = "weak-prophet"
    clairvoyant = True

    def __init__(self, instance: Instance):
        super().__init__(instance)
        _check_weak_variant(instance.variant)
        _two_point_support(instance.dists)
        self.multiset = None

    def start_trial(self, u=None, realization=None):
        if realization is None:
            raise ValueError("the weak prophet needs the realized values")
        self.multiset = sorted(realization)

    def decide(self, state):
        return weak_prophet_decide(state, self.multiset)

    def batch_net(self, values, uniforms=None):
        low = self.instance.dists[0].values[0]
        paid = np.cumsum(np.asarray(self.instance.costs, dtype=float))
        is_low = values == low
        first_low = np.where(is_low.any(axis=1), is_low.argmax(axis=1), 0)
        return values[np.arange(values.shape[0]), first_low] + paid[first_low]


# --- ski-rental benchmarks ---------------------------------------------------


def ski_prophet(T: int, B: float) -> float:
    """Offline cost of classic ski rental: min_{i <= T}(i + X_i) = min(T, B)."""
    if T < 1 or B < 0:
        raise ValueError("need T >= 1 and B >= 0")
    return float(min(T, B))


def db_ski_offline_opt(a, p) -> float:
    """min_j (a_j + p_1 + ... + p_{j-1}) for a nonincreasing buy-price sequence."""
    a = [float(x) for x in a]
    p = [float(x) for x in p]
    if len(a) != len(p) + 1:
        raise LengthMismatch("need len(a) == len(p) + 1")
    if any(y > x for x, y in zip(a, a[1:])):
        raise NotDecreasing("buy prices must be nonincreasing")
    rent = 0.0
    best = math.inf
    for j, price in enumerate(a):
        best = min(best, price + rent)
        if j < len(p):
            rent += p[j]
    return best


def db_sequence_from_realization(values, costs):
    """Reduction to DB ski rental: a_1 = inf, a_{t+1} = min(v_1..v_t), rents = box costs."""
    a = [math.inf] + list(accumulate(values, min))
    return a, list(costs)
