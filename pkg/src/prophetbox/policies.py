"""Online decision rules.

A policy sees a :class:`PolicyState` (costs, distributions and the values
revealed so far) and answers with :class:`Open` or :class:`StopSelect`.  The
referee in :mod:`prophetbox.engine` enforces legality.  Policies with a
``batch_net`` method also provide a vectorized evaluator over a matrix of
realizations; it must reproduce the referee's result bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import expected_max_independent, max_distribution, reservation_value
from .errors import VariantMismatch
from .model import Instance, Objective, VariantSpec

E_RATIO = math.e / (math.e - 1.0)


@dataclass(frozen=True)
class Open:
    index: int


@dataclass(frozen=True)
class StopSelect:
    index: int


@dataclass(frozen=True)
class PolicyState:
    variant: VariantSpec
    costs: tuple
    dists: tuple
    opened: tuple = ()  # ((index, value), ...) in opening order
    remaining: frozenset = frozenset()

    @classmethod
    def initial(cls, instance: Instance) -> "PolicyState":
        return cls(instance.variant, instance.costs, instance.dists, (), frozenset(range(instance.n)))

    @property
    def n(self) -> int:
        return len(self.costs)

    def after_open(self, index: int, value: float) -> "PolicyState":
        return PolicyState(
            self.variant, self.costs, self.dists, self.opened + ((index, value),), self.remaining - {index}
        )

    def next_in_order(self) -> int:
        return min(self.remaining)

    def best(self) -> tuple[int, float]:
        """Best revealed (index, value) for the objective; lowest index on ties."""
        if self.variant.is_min:
            return min(self.opened, key=lambda iv: (iv[1], iv[0]))
        return min(self.opened, key=lambda iv: (-iv[1], iv[0]))

    def last(self) -> tuple[int, float]:
        return self.opened[-1]


def _require(variant: VariantSpec, ok: bool, what: str):
    if not ok:
        raise VariantMismatch(f"{what} does not apply to variant {variant.label()}")


# --- Weitzman ----------------------------------------------------------------


def weitzman_order(costs, dists) -> tuple[list[float], list[int]]:
    sigmas = [reservation_value(d, c).sigma for c, d in zip(costs, dists)]
    order = sorted(range(len(sigmas)), key=lambda i: sigmas[i])
    return sigmas, order


def check_weitzman_variant(variant: VariantSpec, sigmas, order):
    _require(variant, variant.is_min and not variant.commitment, "Weitzman's rule")
    if not variant.order_selection:
        # a fixed arrival order is fine as long as it already is the index order
        _require(variant, order == sorted(order), "Weitzman's rule (arrival order is not the index order)")


def weitzman_decide(state: PolicyState, sigmas=None, order=None):
    """Open in nondecreasing reservation value; stop once the best value
    revealed is strictly below the next box's reservation value."""
    if sigmas is None or order is None:
        sigmas, order = weitzman_order(state.costs, state.dists)
        check_weitzman_variant(state.variant, sigmas, order)
    k = len(state.opened)
    if k == 0:
        return Open(order[0])
    best_index, best_value = state.best()
    if k == state.n or best_value < sigmas[order[k]]:
        return StopSelect(best_index)
    return Open(order[k])


def _first_true_monotone(mask: np.ndarray) -> np.ndarray:
    """Per row, index of the first True of a row of the form F..FT..T, else the
    row length (the forced last step)."""
    return mask.shape[1] - np.count_nonzero(mask, axis=1)


class Policy:
    name = "policy"
    randomized = False
    clairvoyant = False  # needs the full realization (benchmarks only)

    def __init__(self, instance: Instance):
        self.instance = instance

    def start_trial(self, u: float | None = None, realization=None):
        pass

    def decide(self, state: PolicyState):
        raise NotImplementedError

    batch_net = None


class WeitzmanPolicy(Policy):
    name = "weitzman"

    def __init__(self, instance):
        super().__init__(instance)
        self.sigmas, self.order = weitzman_order(instance.costs, instance.dists)
        check_weitzman_variant(instance.variant, self.sigmas, self.order)

    def decide(self, state):
        return weitzman_decide(state, self.sigmas, self.order)

    def batch_net(self, values: np.ndarray, uniforms=None) -> np.ndarray:
        order = np.asarray(self.order)
        identity = bool(np.all(order == np.arange(len(order))))
        v = values if identity else values[:, order]
        costs = np.asarray(self.instance.costs, dtype=float)[order]
        sig = np.asarray(self.sigmas, dtype=float)[order]
        running = np.minimum.accumulate(v, axis=1)
        paid = np.cumsum(costs)
        # running minimum falls and sigmas rise along the order, so the stop
        # condition is monotone and the stop index is the count of misses
        stop = _first_true_monotone(running[:, :-1] < sig[1:])
        rows = np.arange(v.shape[0])
        return running[rows, stop] + paid[stop]


# --- DB ski-rental -----------------------------------------------------------


@dataclass
class SkiRentalState:
    """Per-run state of a decreasing-buy-price ski-rental strategy.

    ``threshold`` is the randomized strategy's hazard threshold drawn once per
    run; ``None`` selects the deterministic break-even rule.
    """

    cumulative_rent: float = 0.0
    best_buy: float = math.inf
    hazard: float = 0.0
    threshold: float | None = None

    @classmethod
    def randomized(cls, u: float) -> "SkiRentalState":
        return cls(threshold=threshold_from_uniform(u))


def threshold_from_uniform(u: float) -> float:
    """Hazard level at which the bought fraction (e^h - 1)/(e - 1) reaches u."""
    return math.log1p((math.e - 1.0) * u)


def _thresholds(uniforms) -> np.ndarray:
    # scalar math.log1p keeps the batch path bit-identical to the referee path
    return np.array([threshold_from_uniform(float(u)) for u in np.ravel(uniforms)])


def ski_rental_step(sr: SkiRentalState, price: float, next_rent: float | None) -> bool:
    """Decide buy (True) or rent (False) at the current buy price.

    ``next_rent`` is the price of renting one more period, ``None`` when
    renting is no longer possible (the purchase is forced).

    Randomized rule: accumulate hazard h += rent / price, including the
    period about to be rented, and buy once h reaches the run's threshold
    log(1 + (e-1)u).  Deterministic rule: buy once the rent paid plus the next
    rent reaches the price.
    """
    if price > sr.best_buy:
        raise ValueError("buy price must be nonincreasing")
    sr.best_buy = price
    if next_rent is None:
        return True
    if math.isinf(price):
        sr.cumulative_rent += next_rent
        return False
    if sr.threshold is None:
        buy = sr.cumulative_rent + next_rent >= price
    else:
        sr.hazard += math.inf if price == 0 else next_rent / price
        buy = sr.hazard >= sr.threshold
    if not buy:
        sr.cumulative_rent += next_rent
    return buy


def ski_rental_decide(state: PolicyState, sr: SkiRentalState):
    """Translate the rent/buy rule: rent -> open the next box, buy -> take the
    smallest value seen.  The buy price before any box is open is infinite."""
    v = state.variant
    _require(v, v.is_min and not v.commitment and v.observation_cost and not v.order_selection, "ski-rental rule")
    k = len(state.opened)
    price = state.best()[1] if k else math.inf
    next_rent = state.costs[k] if k < state.n else None
    if ski_rental_step(sr, price, next_rent):
        return StopSelect(state.best()[0])
    return Open(k)


class SkiRentalPolicy(Policy):
    name = "ski-rental"
    randomized = True

    def __init__(self, instance):
        super().__init__(instance)
        v = instance.variant
        _require(v, v.is_min and not v.commitment and v.observation_cost and not v.order_selection, "ski-rental rule")
        self.u = None

    def new_state(self):
        return SkiRentalState.randomized(self.u)

    def start_trial(self, u=None, realization=None):
        self.u = u

    def decide(self, state):
        # rebuild the run state from the revealed prefix so that decide() is a
        # pure function of the state (the tree walk in exact_eval relies on it)
        sr = self.new_state()
        price = math.inf
        for k, (_, value) in enumerate(state.opened):
            ski_rental_step(sr, price, state.costs[k])
            price = min(price, value)
        return ski_rental_decide(state, sr)

    def _buy_mask(self, running, paid, costs, uniforms):
        with np.errstate(divide="ignore", invalid="ignore"):
            hazard = np.divide(costs[1:], running[:, :-1])
        if not np.all(costs[1:] > 0):
            # a zero rent at a zero price is 0/0; a free price means buy now
            hazard[running[:, :-1] == 0] = np.inf
        np.cumsum(hazard, axis=1, out=hazard)
        return hazard >= _thresholds(uniforms)[:, None]

    def batch_net(self, values, uniforms=None):
        costs = np.asarray(self.instance.costs, dtype=float)
        running = np.minimum.accumulate(values, axis=1)
        paid = np.cumsum(costs)
        # hazard and rent paid only grow while the buy price only falls: monotone
        stop = _first_true_monotone(self._buy_mask(running, paid, costs, uniforms))
        rows = np.arange(values.shape[0])
        return running[rows, stop] + paid[stop]


class BreakEvenPolicy(SkiRentalPolicy):
    name = "ski-rental-deterministic"
    randomized = False

    def new_state(self):
        return SkiRentalState()

    def _buy_mask(self, running, paid, costs, uniforms):
        return paid[:-1] + costs[1:] >= running[:, :-1]


def db_ski_rental_costs(a, p, uniforms=None) -> np.ndarray:
    """Cost of the strategy on a fixed buy-price sequence, one entry per draw.

    ``a`` holds the buy prices a_1..a_m (a_1 may be ``inf``), ``p`` the rents
    p_1..p_{m-1}; the purchase at a_m is forced.  ``uniforms=None`` runs the
    deterministic break-even rule once.
    """
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(a) != len(p) + 1:
        raise ValueError("need len(a) == len(p) + 1")
    rent_before = np.r_[0.0, np.cumsum(p)]
    totals = a + rent_before
    if uniforms is None:
        buy = rent_before[:-1] + p >= a[:-1]
        buy &= np.isfinite(a[:-1])
        t = int(buy.argmax()) if buy.any() else len(a) - 1
        return np.array([totals[t]])
    with np.errstate(divide="ignore", invalid="ignore"):
        inc = np.where(np.isinf(a[:-1]), 0.0, np.where(a[:-1] == 0, np.inf, p / a[:-1]))
    hazard = np.cumsum(inc)
    thresholds = _thresholds(uniforms)
    finite = np.isfinite(a[:-1])
    # first index with hazard >= threshold at a finite price; hazard is nondecreasing
    t = np.searchsorted(hazard, thresholds, side="left")
    blocked = t < len(hazard)
    blocked[blocked] = ~finite[t[blocked]]
    if blocked.any():
        # a zero threshold could only be met at an infinite price; move past those
        first_finite = int(np.argmax(finite)) if finite.any() else len(a) - 1
        t[blocked] = np.maximum(t[blocked], first_finite)
    return totals[np.minimum(t, len(a) - 1)]


def db_ski_rental_expected_cost(a, p) -> float:
    """Exact expectation of the randomized strategy on a fixed sequence.

    P(bought by step t) = min(1, (e^{h_t} - 1)/(e - 1)) with h_t the hazard
    including step t's rent; the last step absorbs the remaining mass.
    """
    a = [float(x) for x in a]
    p = [float(x) for x in p]
    rent_before = 0.0
    h = 0.0
    bought = 0.0
    parts = []
    for t, price in enumerate(a):
        if t == len(a) - 1:
            frac = 1.0
        elif math.isinf(price):
            frac = bought
        else:
            h += math.inf if price == 0 else p[t] / price
            frac = 1.0 if math.isinf(h) else min(1.0, math.expm1(h) / (math.e - 1.0))
        if frac > bought:
            parts.append((frac - bought) * (rent_before + price))
            bought = frac
        if t < len(p):
            rent_before += p[t]
    return math.fsum(parts)


# --- threshold rule ----------------------------------------------------------


def threshold_decide(state: PolicyState, tau: float):
    """Accept the first value >= tau; the last box is taken if nothing was."""
    v = state.variant
    _require(v, not v.is_min and v.commitment and not v.observation_cost and not v.order_selection, "threshold rule")
    k = len(state.opened)
    if k == 0:
        return Open(0)
    index, value = state.last()
    if value >= tau or k == state.n:
        return StopSelect(index)
    return Open(k)


def half_mean_threshold(instance: Instance) -> float:
    """tau = E[max_i X_i] / 2, which guarantees half of the prophet for any laws."""
    return 0.5 * expected_max_independent(instance.dists)


def median_threshold(instance: Instance) -> float:
    """Smallest support point of max_i X_i whose upper tail P(max >= tau) is <= 1/2.

    Kept for comparison only: without randomized tie-breaking this rule can
    fall below half of the prophet on discrete laws (see the tests).
    """
    law = max_distribution(instance.dists)
    upper = 1.0
    for value, prob in zip(law.values, law.probs):
        if upper <= 0.5:
            return value
        upper -= prob
    return law.values[-1]


class ThresholdPolicy(Policy):
    name = "threshold"

    def __init__(self, instance, tau: float | None = None):
        super().__init__(instance)
        v = instance.variant
        _require(v, not v.is_min and v.commitment and not v.observation_cost and not v.order_selection, "threshold rule")
        self.tau = half_mean_threshold(instance) if tau is None else tau

    def decide(self, state):
        return threshold_decide(state, self.tau)

    def batch_net(self, values, uniforms=None):
        n = values.shape[1]
        hit = values >= self.tau
        stop = np.where(hit.any(axis=1), hit.argmax(axis=1), n - 1)
        return values[np.arange(values.shape[0]), stop]


# --- open everything ---------------------------------------------------------


def open_all_decide(state: PolicyState):
    v = state.variant
    _require(v, not v.observation_cost and not v.commitment, "open-all rule")
    if state.remaining:
        return Open(state.next_in_order())
    return StopSelect(state.best()[0])


class OpenAllPolicy(Policy):
    name = "open-all"

    def __init__(self, instance):
        super().__init__(instance)
        v = instance.variant
        _require(v, not v.observation_cost and not v.commitment, "open-all rule")

    def decide(self, state):
        return open_all_decide(state)

    def batch_net(self, values, uniforms=None):
        if self.instance.variant.objective is Objective.MIN:
            return values.min(axis=1)
        return values.max(axis=1)
