"""Instances, variants, the adversarial instance families and their closed forms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .distributions import DiscreteDistribution, make_distribution
from .errors import NotPerfectSquare, UsageError


class Objective(str, enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class VariantSpec:
    """One of the 16 cells: objective x commitment x observation cost x order selection."""

    objective: Objective
    commitment: bool
    observation_cost: bool
    order_selection: bool

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))

    @property
    def is_min(self) -> bool:
        return self.objective is Objective.MIN

    def label(self) -> str:
        flags = [
            self.objective.value,
            "commit" if self.commitment else "recall",
            "cost" if self.observation_cost else "free",
            "order-select" if self.order_selection else "fixed-order",
        ]
        return "/".join(flags)


def all_variants():
    for objective in (Objective.MAX, Objective.MIN):
        for commitment in (True, False):
            for order_selection in (True, False):
                for cost in (True, False):
                    yield VariantSpec(objective, commitment, cost, order_selection)


@dataclass(frozen=True)
class Box:
    cost: float
    dist: DiscreteDistribution

    def __post_init__(self):
        if not (self.cost >= 0 and math.isfinite(self.cost)):
            raise UsageError(f"box cost must be finite and nonnegative, got {self.cost}")


@dataclass(frozen=True)
class Instance:
    variant: VariantSpec
    boxes: tuple[Box, ...]

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if not self.boxes:
            raise UsageError("an instance needs at least one box")
        if not self.variant.observation_cost and any(b.cost != 0 for b in self.boxes):
            raise UsageError("variant without observation cost requires zero box costs")

    @property
    def n(self) -> int:
        return len(self.boxes)

    @cached_property
    def costs(self) -> tuple[float, ...]:
        return tuple(b.cost for b in self.boxes)

    @cached_property
    def dists(self) -> tuple[DiscreteDistribution, ...]:
        return tuple(b.dist for b in self.boxes)

    @cached_property
    def dist_groups(self) -> dict:
        """Distinct distributions mapped to the columns (boxes) that share them."""
        groups: dict = {}
        for col, dist in enumerate(self.dists):
            groups.setdefault(dist, []).append(col)
        return groups

    def with_variant(self, **changes) -> "Instance":
        fields = dict(
            objective=self.variant.objective,
            commitment=self.variant.commitment,
            observation_cost=self.variant.observation_cost,
            order_selection=self.variant.order_selection,
        )
        fields.update(changes)
        return Instance(VariantSpec(**fields), self.boxes)


def iid_instance(variant: VariantSpec, n: int, dist: DiscreteDistribution, cost: float) -> Instance:
    return Instance(variant, tuple(Box(cost, dist) for _ in range(n)))


def _power(q: float, n: int) -> float:
    """q**n computed as exp(n log q) for large n, exact 0 at q == 0."""
    if q == 0.0:
        return 0.0 if n > 0 else 1.0
    return math.exp(n * math.log(q))


def _power_one_minus(x: float, n: int) -> float:
    """(1 - x)**n with log1p, accurate when x is tiny and n huge."""
    if x == 1.0:
        return 0.0 if n > 0 else 1.0
    return math.exp(n * math.log1p(-x))


def _check_square(n: int) -> int:
    root = math.isqrt(n)
    if root * root != n:
        raise NotPerfectSquare(f"n={n} is not a perfect square")
    return root


# --- instance families -------------------------------------------------------


def gen_example_max_cost(n: int, order_selection: bool = False, commitment: bool = True) -> Instance:
    """i.i.d. boxes, cost 1, value n with probability n^-1.5 and 0 otherwise.

    Every observation-cost maximization cell sends ALG below zero while the
    prophet stays positive on this family.
    """
    if n < 2:
        raise UsageError("need n >= 2")
    hit = n ** -1.5
    dist = make_distribution([(0.0, 1.0 - hit), (float(n), hit)])
    variant = VariantSpec(Objective.MAX, commitment, True, order_selection)
    return iid_instance(variant, n, dist, 1.0)


def gen_example_min_orderselect(n: int) -> Instance:
    """i.i.d. boxes, cost 1, value 0 w.p. 1/sqrt(n) else n (minimization, order selection)."""
    if n < 4:
        raise UsageError("need n >= 4")
    root = _check_square(n)
    zero = 1.0 / root
    dist = make_distribution([(0.0, zero), (float(n), 1.0 - zero)])
    variant = VariantSpec(Objective.MIN, False, True, True)
    return iid_instance(variant, n, dist, 1.0)


def gen_tightness_instance(n: int) -> Instance:
    """i.i.d. boxes, cost 1, value n w.p. 1 - 1/n and 0 w.p. 1/n, fixed arrival order."""
    if n < 2:
        raise UsageError("need n >= 2")
    dist = make_distribution([(0.0, 1.0 / n), (float(n), 1.0 - 1.0 / n)])
    variant = VariantSpec(Objective.MIN, False, True, False)
    return iid_instance(variant, n, dist, 1.0)


def gen_prophet_half(n: int) -> Instance:
    """Two boxes: a sure 1, then n w.p. 1/n (else 0).

    The textbook instance on which no stopping rule beats half the prophet as
    n grows; used to exercise the commitment/no-cost/fixed-order cell.
    """
    if n < 2:
        raise UsageError("need n >= 2")
    variant = VariantSpec(Objective.MAX, True, False, False)
    first = make_distribution([(1.0, 1.0)])
    second = make_distribution([(0.0, 1.0 - 1.0 / n), (float(n), 1.0 / n)])
    return Instance(variant, (Box(0.0, first), Box(0.0, second)))


def gen_no_cost_instance(n: int, objective: Objective = Objective.MAX, order_selection: bool = False) -> Instance:
    """The tightness law with free inspection and recall; opening everything is optimal."""
    if n < 2:
        raise UsageError("need n >= 2")
    dist = make_distribution([(0.0, 1.0 / n), (float(n), 1.0 - 1.0 / n)])
    return iid_instance(VariantSpec(objective, False, False, order_selection), n, dist, 0.0)


def random_instance(rng, variant: VariantSpec, n: int, support: int = 4, max_value: float = 10.0, max_cost: float = 2.0):
    """Independent boxes with random supports (values on a 0.5 grid, so ties happen) and costs."""
    boxes = []
    for _ in range(n):
        k = int(rng.integers(1, support + 1))
        values = rng.choice(np.arange(0.0, max_value + 0.5, 0.5), size=k, replace=False)
        probs = rng.dirichlet(np.ones(k))
        cost = float(rng.uniform(0.0, max_cost)) if variant.observation_cost else 0.0
        boxes.append(Box(cost, make_distribution(zip(values.tolist(), probs.tolist()))))
    return Instance(variant, tuple(boxes))


FAMILIES = {
    "example32": gen_example_max_cost,
    "example41": gen_example_min_orderselect,
    "tightness": gen_tightness_instance,
    "prophet-half": gen_prophet_half,
    "no-cost": gen_no_cost_instance,
}


# --- geometric sums ----------------------------------------------------------


def geom_weighted_sum(k: int, q: float) -> float:
    """sum_{i=1..k} i q^(i-1) in closed form."""
    if not 0 <= q < 1:
        raise ValueError("need 0 <= q < 1")
    if k < 1:
        raise ValueError("need k >= 1")
    if q == 0.0:
        return 1.0
    # (1 + q^k (kq - k - 1)) / (1-q)^2 rearranged as ((1 - q^k)/(1-q) - k q^k) / (1-q),
    # with 1 - q^k from expm1; the textbook form loses ~eps/(1-q)^2 near q = 1
    klogq = k * math.log(q)
    partial = -math.expm1(klogq) / (1.0 - q)
    return (partial - k * math.exp(klogq)) / (1.0 - q)


def geom_tail(k: int, q: float) -> float:
    """sum_{i>k} q^(i-1) = q^k / (1 - q)."""
    if not 0 <= q < 1:
        raise ValueError("need 0 <= q < 1")
    if k < 0:
        raise ValueError("need k >= 0")
    return _power(q, k) / (1.0 - q)


# --- closed forms ------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormReport:
    n: int
    prophet: float
    alg: float
    extras: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.alg / self.prophet


def closed_form_example32(n: int) -> ClosedFormReport:
    """Exact finite-n prophet and best online value on :func:`gen_example_max_cost`.

    With p = 1 - n^-1.5 (probability a box is empty):

    * fixed-order prophet: n - p^n - (1 - p^n)/(1 - p)
    * order-selecting prophet: -p^n + (1 - p^n)(n - 1)
    * ALG: the better of stopping at the first box, -1 + n(1 - p), and
      searching for an n, (1 - p^n)(n - n^1.5).  Both are negative once n >= 2.
    """
    if n < 2:
        raise UsageError("need n >= 2")
    hit = n ** -1.5
    pn = _power_one_minus(hit, n)
    miss_all = 1.0 - pn
    # (1 - p^n)/(1 - p) and sum_i i P(stop at i) = (1-p^n)/(1-p) - n p^n
    stop_time_sum = -math.expm1(n * math.log1p(-hit)) / hit
    prophet_fixed = n - pn - stop_time_sum
    prophet_order = -pn + miss_all * (n - 1)
    stop_first = -1.0 + n * hit
    search = miss_all * (n - n ** 1.5)
    return ClosedFormReport(
        n=n,
        prophet=prophet_fixed,
        alg=max(stop_first, search),
        extras={
            "p": 1.0 - hit,
            "p_pow_n": pn,
            "prophet_orderselect": prophet_order,
            "alg_stop_first": stop_first,
            "alg_search": search,
            "expected_stop_index": stop_time_sum - n * pn,
        },
    )


def closed_form_example41(n: int) -> ClosedFormReport:
    """Exact prophet and Weitzman cost on :func:`gen_example_min_orderselect`.

    With q = 1 - n^-1/2 (a box is not zero):
    prophet = (1 - q^n) * 1 + q^n (n + 1),  ALG = sqrt(n) + q^n (n - sqrt(n)).
    """
    root = _check_square(n)
    if n < 4:
        raise UsageError("need n >= 4")
    qn = _power_one_minus(1.0 / root, n)
    prophet = (1.0 - qn) + qn * (n + 1)
    alg = root + qn * (n - root)
    return ClosedFormReport(n=n, prophet=prophet, alg=alg, extras={"q_pow_n": qn, "sqrt_n": float(root)})


def closed_form_tightness(n: int) -> ClosedFormReport:
    """Exact ski-prophet, Weitzman and weak-prophet costs on :func:`gen_tightness_instance`.

    With q = 1 - 1/n: prophet = (n-1)(1 - q^n) + 1, Weitzman = n and the
    weak prophet (values known, order unknown) = n - (n-1) q^n.
    """
    if n < 2:
        raise UsageError("need n >= 2")
    qn = _power_one_minus(1.0 / n, n)
    prophet = (n - 1) * (1.0 - qn) + 1.0
    weak = n - (n - 1) * qn
    return ClosedFormReport(
        n=n,
        prophet=prophet,
        alg=float(n),
        extras={"weitzman": float(n), "weak_prophet": weak, "q_pow_n": qn, "weak_ratio": n / weak},
    )


def closed_form_prophet_half(n: int) -> ClosedFormReport:
    """E[max] = 2 - 1/n; the best stopping rule earns exactly 1."""
    if n < 2:
        raise UsageError("need n >= 2")
    return ClosedFormReport(n=n, prophet=2.0 - 1.0 / n, alg=1.0)


CLOSED_FORMS = {
    "example32": closed_form_example32,
    "example41": closed_form_example41,
    "tightness": closed_form_tightness,
    "prophet-half": closed_form_prophet_half,
}
