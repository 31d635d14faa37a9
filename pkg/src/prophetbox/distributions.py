"""Finite discrete distributions, inverse-CDF sampling and reservation values."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate

import numpy as np

from .errors import NegativeProbability, NegativeValue, ProbabilitySumMismatch

SUM_TOL = 1e-9
NORMALIZED_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite support on nonnegative values, strictly increasing, positive masses.

    Build through :func:`make_distribution`, which merges and validates; the
    constructor only checks the invariants.
    """

    values: tuple[float, ...]
    probs: tuple[float, ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.values:
            raise ValueError("support must be non-empty")
        if len(self.values) != len(self.probs):
            raise ValueError("values and probs differ in length")
        if any(p <= 0 for p in self.probs):
            raise NegativeProbability("probabilities must be strictly positive")
        if any(not math.isfinite(v) or v < 0 for v in self.values):
            raise NegativeValue("values must be finite and nonnegative")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if abs(math.fsum(self.probs) - 1.0) > NORMALIZED_TOL:
            raise ProbabilitySumMismatch("probabilities must sum to 1")
        cum = np.fromiter(accumulate(self.probs), dtype=float, count=len(self.probs))
        cum.setflags(write=False)
        object.__setattr__(self, "_cum", cum)

    def __len__(self):
        return len(self.values)

    @property
    def pairs(self):
        return list(zip(self.values, self.probs))

    @property
    def min(self) -> float:
        return self.values[0]

    @property
    def max(self) -> float:
        return self.values[-1]

    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def survival(self, x: float) -> float:
        """P(X > x)."""
        return math.fsum(p for v, p in zip(self.values, self.probs) if v > x)


def make_distribution(pairs) -> DiscreteDistribution:
    """Merge duplicate values, sort, validate and (if needed) normalize.

    The raw masses must already sum to 1 within ``SUM_TOL``; anything looser
    is rejected rather than renormalized.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("distribution needs at least one (value, probability) pair")
    merged: dict[float, list[float]] = {}
    for value, prob in pairs:
        value, prob = float(value), float(prob)
        if prob < 0:
            raise NegativeProbability(f"negative probability {prob} for value {value}")
        if not math.isfinite(value) or value < 0:
            raise NegativeValue(f"value {value} is negative or not finite")
        merged.setdefault(value, []).append(prob)
    masses = {v: math.fsum(ps) for v, ps in merged.items()}
    total = math.fsum(masses.values())
    if abs(total - 1.0) > SUM_TOL:
        raise ProbabilitySumMismatch(f"probabilities sum to {total!r}, expected 1")
    support = sorted((v, p) for v, p in masses.items() if p > 0)
    values = tuple(v for v, _ in support)
    probs = tuple(p for _, p in support)
    if abs(math.fsum(probs) - 1.0) > NORMALIZED_TOL:
        s = math.fsum(probs)
        probs = tuple(p / s for p in probs)
    return DiscreteDistribution(values, probs)


def point_mass(value: float) -> DiscreteDistribution:
    return make_distribution([(value, 1.0)])


def expected_shortfall(dist: DiscreteDistribution, sigma: float) -> float:
    """E[(sigma - X)^+]."""
    return sum(p * max(0.0, sigma - v) for v, p in zip(dist.values, dist.probs))


@dataclass(frozen=True)
class ReservationValue:
    sigma: float
    residual: float


def reservation_value(dist: DiscreteDistribution, cost: float) -> ReservationValue:
    """Solve E[(sigma - X)^+] = cost exactly by walking the linear pieces.

    The shortfall is zero up to the smallest support point and then piecewise
    linear with slope P(X <= v_k) on [v_k, v_{k+1}].  For ``cost == 0`` the
    solution set is a half-line; its right end (the smallest support point)
    is returned.
    """
    if cost < 0:
        raise ValueError("cost must be nonnegative")
    vals, probs = dist.values, dist.probs
    if cost == 0:
        return ReservationValue(vals[0], 0.0)
    snap = NORMALIZED_TOL * max(1.0, cost)
    level = 0.0  # shortfall at vals[k]
    mass = 0.0  # P(X <= vals[k])
    sigma = None
    for k, v in enumerate(vals):
        mass += probs[k]
        if k == len(vals) - 1:
            sigma = v + (cost - level) / mass
            break
        nxt = level + mass * (vals[k + 1] - v)
        if abs(nxt - cost) <= snap:
            sigma = vals[k + 1]
            break
        if nxt > cost:
            sigma = v + (cost - level) / mass
            # the slope division can land a hair outside the segment
            sigma = min(max(sigma, v), vals[k + 1])
            break
        level = nxt
    residual = abs(expected_shortfall(dist, sigma) - cost)
    return ReservationValue(sigma, residual)


def sample(dist: DiscreteDistribution, uniform_draw: float) -> float:
    """Inverse-CDF draw: smallest value whose cumulative mass exceeds the draw."""
    idx = bisect_right(dist._cum, uniform_draw)
    return dist.values[min(idx, len(dist.values) - 1)]


def sample_array(dist: DiscreteDistribution, uniforms: np.ndarray) -> np.ndarray:
    """Vectorized :func:`sample`; identical results element by element."""
    vals = np.asarray(dist.values, dtype=float)
    if len(vals) == 1:
        return np.full(np.shape(uniforms), vals[0])
    if len(vals) == 2:
        return np.where(uniforms >= dist._cum[0], vals[1], vals[0])
    idx = np.searchsorted(dist._cum, uniforms, side="right")
    np.minimum(idx, len(vals) - 1, out=idx)
    return vals[idx]


def expected_min_independent(dists, shifts=None) -> float:
    """E[min_i (X_i + shift_i)] for independent discrete X_i.

    Sweeps the merged support once, tracking log P(min > y) as a running sum
    of per-box survival changes; cost O(N log N) in the total support size.
    """
    dists = list(dists)
    if shifts is None:
        shifts = [0.0] * len(dists)
    ys, dlog, dzero = [], [], []
    for dist, shift in zip(dists, shifts):
        probs = dist.probs
        tails = list(accumulate(reversed(probs[1:])))[::-1] + [0.0]  # P(X > v_j)
        prev_log = 0.0
        for v, tail in zip(dist.values, tails):
            ys.append(v + shift)
            if tail > 0:
                cur = math.log(tail)
                dlog.append(cur - prev_log)
                dzero.append(0)
                prev_log = cur
            else:
                dlog.append(-prev_log)
                dzero.append(1)
    return _sweep_expected_min(np.asarray(ys), np.asarray(dlog), np.asarray(dzero))


def _sweep_expected_min(ys, dlog, dzero):
    order = np.argsort(ys, kind="stable")
    ys, dlog, dzero = ys[order], dlog[order], dzero[order]
    logsurv = np.cumsum(dlog)
    zeros = np.cumsum(dzero)
    # keep the state after the last event at each distinct level
    last = np.r_[ys[1:] != ys[:-1], True]
    levels, logsurv, zeros = ys[last], logsurv[last], zeros[last]
    surv = np.where(zeros > 0, 0.0, np.exp(np.minimum(logsurv, 0.0)))
    gaps = np.diff(levels)
    return float(levels[0] + math.fsum(gaps * surv[:-1]))


def expected_max_independent(dists, shifts=None) -> float:
    """E[max_i (X_i + shift_i)] for independent discrete X_i."""
    dists = list(dists)
    if shifts is None:
        shifts = [0.0] * len(dists)
    ys, dlog, dzero = [], [], []
    # max(Y) = -min(-Y); walk each support from the top
    for dist, shift in zip(dists, shifts):
        probs = dist.probs
        below = list(accumulate(probs[:-1])) + [0.0]  # P(X < v_j) read top-down
        below = [0.0] + below[:-1]
        prev_log = 0.0
        for v, under in zip(reversed(dist.values), reversed(below)):
            ys.append(-(v + shift))
            if under > 0:
                cur = math.log(under)
                dlog.append(cur - prev_log)
                dzero.append(0)
                prev_log = cur
            else:
                dlog.append(-prev_log)
                dzero.append(1)
    return -_sweep_expected_min(np.asarray(ys), np.asarray(dlog), np.asarray(dzero))


def max_distribution(dists) -> DiscreteDistribution:
    """Law of max_i X_i for independent X_i (exact on the union support)."""
    dists = list(dists)
    support = sorted({v for d in dists for v in d.values})
    cdf_prev = 0.0
    pairs = []
    for v in support:
        cdf = 1.0
        for d in dists:
            cdf *= 1.0 - d.survival(v)
        pairs.append((v, cdf - cdf_prev))
        cdf_prev = cdf
    return make_distribution([(v, max(p, 0.0)) for v, p in pairs])
