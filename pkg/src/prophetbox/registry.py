"""The 16 variant cells: best known ratio, source and an executable demo."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import engine, model
from .model import Objective, VariantSpec


@dataclass(frozen=True)
class KnownRatio:
    value: float
    label: str

    def render(self) -> str:
        return self.label


@dataclass(frozen=True)
class KnownRange:
    lo: float
    hi: float

    def render(self) -> str:
        return f"[{self.lo:.3f}, {self.hi:.3f}]"


@dataclass(frozen=True)
class Trivial1:
    def render(self) -> str:
        return "1"


@dataclass(frozen=True)
class UnboundedBad:
    objective: Objective

    def render(self) -> str:
        return "-inf" if self.objective is Objective.MAX else "inf"


@dataclass(frozen=True)
class Demo:
    family: str
    policy: str
    oracle: str = "prophet"


@dataclass(frozen=True)
class VariantCell:
    variant: VariantSpec
    status: object
    citation: str
    demo: Demo | None = None


def _v(objective, commitment, cost, order):
    return VariantSpec(objective, commitment, cost, order)


MAX, MIN = Objective.MAX, Objective.MIN
_SIGN_SPLIT = "example32 construction (ALG < 0 < prophet)"
_OPEN_ALL = "open every box (free inspection with recall)"
_LIVANOS = "Livanos-Mehta 2022, App. B.1"

CELLS = (
    VariantCell(_v(MAX, True, True, True), UnboundedBad(MAX), _SIGN_SPLIT, Demo("example32", "dp-optimal")),
    VariantCell(_v(MAX, True, False, True), KnownRange(0.726, 0.745), "Bubna-Chiplunkar 2022; Correa et al. 2017"),
    VariantCell(
        _v(MAX, True, True, False), UnboundedBad(MAX), _SIGN_SPLIT + "; Samuel-Cahn 1992", Demo("example32", "dp-optimal")
    ),
    VariantCell(_v(MAX, True, False, False), KnownRatio(0.5, "1/2"), "Krengel-Sucheston 1978", Demo("prophet-half", "threshold")),
    VariantCell(_v(MAX, False, True, True), UnboundedBad(MAX), _SIGN_SPLIT, Demo("example32", "dp-optimal")),
    VariantCell(_v(MAX, False, False, True), Trivial1(), _OPEN_ALL, Demo("no-cost", "open-all")),
    VariantCell(_v(MAX, False, True, False), UnboundedBad(MAX), _SIGN_SPLIT, Demo("example32", "dp-optimal")),
    VariantCell(_v(MAX, False, False, False), Trivial1(), _OPEN_ALL, Demo("no-cost", "open-all")),
    VariantCell(_v(MIN, True, True, True), UnboundedBad(MIN), _LIVANOS),
    VariantCell(_v(MIN, True, False, True), UnboundedBad(MIN), _LIVANOS),
    VariantCell(_v(MIN, True, True, False), UnboundedBad(MIN), _LIVANOS),
    VariantCell(_v(MIN, True, False, False), UnboundedBad(MIN), _LIVANOS),
    VariantCell(
        _v(MIN, False, True, True),
        UnboundedBad(MIN),
        "example41 construction (ratio ~ sqrt(n)); Weitzman 1979",
        Demo("example41", "weitzman"),
    ),
    VariantCell(_v(MIN, False, False, True), Trivial1(), _OPEN_ALL, Demo("no-cost", "open-all")),
    VariantCell(
        _v(MIN, False, True, False),
        KnownRatio(math.e / (math.e - 1.0), "1.58*"),
        "reduction to ski rental with falling buy price; * also against the weak prophet",
        Demo("tightness", "weitzman"),
    ),
    VariantCell(_v(MIN, False, False, False), Trivial1(), _OPEN_ALL, Demo("no-cost", "open-all")),
)

STATUS_COLUMNS = ("objective", "commitment", "observation_cost", "order_selection", "status", "citation", "demo")
TABLE_COLUMNS = STATUS_COLUMNS + ("n", "prophet", "alg", "ratio", "check", "note")


def cell_for(variant: VariantSpec) -> VariantCell:
    for cell in CELLS:
        if cell.variant == variant:
            return cell
    raise KeyError(variant)


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


def status_row(cell: VariantCell) -> dict:
    v = cell.variant
    demo = "" if cell.demo is None else f"{cell.demo.family}/{cell.demo.policy}/{cell.demo.oracle}"
    return {
        "objective": v.objective.value,
        "commitment": _yes(v.commitment),
        "observation_cost": _yes(v.observation_cost),
        "order_selection": _yes(v.order_selection),
        "status": cell.status.render(),
        "citation": cell.citation,
        "demo": demo or "no demo",
    }


def write_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k)) for k in columns})
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render_status_table() -> str:
    """The 16 statuses as CSV, without running any demo."""
    return write_csv([status_row(c) for c in CELLS], STATUS_COLUMNS)


def nearest_square(n: int, floor: int = 4) -> int:
    """Perfect square closest to n (ties go down), at least ``floor``."""
    root = math.isqrt(max(n, floor))
    lo, hi = root * root, (root + 1) ** 2
    return max(floor, lo if n - lo <= hi - n else hi)


def run_demo(cell: VariantCell, n: int, trials: int = 10_000, seed: int = 0) -> dict:
    """Compute the desk-scale evidence for one cell at (about) size n."""
    out = {"n": None, "prophet": None, "alg": None, "ratio": None, "check": "", "note": ""}
    demo = cell.demo
    if demo is None:
        out["note"] = "literature value only"
        return out
    v = cell.variant
    if demo.family == "example32":
        closed = model.closed_form_example32(n)
        prophet = closed.extras["prophet_orderselect"] if v.order_selection else closed.prophet
        ok = closed.alg < 0 < prophet
        out.update(n=n, prophet=prophet, alg=closed.alg, ratio=closed.alg / prophet)
        out["check"] = "pass" if ok else "FAIL"
        out["note"] = "ALG < 0 < prophet; ratio -> -inf"
    elif demo.family == "example41":
        m = nearest_square(n)
        closed = model.closed_form_example41(m)
        ok = abs(closed.ratio / math.sqrt(m) - 1.0) <= 0.1 if m >= 64 else True
        out.update(n=m, prophet=closed.prophet, alg=closed.alg, ratio=closed.ratio)
        out["check"] = "pass" if ok else "FAIL"
        out["note"] = f"ratio / sqrt(n) = {closed.ratio / math.sqrt(m):.4f}; ratio -> inf"
    elif demo.family == "tightness":
        instance = model.gen_tightness_instance(n)
        alg, orc = engine.simulate_paired(demo.policy, instance, demo.oracle, trials, seed)
        ratio, half = engine.ratio_of_means(alg, orc)
        out.update(n=n, prophet=float(orc.mean()), alg=float(alg.mean()), ratio=ratio)
        out["check"] = "pass" if 1.45 <= ratio <= 1.60 else "FAIL"
        out["note"] = f"Monte Carlo, +/- {half:.4f}; closed form {model.closed_form_tightness(n).ratio:.6f}"
    elif demo.family == "prophet-half":
        instance = model.gen_prophet_half(n)
        alg = engine.exact_eval(engine.make_policy(demo.policy, instance), instance)
        prophet = engine.expected_prophet(instance)
        out.update(n=n, prophet=prophet, alg=alg, ratio=alg / prophet)
        out["check"] = "pass" if alg / prophet >= 0.5 else "FAIL"
        out["note"] = "exact; ratio -> 1/2"
    elif demo.family == "no-cost":
        instance = model.gen_no_cost_instance(n, v.objective, v.order_selection)
        alg, orc = engine.simulate_paired(demo.policy, instance, demo.oracle, trials, seed)
        same = bool(np.array_equal(alg, orc))
        ratio = math.fsum(alg.tolist()) / math.fsum(orc.tolist())
        out.update(n=n, prophet=float(orc.mean()), alg=float(alg.mean()), ratio=ratio)
        out["check"] = "pass" if same and ratio == 1.0 else "FAIL"
        out["note"] = "pathwise equal on every trial" if same else "pathwise mismatch"
    else:
        raise ValueError(f"no demo runner for family {demo.family!r}")
    return out


def table_rows(n: int = 10_000, trials: int = 10_000, seed: int = 0, demos: bool = True) -> list[dict]:
    rows = []
    for cell in CELLS:
        row = status_row(cell)
        row.update(dict.fromkeys(TABLE_COLUMNS[len(STATUS_COLUMNS):]))
        if demos:
            row.update(run_demo(cell, n, trials, seed))
        rows.append(row)
    return rows

