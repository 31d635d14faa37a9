"""Instance files: versioned JSON, strict about unknown fields."""

from __future__ import annotations

import json
import math

from .distributions import make_distribution
from .errors import InstanceFormatError, ProphetBoxError
from .model import Box, Instance, Objective, VariantSpec

SCHEMA_VERSION = 1
_TOP_KEYS = {"schema_version", "variant", "boxes"}
_VARIANT_KEYS = {"objective", "commitment", "observation_cost", "order_selection"}
_BOX_KEYS = {"cost", "dist"}


def instance_to_dict(instance: Instance) -> dict:
    v = instance.variant
    return {
        "schema_version": SCHEMA_VERSION,
        "variant": {
            "objective": v.objective.value,
            "commitment": v.commitment,
            "observation_cost": v.observation_cost,
            "order_selection": v.order_selection,
        },
        "boxes": [
            {"cost": box.cost, "dist": [[value, prob] for value, prob in box.dist.pairs]} for box in instance.boxes
        ],
    }


def emit_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1) + "\n"


def _check_keys(obj, expected: set, where: str):
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where} must be an object")
    unknown = set(obj) - expected
    if unknown:
        raise InstanceFormatError(f"unknown field(s) in {where}: {sorted(unknown)}")
    missing = expected - set(obj)
    if missing:
        raise InstanceFormatError(f"missing field(s) in {where}: {sorted(missing)}")


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise InstanceFormatError(f"{where} must be a finite number")
    return float(x)


def _flag(x, where: str) -> bool:
    if not isinstance(x, bool):
        raise InstanceFormatError(f"{where} must be true or false")
    return x


def instance_from_dict(data) -> Instance:
    _check_keys(data, _TOP_KEYS, "instance")
    if data["schema_version"] != SCHEMA_VERSION:
        raise InstanceFormatError(f"unsupported schema_version {data['schema_version']!r}")
    raw = data["variant"]
    _check_keys(raw, _VARIANT_KEYS, "variant")
    if raw["objective"] not in (o.value for o in Objective):
        raise InstanceFormatError("variant.objective must be 'min' or 'max'")
    variant = VariantSpec(
        Objective(raw["objective"]),
        _flag(raw["commitment"], "variant.commitment"),
        _flag(raw["observation_cost"], "variant.observation_cost"),
        _flag(raw["order_selection"], "variant.order_selection"),
    )
    if not isinstance(data["boxes"], list):
        raise InstanceFormatError("boxes must be a list")
    boxes = []
    for k, box in enumerate(data["boxes"]):
        _check_keys(box, _BOX_KEYS, f"boxes[{k}]")
        pairs = box["dist"]
        if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
            raise InstanceFormatError(f"boxes[{k}].dist must be a list of [value, probability] pairs")
        dist = make_distribution(
            (_number(v, f"boxes[{k}].dist value"), _number(p, f"boxes[{k}].dist probability")) for v, p in pairs
        )
        boxes.append(Box(_number(box["cost"], f"boxes[{k}].cost"), dist))
    return Instance(variant, tuple(boxes))


def parse_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from None
    try:
        return instance_from_dict(data)
    except ProphetBoxError:
        raise
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def save_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_instance(instance))


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())
