"""JSON fan files: ``{"dim": n, "rays": [[...]], "max_cones": [[...]]}``."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

from .fan import Fan, FanError

KEYS = ("dim", "rays", "max_cones")


class FanFormatError(FanError):
    pass


def fan_to_dict(fan: Fan) -> dict[str, Any]:
    return {
        "dim": fan.dim,
        "rays": [list(r) for r in fan.rays],
        "max_cones": [sorted(c) for c in fan.max_cones],
    }


def fan_from_dict(data: Any) -> Fan:
    if not isinstance(data, dict):
        raise FanFormatError("fan file must contain a JSON object")
    unknown = sorted(set(data) - set(KEYS))
    if unknown:
        raise FanFormatError(f"unknown key(s): {', '.join(unknown)}")
    for key in KEYS:
        if key not in data:
            raise FanFormatError(f"missing key: {key}")
    dim, rays, cones = data["dim"], data["rays"], data["max_cones"]
    if not _is_int(dim) or dim < 1:
        raise FanFormatError("dim must be a positive integer")
    if not isinstance(rays, list) or not all(isinstance(r, list) and all(_is_int(c) for c in r) for r in rays):
        raise FanFormatError("rays must be a list of integer lists")
    if not isinstance(cones, list) or not all(isinstance(c, list) and all(_is_int(i) for i in c) for c in cones):
        raise FanFormatError("max_cones must be a list of integer lists")
    for k, r in enumerate(rays):
        if len(r) != dim:
            raise FanFormatError(f"dimension mismatch: ray {k} has length {len(r)}, dim is {dim}")
    try:
        return Fan(dim, tuple(tuple(r) for r in rays), tuple(tuple(c) for c in cones))
    except FanError as exc:
        if "non-primitive" in str(exc):
            raise FanFormatError(f"non-primitive ray: {exc}") from None
        raise FanFormatError(str(exc)) from None


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def dumps(fan: Fan) -> str:
    d = fan_to_dict(fan)
    rays = ",\n    ".join(json.dumps(r) for r in d["rays"])
    cones = ",\n    ".join(json.dumps(c) for c in d["max_cones"])
    return f'{{\n  "dim": {d["dim"]},\n  "rays": [\n    {rays}\n  ],\n  "max_cones": [\n    {cones}\n  ]\n}}\n'


def parse_fan(path: Union[str, Path]) -> Fan:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FanFormatError(f"malformed JSON in {path}: {exc}") from None
    return fan_from_dict(data)


def serialize_fan(fan: Fan, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(fan))
