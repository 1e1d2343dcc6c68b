"""Deterministic JSON reports shared by every subcommand.

Keys are sorted, floats carry exactly 12 digits after the decimal point and
integers stay integers, so two runs of the same command produce identical
bytes apart from the ``timing`` section.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from ctxlab import __version__

RESULT_SECTIONS = ("bounds", "catalog", "checks", "error_terms", "estimate", "exact", "quantum")


def format_float(x: float) -> str:
    s = f"{x:.12f}"
    if s.startswith("-") and float(s) == 0:
        s = s[1:]
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


@dataclass
class Report:
    command: list[str]
    version: str = __version__
    inequality: dict | None = None
    seed: int | None = None
    results: dict = field(default_factory=lambda: {k: None for k in RESULT_SECTIONS})
    timing: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        unknown = set(d) - {"command", "version", "inequality", "seed", "results", "timing"}
        if unknown:
            raise ValueError(f"unexpected report fields {sorted(unknown)}")
        results = {k: None for k in RESULT_SECTIONS}
        results.update(d.get("results") or {})
        return cls(
            command=d["command"],
            version=d["version"],
            inequality=d.get("inequality"),
            seed=d.get("seed"),
            results=results,
            timing=d.get("timing") or {},
        )

    def without_timing(self) -> str:
        d = asdict(self)
        d["timing"] = {}
        return dumps(d)
