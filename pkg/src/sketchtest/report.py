"""Serialisation helpers: JSON with 17-significant-digit floats, Wilson
intervals, CSV summaries and the versioned report schema."""

from __future__ import annotations

import csv
import json
import math
from importlib import resources

import numpy as np

FORMAT_VERSION = "1.0"


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"  # JSON has no NaN/Inf
    s = "%.17g" % x
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text in which every float carries 17 significant digits."""
    def emit(o, level):
        o = _plain(o)
        pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
        end = "" if indent is None else "\n" + " " * (indent * level)
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _float(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {emit(v, level + 1)}" for k, v in o.items()]
            return "{" + ",".join(items) + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            items = [pad + emit(v, level + 1) for v in o]
            return "[" + ",".join(items) + end + "]"
        raise TypeError(f"cannot serialise {type(o).__name__}")
    return emit(obj, 0)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial rate."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def rate_summary(successes: int, n: int) -> dict:
    lo, hi = wilson_interval(successes, n)
    return {"count": successes, "n": n, "rate": successes / n if n else float("nan"),
            "wilson_low": lo, "wilson_high": hi}


def write_csv(path, rows: list[dict]) -> None:
    if not rows:
        open(path, "w").close()
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def report_schema() -> dict:
    return json.loads(resources.files("sketchtest").joinpath("report_schema.json").read_text())
