"""Canonical JSON: sorted keys, floats rounded to 12 significant digits."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

FLOAT_DIGITS = 12


def canonical(obj):
    """Recursively convert to plain JSON types with rounded floats."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return repr(x)
        return float(f"{x:.{FLOAT_DIGITS}g}")
    if hasattr(obj, "to_json"):
        return canonical(obj.to_json())
    return obj


def dumps(obj) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=1) + "\n"


def write(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def diff(a, b, prefix: str = "") -> list[str]:
    """Paths at which two canonical JSON values differ."""
    if isinstance(a, dict) and isinstance(b, dict):
        out = []
        for k in sorted(set(a) | set(b)):
            p = f"{prefix}.{k}" if prefix else str(k)
            if k not in a or k not in b:
                out.append(p)
            else:
                out += diff(a[k], b[k], p)
        return out
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{prefix}[len {len(a)} != {len(b)}]"]
        out = []
        for i, (x, y) in enumerate(zip(a, b)):
            out += diff(x, y, f"{prefix}[{i}]")
        return out
    return [] if a == b else [prefix or "<root>"]
