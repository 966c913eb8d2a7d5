"""File formats and the machine-readable report writer."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .factor import FactorPair
from .model import ConeSpec, Polytope
from .slack import matrix_from_dict, matrix_to_dict


def read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise StructuralError(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise StructuralError(f"{p}: not valid JSON ({exc})") from None


def write_text(path, text: str) -> None:
    Path(path).write_text(text)


def load_polytope(path) -> Polytope:
    return Polytope.from_dict(read_json(path))


def load_matrix(path) -> np.ndarray:
    return matrix_from_dict(read_json(path))


def load_factor(path, cone: ConeSpec | None = None) -> FactorPair:
    d = read_json(path)
    if "cone" not in d:
        if cone is None:
            raise StructuralError(f"{path}: factor file has no 'cone'; pass --cone")
        d = dict(d, cone=cone.to_dict())
    F = FactorPair.from_dict(d)
    if cone is not None and F.cone != cone:
        raise StructuralError(f"--cone {cone.to_dict()} disagrees with the file's cone")
    return F


def num(x) -> str:
    """17 significant digits; non-finite values as JSON-style tokens."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def save_json(path, obj) -> None:
    write_text(path, dumps(obj) + "\n")


def save_matrix(path, M) -> None:
    save_json(path, matrix_to_dict(M))


def report(pairs: dict, block: dict | None = None) -> str:
    """``key=value`` lines followed by one JSON block."""
    lines = []
    for k, v in pairs.items():
        if isinstance(v, (float, np.floating)):
            v = num(v)
        elif isinstance(v, (bool, np.bool_)):
            v = "true" if v else "false"
        lines.append(f"{k}={v}")
    if block is not None:
        lines.append(dumps(block))
    return "\n".join(lines) + "\n"
