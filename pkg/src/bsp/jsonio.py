"""Byte-stable JSON: sorted keys and floats with 17 significant digits."""

from __future__ import annotations

import json
import math

import numpy as np


def _float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"cannot serialize non-finite float {v}")
    s = format(v, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _encode(obj, out: list, indent: int, level: int) -> None:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(sep)
            out.append(pad + json.dumps(str(key)) + ": ")
            _encode(obj[key], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(items):
            if i:
                out.append(sep)
            out.append(pad)
            _encode(item, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 0) -> str:
    out: list = []
    _encode(obj, out, indent, 0)
    return "".join(out)


def dump(obj, path, indent: int = 0) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj, indent))
        fh.write("\n")


def load(path):
    with open(path) as fh:
        return json.load(fh)
