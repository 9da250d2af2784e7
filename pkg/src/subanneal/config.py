"""Reader for the ``key = value`` text files used by the CLI.

Values are numbers, comma-separated number lists, strings, or the grid
shorthands ``geom LO HI COUNT`` and ``linear LO HI COUNT``.
"""
from __future__ import annotations

import numpy as np


def _number(token: str):
    try:
        return int(token)
    except ValueError:
        return float(token)


def parse_value(text: str):
    text = text.strip()
    words = text.split()
    if words and words[0] in ("geom", "linear") and len(words) == 4:
        lo, hi, count = float(words[1]), float(words[2]), int(words[3])
        if words[0] == "geom":
            return np.geomspace(lo, hi, count).tolist()
        return np.linspace(lo, hi, count).tolist()
    if "," in text:
        return [_number(t) for t in text.split(",") if t.strip()]
    try:
        return _number(text)
    except ValueError:
        return text


def read_config(path) -> dict:
    out = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = parse_value(value)
    return out


def as_list(value) -> list:
    return value if isinstance(value, list) else [value]
