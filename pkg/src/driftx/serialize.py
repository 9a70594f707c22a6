"""Deterministic text serialization helpers.

All floating-point values written to CSV/JSON use 17 significant digits,
which round-trips 64-bit floats exactly. The stdlib json module does not
allow customizing float formatting, so report JSON is emitted by the small
writer below (dict/list/str/bool/int/float/None only, insertion key order).
"""

import math


def fmt_float(value: float) -> str:
    """Format a float with 17 significant digits (bit round-trip exact)."""
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"non-finite value cannot be serialized: {value!r}")
    return format(float(value), ".17g")


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def dumps_json(obj, indent: int = 2) -> str:
    """Serialize nested dicts/lists with fixed float formatting."""
    pieces = []
    _write(obj, pieces, indent, 0)
    pieces.append("\n")
    return "".join(pieces)


def _write(obj, pieces, indent, level):
    pad = " " * (indent * (level + 1))
    closepad = " " * (indent * level)
    if obj is None:
        pieces.append("null")
    elif isinstance(obj, bool):
        pieces.append("true" if obj else "false")
    elif isinstance(obj, int):
        pieces.append(str(obj))
    elif isinstance(obj, float):
        pieces.append(fmt_float(obj))
    elif isinstance(obj, str):
        pieces.append(f'"{_escape(obj)}"')
    elif isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {type(key)}")
            pieces.append(f'{pad}"{_escape(key)}": ')
            _write(value, pieces, indent, level + 1)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(closepad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            pieces.append("[]")
            return
        pieces.append("[\n")
        for i, value in enumerate(obj):
            pieces.append(pad)
            _write(value, pieces, indent, level + 1)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(closepad + "]")
    else:
        # numpy scalars and similar: fall back on the float/int path
        if hasattr(obj, "item"):
            _write(obj.item(), pieces, indent, level)
        else:
            raise TypeError(f"cannot serialize {type(obj)} to JSON")


def dump_json(obj, path, indent: int = 2) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj, indent=indent))
