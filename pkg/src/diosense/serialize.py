"""Deterministic JSON output and flat ``key=value`` configuration files."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import DomainError


def _normalize(obj: Any) -> Any:
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(float(obj))
    if isinstance(obj, Fraction):
        return {"numerator": obj.numerator, "denominator": obj.denominator}
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return {"re": _Float(obj.real), "im": _Float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [_normalize(x) for x in obj.tolist()]
    if isinstance(obj, Mapping):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_normalize(x) for x in items]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return _normalize(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class _Float(float):
    """Marker so the encoder can emit 17 significant digits."""


def _encode(o, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(o, _Float):
        if math.isnan(o) or math.isinf(o):
            yield json.dumps(None)
        else:
            yield format(float(o), ".17g")
    elif isinstance(o, dict):
        if not o:
            yield "{}"
            return
        yield "{"
        for i, (k, v) in enumerate(sorted(o.items())):
            yield (sep if i else "") + pad + json.dumps(k) + ": "
            yield from _encode(v, indent, level + 1)
        yield end + "}"
    elif isinstance(o, list):
        if not o:
            yield "[]"
            return
        flat = all(not isinstance(x, (dict, list)) for x in o)
        yield "["
        for i, v in enumerate(o):
            yield (", " if i else "") if flat else ((sep if i else "") + pad)
            yield from _encode(v, indent, level + 1)
        yield "]" if flat else end + "]"
    else:
        yield json.dumps(o)


def dumps(obj: Any, indent: int | None = 2) -> str:
    """Sorted keys, floats at 17 significant digits, byte-stable across runs."""
    return "".join(_encode(_normalize(obj), indent, 0)) + "\n"


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def _coerce(text: str) -> Any:
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    if "," in t:
        return [_coerce(p) for p in t.split(",") if p.strip()]
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def parse_config(lines: Iterable[str], source: str = "<config>") -> dict[str, Any]:
    """Flat ``key = value`` lines; ``#`` starts a comment; commas make lists."""
    out: dict[str, Any] = {}
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{source}:{no}: expected key=value, got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise DomainError(f"{source}:{no}: empty key")
        out[key] = _coerce(value)
    return out


def load_config(path: str | Path | None, overrides: Iterable[str] = ()) -> dict[str, Any]:
    cfg: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise DomainError(f"cannot read config {p}: {exc.strerror}") from None
        cfg.update(parse_config(text.splitlines(), str(p)))
    cfg.update(parse_config(overrides, "--set"))
    return cfg


def snr_range(spec: Any) -> list[float]:
    """``"-10:10:2"`` (inclusive) or an explicit list."""
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, list):
        return [float(x) for x in spec]
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise DomainError(f"SNR range must be lo:hi:step or a list, got {spec!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise DomainError(f"bad SNR range {spec!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]
