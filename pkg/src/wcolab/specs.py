"""JSON specs for weights, maps, spaces and operators.

Complex numbers are written as a bare number or an ``[re, im]`` pair.

Maps::

    {"kind": "moebius", "num": [a, b], "den": [c, d]}
    {"kind": "rotation", "lambda": [re, im]}
    {"kind": "blaschke", "zeros": [[re, im], ...], "phase": [re, im]}
    {"kind": "series", "coeffs": [...]}
    {"kind": "monomial", "degree": N}
    {"kind": "singular_inner", "zeta": [re, im], "mass": s}
    {"kind": "identity"}

Weights are a coefficient list, or ``{"kind": "series" | "moebius" | "constant", ...}``.
"""
from __future__ import annotations

import json
from typing import Any, Optional

import numpy as np

from .discmap import (Blaschke, Moebius, Monomial, Rotation, SeriesMap, SingularInner,
                      identity_map)
from .errors import ValidationError
from .holofunc import CoeffSeries, GridSpec, LinearFractional, WeightSequence
from .transfer import HalfPlaneMap
from .wco import Space, WeightedCompositionOp


def load_json(text_or_obj):
    if not isinstance(text_or_obj, str):
        return text_or_obj
    try:
        return json.loads(text_or_obj)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None


def parse_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValidationError(f"expected a number or [re, im] pair, got {v!r}")


def parse_coeffs(values) -> CoeffSeries:
    if not isinstance(values, list) or not values:
        raise ValidationError("coefficient list must be a non-empty JSON array")
    return CoeffSeries([parse_complex(v) for v in values])


def parse_map(spec):
    spec = load_json(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("map spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "moebius":
            a, b = (parse_complex(x) for x in spec["num"])
            c, d = (parse_complex(x) for x in spec["den"])
            return Moebius(a, b, c, d)
        if kind == "rotation":
            return Rotation(parse_complex(spec["lambda"]))
        if kind == "blaschke":
            zeros = [parse_complex(z) for z in spec["zeros"]]
            if any(abs(z) >= 1 for z in zeros):
                raise ValidationError("Blaschke zeros must lie in the open disc")
            return Blaschke(zeros, parse_complex(spec.get("phase", 1.0)))
        if kind == "series":
            return SeriesMap(parse_coeffs(spec["coeffs"]))
        if kind == "monomial":
            return Monomial(int(spec["degree"]))
        if kind == "singular_inner":
            return SingularInner(parse_complex(spec.get("zeta", 1.0)), float(spec.get("mass", 1.0)))
        if kind == "identity":
            return identity_map()
    except KeyError as exc:
        raise ValidationError(f"map spec of kind {kind!r} is missing {exc}") from None
    raise ValidationError(f"unknown map kind {kind!r}")


def parse_weight(spec):
    spec = load_json(spec)
    if isinstance(spec, list):
        return parse_coeffs(spec)
    if isinstance(spec, (int, float)):
        return CoeffSeries([complex(spec)])
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "series":
            return parse_coeffs(spec["coeffs"])
        if kind == "constant":
            return CoeffSeries([parse_complex(spec["value"])])
        if kind == "moebius":
            a, b = (parse_complex(x) for x in spec["num"])
            c, d = (parse_complex(x) for x in spec["den"])
            if abs(c) > 0 and abs(d / c) <= 1.0:
                raise ValidationError("weight has a pole in the closed disc")
            return LinearFractional(a, b, c, d)
    raise ValidationError(f"unsupported weight spec {spec!r}")


def parse_space(text: Optional[str]) -> Space:
    """``h2``, ``a2``, ``a2alpha:<a>``, or ``h2d:<preset>`` (see :meth:`WeightSequence.preset`)."""
    if text is None or text == "h2":
        return Space.h2()
    if text == "a2":
        return Space.a2alpha(0.0)
    if text.startswith("a2alpha:"):
        try:
            return Space.a2alpha(float(text.split(":", 1)[1]))
        except ValueError:
            raise ValidationError(f"bad alpha in {text!r}") from None
    if text.startswith("h2d:"):
        name = text.split(":", 1)[1]
        WeightSequence.preset(name, 4).require_decreasing()
        return Space.h2d(name)
    raise ValidationError(f"unknown space {text!r}")


def parse_halfplane(text: str) -> HalfPlaneMap:
    """``affine:a,b`` for ``Phi(s) = a s + b`` (``b`` may be ``re+imj``)."""
    if not text.startswith("affine:"):
        raise ValidationError("half-plane maps are given as 'affine:a,b'")
    parts = text.split(":", 1)[1].split(",")
    if len(parts) not in (1, 2):
        raise ValidationError("expected 'affine:a,b'")
    try:
        a = float(parts[0])
        b = complex(parts[1].replace("i", "j")) if len(parts) == 2 else 0j
    except ValueError:
        raise ValidationError(f"cannot parse {text!r}") from None
    return HalfPlaneMap.affine(a, b)


def build_operator(weight: Any, phi: Any, space: Optional[str] = None, trunc: int = 128,
                   grid: Optional[int] = None, radius: Optional[float] = None) -> WeightedCompositionOp:
    w = parse_weight(weight) if weight is not None else CoeffSeries([1.0])
    m = parse_map(phi)
    gs = None
    if grid is not None or radius is not None:
        gs = GridSpec(int(grid or 1024), float(radius or 0.9))
    return WeightedCompositionOp(w, m, parse_space(space), int(trunc), gs)


def to_jsonable(obj):
    """Plain JSON types: complex -> [re, im], arrays -> lists, non-finite -> string."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    return repr(obj)
