"""Holomorphic self-maps of the unit disc.

Structured kinds (Moebius, rotation, monomial, finite Blaschke product,
atomic singular inner function) know their derivative, zeros and inner-ness
exactly; series and callable maps fall back on sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EllipticAutomorphismError, NotSelfMapError, ValidationError
from .holofunc import CoeffSeries, LinearFractional, _horner, norm_hinf_estimate

_CAUCHY_NODES = np.exp(2j * np.pi * np.arange(16) / 16)


def cauchy_derivative(f, z):
    """Derivative of a holomorphic callable by a 16-point Cauchy integral."""
    z = np.asarray(z, dtype=complex)
    rho = np.minimum(1e-3, np.maximum((1.0 - np.abs(z)) / 2.0, 1e-6))
    pts = z[..., None] + rho[..., None] * _CAUCHY_NODES
    vals = np.asarray(f(pts), dtype=complex)
    return np.mean(vals * np.conj(_CAUCHY_NODES), axis=-1) / rho


class DiscMap:
    """Base class; subclasses implement ``__call__`` on arrays."""

    kind = "general"
    singularity = None

    def __call__(self, z):  # pragma: no cover - abstract
        raise NotImplementedError

    def on_closed(self, z):
        return self(z)

    def derivative(self, z):
        return cauchy_derivative(self, z)

    def is_inner_exact(self) -> Optional[bool]:
        return None

    def is_automorphism(self) -> bool:
        return False

    def zeros(self) -> Optional[list]:
        """Zeros in the disc when known structurally, else None."""
        return None

    def sup_estimate(self) -> float:
        return norm_hinf_estimate(self).value

    def one_minus_abs2(self, z, s):
        """``1 - |phi(z)|^2`` given ``s = 1 - |z|^2``.

        Automorphisms use ``1 - |phi(z)|^2 = |phi'(z)| (1 - |z|^2)``, which
        stays accurate when the orbit approaches the circle.
        """
        if self.is_automorphism():
            return np.abs(self.derivative(z)) * s
        return 1.0 - np.abs(self(z)) ** 2

    def describe(self) -> dict:
        return {"kind": self.kind}


class Moebius(LinearFractional, DiscMap):
    """Linear fractional self-map of the disc."""

    kind = "moebius"

    def __init__(self, a, b, c, d, validate: bool = True):
        LinearFractional.__init__(self, a, b, c, d)
        self._auto = None
        if validate:
            if abs(self.c) > 0 and abs(self.d / self.c) <= 1.0:
                raise NotSelfMapError("Moebius map has a pole in the closed disc")
            w = np.exp(2j * np.pi * np.arange(4096) / 4096)
            worst = float(np.max(np.abs(self(w))))
            if worst > 1.0 + 1e-12:
                raise NotSelfMapError(f"Moebius map is not a self-map: max |phi| on circle = {worst:.16g}")

    def is_automorphism(self) -> bool:
        if self._auto is None:
            w = np.exp(2j * np.pi * np.array([0.1, 1.3, 2.9, 4.4]))
            self._auto = bool(np.all(np.abs(np.abs(self(w)) - 1.0) < 1e-10))
        return self._auto

    def is_inner_exact(self):
        return self.is_automorphism()

    def zeros(self):
        if abs(self.a) == 0:
            return []
        z0 = -self.b / self.a
        return [z0] if abs(z0) < 1 else []

    def fixed_points(self) -> list:
        """Roots of ``c z^2 + (d - a) z - b = 0`` (finite ones only)."""
        if abs(self.c) < 1e-15 * max(abs(self.a), abs(self.d)):
            if abs(self.d - self.a) < 1e-15 * abs(self.d):
                return []  # identity or translation-like: no isolated finite fixed point
            return [self.b / (self.d - self.a)]
        disc = (self.d - self.a) ** 2 + 4 * self.b * self.c
        scale = max(abs(self.a), abs(self.d), abs(self.b * self.c) ** 0.5) ** 2
        if abs(disc) < 1e-14 * scale:
            double = (self.a - self.d) / (2 * self.c)
            return [double, double]
        roots = np.roots([self.c, self.d - self.a, -self.b])
        return [complex(r) for r in roots]

    def inverse(self) -> "Moebius":
        return Moebius(self.d, -self.b, -self.c, self.a, validate=False)

    def describe(self):
        a, b, c, d = self.normalized()
        return {"kind": "moebius", "num": [_pair(a), _pair(b)], "den": [_pair(c), _pair(d)]}


class Rotation(DiscMap):
    kind = "rotation"

    def __init__(self, lam):
        lam = complex(lam)
        if abs(abs(lam) - 1.0) > 1e-12:
            raise ValidationError(f"rotation multiplier must be unimodular, |lambda| = {abs(lam)!r}")
        self.lam = lam / abs(lam)

    def __call__(self, z):
        return self.lam * np.asarray(z, dtype=complex)

    def derivative(self, z):
        return np.full_like(np.asarray(z, dtype=complex), self.lam)

    def is_inner_exact(self):
        return True

    def is_automorphism(self):
        return True

    def zeros(self):
        return [0j]

    def one_minus_abs2(self, z, s):
        return s

    def describe(self):
        return {"kind": "rotation", "lambda": _pair(self.lam)}


class Monomial(DiscMap):
    kind = "monomial"

    def __init__(self, degree: int):
        if int(degree) != degree or degree < 1:
            raise ValidationError("monomial degree must be a positive integer")
        self.degree = int(degree)

    def __call__(self, z):
        return np.asarray(z, dtype=complex) ** self.degree

    def derivative(self, z):
        return self.degree * np.asarray(z, dtype=complex) ** (self.degree - 1)

    def is_inner_exact(self):
        return True

    def is_automorphism(self):
        return self.degree == 1

    def zeros(self):
        return [0j]

    def describe(self):
        return {"kind": "monomial", "degree": self.degree}


class Blaschke(DiscMap):
    """``phase * prod (z - a_k) / (1 - conj(a_k) z)``."""

    kind = "blaschke"

    def __init__(self, zeros: Sequence, phase=1.0):
        self.zero_list = [complex(a) for a in zeros]
        if not self.zero_list:
            raise ValidationError("a Blaschke product needs at least one zero")
        if any(abs(a) >= 1 for a in self.zero_list):
            raise ValidationError("Blaschke zeros must lie in the open disc")
        phase = complex(phase)
        if abs(abs(phase) - 1.0) > 1e-12:
            raise ValidationError("Blaschke phase must be unimodular")
        self.phase = phase / abs(phase)

    @property
    def degree(self) -> int:
        return len(self.zero_list)

    def _factors(self, z):
        return [(z - a) / (1 - np.conj(a) * z) for a in self.zero_list]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full_like(z, self.phase)
        for f in self._factors(z):
            out = out * f
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        facs = self._factors(z)
        total = np.zeros_like(z)
        for k, a in enumerate(self.zero_list):
            term = (1 - abs(a) ** 2) / (1 - np.conj(a) * z) ** 2
            for j, f in enumerate(facs):
                if j != k:
                    term = term * f
            total = total + term
        return self.phase * total

    def is_inner_exact(self):
        return True

    def is_automorphism(self):
        return self.degree == 1

    def zeros(self):
        return list(self.zero_list)

    def as_moebius(self) -> Moebius:
        if self.degree != 1:
            raise ValidationError("only degree-one Blaschke products are Moebius maps")
        a = self.zero_list[0]
        return Moebius(self.phase, -self.phase * a, -np.conj(a), 1.0)

    def describe(self):
        return {"kind": "blaschke", "zeros": [_pair(a) for a in self.zero_list], "phase": _pair(self.phase)}


class SeriesMap(DiscMap):
    """Self-map given by a truncated Taylor series (treated as a polynomial)."""

    kind = "series"

    def __init__(self, series, validate: bool = True):
        self.series = series if isinstance(series, CoeffSeries) else CoeffSeries(series)
        if validate:
            worst = norm_hinf_estimate(self.series).value
            if worst > 1.0 + 1e-12:
                raise NotSelfMapError(f"series map has sup {worst:.16g} > 1 on the circle")

    def __call__(self, z):
        return _horner(self.series.coeffs, z)

    def derivative(self, z):
        return _horner(self.series.derivative().coeffs, z)

    def describe(self):
        return {"kind": "series", "coeffs": [_pair(c) for c in self.series.coeffs]}


class CallableMap(DiscMap):
    def __init__(self, func, derivative=None, label: str = "callable", singularity=None,
                 inner: Optional[bool] = None, zeros=None):
        self.func = func
        self._derivative = derivative
        self.label = label
        self.singularity = singularity
        self._inner = inner
        self._zeros = zeros

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def derivative(self, z):
        if self._derivative is not None:
            return self._derivative(np.asarray(z, dtype=complex))
        return cauchy_derivative(self, z)

    def is_inner_exact(self):
        return self._inner

    def zeros(self):
        return self._zeros

    def describe(self):
        return {"kind": "callable", "label": self.label}


class SingularInner(CallableMap):
    """Atomic singular inner function ``exp(-mass (zeta + z) / (zeta - z))``."""

    kind = "singular_inner"

    def __init__(self, zeta=1.0, mass: float = 1.0):
        zeta = complex(zeta)
        if abs(abs(zeta) - 1.0) > 1e-12 or mass <= 0:
            raise ValidationError("singular inner needs |zeta| = 1 and mass > 0")
        self.zeta = zeta / abs(zeta)
        self.mass = float(mass)
        super().__init__(self._eval, self._deriv, f"singular_inner(zeta={zeta}, mass={mass})",
                         singularity=(self.zeta, self.mass), inner=True, zeros=[])

    def _eval(self, z):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.exp(-self.mass * (self.zeta + z) / (self.zeta - z))
        return np.where(np.isfinite(out), out, 0.0)

    def _deriv(self, z):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            g = -2.0 * self.mass * self.zeta / (self.zeta - z) ** 2
            out = g * self._eval(z)
        return np.where(np.isfinite(out), out, 0.0)

    def describe(self):
        return {"kind": "singular_inner", "zeta": _pair(self.zeta), "mass": self.mass}


class ComposedMap(DiscMap):
    """``maps[0] o maps[1] o ... o maps[-1]``."""

    def __init__(self, maps: Sequence[DiscMap]):
        self.maps = list(maps)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        for m in reversed(self.maps):
            z = m(z)
        return z

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for m in reversed(self.maps):
            out = out * m.derivative(z)
            z = m(z)
        return out

    def is_inner_exact(self):
        flags = [m.is_inner_exact() for m in self.maps]
        return True if all(f is True for f in flags) else None

    def is_automorphism(self):
        return all(m.is_automorphism() for m in self.maps)

    def describe(self):
        return {"kind": "composed", "maps": [m.describe() for m in self.maps]}


def _pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def identity_map() -> Rotation:
    return Rotation(1.0)


def psi_involution(a) -> Moebius:
    """The involutive automorphism ``z -> (a - z) / (1 - conj(a) z)``."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValidationError("psi_a needs |a| < 1")
    return Moebius(-1.0, a, -np.conj(a), 1.0, validate=False)


def as_moebius(phi):
    if isinstance(phi, Moebius):
        return phi
    if isinstance(phi, Rotation):
        return Moebius(phi.lam, 0.0, 0.0, 1.0, validate=False)
    if isinstance(phi, Blaschke) and phi.degree == 1:
        return phi.as_moebius()
    return None


def compose_maps(outer: DiscMap, inner: DiscMap) -> DiscMap:
    """``outer o inner``; Moebius pairs stay Moebius."""
    mo, mi = as_moebius(outer), as_moebius(inner)
    if mo is not None and mi is not None:
        m = mo.matrix @ mi.matrix
        return Moebius(*m.ravel(), validate=False)
    return ComposedMap([outer, inner])


def iterate_map(phi: DiscMap, k: int) -> DiscMap:
    """The ``k``-th iterate ``phi_k``."""
    if int(k) != k or k < 1:
        raise ValidationError("iterate count must be a positive integer")
    if isinstance(phi, Rotation):
        return Rotation(phi.lam ** k)
    if isinstance(phi, Monomial):
        return Monomial(phi.degree ** k)
    if k == 1:
        return phi
    return ComposedMap([phi] * int(k))


@dataclass(frozen=True)
class AutomorphismClass:
    kind: str  # elliptic, parabolic, hyperbolic, not_automorphism
    order: Optional[int] = None  # elliptic only; None means infinite order
    fixed_point: Optional[complex] = None
    multiplier: Optional[complex] = None
    attractive: Optional[complex] = None
    repulsive: Optional[complex] = None
    deriv_attractive: Optional[float] = None
    deriv_repulsive: Optional[float] = None

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        for key in ("order", "fixed_point", "multiplier", "attractive", "repulsive",
                    "deriv_attractive", "deriv_repulsive"):
            v = getattr(self, key)
            if v is not None:
                out[key] = _pair(v) if isinstance(v, complex) else v
        if self.kind == "elliptic" and self.order is None:
            out["order"] = "infinite"
        return out


def root_of_unity_order(lam: complex, max_order: int = 64, tol: float = 1e-10) -> Optional[int]:
    for k in range(1, max_order + 1):
        if abs(lam ** k - 1.0) < tol:
            return k
    return None


def classify_automorphism(phi: DiscMap, max_order: int = 64) -> AutomorphismClass:
    if isinstance(phi, Rotation):
        return AutomorphismClass("elliptic", root_of_unity_order(phi.lam, max_order), 0j, phi.lam)
    m = as_moebius(phi)
    if m is None or not m.is_automorphism():
        return AutomorphismClass("not_automorphism")
    fps = m.fixed_points()
    if len(fps) == 1:
        fps = fps + [complex("inf")]
    inside = [p for p in fps if abs(p) < 1 - 1e-9]
    if inside:
        p = inside[0]
        lam = complex(m.derivative(p))
        return AutomorphismClass("elliptic", root_of_unity_order(lam, max_order), p, lam)
    p1, p2 = fps
    if abs(p1 - p2) < 1e-6:
        p = (p1 + p2) / 2
        p = p / abs(p)
        return AutomorphismClass("parabolic", fixed_point=p, multiplier=complex(m.derivative(p)))
    d1, d2 = abs(complex(m.derivative(p1))), abs(complex(m.derivative(p2)))
    if d1 > d2:
        p1, p2, d1, d2 = p2, p1, d2, d1
    return AutomorphismClass("hyperbolic", attractive=p1, repulsive=p2,
                             deriv_attractive=d1, deriv_repulsive=d2)


def _neville_at_zero(h, q):
    """Polynomial extrapolation of samples ``q(h)`` to ``h = 0``."""
    h = list(map(float, h))
    p = list(map(float, q))
    n = len(h)
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            p[i] = (h[i] * p[i + 1] - h[j] * p[i]) / (h[i] - h[j])
    return p[0]


def angular_derivative(phi: DiscMap, omega, radii=(0.9, 0.99, 0.999)) -> tuple:
    """Radial quotient ``(1 - |phi(r w)|) / (1 - r)`` extrapolated to ``r = 1``.

    Returns ``(estimate, quotients)``.
    """
    omega = complex(omega) / abs(complex(omega))
    q = []
    for r in radii:
        val = complex(phi(np.array([r * omega]))[0])
        q.append((1.0 - abs(val)) / (1.0 - r))
    return _neville_at_zero([1 - r for r in radii], q), tuple(q)


@dataclass
class FixedPointReport:
    dw_point: complex
    location: str  # interior or boundary
    derivative: complex
    status: str = "converged"  # converged or max_iter
    order_if_elliptic_root_of_unity: Optional[int] = None
    iterates_trace: list = field(default_factory=list)
    iterations: int = 0
    method: str = "iteration"
    radial_quotients: tuple = ()

    def as_dict(self) -> dict:
        return {
            "dw_point": _pair(self.dw_point),
            "location": self.location,
            "derivative": _pair(self.derivative),
            "status": self.status,
            "method": self.method,
            "iterations": self.iterations,
            "radial_quotients": list(self.radial_quotients),
            "iterates_trace_head": [_pair(z) for z in self.iterates_trace[:10]],
        }


def denjoy_wolff(phi: DiscMap, tol: float = 1e-12, max_iter: int = 100000,
                 trace_len: int = 200) -> FixedPointReport:
    """Denjoy-Wolff point by iteration from 0.

    Moebius maps get their fixed points from the quadratic; the iterate trace
    is recorded either way.  Interior points must attract (``|phi'| < 1``).
    """
    cls = classify_automorphism(phi)
    if cls.kind == "elliptic":
        raise EllipticAutomorphismError("phi is an elliptic automorphism; no Denjoy-Wolff point")

    m = as_moebius(phi)
    if m is not None:
        max_iter = min(max_iter, trace_len)
    z = 0j
    trace = [z]
    status = "max_iter"
    n = 0
    for n in range(1, max_iter + 1):
        z_next = complex(phi(np.array([z]))[0])
        if len(trace) < trace_len:
            trace.append(z_next)
        if abs(z_next) >= 1.0 or not math.isfinite(abs(z_next)):
            z = z_next
            status = "converged"
            break
        step = abs(z_next - z)
        z = z_next
        if step < tol:
            status = "converged"
            break

    if m is not None:
        return _moebius_dw(m, phi, trace, n)

    if status == "converged" and abs(z) < 1 - 10 * tol:
        deriv = complex(phi.derivative(np.array([z]))[0])
        if abs(deriv) < 1:
            return FixedPointReport(z, "interior", deriv, status, None, trace, n)
    if abs(z) > 1 - 1e-3:
        omega = z / abs(z)
        est, quot = angular_derivative(phi, omega)
        return FixedPointReport(omega, "boundary", complex(est), status, None, trace, n,
                                radial_quotients=quot)
    return FixedPointReport(z, "interior", complex(phi.derivative(np.array([z]))[0]),
                            "max_iter", None, trace, n)


def _moebius_dw(m: Moebius, phi, trace, n) -> FixedPointReport:
    fps = [p for p in m.fixed_points() if np.isfinite(abs(p))]
    inside = [p for p in fps if abs(p) < 1 - 1e-12 and abs(m.derivative(p)) < 1]
    if inside:
        p = inside[0]
        return FixedPointReport(p, "interior", complex(m.derivative(p)), "converged", None,
                                trace, n, "moebius-exact")
    on_circle = [p for p in fps if abs(abs(p) - 1.0) < 1e-6]
    if not on_circle:
        raise ValidationError("Moebius self-map without an attracting fixed point in the closed disc")
    # the Denjoy-Wolff point is the boundary fixed point with angular derivative <= 1
    best = min(on_circle, key=lambda p: abs(m.derivative(p)))
    best = best / abs(best)
    est, quot = angular_derivative(phi, best)
    return FixedPointReport(best, "boundary", complex(est), "converged", None, trace, n,
                            "moebius-exact", quot)
