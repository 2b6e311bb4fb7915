"""Holomorphic functions on the unit disc.

Functions are carried either as truncated Taylor coefficient vectors
(:class:`CoeffSeries`) or as vectorised callables (:class:`HoloCallable`).
Everything here is a pure function of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotSelfMapError, ValidationError
from .quadrature import BoundaryRule, boundary_rule_for, circle_rule

DEFAULT_TRUNC = 128


@dataclass(frozen=True)
class GridSpec:
    """Sampling circle used for Fourier coefficient recovery."""

    grid_size: int = 1024
    radius: float = 0.9

    def __post_init__(self):
        m = self.grid_size
        if m < 2 or m & (m - 1):
            raise ValidationError(f"grid size must be a power of two, got {m}")
        if not 0.0 < self.radius <= 1.0:
            raise ValidationError(f"sampling radius must lie in (0, 1], got {self.radius}")

    def points(self) -> np.ndarray:
        k = np.arange(self.grid_size)
        return self.radius * np.exp(2j * np.pi * k / self.grid_size)


DEFAULT_GRID = GridSpec()


def _as_complex_vector(values) -> np.ndarray:
    arr = np.array(values, dtype=complex).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CoeffSeries:
    """Truncated Taylor series ``sum_{n<N} c_n z^n``."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = _as_complex_vector(self.coeffs)
        if arr.size == 0:
            raise ValidationError("a series needs at least one coefficient")
        object.__setattr__(self, "coeffs", arr)

    @property
    def truncation_order(self) -> int:
        return self.coeffs.size

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    @classmethod
    def constant(cls, c=1.0, trunc: int = 1) -> "CoeffSeries":
        out = np.zeros(trunc, dtype=complex)
        out[0] = c
        return cls(out)

    @classmethod
    def monomial(cls, n: int, trunc: Optional[int] = None, c=1.0) -> "CoeffSeries":
        out = np.zeros(trunc or n + 1, dtype=complex)
        out[n] = c
        return cls(out)

    @classmethod
    def geometric(cls, ratio: complex, trunc: int = DEFAULT_TRUNC, scale=1.0) -> "CoeffSeries":
        """Coefficients ``scale * ratio**n``, i.e. ``scale / (1 - ratio z)``."""
        return cls(scale * complex(ratio) ** np.arange(trunc))

    def __call__(self, z):
        return evaluate(self, z)

    def on_closed(self, z):
        """Horner evaluation without the open-disc check (for boundary grids)."""
        return _horner(self.coeffs, z)

    def resized(self, trunc: int) -> "CoeffSeries":
        out = np.zeros(trunc, dtype=complex)
        n = min(trunc, self.truncation_order)
        out[:n] = self.coeffs[:n]
        return CoeffSeries(out)

    def derivative(self) -> "CoeffSeries":
        if self.truncation_order == 1:
            return CoeffSeries([0.0])
        n = np.arange(1, self.truncation_order)
        return CoeffSeries(n * self.coeffs[1:])

    def rotated(self, lam: complex) -> "CoeffSeries":
        """Coefficients of ``z -> f(lam z)``."""
        return CoeffSeries(self.coeffs * complex(lam) ** np.arange(self.truncation_order))

    def __add__(self, other):
        if isinstance(other, CoeffSeries):
            n = max(self.truncation_order, other.truncation_order)
            return CoeffSeries(self.resized(n).coeffs + other.resized(n).coeffs)
        out = self.coeffs.copy()
        out[0] += other
        return CoeffSeries(out)

    __radd__ = __add__

    def __neg__(self):
        return CoeffSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, CoeffSeries):
            return multiply(self, other)
        return CoeffSeries(self.coeffs * complex(other))

    __rmul__ = __mul__

    def __repr__(self):
        head = ", ".join(f"{c:.4g}" for c in self.coeffs[:4])
        more = ", ..." if self.truncation_order > 4 else ""
        return f"CoeffSeries([{head}{more}], N={self.truncation_order})"


class HoloCallable:
    """A holomorphic function given pointwise.

    ``singularity`` is an optional ``(zeta, frequency)`` pair naming a boundary
    point where the function has an essential singularity of atomic
    singular-inner type; boundary integrals then switch to the Cayley rule.
    """

    def __init__(self, func: Callable, label: str = "callable", singularity=None):
        self.func = func
        self.label = label
        self.singularity = singularity

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def on_closed(self, z):
        return self(z)

    def __repr__(self):
        return f"HoloCallable({self.label})"


class LinearFractional:
    """``z -> (a z + b) / (c z + d)`` as a plain function (no self-map check)."""

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = (complex(a), complex(b), complex(c), complex(d))
        if abs(self.a * self.d - self.b * self.c) < 1e-300:
            raise ValidationError("degenerate linear fractional map (ad - bc = 0)")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def normalized(self) -> tuple:
        """Coefficients scaled so the largest denominator entry has value 1."""
        s = self.d if abs(self.d) >= abs(self.c) else self.c
        return (self.a / s, self.b / s, self.c / s, self.d / s)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def on_closed(self, z):
        return self(z)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * self.d - self.b * self.c) / (self.c * z + self.d) ** 2

    def __repr__(self):
        return f"{type(self).__name__}(({self.a:.6g}) z + ({self.b:.6g}) / ({self.c:.6g}) z + ({self.d:.6g}))"


def _horner(coeffs: np.ndarray, z):
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def closed_eval(f, z):
    """Evaluate a series, callable or map on points of the closed disc."""
    if hasattr(f, "on_closed"):
        return f.on_closed(z)
    return np.asarray(f(np.asarray(z, dtype=complex)), dtype=complex)


def singularity_of(*objs):
    """The common boundary singularity declared by any of ``objs`` (or None)."""
    found = {getattr(o, "singularity", None) for o in objs} - {None}
    if len(found) > 1:
        raise ValidationError("integrands with more than one boundary singularity are not supported")
    return found.pop() if found else None


def evaluate(f: CoeffSeries, z):
    """Horner evaluation of a truncated series at points of the open disc."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValidationError("evaluation points must satisfy |z| < 1")
    out = _horner(f.coeffs, z)
    return complex(out) if out.ndim == 0 else out


def multiply(f: CoeffSeries, g: CoeffSeries) -> CoeffSeries:
    """Cauchy product truncated to the larger truncation order."""
    n = max(f.truncation_order, g.truncation_order)
    return CoeffSeries(np.convolve(f.coeffs, g.coeffs)[:n])


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    radius: float
    samples: np.ndarray
    grid_size: int

    def __post_init__(self):
        m = self.grid_size
        if m < 1 or m & (m - 1):
            raise ValidationError("grid_size must be a power of two")
        if len(self.samples) != m:
            raise ValidationError("samples length must equal grid_size")


def boundary_sample(f, radius: float = 0.9, grid_size: int = 1024) -> BoundaryGrid:
    spec = GridSpec(grid_size, radius)
    vals = np.asarray(closed_eval(f, spec.points()), dtype=complex)
    return BoundaryGrid(radius, vals, grid_size)


def coefficients_from_samples(samples: np.ndarray, radius: float, trunc: int) -> np.ndarray:
    """Taylor coefficients from samples on a circle (columns along axis 0)."""
    m = samples.shape[0]
    if trunc > m:
        raise ValidationError(f"truncation {trunc} exceeds grid size {m}")
    c = np.fft.fft(samples, axis=0)[:trunc] / m
    scale = radius ** -np.arange(trunc, dtype=float)
    if c.ndim == 2:
        return c * scale[:, None]
    return c * scale


def coefficients_from_grid(grid: BoundaryGrid, trunc: int) -> CoeffSeries:
    return CoeffSeries(coefficients_from_samples(grid.samples, grid.radius, trunc))


def series_from_function(f, trunc: int = DEFAULT_TRUNC, grid: GridSpec = DEFAULT_GRID) -> CoeffSeries:
    """Recover the first ``trunc`` Taylor coefficients of a callable."""
    vals = np.asarray(closed_eval(f, grid.points()), dtype=complex)
    return CoeffSeries(coefficients_from_samples(vals, grid.radius, trunc))


def check_self_map(values, what: str = "map") -> None:
    worst = float(np.max(np.abs(values)))
    if not worst < 1.0:
        raise NotSelfMapError(f"{what} is not a self-map numerically: max |phi| = {worst:.16g}")


def compose(f, phi, grid: GridSpec = DEFAULT_GRID, trunc: Optional[int] = None) -> CoeffSeries:
    """Taylor coefficients of ``f o phi`` by sampling on ``grid`` and an FFT."""
    if trunc is None:
        trunc = f.truncation_order if isinstance(f, CoeffSeries) else DEFAULT_TRUNC
    pts = grid.points()
    inner = np.asarray(closed_eval(phi, pts), dtype=complex)
    check_self_map(inner)
    vals = np.asarray(closed_eval(f, inner), dtype=complex)
    return CoeffSeries(coefficients_from_samples(vals, grid.radius, trunc))


def inner_product_h2(f, g, rule: Optional[BoundaryRule] = None) -> complex:
    """H^2 inner product ``<f, g>``.

    Two series pair coefficients exactly.  Anything else is integrated over
    the boundary (Cayley rule when a boundary singularity is declared).
    """
    if isinstance(f, CoeffSeries) and isinstance(g, CoeffSeries) and rule is None:
        n = min(f.truncation_order, g.truncation_order)
        return complex(np.sum(f.coeffs[:n] * np.conj(g.coeffs[:n])))
    if rule is None:
        rule = boundary_rule_for(singularity_of(f, g))
    fv = closed_eval(f, rule.nodes)
    gv = closed_eval(g, rule.nodes)
    return rule.mean(fv * np.conj(gv))


def norm_h2(f, rule: Optional[BoundaryRule] = None) -> float:
    if isinstance(f, CoeffSeries) and rule is None:
        return float(np.linalg.norm(f.coeffs))
    return float(np.sqrt(max(inner_product_h2(f, f, rule).real, 0.0)))


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Positive weights ``d_n`` defining ``||f||^2 = sum |c_n|^2 d_n^2``."""

    d: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        arr = np.array(self.d, dtype=float).ravel()
        if arr.size == 0 or np.any(arr <= 0) or not np.all(np.isfinite(arr)):
            raise ValidationError("weight sequence must be finite and positive")
        arr.setflags(write=False)
        object.__setattr__(self, "d", arr)

    def __len__(self):
        return self.d.size

    @property
    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.d) <= 0))

    def require_decreasing(self) -> "WeightSequence":
        if not self.is_decreasing:
            raise ValidationError(f"weight sequence {self.label!r} is not non-increasing")
        return self

    @classmethod
    def ones(cls, n: int) -> "WeightSequence":
        return cls(np.ones(n), "h2")

    @classmethod
    def power(cls, exponent: float, n: int, label: Optional[str] = None) -> "WeightSequence":
        """``d_n = (n+1)^exponent``."""
        return cls((np.arange(n) + 1.0) ** exponent, label or f"power:{exponent:g}")

    @classmethod
    def bergman(cls, alpha: float, n: int) -> "WeightSequence":
        """Exact monomial norms of the standard weighted Bergman space."""
        from .quadrature import bergman_moment

        return cls(np.sqrt(bergman_moment(np.arange(n), alpha)), f"a2alpha:{alpha:g}")

    @classmethod
    def preset(cls, name: str, n: int) -> "WeightSequence":
        """Named presets: ``h2``, ``bergman``, ``a2alpha:<a>``,
        ``a2alpha-power:<a>`` (``(n+1)^(-a-1)``) and ``a2alpha-asym:<a>``
        (``(n+1)^(-(a+1)/2)``)."""
        kind, _, arg = name.partition(":")
        if kind == "h2":
            return cls.ones(n)
        if kind == "bergman":
            return cls.bergman(0.0, n)
        if kind in ("a2alpha", "a2alpha-power", "a2alpha-asym"):
            try:
                a = float(arg)
            except ValueError:
                raise ValidationError(f"preset {name!r} needs a numeric alpha") from None
            if a <= -1:
                raise ValidationError("alpha must exceed -1")
            if kind == "a2alpha":
                return cls.bergman(a, n)
            if kind == "a2alpha-power":
                return cls.power(-a - 1.0, n, name)
            return cls.power(-(a + 1.0) / 2.0, n, name)
        raise ValidationError(f"unknown weight preset {name!r}")


def norm_h2d(f: CoeffSeries, d: WeightSequence) -> float:
    if len(d) < f.truncation_order:
        raise ValidationError(
            f"weight sequence has {len(d)} terms but the series has {f.truncation_order}")
    c = f.coeffs
    return float(np.sqrt(np.sum(np.abs(c) ** 2 * d.d[: c.size] ** 2)))


@dataclass(frozen=True)
class HinfEstimate:
    value: float
    delta: float
    profile: tuple  # (radius, grid_size, max) per refinement step

    def __float__(self):
        return self.value


def default_hinf_schedule(f) -> tuple:
    if isinstance(f, CoeffSeries):
        return ((0.99, 1024), (0.999, 4096), (1.0, 16384))
    return ((1 - 1e-2, 1024), (1 - 1e-3, 4096), (1 - 1e-4, 16384))


def norm_hinf_estimate(f, schedule: Optional[Sequence] = None) -> HinfEstimate:
    """Sup of ``|f|`` over circles approaching the boundary.

    ``schedule`` is a sequence of ``(radius, grid_size)``; the difference of
    the last two maxima is returned as ``delta``.
    """
    schedule = tuple(schedule or default_hinf_schedule(f))
    profile = []
    for r, m in schedule:
        vals = closed_eval(f, circle_rule(int(m), float(r)).nodes)
        profile.append((float(r), int(m), float(np.max(np.abs(vals)))))
    last = profile[-1][2]
    delta = abs(last - profile[-2][2]) if len(profile) > 1 else 0.0
    return HinfEstimate(last, delta, tuple(profile))


@dataclass(frozen=True)
class InnerProbe:
    status: str  # "inner", "not_inner", "inconclusive"
    path: str  # "structured" or "probe"
    profile: tuple = field(default=())

    def __bool__(self):
        return self.status == "inner"


def is_inner_probe(f, radii: Sequence[float] = (1 - 1e-2, 1 - 1e-3, 1 - 1e-4, 1 - 1e-5, 1 - 1e-6, 1 - 1e-7),
                   tol: float = 1e-4, grid_size: int = 4096, exceptional_mass: float = 0.05) -> InnerProbe:
    """Decide whether ``f`` has unimodular boundary values almost everywhere.

    Structured maps answer exactly.  Otherwise the deviation ``1 - |f(r w)|``
    is sampled on circles approaching the boundary; the reported deviation at
    each radius is its ``1 - exceptional_mass`` quantile, because inner-ness
    tolerates small exceptional sets near boundary singularities.
    """
    exact = getattr(f, "is_inner_exact", None)
    if callable(exact):
        verdict = exact()
        if verdict is not None:
            return InnerProbe("inner" if verdict else "not_inner", "structured")
    profile = []
    for r in radii:
        vals = closed_eval(f, circle_rule(grid_size, r).nodes)
        dev = 1.0 - np.abs(vals)
        profile.append((float(r), float(np.quantile(np.abs(dev), 1.0 - exceptional_mass))))
    last = profile[-1][1]
    if last < tol:
        status = "inner"
    elif last > 10 * tol:
        status = "not_inner"
    else:
        status = "inconclusive"
    return InnerProbe(status, "probe", tuple(profile))


def as_function(f) -> Callable:
    """Vectorised callable view of a series, map or callable on the closed disc."""
    return lambda z: closed_eval(f, z)
