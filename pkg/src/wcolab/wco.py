"""The weighted composition operator ``f -> w * (f o phi)``.

Finite sections are built on the monomial basis, orthonormalised for the
target space (``e_n = z^n / d_n``), by sampling on a circle and recovering
Taylor coefficients with an FFT.  Iterates are available two ways: the
pointwise product formula (:func:`iterate_direct`) and matrix powers of the
finite section (:func:`iterate_matrix`).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .discmap import DiscMap, compose_maps, psi_involution
from .errors import DivergenceError, NotSelfMapError, ValidationError
from .holofunc import (DEFAULT_GRID, DEFAULT_TRUNC, CoeffSeries, GridSpec, HoloCallable,
                       WeightSequence, check_self_map, closed_eval, coefficients_from_samples)

OVERFLOW_GUARD = 1e12


@dataclass(frozen=True)
class Space:
    """Target space: ``H2``, ``H2d`` (weights ``d_n``) or ``A2alpha``."""

    kind: str = "H2"
    preset: Optional[str] = None
    d: Optional[WeightSequence] = None
    alpha: float = 0.0

    @classmethod
    def h2(cls):
        return cls("H2")

    @classmethod
    def h2d(cls, d):
        """``d`` is a :class:`WeightSequence` or a preset name."""
        if isinstance(d, str):
            return cls("H2d", preset=d)
        return cls("H2d", d=d)

    @classmethod
    def a2alpha(cls, alpha: float = 0.0):
        if alpha <= -1:
            raise ValidationError("alpha must exceed -1")
        return cls("A2alpha", alpha=float(alpha))

    def weights(self, n: int) -> np.ndarray:
        if self.kind == "H2":
            return np.ones(n)
        if self.kind == "A2alpha":
            return WeightSequence.bergman(self.alpha, n).d
        if self.preset is not None:
            return WeightSequence.preset(self.preset, n).d
        if len(self.d) < n:
            raise ValidationError(f"weight sequence has {len(self.d)} terms, need {n}")
        return self.d.d[:n]

    @property
    def label(self) -> str:
        if self.kind == "H2":
            return "h2"
        if self.kind == "A2alpha":
            return f"a2alpha:{self.alpha:g}"
        return f"h2d:{self.preset or self.d.label}"


H2 = Space.h2()


def grid_for(trunc: int, base: GridSpec = DEFAULT_GRID, amplification: float = 1e8,
             aliasing: float = 1e-20) -> GridSpec:
    """Sampling circle adequate for ``trunc`` coefficients.

    Recovering ``c_n`` multiplies rounding error by ``r^-n``, so the radius is
    raised until ``r^-trunc <= amplification``; the grid is then grown until
    the aliased tail ``r^M`` drops below ``aliasing``.
    """
    r = max(base.radius, amplification ** (-1.0 / trunc))
    need = max(base.grid_size, 2 * trunc, int(np.ceil(np.log(aliasing) / np.log(r))) if r < 1 else 0)
    m = 1
    while m < need:
        m *= 2
    return GridSpec(m, r)


@dataclass(frozen=True, eq=False)
class WeightedCompositionOp:
    w: object  # CoeffSeries or callable
    phi: DiscMap
    space: Space = H2
    trunc: int = DEFAULT_TRUNC
    grid: Optional[GridSpec] = None

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", grid_for(self.trunc))
        if self.trunc < 1 or self.trunc > self.grid.grid_size:
            raise ValidationError("truncation must lie in [1, grid_size]")

    def weight_at(self, z):
        return np.asarray(closed_eval(self.w, z), dtype=complex)

    def with_trunc(self, trunc: int) -> "WeightedCompositionOp":
        return replace(self, trunc=trunc, grid=grid_for(trunc, self.grid))

    def with_space(self, space: Space) -> "WeightedCompositionOp":
        return replace(self, space=space)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Finite section in the orthonormal monomial basis of ``space``."""

    entries: np.ndarray
    basis_weights: np.ndarray

    @property
    def trunc(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def monomial_entries(self) -> np.ndarray:
        d = self.basis_weights
        return self.entries * d[None, :] / d[:, None]

    def apply(self, f: CoeffSeries) -> CoeffSeries:
        """Apply to a series given by monomial coefficients."""
        c = f.resized(self.trunc).coeffs
        d = self.basis_weights
        return CoeffSeries((self.entries @ (c * d)) / d)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries, self.basis_weights)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in self.entries:
                writer.writerow([f"{float(c.real)!r},{float(c.imag)!r}" for c in row])


def _section(wvals: np.ndarray, zvals: np.ndarray, trunc: int, grid: GridSpec,
             space: Space) -> OperatorMatrix:
    cols = np.empty((zvals.size, trunc), dtype=complex)
    cols[:, 0] = 1.0
    if trunc > 1:
        cols[:, 1:] = zvals[:, None]
        np.cumprod(cols[:, 1:], axis=1, out=cols[:, 1:])
    cols *= wvals[:, None]
    a = coefficients_from_samples(cols, grid.radius, trunc)
    d = space.weights(trunc)
    return OperatorMatrix(a * d[:, None] / d[None, :], d)


def build_matrix(op: WeightedCompositionOp, trunc: Optional[int] = None) -> OperatorMatrix:
    """Column ``j`` holds the coefficients of ``w * phi**j`` (orthonormalised)."""
    if trunc is not None and trunc != op.trunc:
        op = op.with_trunc(trunc)
    pts = op.grid.points()
    zvals = np.asarray(op.phi(pts), dtype=complex)
    check_self_map(zvals)
    return _section(op.weight_at(pts), zvals, op.trunc, op.grid, op.space)


def apply(op: WeightedCompositionOp, f) -> CoeffSeries:
    """``w * (f o phi)`` by sampling; the matrix is not used."""
    pts = op.grid.points()
    zvals = np.asarray(op.phi(pts), dtype=complex)
    check_self_map(zvals)
    vals = op.weight_at(pts) * closed_eval(f, zvals)
    return CoeffSeries(coefficients_from_samples(vals, op.grid.radius, op.trunc))


def orbit(op: WeightedCompositionOp, pts: np.ndarray, n_max: int, guard: float = OVERFLOW_GUARD):
    """Yield ``(n, W_n, Z_n)`` with ``W_n = prod_{k<n} w(phi_k)`` and ``Z_n = phi_n``."""
    W = np.ones_like(pts, dtype=complex)
    Z = np.asarray(pts, dtype=complex)
    yield 0, W, Z
    for n in range(1, n_max + 1):
        W = W * op.weight_at(Z)
        Z = np.asarray(op.phi(Z), dtype=complex)
        # orbits may round onto the circle near a boundary attractor; only reject clear exits
        if np.max(np.abs(Z)) > 1.0 + 1e-12:
            raise NotSelfMapError(f"iterate {n} leaves the disc")
        big = float(np.max(np.abs(W)))
        if not big <= guard:
            raise DivergenceError(f"weight product exceeds {guard:g} at n={n} (max {big:.3g})")
        yield n, W, Z


def _orbit_at(op, pts, n):
    for k, W, Z in orbit(op, pts, n):
        if k == n:
            return W, Z
    raise AssertionError


def iterate_direct(op: WeightedCompositionOp, n: int, f) -> CoeffSeries:
    """``T^n f`` from the pointwise product formula, recovered by one FFT."""
    if n < 1:
        raise ValidationError("n must be positive")
    pts = op.grid.points()
    W, Z = _orbit_at(op, pts, n)
    vals = W * closed_eval(f, Z)
    return CoeffSeries(coefficients_from_samples(vals, op.grid.radius, op.trunc))


def iterate_matrix(op: WeightedCompositionOp, n: int, matrix: Optional[OperatorMatrix] = None) -> OperatorMatrix:
    """``n``-th power of the finite section (repeated squaring)."""
    if n < 1:
        raise ValidationError("n must be positive")
    m = matrix if matrix is not None else build_matrix(op)
    return OperatorMatrix(np.linalg.matrix_power(m.entries, n), m.basis_weights)


def iterate_section(op: WeightedCompositionOp, n: int, trunc: Optional[int] = None) -> OperatorMatrix:
    """Finite section of ``T^n`` itself (compression, not the power of a compression)."""
    if trunc is not None and trunc != op.trunc:
        op = op.with_trunc(trunc)
    pts = op.grid.points()
    W, Z = _orbit_at(op, pts, n)
    return _section(W, Z, op.trunc, op.grid, op.space)


def section_trace(op: WeightedCompositionOp, n_max: int, trunc: Optional[int] = None,
                  projection: Optional[np.ndarray] = None):
    """``||P_N T^n P_N||`` (and ``||P_N (T^n - P) P_N||``) for ``n = 1..n_max``."""
    if trunc is not None and trunc != op.trunc:
        op = op.with_trunc(trunc)
    pts = op.grid.points()
    norms, minus = [], []
    for n, W, Z in orbit(op, pts, n_max):
        if n == 0:
            continue
        s = _section(W, Z, op.trunc, op.grid, op.space).entries
        norms.append(float(np.linalg.norm(s, 2)))
        if projection is not None:
            minus.append(float(np.linalg.norm(s - projection, 2)))
    return norms, minus


def conjugate_to_origin(op: WeightedCompositionOp, a, tol: float = 1e-9) -> WeightedCompositionOp:
    """Move the interior fixed point ``a`` to 0: weight ``w o psi_a``, map ``psi_a o phi o psi_a``."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValidationError("fixed point must lie in the open disc")
    moved = complex(op.phi(np.array([a]))[0])
    if abs(moved - a) > tol:
        raise ValidationError(f"phi(a) != a: |phi(a) - a| = {abs(moved - a):.3g}")
    psi = psi_involution(a)
    w = op.w
    new_w = HoloCallable(lambda z: closed_eval(w, psi(z)), label="w o psi_a")
    new_phi = compose_maps(psi, compose_maps(op.phi, psi))
    return replace(op, w=new_w, phi=new_phi)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    refined: float
    delta: float
    trunc: int

    def __float__(self):
        return self.value

    def as_dict(self):
        return {"value": self.value, "value_2N": self.refined, "delta": self.delta,
                "trunc": self.trunc, "tag": "finite-section"}


def norm_estimate(op: WeightedCompositionOp) -> NormEstimate:
    """Largest singular value of the ``N`` and ``2N`` sections."""
    a = build_matrix(op).norm()
    b = build_matrix(op.with_trunc(2 * op.trunc)).norm()
    return NormEstimate(a, b, abs(b - a), op.trunc)


def default_kernel_points() -> np.ndarray:
    radii = np.array([0.0, 0.5, 0.9, 0.99, 0.999])
    ang = np.exp(2j * np.pi * np.arange(32) / 32)
    return np.unique((radii[:, None] * ang[None, :]).ravel())


def kernel_log_ratios(op: WeightedCompositionOp, points: np.ndarray, n_max: int) -> np.ndarray:
    """``log(||(T*)^n k_z|| / ||k_z||)`` on H^2 for each point, ``n = 0..n_max``.

    Uses ``T* k_z = conj(w(z)) k_{phi(z)}`` and ``||k_z||^2 = 1/(1-|z|^2)``;
    ``1 - |phi_n(z)|^2`` is propagated through :meth:`DiscMap.one_minus_abs2`.
    Entries become NaN once the orbit is numerically on the circle.
    """
    z = np.asarray(points, dtype=complex)
    s0 = 1.0 - np.abs(z) ** 2
    s = s0.copy()
    logw = np.zeros(z.shape)
    out = np.empty((n_max + 1, z.size))
    out[0] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            logw = logw + np.log(np.abs(op.weight_at(z)))
            s = op.phi.one_minus_abs2(z, s)
            z = np.asarray(op.phi(z), dtype=complex)
            val = logw + 0.5 * (np.log(s0) - np.log(s))
            val[~(s > 0)] = np.nan
            out[n] = val
    return out


@dataclass
class GelfandEstimate:
    schedule: tuple
    values: list  # best lower-bound based ||T^n||^(1/n)
    section_power: list  # ||(T_N)^n||^(1/n)
    direct: list  # ||P_N T^n P_N||^(1/n)
    direct_refined: list  # same at 2N
    kernel: list  # kernel-vector lower bound ^(1/n); None outside H^2
    divergent: bool = False
    trunc: int = 0

    @property
    def estimate(self) -> float:
        return self.values[-1]

    @property
    def delta(self) -> float:
        return abs(self.direct[-1] - self.direct_refined[-1])

    def as_dict(self):
        return {"schedule": list(self.schedule), "values": self.values, "estimate": self.estimate,
                "section_power": self.section_power, "direct": self.direct,
                "direct_2N": self.direct_refined, "kernel_bound": self.kernel,
                "delta": self.delta, "divergent": self.divergent, "trunc": self.trunc,
                "tag": "finite-section"}


def _direct_norms(op, ns):
    out = {}
    pts = op.grid.points()
    want = set(ns)
    try:
        for n, W, Z in orbit(op, pts, max(ns)):
            if n in want:
                out[n] = _section(W, Z, op.trunc, op.grid, op.space).norm()
    except DivergenceError:
        pass
    return [out.get(n, np.inf) for n in ns]


def gelfand_radius(op: WeightedCompositionOp, schedule: Sequence[int] = (4, 8, 16, 32, 64),
                   kernel_points: Optional[np.ndarray] = None) -> GelfandEstimate:
    """``||T^n||^(1/n)`` over ``schedule``.

    Each value is the largest of three lower bounds for ``||T^n||``: the
    compressed power ``||P_N T^n P_N||``, the same at ``2N``, and (on H^2)
    the reproducing-kernel bound ``sup_z ||(T*)^n k_z|| / ||k_z||``.  The
    power of the compression ``||(P_N T P_N)^n||`` is reported alongside; it
    saturates near ``sqrt(N)`` when ``phi`` pushes mass to the boundary.
    """
    ns = tuple(int(n) for n in schedule)
    m = build_matrix(op)
    sec = [float(np.linalg.norm(np.linalg.matrix_power(m.entries, n), 2)) ** (1.0 / n) for n in ns]
    d1 = [v ** (1.0 / n) for v, n in zip(_direct_norms(op, ns), ns)]
    d2 = [v ** (1.0 / n) for v, n in zip(_direct_norms(op.with_trunc(2 * op.trunc), ns), ns)]
    kern = [None] * len(ns)
    if op.space.kind == "H2":
        pts = default_kernel_points() if kernel_points is None else kernel_points
        logs = kernel_log_ratios(op, pts, max(ns))
        kern = []
        for n in ns:
            row = logs[n]
            row = row[np.isfinite(row)]
            kern.append(float(np.exp(np.max(row) / n)) if row.size else None)
    values = []
    for i in range(len(ns)):
        cands = [d1[i], d2[i]] + ([kern[i]] if kern[i] is not None else [])
        values.append(float(max(cands)))
    divergent = any(v > 1e6 for v in values)
    return GelfandEstimate(ns, values, sec, d1, d2, kern, divergent, op.trunc)


@dataclass
class PowerBoundVerdict:
    status: str  # bounded, unbounded, inconclusive
    sup: float
    trace: list
    trace_refined: list
    kernel_trace: list = field(default_factory=list)

    def as_dict(self):
        return {"status": self.status, "sup": self.sup, "trace": self.trace,
                "trace_2N": self.trace_refined, "kernel_trace": self.kernel_trace,
                "tag": "finite-section"}


def _lower_bound_trace(op, horizon):
    norms, _ = section_trace(op, horizon)
    return norms


def power_bounded_probe(op: WeightedCompositionOp, horizon: int = 40,
                        growth_cap: float = 1e3, plateau: float = 0.05) -> PowerBoundVerdict:
    """Evidence for ``sup_n ||T^n|| < inf`` from lower bounds on ``||T^n||``."""
    traces = []
    for o in (op, op.with_trunc(2 * op.trunc)):
        try:
            traces.append(_lower_bound_trace(o, horizon))
        except DivergenceError:
            return PowerBoundVerdict("unbounded", float("inf"), [], [])
    kern = [0.0] * horizon
    if op.space.kind == "H2":
        logs = kernel_log_ratios(op, default_kernel_points(), horizon)
        kern = [float(np.exp(np.nanmax(logs[n]))) if np.any(np.isfinite(logs[n])) else 0.0
                for n in range(1, horizon + 1)]
    a = [max(x, k) for x, k in zip(traces[0], kern)]
    b = [max(x, k) for x, k in zip(traces[1], kern)]
    sup_a, sup_b = max(a), max(b)
    quarter = max(1, horizon // 4)
    if sup_b > growth_cap and max(b[-quarter:]) >= sup_b * (1 - 1e-12):
        status = "unbounded"
    else:
        half = max(1, horizon // 2)
        late_growth = max(b[half:]) > (1 + plateau) * max(b[:half])
        if abs(sup_b - sup_a) <= plateau * sup_b and not late_growth:
            status = "bounded"
        else:
            status = "inconclusive"
    return PowerBoundVerdict(status, sup_b, a, b, kern)
