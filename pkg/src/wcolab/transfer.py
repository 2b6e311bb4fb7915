"""Moving composition operators between spaces.

* Right half-plane to disc: ``C_Phi`` on H^2 of the half-plane is unitarily
  equivalent to ``T_{w,phi}`` on H^2(D) with ``phi = M o Phi o M`` and
  ``w = (1 + phi) / (1 + z)``, where ``M(z) = (1 - z) / (1 + z)``.
* Hardy-Smirnoff space of ``Omega = beta(D)`` to H^2(D): ``phi = beta^-1 o Phi o beta``
  and ``w = (beta' / beta' o phi)^(1/2)``.
* H^2 to the weighted Hardy spaces H^2(d).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .discmap import (CallableMap, DiscMap, Moebius, _neville_at_zero, angular_derivative,
                      cauchy_derivative, denjoy_wolff, psi_involution)
from .errors import BranchError, NewtonFailure, ValidationError
from .holofunc import (CoeffSeries, HoloCallable, LinearFractional, WeightSequence, closed_eval,
                       norm_h2d)
from .wco import (Space, WeightedCompositionOp, build_matrix, iterate_direct, kernel_log_ratios,
                  norm_estimate, section_trace)

CAYLEY = np.array([[-1.0, 1.0], [1.0, 1.0]], dtype=complex)  # M(z) = (1 - z) / (1 + z), M o M = id


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def cayley(z):
    z = np.asarray(z, dtype=complex)
    return (1.0 - z) / (1.0 + z)


class HalfPlaneMap:
    """Holomorphic self-map ``Phi`` of the right half-plane.

    ``ang_deriv_inf`` is ``lim s / Phi(s)`` as ``s -> infinity``; for
    ``Phi(s) = a s + b`` it is ``1 / a``.
    """

    def __init__(self, Phi: Callable, label: str = "Phi", affine: Optional[tuple] = None,
                 ang_deriv_inf: Optional[float] = None):
        self.Phi = Phi
        self.label = label
        self.affine_coeffs = affine
        self._ang = ang_deriv_inf

    @classmethod
    def affine(cls, a: float, b: complex = 0.0) -> "HalfPlaneMap":
        a, b = float(a), complex(b)
        if a <= 0:
            raise ValidationError("affine half-plane map needs a > 0")
        if b.real < 0:
            raise ValidationError("affine half-plane map needs Re b >= 0")
        return cls(lambda s: a * np.asarray(s, dtype=complex) + b, f"{a:g}*s+{b:g}", (a, b), 1.0 / a)

    def __call__(self, s):
        return self.Phi(np.asarray(s, dtype=complex))

    @property
    def ang_deriv_inf(self) -> float:
        if self._ang is None:
            self._ang = self.estimate_ang_deriv_inf()[0]
        return self._ang

    def estimate_ang_deriv_inf(self, xs: Sequence[float] = (1e2, 1e3, 1e4)) -> tuple:
        """``x / Phi(x)`` along the real axis, extrapolated in ``1/x``."""
        vals = [complex(self(np.array([x]))[0]) for x in xs]
        if not all(abs(v) > 0.5 * abs(vals[0]) for v in vals) or abs(vals[-1]) < 10 * abs(vals[0]):
            raise ValidationError("Phi does not appear to fix infinity")
        q = [(x / v).real for x, v in zip(xs, vals)]
        return float(_neville_at_zero([1.0 / x for x in xs], q)), q

    def as_matrix(self) -> Optional[np.ndarray]:
        if self.affine_coeffs is None:
            return None
        a, b = self.affine_coeffs
        return np.array([[a, b], [0.0, 1.0]], dtype=complex)


def halfplane_to_disc(H: HalfPlaneMap, trunc: int = 128) -> WeightedCompositionOp:
    """The unitarily equivalent operator on H^2(D)."""
    mat = H.as_matrix()
    if mat is not None:
        m = CAYLEY @ mat @ CAYLEY
        phi = Moebius(*m.ravel())
        al, be, ga, de = m.ravel()
        # phi(-1) = -1 makes (1 + phi) / (1 + z) collapse to (alpha + gamma) / (gamma z + delta)
        if abs(ga) < 1e-15 * abs(de):
            w = CoeffSeries([(al + ga) / de])
        else:
            w = LinearFractional(0.0, al + ga, ga, de)
    else:
        ang = H.ang_deriv_inf

        def phi_f(z):
            return cayley(H(cayley(z)))

        phi = CallableMap(phi_f, label=f"M o {H.label} o M")

        def w_f(z):
            z = np.asarray(z, dtype=complex)
            near = np.abs(1.0 + z) < 1e-8
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (1.0 + phi_f(z)) / (1.0 + z)
            return np.where(near, ang, out)

        w = HoloCallable(w_f, label="(1+phi)/(1+z)")
    op = WeightedCompositionOp(w, phi, trunc=trunc)
    build_matrix(op)  # raises if phi leaves the disc on the sampling grid
    return op


@dataclass
class NormCheck:
    formula: float
    estimate: float
    refined: float
    delta: float
    trunc: int
    phi_at_minus_one: complex
    phi_prime_at_minus_one: float

    @property
    def agree(self) -> bool:
        return abs(self.formula - self.estimate) < 5e-2

    def as_dict(self):
        return {"formula": {"value": self.formula, "tag": "theorem"},
                "estimate": {"value": self.estimate, "value_2N": self.refined, "delta": self.delta,
                             "trunc": self.trunc, "tag": "finite-section"},
                "agree_5e-2": self.agree, "phi_at_minus_one": _pair(self.phi_at_minus_one),
                "phi_prime_at_minus_one": {"value": self.phi_prime_at_minus_one, "tag": "radial-quotient"}}


def halfplane_norm_check(H: HalfPlaneMap, trunc: int = 256) -> NormCheck:
    """``Phi'(inf)^(1/2)`` against the finite-section norm of the transferred operator."""
    op = halfplane_to_disc(H, trunc)
    est = norm_estimate(op)
    deriv, _ = angular_derivative(op.phi, -1.0)
    dw = complex(closed_eval(op.phi, np.array([-1.0 + 0j]))[0])
    return NormCheck(float(np.sqrt(H.ang_deriv_inf)), est.value, est.refined, est.delta, trunc, dw, deriv)


def halfplane_equivalence_suite(H: HalfPlaneMap, horizon: int = 30, trunc: int = 128,
                                tol: float = 1e-3, step_slack: float = 5e-2) -> dict:
    """Strong convergence to 0, ``DW = inf`` with ``Phi'(inf) < 1``, and uniform convergence to 0.

    Condition (ii) is read off the map, condition (iv) off the transferred
    finite-section trace; the report says whether they agree.
    """
    ang = H.ang_deriv_inf
    if abs(ang - 1.0) < tol:
        raise ValidationError("the equivalence needs Phi'(inf) != 1")
    op = halfplane_to_disc(H, trunc)
    s = 1.0 + 0j
    s_trace = [s]
    for _ in range(horizon):
        s = complex(H(np.array([s]))[0])
        s_trace.append(s)
    dw = denjoy_wolff(op.phi)
    dw_infinity = dw.location == "boundary" and abs(dw.dw_point + 1.0) < 1e-6
    predicted = bool(dw_infinity and ang < 1.0)
    norms, _ = section_trace(op, horizon)
    bound = [ang ** (n / 2.0) for n in range(1, horizon + 1)]
    within = all(v <= b + step_slack for v, b in zip(norms, bound))
    observed = norms[-1] < 1e-2
    return {
        "ang_deriv_inf": {"value": ang, "tag": "theorem-input"},
        "condition_ii": {"dw_infinity": bool(dw_infinity), "ang_deriv_below_one": bool(ang < 1.0),
                         "holds": predicted, "disc_dw_point": _pair(dw.dw_point),
                         "phi_trace_abs": [abs(v) for v in s_trace]},
        "condition_iv": {"trace": norms, "bound_sqrt_ang_pow_n": bound, "within_bound": bool(within),
                         "decays": bool(observed), "tag": "finite-section"},
        "consistent": bool(predicted == observed),
        "prediction": "uniform convergence to 0" if predicted else "no convergence to 0",
    }


def _as_callable(f):
    return (lambda z: closed_eval(f, np.asarray(z, dtype=complex)))


class SmirnoffDomainSpec:
    """Conformal map ``beta`` of the disc onto ``Omega``, with derivative and a numeric inverse."""

    def __init__(self, beta, beta_prime=None, label: str = "beta", seed_radii: int = 48,
                 seed_angles: int = 128, check_radius: float = 0.99):
        self.beta_obj = beta
        self.beta = _as_callable(beta)
        if beta_prime is None:
            if isinstance(beta, CoeffSeries):
                beta_prime = beta.derivative()
            elif hasattr(beta, "derivative"):
                beta_prime = beta.derivative
            else:
                beta_prime = (lambda z: cauchy_derivative(self.beta, z))
        self.beta_prime = _as_callable(beta_prime)
        self.label = label
        r = np.linspace(0.0, check_radius, seed_radii)
        t = 2 * np.pi * np.arange(seed_angles) / seed_angles
        seeds = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
        bp = np.abs(self.beta_prime(seeds))
        if not np.all(bp > 1e-10):
            raise ValidationError("beta' vanishes on the sample grid; beta is not conformal there")
        self.seeds = seeds
        images = self.beta(seeds)
        self._tree = cKDTree(np.column_stack([images.real, images.imag]))

    def inverse(self, zeta, tol: float = 1e-13, max_iter: int = 60):
        """``beta^-1`` by damped Newton from the nearest image-grid seed."""
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        _, idx = self._tree.query(np.column_stack([flat.real, flat.imag]))
        z = self.seeds[idx].copy()
        res = self.beta(z) - flat
        scale = np.maximum(1.0, np.abs(flat))
        for _ in range(max_iter):
            todo = np.abs(res) > tol * scale
            if not np.any(todo):
                break
            step = res[todo] / self.beta_prime(z[todo])
            t = np.ones(step.shape)
            zt, rt = z[todo], res[todo]
            for _ in range(30):
                cand = zt - t * step
                new = self.beta(cand) - flat[todo]
                ok = (np.abs(new) < np.abs(rt)) & (np.abs(cand) < 1.0)
                if np.all(ok):
                    break
                t = np.where(ok, t, t / 2)
            zt = np.where(ok, cand, zt)
            rt = np.where(ok, new, rt)
            if not np.any(ok):
                break
            z[todo], res[todo] = zt, rt
        bad = np.abs(res) > 1e3 * tol * scale
        if np.any(bad):
            raise NewtonFailure(f"beta inversion failed at {int(bad.sum())} point(s); "
                                f"worst residual {float(np.abs(res).max()):.3g}")
        return z.reshape(zeta.shape)

    def J(self, f) -> HoloCallable:
        """``f -> (f o beta) (beta')^(1/2)`` from E^2(Omega) to H^2."""
        root0 = np.sqrt(complex(self.beta_prime(np.array([0j]))[0]))
        c0 = root0 ** 2

        def jf(z):
            z = np.asarray(z, dtype=complex)
            return closed_eval(f, self.beta(z)) * np.sqrt(self.beta_prime(z) / c0) * root0

        return HoloCallable(jf, label=f"J[{self.label}]")


def smirnoff_weight(spec: SmirnoffDomainSpec, Phi_domain: Optional[Callable] = None,
                    disc_map: Optional[DiscMap] = None, trunc: int = 128,
                    branch_radius: float = 0.99, branch_margin: float = 0.1) -> WeightedCompositionOp:
    """The operator on H^2 equivalent to ``C_Phi`` on E^2(Omega).

    ``phi = beta^-1 o Phi o beta`` (or ``disc_map`` directly) and
    ``w = (beta' / beta' o phi)^(1/2)``.  The square root is normalised to
    the principal root at ``z = 0``; a grid check rejects ratios that wind
    near the branch cut.
    """
    if (Phi_domain is None) == (disc_map is None):
        raise ValidationError("give exactly one of Phi_domain or disc_map")
    if disc_map is None:
        def phi_f(z):
            return spec.inverse(Phi_domain(spec.beta(np.asarray(z, dtype=complex))))

        phi = CallableMap(phi_f, label=f"beta^-1 o Phi o beta [{spec.label}]")
    else:
        phi = disc_map

    def ratio(z):
        z = np.asarray(z, dtype=complex)
        return spec.beta_prime(z) / spec.beta_prime(phi(z))

    q0 = complex(ratio(np.array([0j]))[0])
    r = np.linspace(0.0, branch_radius, 24)
    t = 2 * np.pi * np.arange(128) / 128
    grid = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
    args = np.abs(np.angle(ratio(grid) / q0))
    if float(args.max()) > np.pi - branch_margin:
        raise BranchError(f"(beta'/beta' o phi)/q(0) reaches argument {float(args.max()):.3f}; "
                          "no continuous square root on the grid")
    root0 = np.sqrt(q0)

    def w_f(z):
        return np.sqrt(ratio(z) / q0) * root0

    w = HoloCallable(w_f, label=f"(beta'/beta' o phi)^(1/2) [{spec.label}]")
    return WeightedCompositionOp(w, phi, trunc=trunc)


@dataclass
class KernelGrowth:
    w0: complex
    trace: list  # ||(T*)^n k_w0|| for n = 0..horizon
    threshold: float
    fired_at: Optional[int]
    matrix_trace: list = field(default_factory=list)
    matrix_resolved: int = 0

    @property
    def fired(self) -> bool:
        return self.fired_at is not None

    def as_dict(self):
        return {"w0": _pair(self.w0), "trace": self.trace, "threshold": self.threshold,
                "fired": self.fired, "fired_at": self.fired_at,
                "matrix_cross_check": {"trace": self.matrix_trace, "resolved_steps": self.matrix_resolved,
                                       "tag": "finite-section"},
                "tag": "kernel-chain"}


def kernel_growth_probe(op: WeightedCompositionOp, w0=0.0, horizon: int = 60,
                        threshold: float = 1e3, rel_tol: float = 1e-6) -> KernelGrowth:
    """``||(T*)^n k_w0||`` from ``T* k_z = conj(w(z)) k_phi(z)``.

    The finite-section adjoint applied to the truncated kernel vector is
    reported alongside; it is trustworthy only while ``|phi_n(w0)|^N`` is
    negligible, and ``matrix_resolved`` counts the steps where the two agree.
    """
    w0 = complex(w0)
    if abs(w0) >= 1:
        raise ValidationError("w0 must lie in the open disc")
    logs = kernel_log_ratios(op, np.array([w0]), horizon)[:, 0]
    base = -0.5 * np.log(1.0 - abs(w0) ** 2)
    trace = [float(np.exp(v + base)) if np.isfinite(v) else float("inf") for v in logs]
    fired = next((n for n, v in enumerate(trace) if v > threshold), None)
    A = build_matrix(op).entries
    vec = np.conj(w0) ** np.arange(op.trunc)
    mtrace, resolved = [float(np.linalg.norm(vec))], 0
    for n in range(1, horizon + 1):
        vec = A.conj().T @ vec
        mtrace.append(float(np.linalg.norm(vec)))
        if resolved == n - 1 and abs(mtrace[-1] - trace[n]) <= rel_tol * trace[n]:
            resolved = n
    return KernelGrowth(w0, trace, threshold, fired, mtrace, resolved)


def kernel_adjoint_residual(op: WeightedCompositionOp, w0) -> float:
    """``||T* k_w0 - conj(w(w0)) k_phi(w0)||`` on the truncated H^2 section."""
    if op.space.kind != "H2":
        raise ValidationError("the kernel identity is stated on H^2")
    w0 = complex(w0)
    A = build_matrix(op).entries
    n = np.arange(op.trunc)
    k0 = np.conj(w0) ** n
    z1 = complex(closed_eval(op.phi, np.array([w0]))[0])
    wv = complex(op.weight_at(np.array([w0]))[0])
    return float(np.linalg.norm(A.conj().T @ k0 - np.conj(wv) * np.conj(z1) ** n))


def _space_for(d) -> Space:
    if isinstance(d, str):
        return Space.h2d(d)
    return Space.h2d(d.require_decreasing())


@dataclass
class TransferBound:
    lhs: float
    rhs: float
    lhs_delta: float
    norm_h2: float
    a: complex
    c_h2: float
    c_h2d_bound: float
    c_h2d_section: float
    Lambda: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.tol

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self):
        out = {"lhs_norm_h2d": {"value": self.lhs, "delta": self.lhs_delta, "tag": "finite-section"},
               "rhs": {"value": self.rhs, "tag": "theorem-bound"},
               "norm_h2": {"value": self.norm_h2, "tag": "finite-section"},
               "phi0": _pair(self.a), "norm_C_psi_h2": {"value": self.c_h2, "tag": "theorem"},
               "norm_C_psi_h2d_bound": {"value": self.c_h2d_bound, "Lambda": self.Lambda, "tag": "config-bound"},
               "norm_C_psi_h2d_section": {"value": self.c_h2d_section, "tag": "finite-section"},
               "holds": self.holds, "slack": self.slack}
        if self.c_h2d_section > self.c_h2d_bound + 1e-9:
            out["diagnostic"] = ("finite-section ||C_psi||_{H2(d)} exceeds the Lambda bound; "
                                 "Lambda is too small for this d")
        return out


def h2d_transfer_bound(op: WeightedCompositionOp, d="bergman", Lambda: float = 1.0,
                       tol: float = 1e-9) -> TransferBound:
    """``||T||_{H2(d)} <= ||C_psi_a||_{H2} ||C_psi_a||_{H2(d)} ||T||_{H2}`` with ``a = phi(0)``."""
    space = _space_for(d)
    a = complex(closed_eval(op.phi, np.array([0j]))[0])
    lhs = norm_estimate(op.with_space(space))
    nh2 = norm_estimate(op.with_space(Space.h2()))
    q = (1.0 + abs(a)) / (1.0 - abs(a))
    c_h2 = float(np.sqrt(q))
    c_bound = float(q ** (Lambda / 2.0))
    cpsi = WeightedCompositionOp(CoeffSeries([1.0]), psi_involution(a), space, trunc=op.trunc)
    c_sec = norm_estimate(cpsi).value
    rhs = c_h2 * c_bound * max(nh2.value, nh2.refined)
    return TransferBound(lhs.value, rhs, lhs.delta, nh2.value, a, c_h2, c_bound, c_sec, Lambda, tol)


def h2d_iterate_transfer(op: WeightedCompositionOp, d="bergman", horizon: int = 40,
                         tol: float = 1e-6, polys: Sequence[CoeffSeries] = ()) -> dict:
    """Decay of ``||T^n||`` on H^2 carried over to H^2(d), plus a function-wise check."""
    dw = denjoy_wolff(op.phi)
    if dw.location != "interior":
        raise ValidationError("the transfer needs an interior Denjoy-Wolff point")
    space = _space_for(d)
    h2, _ = section_trace(op.with_space(Space.h2()), horizon)
    h2d, _ = section_trace(op.with_space(space), horizon)
    h2_decays = h2[-1] < tol
    h2d_decays = h2d[-1] < tol
    out = {"h2_trace": h2, "h2d_trace": h2d, "tol": tol, "tag": "finite-section",
           "h2_decays": bool(h2_decays), "h2d_decays": bool(h2d_decays), "space": space.label}
    if not h2_decays:
        out["status"] = "inconclusive"
        out["note"] = "H^2 trace has not decayed below tol; the uniform hypothesis is not triggered"
    else:
        out["status"] = "confirmed" if h2d_decays else "not_confirmed"
    dseq = space.weights(op.trunc)
    ws = WeightSequence(dseq / dseq[0], space.label)
    checks = []
    for f in polys:
        rows = []
        for n in range(1, horizon + 1):
            g = iterate_direct(op, n, f)
            rows.append((norm_h2d(g, ws), float(np.linalg.norm(g.coeffs))))
        checks.append({"h2d": [r[0] for r in rows], "h2": [r[1] for r in rows],
                       "termwise_le": bool(all(a <= b + 1e-15 for a, b in rows))})
    if checks:
        out["function_checks"] = checks
    return out
