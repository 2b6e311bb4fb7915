"""Asymptotic behaviour of the powers ``T^n`` of a weighted composition operator.

Modes: ``uniform``, ``strong_not_uniform``, ``weak_not_strong``, ``none`` and
``inconclusive``.  Every report separates the theorem that decided the mode
(``rationale``) from the finite-section numbers that support it (``evidence``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .discmap import (AutomorphismClass, Rotation, classify_automorphism, denjoy_wolff)
from .errors import ValidationError
from .holofunc import (CoeffSeries, HoloCallable, closed_eval, coefficients_from_samples,
                       multiply, norm_hinf_estimate)
from .quadrature import circle_rule
from .wco import (WeightedCompositionOp, build_matrix, conjugate_to_origin, gelfand_radius,
                  iterate_direct, orbit, power_bounded_probe, section_trace)

MODES = ("uniform", "strong_not_uniform", "weak_not_strong", "none", "inconclusive")


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class LimitProjection:
    """``P = 0`` or ``Pf = w_tilde * f(alpha)``."""

    kind: str  # zero, rank_one
    alpha: complex = 0j
    w_tilde: Optional[CoeffSeries] = None
    iterations: int = 0
    status: str = "converged"

    def matrix(self, op: WeightedCompositionOp) -> np.ndarray:
        """Entries of ``P`` in the orthonormal basis used by :func:`build_matrix`."""
        n = op.trunc
        if self.kind == "zero":
            return np.zeros((n, n), dtype=complex)
        d = op.space.weights(n)
        c = self.w_tilde.resized(n).coeffs
        powers = self.alpha ** np.arange(n)
        return np.outer(c * d, powers / d)

    def __call__(self, f) -> CoeffSeries:
        if self.kind == "zero":
            return CoeffSeries([0.0])
        return self.w_tilde * complex(closed_eval(f, np.array([self.alpha]))[0])

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "status": self.status}
        if self.kind == "rank_one":
            out.update(alpha=_pair(self.alpha), iterations=self.iterations,
                       w_tilde_head=[_pair(c) for c in self.w_tilde.coeffs[:8]])
        return out


@dataclass
class ConvergenceReport:
    mode: str
    theorem: str
    rationale: dict
    evidence: dict = field(default_factory=dict)
    limit: Optional[LimitProjection] = None
    trace: list = field(default_factory=list)  # rows (n, norm, norm_minus_P, witness)

    def as_dict(self) -> dict:
        return {"mode": self.mode, "theorem": self.theorem, "rationale": self.rationale,
                "evidence": self.evidence,
                "limit": self.limit.as_dict() if self.limit else None}


def limit_projection(op: WeightedCompositionOp, alpha=None, tol: float = 1e-10,
                     horizon: int = 2000) -> LimitProjection:
    """Rank-one limit for ``w(alpha) = 1``: ``w_tilde = lim_n prod_{k<n} w(phi_k)``.

    The product is accumulated on the sampling grid until every new factor
    is within ``tol`` of 1; the status is ``inconclusive`` if that never
    happens within ``horizon`` steps.
    """
    if alpha is None:
        rep = denjoy_wolff(op.phi)
        if rep.location != "interior":
            raise ValidationError("limit projection needs an interior Denjoy-Wolff point")
        alpha = rep.dw_point
    alpha = complex(alpha)
    wa = complex(op.weight_at(np.array([alpha]))[0])
    if abs(wa - 1.0) > max(tol, 1e-8):
        raise ValidationError(f"w(alpha) = {wa} is not 1")
    pts = op.grid.points()
    W = np.ones_like(pts)
    Z = pts.copy()
    status, n = "inconclusive", 0
    for n in range(1, horizon + 1):
        factor = op.weight_at(Z)
        W = W * factor
        Z = np.asarray(op.phi(Z), dtype=complex)
        if np.max(np.abs(factor - 1.0)) < tol:
            status = "converged"
            break
    wt = CoeffSeries(coefficients_from_samples(W, op.grid.radius, op.trunc))
    return LimitProjection("rank_one", alpha, wt, n, status)


def _certificate(op: WeightedCompositionOp, assume_re_lt_one: bool, margin: float = 1e-6) -> dict:
    if assume_re_lt_one:
        return {"source": "user-assertion", "holds": True}
    est = norm_hinf_estimate(op.phi)
    holds = est.value + est.delta < 1.0 - margin
    return {"source": "sup|phi| < 1 (compact, r_e = 0)", "holds": bool(holds),
            "sup_phi": est.value, "delta": est.delta}


def _trace_rows(norms, minus, witness=None):
    rows = []
    for i, v in enumerate(norms):
        m = minus[i] if minus else None
        wv = witness[i] if witness else None
        rows.append((i + 1, v, m, wv))
    return rows


def classify_interior_dw(op: WeightedCompositionOp, tol: float = 1e-8, horizon: int = 40,
                         assume_re_lt_one: bool = False, trace_tol: float = 1e-6) -> ConvergenceReport:
    """Mode of ``(T^n)`` when ``phi`` has an interior Denjoy-Wolff point ``alpha``.

    Weak convergence needs ``|w(alpha)| < 1`` or ``w(alpha) = 1`` together
    with power-boundedness; uniform convergence additionally needs a
    certificate that the essential spectral radius is below 1.
    """
    dw = denjoy_wolff(op.phi)
    if dw.location != "interior":
        raise ValidationError("Denjoy-Wolff point is on the boundary")
    alpha = complex(dw.dw_point)
    wa = complex(op.weight_at(np.array([alpha]))[0])
    contracting = abs(wa) < 1.0
    unit = abs(wa - 1.0) < tol
    rationale = {"alpha": _pair(alpha), "w_alpha": _pair(wa), "abs_w_alpha": abs(wa),
                 "tol": tol, "dw_method": dw.method}
    evidence = {"denjoy_wolff": dw.as_dict()}

    if not (contracting or unit):
        # T^n(1)(alpha) = w(alpha)^n grows or rotates, so no weak limit exists
        vals = []
        try:
            for n in range(1, min(horizon, 20) + 1):
                v = complex(closed_eval(iterate_direct(op, n, CoeffSeries([1.0])), np.array([alpha]))[0])
                vals.append({"n": n, "value": _pair(v), "w_alpha_pow": _pair(wa ** n)})
        except Exception as exc:  # overflow guard fired; the trace so far is the evidence
            evidence["trace_stopped"] = str(exc)
        evidence["iterate_at_alpha"] = vals
        rationale["condition_i"] = False
        return ConvergenceReport("none", "weak-convergence criterion (necessity of |w(alpha)|<1 or w(alpha)=1)",
                                 rationale, evidence)

    rationale["condition_i"] = True
    probe = power_bounded_probe(op, horizon)
    evidence["power_bound"] = probe.as_dict()
    rationale["power_bound"] = probe.status
    if probe.status == "unbounded":
        return ConvergenceReport("none", "weak-convergence criterion (power-boundedness fails)",
                                 rationale, evidence)
    if probe.status == "inconclusive":
        return ConvergenceReport("inconclusive", "weak-convergence criterion (power-bound undecided)",
                                 rationale, evidence)

    limit = LimitProjection("zero", alpha) if contracting else limit_projection(op, alpha)
    cert = _certificate(op, assume_re_lt_one)
    rationale["r_e_certificate"] = cert
    rationale["weak_convergence"] = True
    P = limit.matrix(op)
    norms, minus = section_trace(op, horizon, projection=P)
    refined, refined_minus = section_trace(op.with_trunc(2 * op.trunc), horizon,
                                           projection=limit.matrix(op.with_trunc(2 * op.trunc)))
    evidence["trace"] = {"norm": norms, "norm_minus_P": minus, "norm_minus_P_2N": refined_minus,
                         "delta": abs(minus[-1] - refined_minus[-1]), "tag": "finite-section"}
    if limit.kind == "rank_one":
        M = build_matrix(op).entries
        evidence["projection_identities"] = {
            "P2_minus_P": float(np.linalg.norm(P @ P - P, 2)),
            "TP_minus_P": float(np.linalg.norm(M @ P - P, 2)),
            "fixed_point_residual": float(np.linalg.norm(
                (M @ (limit.w_tilde.resized(op.trunc).coeffs * op.space.weights(op.trunc)))
                - limit.w_tilde.resized(op.trunc).coeffs * op.space.weights(op.trunc))),
        }
    report = ConvergenceReport("inconclusive", "weak-convergence criterion; uniform needs r_e < 1",
                               rationale, evidence, limit, _trace_rows(norms, minus))
    if not cert["holds"]:
        rationale["note"] = "weak convergence holds; no certificate for r_e < 1"
        return report
    hit = next((i + 1 for i, v in enumerate(minus) if v < trace_tol), None)
    rationale["trace_tol"] = trace_tol
    rationale["trace_reached_at"] = hit
    if hit is None:
        rationale["note"] = "r_e certificate present but ||T^n - P|| stayed above trace_tol"
        return report
    report.mode = "uniform"
    report.theorem = "uniform convergence iff r_e(T) < 1"
    return report


def _v_function(op: WeightedCompositionOp, lam: complex, k: int):
    if isinstance(op.w, CoeffSeries):
        w = op.w
        trunc = k * (w.degree + 1) if w.degree >= 0 else 1
        v = CoeffSeries(w.coeffs).resized(max(trunc, 1))
        for j in range(1, k):
            v = multiply(v, w.rotated(lam ** j).resized(v.truncation_order))
        return v
    w = op.w
    return HoloCallable(lambda z: np.prod([closed_eval(w, lam ** j * np.asarray(z)) for j in range(k)], axis=0),
                        label="v")


def _boundary_nodes(v, grid_size):
    m = grid_size
    if isinstance(v, CoeffSeries):
        m = max(m, 1 << int(np.ceil(np.log2(2 * 50 * max(v.degree, 1) + 2))))
    return circle_rule(m).nodes


def classify_elliptic_finite(op: WeightedCompositionOp, tol: float = 1e-8, theta_frac: float = 0.05,
                             m_max: int = 50, grid_size: int = 4096, witness_radius: float = 0.95,
                             horizon: int = 40) -> ConvergenceReport:
    """Trichotomy for ``phi`` an elliptic automorphism of finite order ``k``.

    ``v(z) = w(z) w(lam z) ... w(lam^{k-1} z)`` decides: ``||v||_inf < 1``
    gives uniform convergence to 0, ``> 1`` gives no convergence, and
    ``= 1`` splits on whether ``|v| = 1`` on a set of positive measure.
    """
    cls = classify_automorphism(op.phi)
    if cls.kind != "elliptic" or cls.order is None:
        raise ValidationError("phi must be an elliptic automorphism of finite order")
    k = cls.order
    conj = None
    if not isinstance(op.phi, Rotation):
        conj = complex(cls.fixed_point)
        op = replace(conjugate_to_origin(op, conj), phi=Rotation(cls.multiplier))
    lam = op.phi.lam
    v = _v_function(op, lam, k)
    vinf = norm_hinf_estimate(v)
    rationale = {"order": k, "lambda": _pair(lam), "v_sup": vinf.value, "v_sup_delta": vinf.delta,
                 "tol": tol, "theta_frac": theta_frac}
    if conj is not None:
        rationale["conjugated_from_fixed_point"] = _pair(conj)
    evidence = {}
    if isinstance(v, CoeffSeries):
        evidence["v_coeffs"] = [_pair(c) for c in v.coeffs]
    constant = isinstance(v, CoeffSeries) and np.all(np.abs(v.coeffs[1:]) < 1e-14)
    rationale["v_constant"] = bool(constant)

    nodes = _boundary_nodes(v, grid_size)
    vb = np.asarray(closed_eval(v, nodes))
    mod = np.abs(vb)

    def v_power_norms():
        return [float(np.sqrt(np.mean(mod ** (2 * m)))) for m in range(1, m_max + 1)]

    def norm_trace():
        try:
            norms, _ = section_trace(op, horizon)
        except Exception as exc:
            evidence["trace_stopped"] = str(exc)
            return []
        evidence["trace"] = {"norm": norms, "tag": "finite-section"}
        return norms

    if constant:
        c = complex(v.coeffs[0])
        rationale["caveat"] = "v is constant; the trichotomy assumes non-constant v"
        rationale["v_constant_value"] = _pair(c)
        if abs(c) < 1 - tol:
            mode, lim = "uniform", LimitProjection("zero")
        elif abs(c) > 1 + tol:
            mode, lim = "none", None
        else:
            mode, lim = "inconclusive", None
        norms = norm_trace()
        return ConvergenceReport(mode, "elliptic finite-order trichotomy (constant v)", rationale,
                                 evidence, lim, _trace_rows(norms, None))

    if vinf.value < 1 - tol:
        norms = norm_trace()
        bound = [vinf.value ** (n // k - 1) for n in range(1, len(norms) + 1)]
        evidence["power_bound_factor"] = bound
        return ConvergenceReport("uniform", "elliptic finite-order trichotomy, case ||v||_inf < 1",
                                 rationale, evidence, LimitProjection("zero"), _trace_rows(norms, None))

    if vinf.value > 1 + tol:
        ring = circle_rule(grid_size, witness_radius).nodes
        vals = np.abs(np.asarray(closed_eval(v, ring)))
        z0 = complex(ring[int(np.argmax(vals))])
        val = abs(complex(closed_eval(v, np.array([z0]))[0]))
        growth = []
        try:
            for m in range(1, 11):
                t = iterate_direct(op, k * m, CoeffSeries([1.0]))
                growth.append(abs(complex(closed_eval(t, np.array([z0]))[0])))
        except Exception as exc:
            evidence["growth_stopped"] = str(exc)
        rationale["witness"] = {"z0": _pair(z0), "abs_v_z0": val, "certified": bool(val > 1.0)}
        evidence["witness_growth"] = {"km": [k * (m + 1) for m in range(len(growth))],
                                      "abs_Tkm1_z0": growth,
                                      "abs_v_z0_pow": [val ** (m + 1) for m in range(len(growth))]}
        rows = [(k * (m + 1), None, None, g) for m, g in enumerate(growth)]
        return ConvergenceReport("none", "elliptic finite-order trichotomy, case ||v||_inf > 1",
                                 rationale, evidence, None, rows)

    deficit = 1.0 - mod
    frac = float(np.mean(deficit < tol))
    rationale["unimodular_fraction"] = frac
    rationale["min_deficit"] = float(deficit.min())
    powers = v_power_norms()
    evidence["v_power_l2"] = powers
    rows = [(m, None, None, p) for m, p in enumerate(powers, start=1)]
    if frac >= theta_frac:
        note = {}
        if frac > 1 - 1e-12:
            note["caveat"] = "|v| = 1 on the whole circle: v is inner"
        rationale.update(note)
        return ConvergenceReport("weak_not_strong",
                                 "elliptic finite-order trichotomy, case |v| = 1 on positive measure",
                                 rationale, evidence, LimitProjection("zero"), rows)
    return ConvergenceReport("strong_not_uniform",
                             "elliptic finite-order trichotomy, case |v| < 1 a.e.",
                             rationale, evidence, LimitProjection("zero"), rows)


@dataclass(frozen=True)
class SpectrumSet:
    kind: str  # circle or annulus
    r_in: float
    r_out: float
    classification: AutomorphismClass
    min_abs_w: float

    def contains(self, r: float, slack: float = 0.0) -> bool:
        return self.r_in - slack <= r <= self.r_out + slack

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "tag": "theorem", "min_abs_w_boundary": self.min_abs_w,
               "classification": self.classification.as_dict()}
        if self.kind == "circle":
            out["radius"] = self.r_in
        else:
            out["r_in"], out["r_out"] = self.r_in, self.r_out
        return out


def spectrum_automorphism(op: WeightedCompositionOp, classification: Optional[AutomorphismClass] = None,
                          floor: float = 1e-6, grid_size: int = 4096) -> SpectrumSet:
    """Spectrum of ``T`` for ``phi`` an automorphism and ``w`` non-vanishing on the closed disc."""
    cls = classification or classify_automorphism(op.phi)
    if cls.kind == "not_automorphism":
        raise ValidationError("phi is not an automorphism")
    if cls.kind == "elliptic" and cls.order is not None:
        raise ValidationError("finite-order elliptic maps are handled by the v-function trichotomy")
    wb = np.abs(np.asarray(closed_eval(op.w, circle_rule(grid_size).nodes)))
    min_w = float(wb.min())
    if min_w < floor:
        raise ValidationError(f"min |w| on the circle is {min_w:.3g}, below the floor {floor:g}")

    def absw(p):
        return abs(complex(closed_eval(op.w, np.array([complex(p)]))[0]))

    if cls.kind in ("elliptic", "parabolic"):
        r = absw(cls.fixed_point)
        return SpectrumSet("circle", r, r, cls, min_w)
    r_in = absw(cls.repulsive) / np.sqrt(cls.deriv_repulsive)
    r_out = absw(cls.attractive) / np.sqrt(cls.deriv_attractive)
    return SpectrumSet("annulus", float(r_in), float(r_out), cls, min_w)


def corollary_elliptic_infinite(op: WeightedCompositionOp, horizon: int = 40, tol: float = 1e-10,
                                floor: float = 1e-6) -> ConvergenceReport:
    """Infinite-order elliptic ``phi``: uniform convergence iff ``|w(alpha)| < 1``."""
    cls = classify_automorphism(op.phi)
    if cls.kind != "elliptic" or cls.order is not None:
        raise ValidationError("phi must be an elliptic automorphism of infinite order")
    spec = spectrum_automorphism(op, cls, floor)
    alpha = complex(cls.fixed_point)
    wa = complex(op.weight_at(np.array([alpha]))[0])
    probe = power_bounded_probe(op, horizon)
    rationale = {"alpha": _pair(alpha), "w_alpha": _pair(wa), "abs_w_alpha": abs(wa),
                 "power_bound": probe.status, "spectrum": spec.as_dict()}
    norms, _ = section_trace(op, horizon)
    evidence = {"power_bound": probe.as_dict(), "trace": {"norm": norms, "tag": "finite-section"}}
    rows = _trace_rows(norms, None)
    theorem = "elliptic infinite order: uniform iff |w(alpha)| < 1"
    if abs(wa) < 1 - tol:
        # spectral radius |w(alpha)| < 1 already forces ||T^n|| -> 0
        return ConvergenceReport("uniform", theorem, rationale, evidence, LimitProjection("zero"), rows)
    rationale["uniform"] = False
    if abs(wa) > 1 + tol or probe.status == "unbounded":
        return ConvergenceReport("none", theorem, rationale, evidence, None, rows)
    rationale["note"] = "|w(alpha)| = 1: not uniform; weaker modes are not decided by this test"
    if abs(wa - 1) < tol:
        rationale["edge"] = "w(alpha) = 1"
    return ConvergenceReport("inconclusive", theorem, rationale, evidence, None, rows)
