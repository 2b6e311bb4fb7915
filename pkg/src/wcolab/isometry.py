"""Isometric weighted composition operators on H^2 and on (weighted) Bergman spaces."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .discmap import (Blaschke, DiscMap, Monomial, SeriesMap, classify_automorphism)
from .errors import ValidationError
from .holofunc import (CoeffSeries, HoloCallable, closed_eval, is_inner_probe, singularity_of)
from .quadrature import BoundaryRule, DiscQuadrature, bergman_moment, boundary_rule_for
from .wco import WeightedCompositionOp


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class IsometryReport:
    verdict: str  # isometry, not_isometry, inconclusive
    criterion_values: dict
    tested_horizon: int
    space: str = "h2"
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.verdict == "isometry"

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict, "space": self.space, "tested_horizon": self.tested_horizon,
               "criterion_values": self.criterion_values}
        if self.verdict == "isometry" and self.space == "h2":
            out["scope"] = f"isometry up to tested horizon n <= {self.tested_horizon}"
        if self.notes:
            out["notes"] = self.notes
        return out


def _unpack(op_or_w, phi=None):
    if isinstance(op_or_w, WeightedCompositionOp):
        return op_or_w.w, op_or_w.phi
    if phi is None:
        raise ValidationError("pass an operator or a (w, phi) pair")
    return op_or_w, phi


def h2_rule(w, phi, grid_size: int = 4096) -> BoundaryRule:
    """Boundary rule for integrands built from ``w`` and ``phi``."""
    return boundary_rule_for(singularity_of(w, phi), grid_size)


def h2_isometry_test(op, phi: Optional[DiscMap] = None, horizon: int = 50, tol: float = 1e-9,
                     rule: Optional[BoundaryRule] = None) -> IsometryReport:
    """``phi`` inner, ``||w||_2 = 1`` and ``<w, w phi^n> = 0`` for ``1 <= n <= horizon``."""
    w, phi = _unpack(op, phi)
    rule = rule or h2_rule(w, phi)
    probe = is_inner_probe(phi)
    wv = np.asarray(closed_eval(w, rule.nodes))
    pv = np.asarray(closed_eval(phi, rule.nodes))
    wsq = np.abs(wv) ** 2
    norm = float(np.sqrt(rule.mean(wsq).real))
    inner_products = []
    pw = np.ones_like(pv)
    for _ in range(horizon):
        pw = pw * pv
        # <w, w phi^n> = int |w|^2 conj(phi)^n dm
        inner_products.append(abs(rule.mean(wsq * np.conj(pw))))
    worst = float(max(inner_products)) if inner_products else 0.0
    values = {"w_norm_h2": norm, "w_norm_deviation": abs(norm - 1.0),
              "phi_inner": probe.status, "inner_path": probe.path,
              "max_abs_inner_w_wphin": worst, "rule": rule.kind, "tol": tol}
    if probe.profile:
        values["inner_profile"] = [list(p) for p in probe.profile]
    ok_norm = abs(norm - 1.0) < tol
    ok_orth = worst < tol
    if probe.status == "inconclusive" and ok_norm and ok_orth:
        verdict = "inconclusive"
    elif probe.status == "inner" and ok_norm and ok_orth:
        verdict = "isometry"
    else:
        verdict = "not_isometry"
    return IsometryReport(verdict, values, horizon, "h2")


def construct_h2_weight(phi: DiscMap, theta=None, case: Optional[str] = None):
    """Weight ``w`` making ``T_{w,phi}`` an isometry of H^2 for inner ``phi``.

    Cases: ``origin`` (``phi(0) = 0``; ``w = theta``), ``zero`` (``phi(beta) = 0``;
    ``w = theta k_beta / ||k_beta||``) and ``general`` (``w = theta (phi - phi(0)) /
    sqrt(1 - |phi(0)|^2)``, valid for any inner ``phi``).  Returns ``(w, case)``.
    """
    probe = is_inner_probe(phi)
    if probe.status != "inner":
        raise ValidationError(f"phi is not certified inner (probe: {probe.status})")
    a = complex(closed_eval(phi, np.array([0j]))[0])
    zeros = phi.zeros() if hasattr(phi, "zeros") else None
    if case is None:
        if abs(a) < 1e-14:
            case = "origin"
        elif zeros:
            case = "zero"
        else:
            case = "general"
    th = theta if theta is not None else CoeffSeries([1.0])
    sing = singularity_of(phi, th)

    if case == "origin":
        if abs(a) > 1e-12:
            raise ValidationError("case 'origin' needs phi(0) = 0")
        return th, case
    if case == "zero":
        if not zeros:
            raise ValidationError("case 'zero' needs a known zero of phi")
        beta = complex(zeros[0])
        scale = np.sqrt(1.0 - abs(beta) ** 2)

        def w_zero(z, beta=beta, scale=scale):
            z = np.asarray(z, dtype=complex)
            return closed_eval(th, z) * scale / (1.0 - np.conj(beta) * z)

        return HoloCallable(w_zero, label=f"theta*k_beta/||k_beta||, beta={beta}", singularity=sing), case
    if case == "general":
        scale = np.sqrt(1.0 - abs(a) ** 2)

        def w_gen(z, a=a, scale=scale):
            z = np.asarray(z, dtype=complex)
            return closed_eval(th, z) * (closed_eval(phi, z) - a) / scale

        return HoloCallable(w_gen, label="theta*(phi-phi(0))/sqrt(1-|phi(0)|^2)", singularity=sing), case
    raise ValidationError(f"unknown case {case!r}")


def _polynomial_degree(f) -> Optional[int]:
    if isinstance(f, CoeffSeries):
        return max(f.degree, 0)
    if isinstance(f, Monomial):
        return f.degree
    if isinstance(f, SeriesMap):
        return max(f.series.degree, 0)
    return getattr(f, "poly_degree", None)


def moment_matrix(w, phi, quad: DiscQuadrature, J: int) -> np.ndarray:
    """``M_jk = int phi^j conj(phi)^k |w|^2 dm_alpha`` for ``0 <= j, k <= J``."""
    pv = np.asarray(closed_eval(phi, quad.nodes))
    wsq = np.abs(np.asarray(closed_eval(w, quad.nodes))) ** 2
    powers = np.vstack([pv ** j for j in range(J + 1)])
    weighted = powers * (wsq * quad.weights)[None, :]
    return weighted @ np.conj(powers).T


def bergman_moment_test(op, phi: Optional[DiscMap] = None, quad: Optional[DiscQuadrature] = None,
                        J: int = 8, tol: float = 1e-10, alpha: float = 0.0) -> IsometryReport:
    """Compare pullback moments of ``|w|^2 dm_alpha`` under ``phi`` with those of ``m_alpha``."""
    w, phi = _unpack(op, phi)
    if quad is None:
        quad = DiscQuadrature.build(64, 256, alpha)
    alpha = quad.alpha
    M = moment_matrix(w, phi, quad, J)
    target = np.diag(bergman_moment(np.arange(J + 1), alpha)).astype(complex)
    dev = np.abs(M - target)
    worst = float(dev.max())
    dp, dw = _polynomial_degree(phi), _polynomial_degree(w)
    values = {"max_moment_deviation": worst, "J": J, "alpha": alpha, "tol": tol,
              "degree_exact": quad.degree_exact,
              "nodes": [quad.radial_nodes, quad.angular_nodes],
              "M11": _pair(M[1, 1]) if J >= 1 else None,
              "target11": float(target[1, 1].real) if J >= 1 else None,
              "deviation_matrix": [[float(x) for x in row] for row in dev]}
    notes = []
    if dp is not None and dw is not None:
        need = J * dp + dw
        values["degree_needed"] = need
        values["degree_sufficient"] = bool(need <= quad.degree_exact)
        exact = need <= quad.degree_exact
    else:
        # rational or transcendental integrand: refine the rule and report the change
        finer = DiscQuadrature.build(2 * quad.radial_nodes, 2 * quad.angular_nodes, alpha)
        delta = float(np.abs(moment_matrix(w, phi, finer, J) - M).max())
        values["degree_sufficient"] = None
        values["refinement_delta"] = delta
        exact = delta < tol
        notes.append("integrand is not polynomial; exactness judged by refinement")
    if not exact:
        notes.append("quadrature degree insufficient for the requested moments")
        verdict = "not_isometry" if worst > 1e3 * tol else "inconclusive"
    else:
        verdict = "isometry" if worst < tol else "not_isometry"
    space = "a2" if alpha == 0 else f"a2alpha:{alpha:g}"
    return IsometryReport(verdict, values, J, space, notes)


def _check_unimodular(c) -> complex:
    c = complex(c)
    if abs(abs(c) - 1.0) > 1e-12:
        raise ValidationError(f"|c| must be 1, got {abs(c)}")
    return c


def nfold_cover_weight(phi: DiscMap, N: int, c=1.0) -> HoloCallable:
    """``w = c phi' / sqrt(N)`` for an ``N``-fold covering self-map (asserted by the caller)."""
    c = _check_unimodular(c)
    if N < 1:
        raise ValidationError("N must be positive")
    scale = c / np.sqrt(N)
    w = HoloCallable(lambda z: scale * phi.derivative(np.asarray(z, dtype=complex)),
                     label=f"c*phi'/sqrt({N})")
    deg = _polynomial_degree(phi)
    if deg is not None:
        w.poly_degree = max(deg - 1, 0)
    return w


def symmetric_blaschke_weight(phi: DiscMap, psi: DiscMap, c=1.0, check_radius: float = 0.9,
                              check_points: int = 64, tol: float = 1e-10) -> HoloCallable:
    """``w = c phi'(psi(z)) / sqrt(N)`` for a degree-``N`` Blaschke ``phi`` invariant under ``psi``."""
    c = _check_unimodular(c)
    if isinstance(phi, Monomial):
        N = phi.degree
    elif isinstance(phi, Blaschke):
        N = phi.degree
    else:
        raise ValidationError("phi must be a finite Blaschke product")
    ring = check_radius * np.exp(2j * np.pi * np.arange(check_points) / check_points)
    dev = float(np.max(np.abs(phi(psi(ring)) - phi(ring))))
    if dev > tol:
        raise ValidationError(f"phi o psi != phi: max deviation {dev:.3g}")
    cls = classify_automorphism(psi)
    if cls.kind != "elliptic" or cls.order != N:
        raise ValidationError(f"psi must be an elliptic automorphism of order {N}")
    scale = c / np.sqrt(N)
    w = HoloCallable(lambda z: scale * phi.derivative(psi(np.asarray(z, dtype=complex))),
                     label=f"c*phi'(psi)/sqrt({N})")
    if isinstance(phi, Monomial) and cls.fixed_point is not None and abs(cls.fixed_point) < 1e-14:
        w.poly_degree = N - 1
    return w


def norm_preservation(op, phi: Optional[DiscMap] = None, polys: Sequence[CoeffSeries] = (),
                      space: str = "h2", quad: Optional[DiscQuadrature] = None,
                      rule: Optional[BoundaryRule] = None) -> list:
    """``| ||T f|| - ||f|| |`` for each polynomial ``f``.

    H^2 norms of ``T f`` are boundary integrals of ``|w|^2 |f o phi|^2``;
    Bergman norms use the disc quadrature, against exact monomial moments
    for ``||f||``.
    """
    w, phi = _unpack(op, phi)
    out = []
    if space == "h2":
        rule = rule or h2_rule(w, phi)
        wv = np.asarray(closed_eval(w, rule.nodes))
        pv = np.asarray(closed_eval(phi, rule.nodes))
        for f in polys:
            tf = np.sqrt(rule.mean(np.abs(wv * closed_eval(f, pv)) ** 2).real)
            out.append(abs(tf - np.linalg.norm(f.coeffs)))
        return out
    quad = quad or DiscQuadrature.build(64, 256)
    wv = np.asarray(closed_eval(w, quad.nodes))
    pv = np.asarray(closed_eval(phi, quad.nodes))
    for f in polys:
        tf = np.sqrt(quad.integrate(np.abs(wv * closed_eval(f, pv)) ** 2).real)
        mom = bergman_moment(np.arange(f.truncation_order), quad.alpha)
        fn = np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * mom))
        out.append(abs(tf - fn))
    return out
