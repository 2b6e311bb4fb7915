"""Acceptance criteria 1-10; each test records one pass/fail line for the summary."""
import numpy as np
import pytest

from conftest import ACCEPTANCE
from wcolab.cli import main
from wcolab.convergence import classify_elliptic_finite, classify_interior_dw, limit_projection
from wcolab.discmap import (Blaschke, Monomial, Moebius, Rotation, SeriesMap, SingularInner, compose_maps,
                            psi_involution)
from wcolab.holofunc import CoeffSeries, closed_eval
from wcolab.isometry import (bergman_moment_test, construct_h2_weight, h2_isometry_test, nfold_cover_weight,
                             norm_preservation, symmetric_blaschke_weight)
from wcolab.quadrature import DiscQuadrature, bergman_moment
from wcolab.transfer import (HalfPlaneMap, SmirnoffDomainSpec, h2d_iterate_transfer, h2d_transfer_bound,
                             halfplane_norm_check, halfplane_to_disc, kernel_growth_probe, smirnoff_weight)
from wcolab.wco import WeightedCompositionOp, build_matrix, gelfand_radius, iterate_direct, iterate_matrix

ONE = CoeffSeries([1.0])
HALF = SeriesMap(CoeffSeries([0, .5]))


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def random_poly(rng, deg, total):
    """Random complex polynomial of degree <= deg whose coefficient moduli sum to ``total``."""
    c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
    return c / np.abs(c).sum() * total


def random_self_map(rng, deg=6):
    # sum |c_k| < 1 certifies sup |phi| < 1 by the triangle inequality
    return SeriesMap(CoeffSeries(random_poly(rng, rng.integers(1, deg + 1), rng.uniform(.5, .95))))


def test_criterion_01_dual_path():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        w = CoeffSeries(random_poly(rng, rng.integers(0, 7), rng.uniform(.5, 1.5)))
        phi = random_self_map(rng)
        f = CoeffSeries(random_poly(rng, rng.integers(0, 7), 1.0))
        op = WeightedCompositionOp(w, phi)
        M = build_matrix(op)
        for n in range(1, 11):
            a = iterate_direct(op, n, f).coeffs
            b = iterate_matrix(op, n, M).apply(f).coeffs
            worst = max(worst, float(np.linalg.norm(a - b)))
    record(1, worst < 1e-6, f"max dual-path H2 difference over 50 triples, n<=10: {worst:.2e}")


def test_criterion_02_interior_dw():
    r1 = classify_interior_dw(WeightedCompositionOp(CoeffSeries([.5, .5]), HALF))
    r2 = classify_interior_dw(WeightedCompositionOp(ONE, HALF))
    r3 = classify_interior_dw(WeightedCompositionOp(CoeffSeries([2.0]), HALF))
    tail = r2.evidence["trace"]["norm_minus_P"][39]
    rel = max(abs(complex(*row["value"]) - 2.0 ** row["n"]) / 2.0 ** row["n"]
              for row in r3.evidence["iterate_at_alpha"])
    ok = (r1.mode == "uniform" and r1.limit.kind == "zero" and r2.mode == "uniform"
          and r2.limit.kind == "rank_one" and tail < 1e-6 and r3.mode == "none" and rel < 1e-10)
    record(2, ok, f"modes {r1.mode}/{r2.mode}/{r3.mode}; ||T^40-P|| = {tail:.1e}; "
                  f"2^n relative error {rel:.1e}")


def test_criterion_03_elliptic_trichotomy():
    modes = [classify_elliptic_finite(WeightedCompositionOp(CoeffSeries(c), Rotation(-1)))
             for c in ([.5, .5], [1, 1], [0, 1])]
    powers = modes[2].evidence["v_power_l2"]
    dev = max(abs(p - 1) for p in powers)
    wit = modes[1].rationale["witness"]
    ok = ([m.mode for m in modes] == ["uniform", "none", "weak_not_strong"] and len(powers) == 50
          and dev < 1e-12 and wit["certified"] and abs(wit["abs_v_z0"] - 1.9025) < 1e-12
          and abs(complex(*wit["z0"]) - .95j) < 1e-12)
    record(3, ok, f"modes {[m.mode for m in modes]}; max | ||v^m||_2 - 1 | = {dev:.1e}; "
                  f"|v(z0)| = {wit['abs_v_z0']:.6f}")


def test_criterion_04_spectra():
    g1 = gelfand_radius(WeightedCompositionOp(ONE, Moebius(2, 1, 1, 2), trunc=256))
    g2 = gelfand_radius(WeightedCompositionOp(CoeffSeries([.5, .25]), Rotation(np.exp(1j))))
    assert g1.schedule[-1] == 64
    ok = abs(g1.estimate - np.sqrt(3)) <= .1 and abs(g2.estimate - .5) <= .05
    record(4, ok, f"hyperbolic estimate {g1.estimate:.5f} (sqrt3 = 1.73205); rotation estimate {g2.estimate:.5f}")


def test_criterion_05_isometries():
    rng = np.random.default_rng(5)
    polys = [CoeffSeries(random_poly(rng, rng.integers(0, 6), rng.uniform(.5, 2))) for _ in range(5)]
    cases = {}
    w, _ = construct_h2_weight(Monomial(2), CoeffSeries([0, 1]))
    cases["theta-only"] = (h2_isometry_test(w, Monomial(2), 50, 1e-9), norm_preservation(w, Monomial(2), polys))
    w, _ = construct_h2_weight(psi_involution(.5))
    cases["k_beta"] = (h2_isometry_test(w, psi_involution(.5), 50, 1e-9),
                       norm_preservation(w, psi_involution(.5), polys))
    s = SingularInner(1.0, 1.0)
    w, _ = construct_h2_weight(s)
    rep = h2_isometry_test(w, s, 50, 1e-9)
    cases["singular"] = (rep, norm_preservation(w, s, polys))
    wn = CoeffSeries([0, np.sqrt(2)])
    cases["nfold"] = (bergman_moment_test(wn, Monomial(2), tol=1e-10),
                      norm_preservation(wn, Monomial(2), polys, space="a2"))
    ws = symmetric_blaschke_weight(Monomial(2), Rotation(-1))
    cases["symmetric"] = (bergman_moment_test(ws, Monomial(2), tol=1e-10),
                          norm_preservation(ws, Monomial(2), polys, space="a2"))
    verdicts = {k: r.verdict for k, (r, _) in cases.items()}
    worst = max(max(p) for _, p in cases.values())
    ok = (all(v == "isometry" for v in verdicts.values()) and worst < 1e-7
          and rep.criterion_values["w_norm_deviation"] < 1e-6)
    record(5, ok, f"verdicts {verdicts}; max norm-preservation gap {worst:.1e}; "
                  f"singular ||w||-1 = {rep.criterion_values['w_norm_deviation']:.1e}")


def test_criterion_06_moment_necessity():
    rep = bergman_moment_test(ONE, Monomial(2))
    m11 = complex(*rep.criterion_values["M11"])
    ok = rep.verdict == "not_isometry" and abs(m11 - 1 / 3) < 1e-12 and rep.criterion_values["target11"] == .5
    record(6, ok, f"M11 = {m11.real:.15f} vs target 1/2; verdict {rep.verdict}")


def test_criterion_07_halfplane():
    op = halfplane_to_disc(HalfPlaneMap.affine(1, 1))
    m = op.phi.matrix / op.phi.matrix[1, 1]
    coeff_err = float(np.abs(m - np.array([[1, -1], [1, 3]]) / 3).max())
    z = np.linspace(-.9, .9, 7) + .2j
    w_err = float(np.abs(closed_eval(op.w, z) - 2 / (z + 3)).max())
    chk = halfplane_norm_check(HalfPlaneMap.affine(2, 0), trunc=256)
    chk1 = halfplane_norm_check(HalfPlaneMap.affine(1, 1), trunc=256)
    ok = (coeff_err < 1e-14 and w_err < 1e-14 and abs(chk.phi_at_minus_one + 1) < 1e-12
          and abs(chk.phi_prime_at_minus_one - .5) < 1e-6 and chk.agree and chk1.agree)
    record(7, ok, f"Moebius coeff err {coeff_err:.1e}; phi'(-1) = {chk.phi_prime_at_minus_one:.9f}; "
                  f"norms {chk.formula:.4f}~{chk.estimate:.4f}, {chk1.formula:.4f}~{chk1.estimate:.4f}")


def test_criterion_08_kernel_growth():
    op = smirnoff_weight(SmirnoffDomainSpec(CoeffSeries([0, 1, .25])), disc_map=Moebius(2, 1, 1, 2))
    kg = kernel_growth_probe(op, 0.0, horizon=60)
    plain = kernel_growth_probe(WeightedCompositionOp(ONE, Moebius(2, 1, 1, 2)), 0.0, horizon=60)
    ref = np.cosh(np.arange(61) * np.log(3) / 2)
    rel = float(np.max(np.abs(np.array(plain.trace) - ref) / ref))
    ok = kg.fired and kg.fired_at <= 60 and rel < 1e-6
    record(8, ok, f"Smirnoff trace exceeds 1e3 at n = {kg.fired_at}; unweighted relative error {rel:.1e}")


def test_criterion_09_weighted_space():
    rng = np.random.default_rng(9)
    slacks = []
    for _ in range(20):
        w = CoeffSeries(random_poly(rng, rng.integers(0, 4), rng.uniform(.3, 2)))
        b = h2d_transfer_bound(WeightedCompositionOp(w, random_self_map(rng, 4)))
        slacks.append(b.slack if b.holds else -abs(b.slack))
    confirmed = 0
    for _ in range(10):
        w = CoeffSeries(random_poly(rng, rng.integers(0, 4), rng.uniform(.2, .6)))
        rep = h2d_iterate_transfer(WeightedCompositionOp(w, random_self_map(rng, 4)))
        confirmed += rep["h2_decays"] and rep["status"] == "confirmed"
    ok = min(slacks) >= 0 and confirmed == 10
    record(9, ok, f"bound holds on {sum(s >= 0 for s in slacks)}/20 (min slack {min(slacks):.3f}); "
                  f"iterate decay confirmed on {confirmed}/10")


def test_criterion_10_structural(tmp_path):
    rng = np.random.default_rng(10)
    a = rng.uniform(0, .95, 10 ** 4) * np.exp(2j * np.pi * rng.uniform(size=10 ** 4))
    z = rng.uniform(0, .99, 10 ** 4) * np.exp(2j * np.pi * rng.uniform(size=10 ** 4))
    once = (a - z) / (1 - np.conj(a) * z)
    psi_err = float(np.abs((a - once) / (1 - np.conj(a) * once) - z).max())
    psi_err = max(psi_err, max(float(abs(psi_involution(a[k])(psi_involution(a[k])(z[k:k + 1]))[0] - z[k]))
                               for k in range(200)))

    schwarz_ok = True
    for _ in range(10):
        c = random_poly(rng, 4, rng.uniform(.5, 1.0))
        c[0] = 0
        phi, pts = SeriesMap(CoeffSeries(c)), z[:200]
        prev = np.abs(pts)
        for _ in range(10):
            pts = phi(pts)
            schwarz_ok &= bool(np.all(np.abs(pts) <= prev + 1e-14))
            prev = np.abs(pts)

    quad_err = 0.0
    for kr, kt, alpha in ((8, 16, 0.0), (12, 24, 1.5), (20, 40, .5)):
        q = DiscQuadrature.build(kr, kt, alpha)
        for j in range(q.degree_exact + 1):
            for k in range(q.degree_exact + 1):
                want = bergman_moment(j, alpha) if j == k else 0.0
                quad_err = max(quad_err, abs(q.integrate(q.nodes ** j * np.conj(q.nodes) ** k) - want))

    proj_err = 0.0
    for w, phi in ((ONE, HALF), (CoeffSeries([1, .5]), HALF),
                   (CoeffSeries([1, -.3j]), SeriesMap(CoeffSeries([0, .4, .2])))):
        op = WeightedCompositionOp(w, phi)
        P = limit_projection(op).matrix(op)
        proj_err = max(proj_err, float(np.linalg.norm(P @ P - P, 2)))

    outs = [tmp_path / "a", tmp_path / "b"]
    for d in outs:
        main(["classify", "--weight", "[1,0.5]", "--map", '{"kind":"series","coeffs":[0,0.5]}',
              "--csv", "--out", str(d)])
        main(["transfer", "halfplane", "--phi", "affine:2,0", "--out", str(d / "hp")])
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
               for f in ("report.json", "trace.csv", "hp/report.json"))
    ok = psi_err < 1e-12 and schwarz_ok and quad_err < 1e-13 and proj_err < 1e-8 and same
    record(10, ok, f"psi_a err {psi_err:.1e}; Schwarz {'ok' if schwarz_ok else 'violated'}; "
                   f"quadrature err {quad_err:.1e}; ||P^2-P|| {proj_err:.1e}; reports identical {same}")
