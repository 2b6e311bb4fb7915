import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcolab.discmap import Moebius, SeriesMap, psi_involution, compose_maps, identity_map
from wcolab.errors import ValidationError
from wcolab.holofunc import CoeffSeries, LinearFractional, closed_eval
from wcolab.transfer import (HalfPlaneMap, SmirnoffDomainSpec, h2d_iterate_transfer, h2d_transfer_bound,
                             halfplane_equivalence_suite, halfplane_norm_check, halfplane_to_disc,
                             kernel_growth_probe, smirnoff_weight)
from wcolab.wco import WeightedCompositionOp, build_matrix

ONE = CoeffSeries([1.0])


def _moebius_equal(phi, a, b, c, d):
    m = np.array([[a, b], [c, d]], dtype=complex)
    got = phi.matrix / phi.matrix[1, 1]
    return np.abs(got - m / m[1, 1]).max()


def test_translation_transfer():
    op = halfplane_to_disc(HalfPlaneMap.affine(1, 1))
    assert _moebius_equal(op.phi, 1, -1, 1, 3) < 1e-14
    z = np.array([0, .3 - .2j, -.9])
    np.testing.assert_allclose(closed_eval(op.w, z), 2 / (z + 3), atol=1e-14)
    assert complex(op.phi(np.array([-1.0 + 0j]))[0]) == pytest.approx(-1, abs=1e-14)


def test_dilation_transfer():
    op = halfplane_to_disc(HalfPlaneMap.affine(2, 0))
    assert _moebius_equal(op.phi, 3, -1, -1, 3) < 1e-14
    z = np.array([0, .5j])
    np.testing.assert_allclose(closed_eval(op.w, z), 2 / (3 - z), atol=1e-14)
    chk = halfplane_norm_check(HalfPlaneMap.affine(2, 0))
    assert abs(chk.phi_prime_at_minus_one - .5) < 1e-6
    assert abs(chk.formula - 1 / np.sqrt(2)) < 1e-15 and chk.agree


def test_identity_transfer():
    op = halfplane_to_disc(HalfPlaneMap.affine(1, 0), trunc=16)
    np.testing.assert_allclose(build_matrix(op).entries, np.eye(16), atol=1e-12)
    assert halfplane_norm_check(HalfPlaneMap.affine(1, 0)).estimate == pytest.approx(1, abs=1e-7)


def test_translation_norm():
    assert halfplane_norm_check(HalfPlaneMap.affine(1, 1)).agree


def test_ang_deriv_estimate_for_nonaffine():
    H = HalfPlaneMap(lambda s: 2 * s + 1 / (s + 1))
    assert H.ang_deriv_inf == pytest.approx(.5, abs=1e-6)


def test_equivalence_suite():
    s = halfplane_equivalence_suite(HalfPlaneMap.affine(2, 0))
    assert s["condition_ii"]["holds"] and s["condition_iv"]["decays"] and s["consistent"]
    assert s["condition_iv"]["within_bound"]
    s = halfplane_equivalence_suite(HalfPlaneMap.affine(.5, 0))
    assert not s["condition_ii"]["holds"] and min(s["condition_iv"]["trace"]) >= 1 - 1e-6
    with pytest.raises(ValidationError):
        halfplane_equivalence_suite(HalfPlaneMap.affine(1, 1))


def test_smirnoff_identity_domain():
    op = smirnoff_weight(SmirnoffDomainSpec(CoeffSeries([0, 1])), disc_map=SeriesMap(CoeffSeries([0, .5])))
    np.testing.assert_allclose(closed_eval(op.w, np.array([0, .4j])), [1, 1], atol=1e-14)
    op = smirnoff_weight(SmirnoffDomainSpec(CoeffSeries([0, 2])), Phi_domain=lambda s: s / 2, trunc=16)
    z = np.array([.1, -.5 + .3j])
    np.testing.assert_allclose(op.phi(z), z / 2, atol=1e-12)
    np.testing.assert_allclose(closed_eval(op.w, z), 1, atol=1e-12)


def test_smirnoff_quadratic_domain():
    beta = CoeffSeries([0, 1, .25])
    spec = SmirnoffDomainSpec(beta)
    Phi = lambda s: closed_eval(beta, spec.inverse(s) / 2)  # noqa: E731
    op = smirnoff_weight(spec, Phi_domain=Phi, trunc=16)
    z = np.array([.2, .5j, -.6])
    np.testing.assert_allclose(op.phi(z), z / 2, atol=1e-10)
    np.testing.assert_allclose(closed_eval(op.w, z), np.sqrt((1 + z / 2) / (1 + z / 4)), atol=1e-10)


def test_smirnoff_inverse_roundtrip():
    spec = SmirnoffDomainSpec(CoeffSeries([0, 1, .25]))
    z = 0.9 * np.exp(1j * np.linspace(0, 6, 25)) * np.linspace(0.1, 1, 25)
    np.testing.assert_allclose(spec.inverse(closed_eval(spec.beta_obj, z)), z, atol=1e-11)


def test_kernel_growth_unweighted_closed_form():
    phi = Moebius(2, 1, 1, 2)
    kg = kernel_growth_probe(WeightedCompositionOp(ONE, phi), 0.0, horizon=60)
    # phi_n(0) = tanh(n log(3) / 2), so (1 - phi_n(0)^2)^(-1/2) = cosh(n log(3) / 2)
    ref = np.cosh(np.arange(61) * np.log(3) / 2)
    rel = np.abs(np.array(kg.trace) - ref) / np.array(ref)
    assert rel.max() < 1e-6 and kg.fired


def test_kernel_growth_bounded_contrast():
    op = halfplane_to_disc(HalfPlaneMap.affine(1, 1))
    kg = kernel_growth_probe(op, 0.0, horizon=60)
    assert not kg.fired and max(kg.trace) <= 1 + 1e-9


def test_kernel_growth_smirnoff_hyperbolic():
    op = smirnoff_weight(SmirnoffDomainSpec(CoeffSeries([0, 1, .25])), disc_map=Moebius(2, 1, 1, 2))
    kg = kernel_growth_probe(op, 0.0, horizon=60)
    assert kg.fired and kg.fired_at <= 60


def test_h2d_bound_examples():
    half = SeriesMap(CoeffSeries([0, .5]))
    b = h2d_transfer_bound(WeightedCompositionOp(CoeffSeries([1, .5]), half))
    assert b.holds and b.c_h2 == pytest.approx(1) and b.c_h2d_bound == pytest.approx(1)
    phi = compose_maps(psi_involution(.5), compose_maps(half, psi_involution(.5)))
    b = h2d_transfer_bound(WeightedCompositionOp(ONE, phi))
    assert b.holds and b.slack > 0
    b = h2d_transfer_bound(WeightedCompositionOp(CoeffSeries([.3, .2]), Moebius(1, .2, 0, 2)), d="h2")
    assert abs(b.lhs - b.norm_h2) < 1e-12


def test_h2d_iterates():
    half = SeriesMap(CoeffSeries([0, .5]))
    rep = h2d_iterate_transfer(WeightedCompositionOp(CoeffSeries([.5, .5]), half))
    assert rep["status"] == "confirmed"
    rep = h2d_iterate_transfer(WeightedCompositionOp(ONE, half))
    assert rep["status"] == "inconclusive" and "not triggered" in rep["note"]


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=4))
def test_h2d_function_checks_termwise(fc):
    op = WeightedCompositionOp(CoeffSeries([.5, .4]), SeriesMap(CoeffSeries([.1, .5])), trunc=32)
    rep = h2d_iterate_transfer(op, horizon=5, polys=[CoeffSeries(fc)])
    assert all(c["termwise_le"] for c in rep["function_checks"])
