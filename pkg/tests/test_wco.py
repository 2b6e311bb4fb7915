import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcolab.discmap import Monomial, Moebius, Rotation, SeriesMap, identity_map, psi_involution
from wcolab.errors import DivergenceError, NotSelfMapError, ValidationError
from wcolab.holofunc import CoeffSeries, HoloCallable, closed_eval
from wcolab.wco import (Space, WeightedCompositionOp, apply, build_matrix, conjugate_to_origin,
                        gelfand_radius, grid_for, iterate_direct, iterate_matrix, iterate_section,
                        norm_estimate, power_bounded_probe)
from wcolab.transfer import kernel_adjoint_residual

half = SeriesMap(CoeffSeries([0, .5]))
ONE = CoeffSeries([1.0])


def op(w, phi, **kw):
    return WeightedCompositionOp(w, phi, **kw)


def test_matrix_examples():
    np.testing.assert_allclose(build_matrix(op(ONE, identity_map(), trunc=4)).entries, np.eye(4), atol=1e-13)
    np.testing.assert_allclose(build_matrix(op(ONE, half, trunc=4)).entries, np.diag([1, .5, .25, .125]),
                               atol=1e-13)
    M = build_matrix(op(CoeffSeries([0, 1]), Monomial(2), trunc=9)).entries
    want = np.zeros((9, 9))
    for j in range(4):
        want[2 * j + 1, j] = 1
    np.testing.assert_allclose(M, want, atol=1e-13)


def test_apply_examples():
    np.testing.assert_allclose(apply(op(ONE, half, trunc=4), CoeffSeries([0, 1])).coeffs, [0, .5, 0, 0],
                               atol=1e-13)
    np.testing.assert_allclose(apply(op(CoeffSeries([0, 1]), Monomial(2), trunc=5), CoeffSeries([1, 1])).coeffs,
                               [0, 1, 0, 1, 0], atol=1e-13)
    k = CoeffSeries.geometric(0.5, 64, scale=np.sqrt(3) / 2)
    got = apply(op(k, psi_involution(0.5), trunc=64), ONE)
    np.testing.assert_allclose(got.coeffs, k.coeffs, atol=1e-12)


def test_iterate_examples():
    np.testing.assert_allclose(iterate_direct(op(ONE, half, trunc=4), 5, CoeffSeries([0, 1])).coeffs,
                               [0, 1 / 32, 0, 0], atol=1e-14)
    np.testing.assert_allclose(iterate_direct(op(CoeffSeries([0, 1]), Rotation(-1), trunc=4), 2, ONE).coeffs,
                               [0, 0, -1, 0], atol=1e-14)
    f = CoeffSeries([.3, -1j, 2])
    np.testing.assert_allclose(iterate_direct(op(ONE, identity_map(), trunc=3), 7, f).coeffs, f.coeffs,
                               atol=1e-13)


def test_matrix_power_examples():
    T = op(ONE, half, trunc=3)
    np.testing.assert_allclose(iterate_matrix(T, 3).entries, np.diag([1, 1 / 8, 1 / 64]), atol=1e-14)
    np.testing.assert_allclose(iterate_matrix(op(ONE, identity_map(), trunc=5), 9).entries, np.eye(5),
                               atol=1e-12)
    T = op(ONE, half, trunc=8)
    e1 = CoeffSeries.monomial(1, 8)
    np.testing.assert_allclose(iterate_matrix(T, 5).apply(e1).coeffs, iterate_direct(T, 5, e1).coeffs,
                               atol=1e-9)


def test_conjugate_to_origin_zero_shift():
    w = CoeffSeries([1, 2, 3])
    phi = SeriesMap(CoeffSeries([0, .3, .2]))
    c = conjugate_to_origin(op(w, phi), 0)
    z = np.array([.2 + .1j, -.4j])
    np.testing.assert_allclose(c.weight_at(z), closed_eval(w, -z))
    np.testing.assert_allclose(c.phi(z), -phi(-z))
    with pytest.raises(ValidationError):
        conjugate_to_origin(op(w, phi), 0.5)


def test_norm_examples():
    assert norm_estimate(op(ONE, identity_map())).value == pytest.approx(1, abs=1e-10)
    assert norm_estimate(op(ONE, half)).value == pytest.approx(1, abs=1e-10)
    T = op(LinearFractionalWeight(), Moebius(1, -1, 1, 3), trunc=256)
    assert abs(norm_estimate(T).value - 1) < 2e-2


def LinearFractionalWeight():
    from wcolab.holofunc import LinearFractional
    return LinearFractional(0, 2, 1, 3)


def test_gelfand_examples():
    g = gelfand_radius(op(ONE, identity_map(), trunc=32))
    assert all(abs(v - 1) < 1e-9 for v in g.values)
    g = gelfand_radius(op(CoeffSeries([2, 1]) * 0.25, Rotation(np.exp(1j))))
    assert abs(g.estimate - .5) < 5e-2
    g = gelfand_radius(op(ONE, Moebius(2, 1, 1, 2), trunc=256))
    assert 1 / np.sqrt(3) - .05 <= g.estimate <= np.sqrt(3) + .05


def test_power_bound_examples():
    assert power_bounded_probe(op(ONE, half)).status == "bounded"
    assert power_bounded_probe(op(CoeffSeries([1, 1]), Rotation(-1))).status == "unbounded"
    pb = power_bounded_probe(op(CoeffSeries([.5]), Monomial(2)))
    assert pb.status == "bounded" and pb.trace[-1] < 1e-10


def test_non_self_map_and_divergence():
    with pytest.raises(NotSelfMapError):
        build_matrix(op(ONE, SeriesMap(CoeffSeries([0, 2]))))
    with pytest.raises(DivergenceError):
        iterate_direct(op(CoeffSeries([10.0]), half), 20, ONE)


def test_grid_for_adapts_radius():
    assert grid_for(128).radius == pytest.approx(0.9)
    g = grid_for(512)
    assert g.radius ** -512 <= 1e8 * (1 + 1e-9) and g.grid_size >= 1024


def test_bergman_matrix_is_orthonormalised():
    # C_phi with phi = z/2 is diagonal in any monomial-weighted space
    T = op(ONE, half, space=Space.a2alpha(0), trunc=6)
    np.testing.assert_allclose(build_matrix(T).entries, np.diag(.5 ** np.arange(6)), atol=1e-13)
    # multiplication by z: e_n -> sqrt((n+2)/(n+1)) e_{n+1} up to the norm ratio d_{n+1}/d_n
    M = build_matrix(op(CoeffSeries([0, 1]), identity_map(), space=Space.a2alpha(0), trunc=5)).entries
    np.testing.assert_allclose(np.diag(M, -1), np.sqrt(np.arange(1, 5) / np.arange(2, 6)), atol=1e-13)


coef = st.builds(complex, st.floats(-1, 1), st.floats(-1, 1))


def _random_triple(draw_w, draw_p, draw_f):
    w = CoeffSeries(np.array(draw_w) / (1 + np.sum(np.abs(draw_w))) * 1.5)
    pc = np.array(draw_p)
    phi = SeriesMap(CoeffSeries(pc / (np.sum(np.abs(pc)) + 1e-3) * 0.95))
    return w, phi, CoeffSeries(draw_f)


@given(st.lists(coef, min_size=1, max_size=4), st.lists(coef, min_size=2, max_size=4),
       st.lists(coef, min_size=1, max_size=5), st.integers(1, 6))
def test_dual_path_agrees(wc, pc, fc, n):
    w, phi, f = _random_triple(wc, pc, fc)
    T = op(w, phi, trunc=64)
    a = iterate_direct(T, n, f).coeffs
    b = iterate_matrix(T, n).apply(f).coeffs
    assert np.linalg.norm(a - b) < 1e-6 * max(1.0, np.linalg.norm(a))


@given(st.lists(coef, min_size=1, max_size=4), st.lists(coef, min_size=2, max_size=4), st.integers(1, 8))
def test_iterate_of_one_at_fixed_point(wc, pc, n):
    # with phi(0) = 0: (T^n 1)(0) = w(0)^n
    w, phi, _ = _random_triple(wc, pc, [1])
    pc2 = phi.series.coeffs.copy()
    pc2[0] = 0
    T = op(w, SeriesMap(CoeffSeries(pc2)), trunc=32)
    got = iterate_direct(T, n, ONE).coeffs[0]
    assert abs(got - w.coeffs[0] ** n) < 1e-10


@given(st.lists(coef, min_size=1, max_size=4), st.lists(coef, min_size=2, max_size=4), st.integers(2, 5))
def test_section_norm_monotone_in_truncation(wc, pc, n):
    w, phi, _ = _random_triple(wc, pc, [1])
    T = op(w, phi, trunc=64)
    full = iterate_section(T, n).entries
    norms = [np.linalg.norm(full[:k, :k], 2) for k in (8, 16, 32, 64)]
    assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))


@given(st.lists(coef, min_size=1, max_size=4), st.lists(coef, min_size=2, max_size=4),
       st.builds(lambda r, t: r * np.exp(1j * t), st.floats(0, .6), st.floats(0, 6.3)))
def test_kernel_adjoint_identity(wc, pc, w0):
    w, phi, _ = _random_triple(wc, pc, [1])
    assert kernel_adjoint_residual(op(w, phi, trunc=256), w0) < 1e-8


def test_kernel_adjoint_unweighted_automorphism():
    assert kernel_adjoint_residual(op(ONE, Moebius(2, 1, 1, 2), trunc=256), 0.3) < 1e-8
    assert kernel_adjoint_residual(op(LinearFractionalWeight(), Moebius(1, -1, 1, 3), trunc=256), -0.2j) < 1e-8


def test_callable_weight_matches_series():
    w = CoeffSeries([1, .5])
    hc = HoloCallable(lambda z: 1 + .5 * np.asarray(z))
    a = build_matrix(op(w, half, trunc=16)).entries
    b = build_matrix(op(hc, half, trunc=16)).entries
    np.testing.assert_allclose(a, b, atol=1e-13)
