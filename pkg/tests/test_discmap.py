import numpy as np
import pytest
from hypothesis import given, strategies as st

from wcolab.discmap import (Blaschke, Monomial, Moebius, Rotation, SeriesMap, classify_automorphism,
                            denjoy_wolff, iterate_map, psi_involution)
from wcolab.errors import ValidationError
from wcolab.holofunc import CoeffSeries

disc_points = st.builds(lambda r, t: r * np.exp(1j * t), st.floats(0, 0.99), st.floats(0, 2 * np.pi))


def test_psi_examples():
    z = np.array([0.3 + 0.2j, -0.5j])
    np.testing.assert_allclose(psi_involution(0)(z), -z)
    assert abs(psi_involution(0.5)(np.array([0.5]))[0]) < 1e-15
    assert psi_involution(0.5)(np.array([0j]))[0] == pytest.approx(0.5)


def test_iterate_examples():
    z = np.array([0.3 + 0.4j, -0.2])
    np.testing.assert_allclose(iterate_map(SeriesMap(CoeffSeries([0, .5])), 3)(z), z / 8, atol=1e-15)
    np.testing.assert_allclose(iterate_map(Rotation(1j), 4)(z), z, atol=1e-15)
    np.testing.assert_allclose(iterate_map(Monomial(2), 3)(z), z ** 8, atol=1e-15)


def test_denjoy_wolff_examples():
    r = denjoy_wolff(SeriesMap(CoeffSeries([0, .5])))
    assert r.location == "interior" and abs(r.dw_point) < 1e-12 and r.derivative == pytest.approx(.5)
    r = denjoy_wolff(Moebius(2, 1, 1, 2))
    assert r.location == "boundary" and r.dw_point == pytest.approx(1) and r.derivative == pytest.approx(1 / 3)
    # oracle: plain iteration of the orbit from 0
    z = 0.0
    for _ in range(200):
        z = (2 * z + 1) / (z + 2)
    assert z == pytest.approx(1, abs=1e-12)
    r = denjoy_wolff(Moebius(1, -1, 1, 3))
    assert r.location == "boundary" and r.dw_point == pytest.approx(-1, abs=1e-6)


def test_classify_examples():
    c = classify_automorphism(Rotation(1j))
    assert c.kind == "elliptic" and c.order == 4
    c = classify_automorphism(Moebius(2, 1, 1, 2))
    assert c.kind == "hyperbolic"
    assert c.attractive == pytest.approx(1) and c.deriv_attractive == pytest.approx(1 / 3)
    assert c.repulsive == pytest.approx(-1) and c.deriv_repulsive == pytest.approx(3)
    assert classify_automorphism(Monomial(2)).kind == "not_automorphism"


def test_blaschke_rejects_outside_zero():
    with pytest.raises(ValidationError):
        Blaschke([1.5])


@given(st.builds(complex, st.floats(-.7, .7), st.floats(-.7, .7)), disc_points)
def test_psi_is_involution(a, z):
    psi = psi_involution(a)
    back = psi(psi(np.array([z])))[0]
    assert abs(back - z) < 1e-12


@given(st.lists(st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=4),
       disc_points)
def test_schwarz_contraction(c, z):
    # phi(0) = 0 and sup|phi| <= 1 give |phi_n(z)| <= |z|, non-increasing in n
    c = np.array(c) / (np.sum(np.abs(c)) + 1e-9)
    phi = SeriesMap(CoeffSeries(np.concatenate([[0], c])))
    zs = [abs(z)]
    w = np.array([z])
    for _ in range(10):
        w = phi(w)
        zs.append(abs(w[0]))
    assert all(b <= a + 1e-14 for a, b in zip(zs, zs[1:]))
