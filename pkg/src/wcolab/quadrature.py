"""Quadrature rules on the unit circle and the unit disc.

All rules return nodes and weights that sum to one, i.e. they integrate
against normalized arc length on the circle or normalized area measure on the
disc.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ValidationError


@dataclass(frozen=True)
class BoundaryRule:
    """Nodes on the unit circle (or a concentric circle) with weights."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def mean(self, values) -> complex:
        return complex(np.sum(np.asarray(values) * self.weights))


def circle_rule(grid_size: int = 4096, radius: float = 1.0) -> BoundaryRule:
    """Trapezoid rule on the circle of the given radius."""
    if grid_size < 1:
        raise ValidationError("grid_size must be positive")
    theta = 2.0 * np.pi * np.arange(grid_size) / grid_size
    nodes = radius * np.exp(1j * theta)
    weights = np.full(grid_size, 1.0 / grid_size)
    return BoundaryRule(nodes, weights, "trapezoid")


@lru_cache(maxsize=32)
def _cayley_parts(periods: int, panels: int, order: int):
    t, wt = np.polynomial.legendre.leggauss(order)
    period = 2.0 * np.pi
    X = periods * period
    edges = np.linspace(-X, X, 2 * periods * panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    x = (mids[:, None] + half * t[None, :]).ravel()
    w = np.broadcast_to(half * wt, (mids.size, order)).ravel()
    return x, w, X, period


def cayley_rule(zeta: complex = 1.0, frequency: float = 1.0, periods: int = 400,
                panels: int = 16, order: int = 24) -> BoundaryRule:
    """Boundary rule for integrands with an essential singularity at ``zeta``.

    The circle is parametrised by ``x = cot(theta/2)`` measured from ``zeta``
    so that ``dm = dx / (pi (1 + x^2))``.  An atomic singular inner function
    with mass ``frequency`` becomes ``exp(-i frequency x)``, periodic in ``x``.
    The line is cut at a whole number of periods and each tail is replaced by
    the average over its last period, which leaves an O(X^-3) error.
    """
    if frequency <= 0:
        raise ValidationError("frequency must be positive")
    x, w, X, period = _cayley_parts(periods, panels, order)
    x = x / frequency
    w = w / frequency
    X = X / frequency
    period = period / frequency
    dens = w / (np.pi * (1.0 + x * x))
    tail = (0.5 * np.pi - np.arctan(X)) / np.pi
    right = x > X - period
    left = x < -X + period
    dens = dens.copy()
    dens[right] += tail * dens[right] / dens[right].sum()
    dens[left] += tail * dens[left] / dens[left].sum()
    zeta = complex(zeta) / abs(complex(zeta))
    nodes = zeta * (x + 1j) / (x - 1j)
    return BoundaryRule(nodes, dens, "cayley")


def boundary_rule_for(singularity=None, grid_size: int = 4096, radius: float = 1.0) -> BoundaryRule:
    """Pick the Cayley rule when a boundary singularity ``(zeta, frequency)`` is declared."""
    if singularity is None:
        return circle_rule(grid_size, radius)
    zeta, freq = singularity
    return cayley_rule(zeta, freq)


def bergman_moment(j, alpha: float = 0.0):
    """``int |z|^{2j} dm_alpha`` with ``dm_alpha = (alpha+1)(1-|z|^2)^alpha dm``."""
    j = np.asarray(j, dtype=float)
    if alpha == 0.0:
        return 1.0 / (j + 1.0)
    return np.exp(special.gammaln(j + 1.0) + special.gammaln(alpha + 2.0)
                  - special.gammaln(j + alpha + 2.0))


@dataclass(frozen=True)
class DiscQuadrature:
    """Tensor rule for normalized (weighted) area measure on the disc.

    Gauss rule in ``rho = |z|^2`` (Legendre for ``alpha = 0``, Jacobi
    otherwise) times a uniform trapezoid rule in angle.  Integrates
    ``z^j conj(z)^k`` exactly whenever ``j, k <= degree_exact``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree_exact: int
    radial_nodes: int
    angular_nodes: int
    alpha: float = 0.0

    @classmethod
    def build(cls, radial_nodes: int = 64, angular_nodes: int = 256, alpha: float = 0.0):
        if radial_nodes < 1 or angular_nodes < 1:
            raise ValidationError("quadrature node counts must be positive")
        if alpha <= -1:
            raise ValidationError("alpha must exceed -1")
        if alpha == 0.0:
            x, wx = np.polynomial.legendre.leggauss(radial_nodes)
            wx = wx / 2.0
        else:
            # weight (1-x)^alpha on [-1,1]; rho = (1+x)/2 so 1-rho = (1-x)/2
            x, wx = special.roots_jacobi(radial_nodes, alpha, 0.0)
            wx = wx / wx.sum()
        rho = 0.5 * (x + 1.0)
        r = np.sqrt(rho)
        theta = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
        nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
        weights = (wx[:, None] * np.full(angular_nodes, 1.0 / angular_nodes)[None, :]).ravel()
        degree = min(2 * radial_nodes - 1, angular_nodes - 1)
        return cls(nodes, weights, degree, radial_nodes, angular_nodes, float(alpha))

    def integrate(self, values) -> complex:
        return complex(np.sum(np.asarray(values) * self.weights))

    def moment(self, j):
        return bergman_moment(j, self.alpha)
