"""Tensor-product quadrature on discs with a certified tail for the
neglected exterior mass."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentTail, GrowthUnverified, InvalidSize, NonFinite
from .weights import check_growth


@dataclass(frozen=True, eq=False)
class PlanarQuadrature:
    nodes: np.ndarray
    weights: np.ndarray
    radius: float
    n_radial: int
    n_angular: int
    center: complex = 0j

    def __len__(self):
        return self.nodes.size


def build_polar_rule(R, n_radial, n_angular, center=0j, angle_offset=0.5):
    """Gauss-Legendre in u = r^2 on [0, R^2] times the trapezoid rule in angle.

    With dV = (1/2) du dtheta, radial polynomials in r^2 are integrated
    exactly up to degree 2*n_radial - 1 and angular modes exp(i k theta)
    vanish exactly for 0 < |k| < n_angular.  ``angle_offset`` shifts the
    angular nodes by a fraction of one angular step.
    """
    if n_radial < 2 or n_angular < 4 or R <= 0:
        raise InvalidSize(f"need n_radial >= 2, n_angular >= 4, R > 0 (got {n_radial}, {n_angular}, {R})")
    t, a = np.polynomial.legendre.leggauss(int(n_radial))
    u = 0.5 * R**2 * (t + 1)
    a = 0.5 * R**2 * a
    theta = 2 * np.pi * (np.arange(n_angular) + angle_offset) / n_angular
    r = np.sqrt(u)
    nodes = center + (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (0.5 * a[:, None] * np.full(n_angular, 2 * np.pi / n_angular)[None, :]).ravel()
    return PlanarQuadrature(nodes, weights, float(R), int(n_radial), int(n_angular), complex(center))


def default_rule(n, R=3.0, n_radial=None, n_angular=None):
    """Rule sized for degree-n Gram matrices: 2n + 16 radial, 4n + 16 angular."""
    return build_polar_rule(
        R,
        n_radial if n_radial is not None else 2 * n + 16,
        n_angular if n_angular is not None else 4 * n + 16,
    )


def default_radius(outer_radius: float) -> float:
    return max(3.0, 3.0 * outer_radius)


def integrate(q: PlanarQuadrature, f):
    """Sum of weights times f at the nodes; f maps an array of nodes to values."""
    vals = np.asarray(f(q.nodes))
    if not np.all(np.isfinite(vals)):
        raise NonFinite("integrand is not finite at every node")
    return complex(np.dot(q.weights, vals))


def tail_bound(w, n, R, epsilon) -> float:
    """Bound for the integral of |z|^(2n) exp(-2n phi_n) over |z| > R.

    Under the growth condition the integrand is at most |z|^(-2 n eps), which
    integrates to 2 pi R^(2 - 2 n eps) / (2 n eps - 2).
    """
    if n * epsilon <= 1:
        raise DivergentTail(f"n * epsilon = {n * epsilon} <= 1")
    ok, margin = check_growth(w, n, R, epsilon)
    if not ok:
        raise GrowthUnverified(f"growth condition not verified (margin {margin:.3g})")
    return 2 * math.pi * R ** (2 - 2 * n * epsilon) / (2 * n * epsilon - 2)
