"""Orthonormal polynomial bases for the weighted norm
``||f||^2 = int |f|^2 exp(-2 n phi_n) dV``.

Polynomials are represented over scaled monomials ``m_k(z) = z^k / sigma_k``
where ``sigma_k^2`` is the raw Gram diagonal, so the Gram matrix has unit
diagonal.  All pointwise evaluations are returned already multiplied by
``exp(-n phi_n(z))`` and are assembled in log-magnitude form, which keeps them
O(sqrt(n)) instead of astronomically large.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditioned, NotPositiveDefinite
from .quadrature import PlanarQuadrature, default_radius, default_rule
from .weights import WeightSequence, equilibrium_radial

COND_CEILING = 1e12


def _logsumexp(x, axis=0):
    m = np.max(x, axis=axis, keepdims=True)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(x - m), axis=axis))


def weighted_scaled_monomials(z, n, phi_values, log_sigma):
    """Matrix ``[m_k(z_i) exp(-n phi(z_i))]`` of shape ``z.shape + (n+1,)``."""
    z = np.asarray(z, dtype=complex)
    k = np.arange(n + 1)
    r = np.abs(z)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(r)
        k_logr = np.where(k == 0, 0.0, k * logr)
    logmag = k_logr - log_sigma - n * np.asarray(phi_values)[..., None]
    phase = np.exp(1j * k * np.angle(z)[..., None])
    return np.exp(logmag) * phase


@dataclass(frozen=True, eq=False)
class Gram:
    scaled: np.ndarray
    log_sigma: np.ndarray

    def raw(self):
        s = np.exp(self.log_sigma)
        return self.scaled * np.outer(s, s)


def gram_matrix(q: PlanarQuadrature, w: WeightSequence, n: int) -> Gram:
    """Gram matrix of the monomials 1, z, ..., z^n under the rule ``q``.

    ``G_jk = int z^j conj(z)^k exp(-2 n phi_n) dV``; returned scaled to unit
    diagonal together with ``log sigma_k = log sqrt(G_kk)``.
    """
    z = q.nodes
    phi = w.eval(n, z)
    log_w = np.log(q.weights) - 2 * n * phi
    k = np.arange(n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(np.abs(z))
        exps = np.where(k[None, :] == 0, 0.0, 2 * k[None, :] * logr[:, None]) + log_w[:, None]
    log_sigma = 0.5 * _logsumexp(exps, axis=0)
    A = weighted_scaled_monomials(z, n, phi, log_sigma) * np.sqrt(q.weights)[:, None]
    G = A.T @ A.conj()
    G = 0.5 * (G + G.conj().T)
    if not np.all(np.isfinite(G)):
        raise NotPositiveDefinite("Gram matrix has non-finite entries")
    return Gram(G, log_sigma)


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """Orthonormal basis P_0..P_n with ``P_j = sum_k coeffs[j, k] m_k``."""

    weight: WeightSequence
    n: int
    coeffs: np.ndarray
    log_sigma: np.ndarray
    cond_estimate: float
    gram: Gram

    @property
    def d_n(self) -> int:
        return self.n + 1

    @property
    def sigma(self):
        return np.exp(self.log_sigma)

    def weighted_monomials(self, z):
        z = np.asarray(z, dtype=complex)
        return weighted_scaled_monomials(z, self.n, self.weight.eval(self.n, z), self.log_sigma)

    def weighted_values(self, z):
        """``P_j(z) exp(-n phi_n(z))`` for j = 0..n, shape ``z.shape + (n+1,)``."""
        return self.weighted_monomials(z) @ self.coeffs.T

    def values(self, z):
        z = np.asarray(z, dtype=complex)
        scale = np.exp(self.n * self.weight.eval(self.n, z))
        return self.weighted_values(z) * np.asarray(scale)[..., None]

    def monomial_coeffs(self, c):
        """Coefficients over scaled monomials of ``sum_j c_j P_j``."""
        return self.coeffs.T @ np.asarray(c)


def build_onb(q: PlanarQuadrature | None, w: WeightSequence, n: int) -> OrthoBasis:
    """Orthonormalise 1, z, ..., z^n against the weight by a Cholesky factor.

    Radial weights take the fast path: the Gram matrix is diagonal and each
    scaled monomial is already normalised.
    """
    if q is None:
        q = default_quadrature(w, n)
    gram = gram_matrix(q, w, n)
    G = gram.scaled
    if w.radial:
        coeffs = np.eye(n + 1, dtype=complex)
        cond = float(np.linalg.cond(G))
    else:
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from exc
        coeffs = scipy.linalg.solve_triangular(L, np.eye(n + 1), lower=True)
        cond = float(np.linalg.cond(G))
    if not np.isfinite(cond) or cond > COND_CEILING:
        raise IllConditioned(cond)
    return OrthoBasis(w, n, coeffs, gram.log_sigma, cond, gram)


def default_quadrature(w: WeightSequence, n: int, R=None, n_radial=None, n_angular=None):
    if R is None:
        ref = w if w.radial else w.bulk_reference
        R = default_radius(equilibrium_radial(ref, n).outer_radius) if ref is not None else 3.0
    return default_rule(n, R, n_radial, n_angular)


def orthonormality_residual(b: OrthoBasis, q: PlanarQuadrature) -> float:
    V = b.weighted_values(q.nodes)
    S = V.T @ (q.weights[:, None] * V.conj())
    return float(np.max(np.abs(S - np.eye(b.d_n))))
