"""Gaussian random polynomials, their zeros, and linear statistics computed
by a root sum and, independently, by integrating log|f| against the
Laplacian of the test function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NodeOnZero, NonConvergent, ZeroPolynomial
from .orthobasis import OrthoBasis
from .quadrature import PlanarQuadrature, build_polar_rule

EPS = np.finfo(float).eps
STRIP_REL = 1e-14
ABERTH_MAX_ITER = 500
RESIDUAL_MAX = 1e-8


@dataclass(frozen=True)
class TestFunction:
    """Phi(z) = amplitude * (1 - |z - c|^2 / r^2)^3 on the disc, zero outside.

    C^2 across the boundary with a continuous closed-form Laplacian
    ``amplitude * (12 / r^2) (1 - s)(3 s - 1)``, s = |z - c|^2 / r^2.
    """

    __test__ = False  # not a pytest class

    center: complex = 0j
    radius: float = 0.6
    amplitude: float = 1.0

    @property
    def support_center(self):
        return self.center

    @property
    def support_radius(self):
        return self.radius

    def _s(self, z):
        return np.abs(np.asarray(z, dtype=complex) - self.center) ** 2 / self.radius**2

    def value(self, z):
        s = self._s(z)
        return self.amplitude * np.where(s < 1, (1 - s) ** 3, 0.0)

    def laplacian(self, z):
        s = self._s(z)
        return self.amplitude * np.where(s < 1, 12 / self.radius**2 * (1 - s) * (3 * s - 1), 0.0)

    def psi(self, z):
        """Density of dd^c Phi against Lebesgue measure: Laplacian / (2 pi)."""
        return self.laplacian(z) / (2 * np.pi)

    def scaled(self, factor):
        return TestFunction(self.center, self.radius, self.amplitude * factor)

    def rule(self, n_radial=120, n_angular=240, angle_offset=0.5) -> PlanarQuadrature:
        return build_polar_rule(self.radius, n_radial, n_angular, center=self.center, angle_offset=angle_offset)


@dataclass(frozen=True, eq=False)
class RandomPolynomial:
    """f = sum_j c_j P_j, stored also over the scaled monomials z^k / sigma_k."""

    basis: OrthoBasis
    c: np.ndarray
    monomial_coeffs: np.ndarray

    @classmethod
    def from_coefficients(cls, basis: OrthoBasis, raw):
        """Wrap an explicit polynomial ``sum_k raw[k] z^k`` of degree <= n."""
        a = np.zeros(basis.d_n, dtype=complex)
        a[: len(raw)] = raw
        mono = a * basis.sigma
        c = np.linalg.solve(basis.coeffs.T, mono)
        return cls(basis, c, mono)

    @property
    def degree(self):
        return self.basis.n

    def raw_coeffs(self):
        """Ordinary monomial coefficients a_k / sigma_k (may overflow for large n)."""
        return self.monomial_coeffs * np.exp(-self.basis.log_sigma)

    def weighted_eval(self, z, derivative=False):
        """``f(z) exp(-n phi(z))`` (or the same factor times f'(z))."""
        b = self.basis
        z = np.asarray(z, dtype=complex)
        n = b.n
        k = np.arange(n + 1)
        phi = b.weight.eval(n, z)[..., None]
        if derivative:
            kk = k[1:]
            with np.errstate(divide="ignore", invalid="ignore"):
                logr = np.log(np.abs(z))[..., None]
                k_logr = np.where(kk == 1, 0.0, (kk - 1) * logr)
            mags = np.exp(k_logr - b.log_sigma[1:] - n * phi) * kk
            terms = mags * np.exp(1j * (kk - 1) * np.angle(z)[..., None])
            return terms @ self.monomial_coeffs[1:]
        return b.weighted_monomials(z) @ self.monomial_coeffs

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        n = self.basis.n
        return np.log(np.abs(self.weighted_eval(z))) + n * self.basis.weight.eval(n, z)


def sample_polynomial(b: OrthoBasis, rng: np.random.Generator) -> RandomPolynomial:
    """Draw iid standard complex Gaussian coefficients (E|c_j|^2 = 1)."""
    xy = rng.standard_normal((2, b.d_n))
    c = (xy[0] + 1j * xy[1]) / math.sqrt(2)
    return RandomPolynomial(b, c, b.monomial_coeffs(c))


# ---------------------------------------------------------------------------
# root finding


def _newton_ratio(coef, z):
    """p(z) / p'(z) for ascending coefficients, reversing the polynomial
    outside the unit disc so Horner never overflows."""
    d = coef.size - 1
    out = np.empty_like(z)
    inner = np.abs(z) <= 1
    if inner.any():
        x = z[inner]
        p = np.full_like(x, coef[-1])
        dp = np.zeros_like(x)
        for a in coef[-2::-1]:
            dp = dp * x + p
            p = p * x + a
        out[inner] = p / dp
    if (~inner).any():
        x = z[~inner]
        y = 1 / x
        q = np.full_like(y, coef[0])
        dq = np.zeros_like(y)
        for a in coef[1:]:
            dq = dq * y + q
            q = q * y + a
        out[~inner] = x * q / (d * q - y * dq)
    return out


def _horner(coef, z):
    p = np.full_like(z, coef[-1])
    for a in coef[-2::-1]:
        p = p * z + a
    return p


def backward_error(coef, z):
    """|p(z)| / sum_k |a_k| |z|^k: relative coefficient perturbation making z exact."""
    z = np.asarray(z, dtype=complex)
    num = np.abs(_horner(coef, z))
    den = _horner(np.abs(coef).astype(complex), np.abs(z).astype(complex)).real
    return num / den


def _initial_guess(coef):
    d = coef.size - 1
    radius = (abs(coef[0]) / abs(coef[-1])) ** (1 / d) if coef[0] != 0 else 0.5
    radius = radius if np.isfinite(radius) and radius > 0 else 1.0
    k = np.arange(d)
    return radius * np.exp(1j * (2 * np.pi * k / d + 0.4))


def aberth(coef, max_iter=ABERTH_MAX_ITER):
    """Aberth-Ehrlich simultaneous iteration.  Returns (roots, converged)."""
    d = coef.size - 1
    z = _initial_guess(coef)
    if d == 1:
        return np.array([-coef[0] / coef[1]]), True
    active = np.ones(d, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        ratio = _newton_ratio(coef, z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = np.inf
        s = np.sum(1 / diff, axis=1)
        step = ratio / (1 - ratio * s)
        z[idx] -= step
        small = np.abs(step) <= 4 * EPS * np.abs(z[idx])
        tiny = backward_error(coef, z[idx]) <= 4 * d * EPS
        active[idx[small | tiny]] = False
        if not active.any():
            return z, True
    return z, False


def _polish(coef, z, steps=2):
    z = z.copy()
    err = backward_error(coef, z)
    for _ in range(steps):
        cand = z - _newton_ratio(coef, z)
        cerr = backward_error(coef, cand)
        better = np.isfinite(cand) & (cerr < err)
        z[better], err[better] = cand[better], cerr[better]
    return z


def _refine_clusters(coef, z, detect=1e-4):
    """Snap groups of nearly coincident roots onto a common multiple root
    when the multiple root has a rounding-level backward error."""
    z = z.copy()
    d = z.size
    seen = np.zeros(d, dtype=bool)
    for i in range(d):
        if seen[i]:
            continue
        group = np.flatnonzero(np.abs(z - z[i]) <= detect * (1 + abs(z[i])))
        seen[group] = True
        m = group.size
        if m < 2:
            continue
        c = complex(np.mean(z[group]))
        deriv = coef.copy()
        for _ in range(m - 1):
            deriv = deriv[1:] * np.arange(1, deriv.size)
        for _ in range(8):
            step = complex(_newton_ratio(deriv, np.array([c]))[0]) if deriv.size > 1 else 0
            if not np.isfinite(step):
                break
            c -= step
        if backward_error(coef, np.array([c]))[0] <= 1e-12:
            z[group] = c
    return z


@dataclass
class ZeroSet:
    roots: np.ndarray
    residuals: np.ndarray
    cluster_tolerance: np.ndarray
    degree_drop: int = 0
    method: str = "aberth"
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return self.roots.size

    def multiplicities(self):
        """Multiplicity of each root: number of roots within its cluster tolerance."""
        dist = np.abs(self.roots[:, None] - self.roots[None, :])
        return np.sum(dist <= self.cluster_tolerance[:, None], axis=1)


def polynomial_roots(coef):
    """Roots of ``sum_k coef[k] z^k`` with backward-error residuals.

    Returns (roots, residuals, method).
    """
    coef = np.asarray(coef, dtype=complex)
    z, ok = aberth(coef)
    method = "aberth"
    if ok:
        z = _refine_clusters(coef, _polish(coef, z))
        res = backward_error(coef, z)
        ok = bool(np.all(res < RESIDUAL_MAX))
    if not ok:
        z = np.roots(coef[::-1])
        z = _refine_clusters(coef, _polish(coef, z))
        res = backward_error(coef, z)
        method = "companion"
        if not np.all(res < RESIDUAL_MAX):
            raise NonConvergent(f"max residual {res.max():.3e} after companion fallback")
    return z, res, method


def find_roots(f: RandomPolynomial) -> ZeroSet:
    """All zeros of f, computed in a balanced variable ``z = s t``.

    Leading coefficients below 1e-14 of the largest (over scaled monomials)
    are stripped and the degree drop recorded; the sample is never perturbed.
    """
    a = np.asarray(f.monomial_coeffs, dtype=complex)
    amax = np.max(np.abs(a))
    if not amax > 1e-300:
        raise ZeroPolynomial("all coefficients vanish")
    big = np.flatnonzero(np.abs(a) >= STRIP_REL * amax)
    deg = int(big[-1])
    drop = a.size - 1 - deg
    if deg == 0:
        return ZeroSet(np.zeros(0, complex), np.zeros(0), np.zeros(0), drop)
    ls = f.basis.log_sigma[: deg + 1]
    log_s = (ls[deg] - ls[0]) / deg
    k = np.arange(deg + 1)
    coef = a[: deg + 1] * np.exp(k * log_s - ls)
    coef = coef / np.max(np.abs(coef))
    t, res, method = polynomial_roots(coef)
    roots = t * math.exp(log_s)
    return ZeroSet(roots, res, 1e-6 * (1 + np.abs(roots)), drop, method)


# ---------------------------------------------------------------------------
# linear statistics


def linear_statistic(zs: ZeroSet, phi: TestFunction) -> float:
    """Sum of Phi over the roots, counted with multiplicity.

    ``phi`` is a TestFunction or any vectorised callable.
    """
    values = phi.value(zs.roots) if hasattr(phi, "value") else phi(zs.roots)
    return float(np.real(np.sum(values)))


NODE_CLEARANCE = 1e-8


class LogStatistic:
    """Log-route statistic for a fixed basis, test function and rule.

    The weighted monomials (and their derivatives) at the nodes are computed
    once, so each polynomial costs two matrix-vector products.
    """

    def __init__(self, basis: OrthoBasis, phi: TestFunction, q: PlanarQuadrature | None = None):
        self.basis = basis
        self.phi = phi
        self.q = q if q is not None else phi.rule()
        self._jittered = None
        self._mats = self._matrices(self.q)

    def _matrices(self, q):
        b = self.basis
        n = b.n
        z = q.nodes
        nphi = n * b.weight.eval(n, z)
        k = np.arange(n + 1)
        logr = np.log(np.abs(z))[:, None]
        theta = np.angle(z)[:, None]
        M = b.weighted_monomials(z)
        kk = k[1:]
        D = np.zeros_like(M)
        D[:, 1:] = np.exp((kk - 1) * logr - b.log_sigma[1:] - nphi[:, None]) * kk * np.exp(1j * (kk - 1) * theta)
        kernel = q.weights * self.phi.laplacian(z) / (2 * np.pi)
        return M, D, nphi, kernel

    def _evaluate(self, mats, a):
        M, D, nphi, kernel = mats
        wf = M @ a
        dwf = D @ a
        with np.errstate(divide="ignore", invalid="ignore"):
            near = np.abs(wf) < NODE_CLEARANCE * np.abs(dwf)
        if near.any():
            return None
        return float(np.dot(kernel, np.log(np.abs(wf)) + nphi))

    def __call__(self, f: RandomPolynomial) -> float:
        out = self._evaluate(self._mats, f.monomial_coeffs)
        if out is not None:
            return out
        if self._jittered is None:
            q = self.q
            rotated = build_polar_rule(q.radius, q.n_radial, q.n_angular, center=q.center, angle_offset=0.5 + 0.381966)
            self._jittered = self._matrices(rotated)
        out = self._evaluate(self._jittered, f.monomial_coeffs)
        if out is None:
            raise NodeOnZero("a zero of f sits on a quadrature node after re-jitter; resample")
        return out


def linear_statistic_log(f: RandomPolynomial, phi: TestFunction, q: PlanarQuadrature | None = None) -> float:
    """(1/2pi) * integral of log|f| * Laplacian(Phi) over the support of Phi.

    Uses no root information.  If a zero of f lies within ~1e-8 of a node
    (estimated by the Newton step |f/f'|) the angular nodes are rotated once.
    """
    return LogStatistic(f.basis, phi, q)(f)
