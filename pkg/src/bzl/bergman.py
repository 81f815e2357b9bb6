"""Bergman kernel, Bergman function, normalised correlation and numerical
diagnostics for the diagonal, near-diagonal and off-diagonal asymptotics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDiagonal, FrameInvalid, InsufficientPoints, OutsideBulk
from .orthobasis import OrthoBasis
from .quadrature import PlanarQuadrature
from .weights import WeightSequence, curvature, in_bulk, wirtinger

MA_FACTOR = 2 / math.pi  # det(dd^c phi) = (2/pi) * curvature in one variable
RHO_FLOOR = 1e-13


def kernel_weighted(b: OrthoBasis, z, w):
    """``K_n(z, w) exp(-n phi(z) - n phi(w))``; broadcasts z against w."""
    vz = b.weighted_values(z)
    vw = b.weighted_values(w)
    # real arithmetic term by term so that K(z, w) = conj K(w, z) bit for bit
    re = np.sum(vz.real * vw.real + vz.imag * vw.imag, axis=-1)
    im = np.sum(vz.imag * vw.real - vz.real * vw.imag, axis=-1)
    return re + 1j * im


def kernel(b: OrthoBasis, z, w):
    """K_n(z, w) = sum_j P_j(z) conj(P_j(w))."""
    n, phi = b.n, b.weight
    scale = np.exp(n * phi.eval(n, z) + n * phi.eval(n, w))
    out = kernel_weighted(b, z, w) * scale
    return complex(out) if np.ndim(out) == 0 else out


def bergman_function(b: OrthoBasis, z):
    """B_n(z) = K_n(z, z) exp(-2 n phi_n(z))."""
    v = b.weighted_values(z)
    out = np.sum(np.abs(v) ** 2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def correlation_matrix(b: OrthoBasis, zs, ws):
    """Matrix of rho_n(z_i, w_j) for 1-d point arrays."""
    vz = b.weighted_values(np.atleast_1d(zs))
    vw = b.weighted_values(np.atleast_1d(ws))
    dz = np.sum(np.abs(vz) ** 2, axis=-1)
    dw = np.sum(np.abs(vw) ** 2, axis=-1)
    if np.any(dz <= 0) or np.any(dw <= 0):
        raise DegenerateDiagonal("non-positive kernel diagonal")
    nz = vz / np.sqrt(dz)[:, None]
    nw = vw / np.sqrt(dw)[:, None]
    return nz @ nw.conj().T


def correlation(b: OrthoBasis, z, zp) -> complex:
    """rho_n(z, zp) = K(z, zp) / sqrt(K(z, z) K(zp, zp)); equals 1 at zp = z."""
    if complex(z) == complex(zp):
        if bergman_function(b, z) <= 0:
            raise DegenerateDiagonal(f"K_n({z}, {z}) <= 0")
        return 1.0 + 0j
    return complex(correlation_matrix(b, z, zp)[0, 0])


def _require_bulk(w, n, z):
    if not np.all(in_bulk(w, n, z)):
        raise OutsideBulk(f"{np.atleast_1d(z)} not in the bulk of {w.name} at n={n}")


def tyz_ratio(b: OrthoBasis, z) -> float:
    """n^-1 B_n(z) / det(dd^c phi_n(z)); tends to 1 in the bulk."""
    w, n = b.weight, b.n
    _require_bulk(w, n, z)
    return bergman_function(b, z) / (n * MA_FACTOR * curvature(w, n, z))


@dataclass(frozen=True)
class NormalFrame:
    """Local model ``phi(z0 + zeta) = Re g(zeta) + lambda |zeta|^2 + O(|zeta|^3)``
    with ``g(zeta) = g0 + g1 zeta + g2 zeta^2`` holomorphic."""

    center: complex
    n: int
    g0: float
    g1: complex
    g2: complex
    lam: float
    epsilon_n: float
    c3: float

    def g(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self.g0 + self.g1 * zeta + self.g2 * zeta**2

    def taylor_residual(self, w: WeightSequence, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        model = self.g(zeta).real + self.lam * np.abs(zeta) ** 2
        return np.abs(w.eval(self.n, self.center + zeta) - model)


def normal_frame(w: WeightSequence, n: int, z0: complex, R: float = 3.0) -> NormalFrame:
    z0 = complex(z0)
    phi_z, phi_zz, lam = wirtinger(w, n, z0)
    c3 = w.c3_norm_estimate(n, R)
    eps_n = 2 * c3 * math.log(n) ** 3 / math.sqrt(n) if n > 1 else float("inf")
    frame = NormalFrame(z0, n, float(w.eval(n, z0)), 2 * phi_z, phi_zz, lam, eps_n, c3)
    rho = np.linspace(0.01, 0.1, 10)
    theta = 2 * np.pi * np.arange(16) / 16
    probes = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    bound = c3 * np.abs(probes) ** 3 + 1e-8 * (1 + abs(frame.g0))
    if np.any(frame.taylor_residual(w, probes) > bound):
        raise FrameInvalid(f"Taylor residual at {z0} exceeds C^3 bound")
    return frame


def near_diagonal_ratio(b: OrthoBasis, frame: NormalFrame, u, v):
    """Rescaled near-diagonal kernel, normalised so that the limit is 1.

    Evaluates ``K_n(z0 + u/sqrt(n), z0 + v/sqrt(n))`` with the holomorphic
    frame factors ``exp(-n g(u/sqrt n) - n conj g(v/sqrt n))`` removed and
    divides by ``n lambda exp(2 lambda u conj(v))`` and by ``2/pi``.  The
    second argument enters anti-holomorphically, so the result satisfies
    ``ratio(u, v) = conj(ratio(v, u))``.
    """
    w, n = b.weight, b.n
    if frame.n != n:
        raise FrameInvalid(f"frame built for n={frame.n}, basis has n={n}")
    _require_bulk(w, n, frame.center)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    s = 1 / math.sqrt(n)
    z = frame.center + u * s
    zp = frame.center + v * s
    kw = kernel_weighted(b, z, zp)
    expo = (
        n * (w.eval(n, z) + w.eval(n, zp))
        - n * (frame.g(u * s) + np.conj(frame.g(v * s)))
        - 2 * frame.lam * u * np.conj(v)
    )
    out = kw * np.exp(expo) / (n * frame.lam * MA_FACTOR)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass
class DecayFit:
    C_fit: float
    T_fit: float
    r_squared: float
    radii: np.ndarray
    abs_rho: np.ndarray
    C_ls: float


def offdiag_decay_fit(b: OrthoBasis, z, direction, radii) -> DecayFit:
    """Fit ``log|rho_n(z, z + r d)| ~ log C - T sqrt(n) r``.

    T and r^2 come from ordinary least squares over radii with
    ``|rho| > 1e-13``.  ``C_fit`` is the least-squares constant raised by the
    largest positive residual, so that ``C_fit exp(-T sqrt(n) r)`` majorises
    every probe; ``C_ls`` keeps the plain least-squares value.
    """
    w, n = b.weight, b.n
    d = complex(direction)
    d /= abs(d)
    radii = np.asarray(radii, dtype=float)
    radii = radii[radii > 0]
    pts = complex(z) + radii * d
    _require_bulk(w, n, np.concatenate([[complex(z)], pts]))
    rho = np.abs(correlation_matrix(b, complex(z), pts)[0])
    keep = rho > RHO_FLOOR
    if keep.sum() < 4:
        raise InsufficientPoints(f"only {int(keep.sum())} radii above the rounding floor")
    x = -math.sqrt(n) * radii[keep]
    y = np.log(rho[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(
        C_fit=float(np.exp(intercept + max(0.0, resid.max()))),
        T_fit=float(slope),
        r_squared=float(r2),
        radii=radii[keep],
        abs_rho=rho[keep],
        C_ls=float(np.exp(intercept)),
    )


def density_check(b: OrthoBasis, q: PlanarQuadrature):
    """(integral of B_n over the rule's disc, dim P_n = n + 1)."""
    integral = float(np.dot(q.weights, bergman_function(b, q.nodes)))
    return integral, b.n + 1
