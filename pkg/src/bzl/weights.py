"""Weight sequences phi_n, their curvature, hypothesis checks and radial
equilibrium potentials.

Everything is specialised to one complex variable.  A weight is evaluated on
numpy arrays of complex points; derivatives fall back to Richardson
extrapolated central differences when no closed form is attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .disc import Disc
from .errors import EmptyGrid, NoBracketing, NonFinite, NotRadial

FD_REL_STEP = 1e-4
C3_STEP = 1e-3
C3_GRID = 64
GROWTH_DIRECTIONS = 256
GROWTH_RADII = 32


def _fd_step(z):
    return FD_REL_STEP * np.maximum(1.0, np.abs(z))


def _richardson(rule, z):
    h = _fd_step(z)
    coarse = rule(z, h)
    fine = rule(z, h / 2)
    return (4 * fine - coarse) / 3


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """A family ``n -> phi_n`` of real weights on the plane.

    ``value(n, z)`` must accept numpy arrays.  ``gradient`` returns an array of
    shape ``z.shape + (2,)`` holding (d/dx, d/dy); ``laplacian`` returns the
    ordinary Laplacian.  Missing derivatives are estimated numerically.
    """

    name: str
    value: Callable
    gradient: Optional[Callable] = None
    laplacian: Optional[Callable] = None
    c3_norm: Optional[Callable] = None
    radial: bool = False
    varying: bool = False
    params: dict = field(default_factory=dict)
    # radial weight sharing this weight's contact set (compact perturbations
    # inside the contact disc leave the contact set unchanged)
    bulk_reference: Optional["WeightSequence"] = None

    def eval(self, n, z):
        return self.value(n, np.asarray(z, dtype=complex))

    def grad(self, n, z):
        z = np.asarray(z, dtype=complex)
        if self.gradient is not None:
            return self.gradient(n, z)
        return _grad_fd(self, n, z)

    def hessian_zzbar(self, n, z):
        """phi_{z zbar} = Laplacian / 4, the curvature eigenvalue in one variable."""
        z = np.asarray(z, dtype=complex)
        if self.laplacian is not None:
            return self.laplacian(n, z) / 4.0
        return laplacian_fd(self, n, z) / 4.0

    def real_hessian(self, n, z):
        """(phi_xx, phi_xy, phi_yy) by central differences of the gradient."""
        z = np.asarray(z, dtype=complex)

        def rule(z, h):
            gxp, gxm = self.grad(n, z + h), self.grad(n, z - h)
            gyp, gym = self.grad(n, z + 1j * h), self.grad(n, z - 1j * h)
            dxx = (gxp[..., 0] - gxm[..., 0]) / (2 * h)
            dyy = (gyp[..., 1] - gym[..., 1]) / (2 * h)
            dxy = ((gxp[..., 1] - gxm[..., 1]) + (gyp[..., 0] - gym[..., 0])) / (4 * h)
            return np.stack([dxx, dxy, dyy], axis=-1)

        return _richardson(rule, z)

    def c3_norm_estimate(self, n, R) -> float:
        """Upper estimate of the C^3 seminorm on the closed disc of radius R.

        Without a closed form this is the maximum of third-order central
        differences on a 64 x 64 grid, which is an estimate, not a bound.
        """
        if self.c3_norm is not None:
            return float(self.c3_norm(n, R))
        return c3_fd(self, n, R)


def _grad_fd(w, n, z):
    def rule(z, h):
        gx = (w.value(n, z + h) - w.value(n, z - h)) / (2 * h)
        gy = (w.value(n, z + 1j * h) - w.value(n, z - 1j * h)) / (2 * h)
        return np.stack([gx, gy], axis=-1)

    return _richardson(rule, z)


def laplacian_fd(w: WeightSequence, n, z):
    def rule(z, h):
        c = w.value(n, z)
        s = w.value(n, z + h) + w.value(n, z - h) + w.value(n, z + 1j * h) + w.value(n, z - 1j * h)
        return (s - 4 * c) / h**2

    return _richardson(rule, z)


def c3_fd(w: WeightSequence, n, R, grid=C3_GRID) -> float:
    pts = Disc(0j, R).grid(grid)
    h = C3_STEP * max(1.0, R)

    def f(dx, dy):
        return w.value(n, pts + dx + 1j * dy)

    # third differences along x/y, mixed terms via differences of second differences
    dxxx = (f(2 * h, 0) - 2 * f(h, 0) + 2 * f(-h, 0) - f(-2 * h, 0)) / (2 * h**3)
    dyyy = (f(0, 2 * h) - 2 * f(0, h) + 2 * f(0, -h) - f(0, -2 * h)) / (2 * h**3)

    def dxx_at(dy):
        return (f(h, dy) - 2 * f(0, dy) + f(-h, dy)) / h**2

    def dyy_at(dx):
        return (f(dx, h) - 2 * f(dx, 0) + f(dx, -h)) / h**2

    dxxy = (dxx_at(h) - dxx_at(-h)) / (2 * h)
    dxyy = (dyy_at(h) - dyy_at(-h)) / (2 * h)
    return float(max(np.max(np.abs(d)) for d in (dxxx, dyyy, dxxy, dxyy)))


def curvature(w: WeightSequence, n, z):
    """Curvature eigenvalue lambda_n(z) = Laplacian(phi_n)(z) / 4.

    The Monge-Ampere density is ``(2/pi) * curvature``.
    """
    lam = w.hessian_zzbar(n, z)
    if not np.all(np.isfinite(lam)):
        raise NonFinite(f"curvature of {w.name} at n={n} is not finite")
    return lam if np.ndim(lam) else float(lam)


def wirtinger(w: WeightSequence, n, z0: complex):
    """Return (phi_z, phi_zz, phi_zzbar) at a single point."""
    gx, gy = np.asarray(w.grad(n, complex(z0)), dtype=float)
    hxx, hxy, hyy = np.asarray(w.real_hessian(n, complex(z0)), dtype=float)
    phi_z = 0.5 * (gx - 1j * gy)
    phi_zz = 0.25 * (hxx - hyy - 2j * hxy)
    return complex(phi_z), complex(phi_zz), float(curvature(w, n, complex(z0)))


def check_growth(w: WeightSequence, n, R, epsilon):
    """Falsify ``phi_n >= (1 + eps) log|z|`` outside B_R on sampled rays.

    Returns ``(ok, margin)`` where margin is the minimum of
    ``phi_n - (1 + eps) log|z|`` over 256 directions x 32 radii in [R, 4R].
    """
    if R <= 1:
        raise ValueError("growth check needs R > 1")
    radii = np.linspace(R, 4 * R, GROWTH_RADII)
    theta = 2 * np.pi * np.arange(GROWTH_DIRECTIONS) / GROWTH_DIRECTIONS
    z = radii[:, None] * np.exp(1j * theta)[None, :]
    excess = w.eval(n, z) - (1 + epsilon) * np.log(radii)[:, None]
    if not np.all(np.isfinite(excess)):
        return False, float("-inf")
    margin = float(np.min(excess))
    steps = np.diff(excess, axis=0)
    monotone = bool(np.all(steps >= -1e-12 * (1 + np.abs(excess[1:]))))
    return (margin > 0 and monotone), margin


@dataclass(frozen=True, eq=False)
class EquilibriumPotential:
    weight: WeightSequence
    n: int
    inner_radius: float
    outer_radius: float

    def in_contact_set(self, z):
        r = np.abs(np.asarray(z))
        return (r >= self.inner_radius) & (r <= self.outer_radius)

    def eval(self, z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        r0, r1 = self.inner_radius, self.outer_radius
        phi_r1 = float(self.weight.eval(self.n, r1))
        phi_r0 = float(self.weight.eval(self.n, r0))
        inside = self.weight.eval(self.n, z)
        with np.errstate(divide="ignore"):
            outside = phi_r1 + np.log(r / r1)
        out = np.where(r > r1, outside, inside)
        return np.where(r < r0, phi_r0, out)

    def mass_density(self, z):
        z = np.asarray(z, dtype=complex)
        lam = self.weight.hessian_zzbar(self.n, z)
        return np.where(self.in_contact_set(z), (2 / np.pi) * lam, 0.0)


def _radial_slope(w, n):
    def h(r):
        return r * float(w.grad(n, complex(r))[0])

    return h


def _bisect(h, target, lo, hi, tol=1e-12, max_iter=400):
    flo = h(lo) - target
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = h(mid) - target
        if abs(fmid) < tol or hi - lo < 1e-16 * max(1.0, hi):
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def equilibrium_radial(w: WeightSequence, n, R: float = 16.0) -> EquilibriumPotential:
    """Equilibrium potential of a radial weight with r*phi'(r) increasing.

    The contact set is the annulus ``r0 <= |z| <= r1`` where r1 solves
    ``r phi'(r) = 1`` and r0 solves ``r phi'(r) = 0`` (or is 0).  Outside r1
    the potential continues as ``phi(r1) + log(|z|/r1)``.
    """
    if not w.radial:
        raise NotRadial(f"weight {w.name} is not radial")
    h = _radial_slope(w, n)
    lo = 1e-12 * R
    if not (h(lo) < 1 < h(R)):
        raise NoBracketing(f"r*phi'(r) = 1 has no sign change on (0, {R}]")
    r1 = _bisect(h, 1.0, lo, R)
    probes = np.linspace(lo, r1, 64)
    slopes = np.array([h(r) for r in probes])
    if np.all(slopes >= -1e-14):
        r0 = 0.0
    else:
        r0 = _bisect(h, 0.0, lo, r1)
    return EquilibriumPotential(w, n, float(r0), float(r1))


def bulk_radius(w: WeightSequence, n, margin=0.99) -> float:
    """Radius of the disc where bulk membership is tested."""
    ref = w if w.radial else w.bulk_reference
    if ref is None:
        raise NotRadial(f"no equilibrium available for non-radial weight {w.name}")
    return margin * equilibrium_radial(ref, n).outer_radius


def in_bulk(w: WeightSequence, n, z, min_curvature=1e-6, margin=0.99):
    z = np.asarray(z, dtype=complex)
    ref = w if w.radial else w.bulk_reference
    if ref is None:
        raise NotRadial(f"no equilibrium available for non-radial weight {w.name}")
    eq = equilibrium_radial(ref, n)
    r = np.abs(z)
    ok = (r <= margin * eq.outer_radius) & (r >= eq.inner_radius / margin if eq.inner_radius else True)
    return ok & (w.hessian_zzbar(n, z) >= min_curvature)


@dataclass
class HypothesisReport:
    growth_ok: bool
    growth_margin: float
    bound_sup_phi: float
    bound_sup_dphi: float
    bounds_ok: bool
    c3_over_sqrtn_log3n: dict
    c3_ok: Optional[bool]
    ellipticity_c: float
    ellipticity_A: float
    ellipticity_ok: bool
    remark_applies: bool
    all_ok: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        d = dict(self.__dict__)
        d["c3_over_sqrtn_log3n"] = {str(k): v for k, v in self.c3_over_sqrtn_log3n.items()}
        return d


def _growth_exponent(n_list, values):
    if len(n_list) < 2:
        return 0.0
    v = np.maximum(np.asarray(values, dtype=float), 1e-300)
    return float(np.polyfit(np.log(n_list), np.log(v), 1)[0])


def check_hypotheses(w: WeightSequence, n_list, U: Disc, R, epsilon, grid=64) -> HypothesisReport:
    """Evaluate the growth condition and assumptions (1)-(3) at desk scale.

    (1) uniform bounds on |phi_n| and |grad phi_n| over B_R: flagged when
        the per-n suprema grow like a positive power of n (fitted exponent
        above 0.1);
    (2) ``c3_norm * log(n)^3 / sqrt(n)`` must not increase along n_list;
        skipped for a fixed weight;
    (3) ellipticity constants c = min, A = max of the curvature over U,
        with c > 0 required.
    """
    n_list = sorted(int(n) for n in n_list)
    if not n_list:
        raise ValueError("n_list must be nonempty")
    if U.radius <= 0:
        raise EmptyGrid("test disc U is degenerate")
    notes = []

    growth = [check_growth(w, n, R, epsilon) for n in n_list]
    growth_ok = all(ok for ok, _ in growth)
    growth_margin = min(m for _, m in growth)

    ball = Disc(0j, R).grid(grid)
    sup_phi, sup_dphi = [], []
    for n in n_list:
        sup_phi.append(float(np.max(np.abs(w.eval(n, ball)))))
        sup_dphi.append(float(np.max(np.linalg.norm(w.grad(n, ball), axis=-1))))
    bounds_ok = bool(
        np.all(np.isfinite(sup_phi + sup_dphi))
        and _growth_exponent(n_list, sup_phi) <= 0.1
        and _growth_exponent(n_list, sup_dphi) <= 0.1
    )

    remark_applies = not w.varying
    c3_seq = {}
    c3_ok = None
    if remark_applies:
        notes.append("fixed weight: assumptions (1)-(3) are redundant; C^3 decay not evaluated")
    else:
        for n in n_list:
            c3 = w.c3_norm_estimate(n, R)
            c3_seq[n] = c3 * math.log(n) ** 3 / math.sqrt(n) if n > 1 else float("inf")
        vals = [c3_seq[n] for n in n_list]
        c3_ok = bool(np.all(np.isfinite(vals)) and np.all(np.diff(vals) <= 1e-12 * (1 + np.abs(vals[:-1]))))

    pts = U.grid(32, boundary=64)
    if pts.size == 0:
        raise EmptyGrid("no grid points in U")
    lam = np.concatenate([np.atleast_1d(curvature(w, n, pts)) for n in n_list])
    c, A = float(np.min(lam)), float(np.max(lam))
    ellipticity_ok = c > 0

    checks = [growth_ok, bounds_ok, ellipticity_ok]
    if c3_ok is not None:
        checks.append(c3_ok)
    return HypothesisReport(
        growth_ok=growth_ok,
        growth_margin=growth_margin,
        bound_sup_phi=max(sup_phi),
        bound_sup_dphi=max(sup_dphi),
        bounds_ok=bounds_ok,
        c3_over_sqrtn_log3n=c3_seq,
        c3_ok=c3_ok,
        ellipticity_c=c,
        ellipticity_A=A,
        ellipticity_ok=ellipticity_ok,
        remark_applies=remark_applies,
        all_ok=all(checks),
        notes=notes,
    )


# ---------------------------------------------------------------------------
# built-in families


def gaussian(scale: float = 0.5) -> WeightSequence:
    """phi(z) = scale * |z|^2; scale = 1/2 is the classical Gaussian weight."""
    s = float(scale)
    return WeightSequence(
        name="gaussian",
        value=lambda n, z: s * np.abs(z) ** 2,
        gradient=lambda n, z: np.stack([2 * s * z.real, 2 * s * z.imag], axis=-1),
        laplacian=lambda n, z: np.full(np.shape(z), 4 * s),
        c3_norm=lambda n, R: 0.0,
        radial=True,
        varying=False,
        params={"family": "gaussian", "scale": s},
    )


def power(p: float = 2.0) -> WeightSequence:
    """phi(z) = |z|^(2p) / (2p)."""
    p = float(p)

    def grad(n, z):
        f = np.abs(z) ** (2 * p - 2)
        return np.stack([f * z.real, f * z.imag], axis=-1)

    return WeightSequence(
        name="power",
        value=lambda n, z: np.abs(z) ** (2 * p) / (2 * p),
        gradient=grad,
        laplacian=lambda n, z: 2 * p * np.abs(z) ** (2 * p - 2),
        radial=True,
        varying=False,
        params={"family": "power", "p": p},
    )


def _bump_parts(z, center, radius):
    d = z - center
    q = np.abs(d) ** 2 / radius**2
    inside = q < 1
    one_q = np.where(inside, 1 - q, 0.0)
    value = one_q**4
    # d/dx (1-q)^4 = -4(1-q)^3 * 2x / r^2
    g = -8 * one_q**3 / radius**2
    grad = np.stack([g * d.real, g * d.imag], axis=-1)
    lap = 16 / radius**2 * one_q**2 * (4 * q - 1)
    return value, grad, np.where(inside, lap, 0.0)


def gaussian_bump(
    amp_exponent: float = -0.5,
    bump_center=(0.5, 0.0),
    bump_radius: float = 0.3,
    bump_height: float = 0.05,
    scale: float = 0.5,
) -> WeightSequence:
    """phi_n = scale |z|^2 + height * n^amp_exponent * (1 - |z-c|^2/r^2)_+^4.

    The bump is C^3 with compact support.  When its support lies inside the
    Gaussian contact disc the contact set is unchanged, so the Gaussian is
    recorded as the bulk reference.
    """
    c = complex(*bump_center)
    rad, hgt, s, e = float(bump_radius), float(bump_height), float(scale), float(amp_exponent)
    base = gaussian(s)

    def amp(n):
        return hgt * float(n) ** e

    def value(n, z):
        return s * np.abs(z) ** 2 + amp(n) * _bump_parts(z, c, rad)[0]

    def grad(n, z):
        return base.gradient(n, z) + amp(n) * _bump_parts(z, c, rad)[1]

    def lap(n, z):
        return 4 * s + amp(n) * _bump_parts(z, c, rad)[2]

    disc_radius = 1 / math.sqrt(2 * s)
    reference = base if abs(c) + rad < disc_radius else None
    return WeightSequence(
        name="gaussian_bump",
        value=value,
        gradient=grad,
        laplacian=lap,
        radial=False,
        varying=(e != 0 and hgt != 0),
        params={
            "family": "gaussian_bump",
            "amp_exponent": e,
            "bump_center": [c.real, c.imag],
            "bump_radius": rad,
            "bump_height": hgt,
            "scale": s,
        },
        bulk_reference=reference,
    )


def gaussian_sine(scale: float = 0.5) -> WeightSequence:
    """phi_n = scale |z|^2 + sin(sqrt(n) Re z): violates the C^3 decay
    assumption since the third derivative is of order n^(3/2)."""
    s = float(scale)

    def value(n, z):
        return s * np.abs(z) ** 2 + np.sin(math.sqrt(n) * z.real)

    def grad(n, z):
        k = math.sqrt(n)
        return np.stack([2 * s * z.real + k * np.cos(k * z.real), 2 * s * z.imag], axis=-1)

    def lap(n, z):
        return 4 * s - n * np.sin(math.sqrt(n) * z.real)

    return WeightSequence(
        name="gaussian_sine",
        value=value,
        gradient=grad,
        laplacian=lap,
        c3_norm=lambda n, R: float(n) ** 1.5,
        radial=False,
        varying=True,
        params={"family": "gaussian_sine", "scale": s},
    )


FAMILIES = {
    "gaussian": gaussian,
    "power": power,
    "gaussian_bump": gaussian_bump,
    "gaussian_sine": gaussian_sine,
}


def from_spec(spec: dict) -> WeightSequence:
    """Build a weight from ``{"family": name, **params}``."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in FAMILIES:
        raise ValueError(f"unknown weight family {family!r}")
    if "bump_center" in spec:
        spec["bump_center"] = tuple(spec["bump_center"])
    return FAMILIES[family](**spec)
