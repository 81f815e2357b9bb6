"""Monte-Carlo checks of asymptotic normality for linear statistics of zeros,
and direct numerical evaluation of the asymptotic-normality conditions (c1), (c2)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .bergman import correlation_matrix
from .disc import Disc
from .errors import (
    DegenerateSample,
    DegenerateVariance,
    NotRadial,
    OutsideBulk,
    SupportOutsideBulk,
    ZeroPsi,
)
from .orthobasis import OrthoBasis, build_onb
from .quadrature import build_polar_rule
from .weights import WeightSequence, in_bulk
from .zerostats import LogStatistic, TestFunction, find_roots, linear_statistic, sample_polynomial

KS_SERIES_TOL = 1e-10


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, a pure function of (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def kolmogorov_sf(x: float) -> float:
    """P(K > x) for the Kolmogorov distribution.

    For x >= 1 the alternating series ``sum 2 (-1)^(k-1) exp(-2 k^2 x^2)`` is
    summed until a term drops below 1e-10; below 1 the equivalent Jacobi
    theta form converges faster and without cancellation.
    """
    if x <= 0:
        return 1.0
    if x < 1:
        if x < 0.05:
            return 1.0
        total, k = 0.0, 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8 * x * x))
            total += term
            if term < KS_SERIES_TOL:
                break
            k += 1
        return 1.0 - math.sqrt(2 * math.pi) / x * total
    total, k = 0.0, 1
    while True:
        term = 2 * math.exp(-2 * k * k * x * x)
        total += term if k % 2 else -term
        if term < KS_SERIES_TOL:
            break
        k += 1
    return min(1.0, max(0.0, total))


def ks_statistic(samples) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    N = x.size
    F = ndtr(x)
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - F), np.max(F - (i - 1) / N)))


def normality_tests(samples):
    """(skewness, excess kurtosis, KS statistic, asymptotic KS p-value).

    Moments are the biased standardised central moments; the sample is
    standardised before the one-sample KS test against N(0, 1).
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise DegenerateSample(f"need at least 100 samples, got {x.size}")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if not m2 > 1e-30 * (1 + x.mean() ** 2):
        raise DegenerateSample("sample has zero variance")
    skew = float(np.mean(d**3) / m2**1.5)
    exkurt = float(np.mean(d**4) / m2**2 - 3)
    z = d / math.sqrt(np.var(x, ddof=1))
    D = ks_statistic(z)
    return skew, exkurt, D, kolmogorov_sf(math.sqrt(x.size) * D)


@dataclass
class EnsembleSummary:
    n: int
    trials: int
    seed: int
    mean: float
    variance: float
    standardized: np.ndarray
    skewness: float
    excess_kurtosis: float
    ks_statistic: float
    ks_p: float
    records: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_statistic": self.ks_statistic,
            "ks_p": self.ks_p,
        }

    @property
    def max_dual_route_error(self):
        errs = [
            abs(r["statistic_rootsum"] - r["statistic_log"]) / (1 + abs(r["statistic_rootsum"]))
            for r in self.records
            if r.get("statistic_log") is not None
        ]
        return max(errs) if errs else None


def support_points(phi: TestFunction, grid=16, boundary=64):
    return Disc(phi.center, phi.radius).grid(grid, boundary=boundary)


def check_support_in_bulk(w: WeightSequence, n: int, phi: TestFunction):
    try:
        ok = np.all(in_bulk(w, n, support_points(phi)))
    except NotRadial as exc:
        raise SupportOutsideBulk(str(exc)) from exc
    if not ok:
        raise SupportOutsideBulk(f"support of Phi leaves the bulk of {w.name} at n={n}")


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_ensemble(
    w: WeightSequence,
    phi: TestFunction,
    n: int,
    trials: int,
    seed: int,
    *,
    dual_route: bool = False,
    synthetic: bool = False,
    basis: OrthoBasis | None = None,
    workers: int = 1,
) -> EnsembleSummary:
    """Sample ``trials`` random polynomials of degree n and summarise the
    root-sum statistic of Phi.

    Trial i draws from ``trial_rng(seed, i)``, so results do not depend on
    ``workers``.  ``dual_route`` also evaluates the log-integral route per
    trial; ``synthetic`` replaces the statistic by one standard normal draw
    from the trial's stream (harness calibration).
    """
    if trials < 100:
        raise ValueError("trials must be at least 100")
    check_support_in_bulk(w, n, phi)
    b = basis if basis is not None else build_onb(None, w, n)
    log_stat = LogStatistic(b, phi) if dual_route else None

    def one(i):
        rng = trial_rng(seed, i)
        f = sample_polynomial(b, rng)
        zs = find_roots(f)
        stat = rng.standard_normal() if synthetic else linear_statistic(zs, phi)
        inside = int(np.sum(np.abs(zs.roots - phi.center) < phi.radius))
        return {
            "trial": i,
            "n": n,
            "statistic_rootsum": float(stat),
            "statistic_log": log_stat(f) if log_stat is not None else None,
            "n_roots_in_support": inside,
        }

    records = _map(one, range(trials), workers)
    values = np.array([r["statistic_rootsum"] for r in records])
    mean = float(values.mean())
    var = float(np.var(values, ddof=1))
    if not var > 1e-30:
        raise DegenerateVariance(f"sample variance {var:.3e} at n={n}")
    standardized = (values - mean) / math.sqrt(var)
    skew, exkurt, D, p = normality_tests(values)
    return EnsembleSummary(n, trials, seed, mean, var, standardized, skew, exkurt, D, p, records)


def zero_fractions(w: WeightSequence, n: int, trials: int, seed: int, radii, workers: int = 1):
    """Fraction of all sampled zeros with |z| <= r, for each r in radii."""
    b = build_onb(None, w, n)
    radii = np.asarray(radii, dtype=float)

    def one(i):
        zs = find_roots(sample_polynomial(b, trial_rng(seed, i)))
        return np.sum(np.abs(zs.roots)[:, None] <= radii[None, :], axis=0), zs.roots.size

    counts = _map(one, range(trials), workers)
    inside = np.sum([c for c, _ in counts], axis=0)
    total = sum(t for _, t in counts)
    return {float(r): float(k) / total for r, k in zip(radii, inside)}


@dataclass
class VarianceTrend:
    points: list
    standard_errors: list
    decreasing: bool


def variance_trend(w, phi, n_list, trials, seed, workers=1) -> VarianceTrend:
    """Ensemble variance per n; decreasing allows one inversion within 2 SE."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ValueError("variance_trend needs at least three degrees")
    if any(b < a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    points, ses = [], []
    for n in n_list:
        s = run_ensemble(w, phi, n, trials, seed, workers=workers)
        x = np.array([r["statistic_rootsum"] for r in s.records])
        m4 = np.mean((x - x.mean()) ** 4)
        points.append((n, s.variance))
        ses.append(float(math.sqrt(max(m4 - s.variance**2, 0.0) / x.size)))
    inversions = []
    for i in range(len(points) - 1):
        up = points[i + 1][1] - points[i][1]
        if up > 0:
            inversions.append(up <= 2 * math.hypot(ses[i], ses[i + 1]))
    decreasing = len(inversions) == 0 or (len(inversions) == 1 and inversions[0])
    return VarianceTrend(points, ses, decreasing)


# ---------------------------------------------------------------------------
# normality conditions (c1), (c2)


def _disc_rule(X: Disc, n_radial=64, n_angular=128):
    return build_polar_rule(X.radius, n_radial, n_angular, center=X.center)


def _check_inside_bulk(b: OrthoBasis, X: Disc):
    pts = X.grid(16, boundary=64)
    try:
        ok = np.all(in_bulk(b.weight, b.n, pts))
    except NotRadial as exc:
        raise OutsideBulk(str(exc)) from exc
    if not ok:
        raise OutsideBulk(f"{X} is not inside the bulk at n={b.n}")


def st_condition_c1(b: OrthoBasis, X: Disc, grid_size: int = 20, q=None) -> float:
    """max over a grid of x in X of the integral over X of |rho_n(x, .)|."""
    _check_inside_bulk(b, X)
    q = q if q is not None else _disc_rule(X)
    xs = X.grid(grid_size)
    rho = np.abs(correlation_matrix(b, xs, q.nodes))
    return float(np.max(rho @ q.weights))


def c2_terms(b: OrthoBasis, phi: TestFunction, X: Disc | None = None, grid_size: int = 20, q=None, block=2048):
    """(double integral of |rho|^2 psi psi, sup_x integral of |rho|) over X = supp(psi)."""
    X = X if X is not None else Disc(phi.center, phi.radius)
    q = q if q is not None else _disc_rule(X)
    psi = phi.psi(q.nodes)
    if not np.any(psi != 0):
        raise ZeroPsi("psi vanishes on X")
    _check_inside_bulk(b, X)
    wpsi = q.weights * psi
    num = 0.0
    for start in range(0, q.nodes.size, block):
        rows = slice(start, start + block)
        rho2 = np.abs(correlation_matrix(b, q.nodes[rows], q.nodes)) ** 2
        num += float(wpsi[rows] @ (rho2 @ wpsi))
    den = st_condition_c1(b, X, grid_size, q)
    return num, den


def st_condition_c2(b: OrthoBasis, phi: TestFunction, X: Disc | None = None, grid_size: int = 20, q=None) -> float:
    num, den = c2_terms(b, phi, X, grid_size, q)
    return num / den


def c2_limit_reference(phi: TestFunction, n_radial=64, n_angular=128) -> float:
    """Limit (1/2) * integral of psi^2 in one complex dimension."""
    q = _disc_rule(Disc(phi.center, phi.radius), n_radial, n_angular)
    return 0.5 * float(np.dot(q.weights, phi.psi(q.nodes) ** 2))


def normalized_psi(phi: TestFunction) -> TestFunction:
    """Rescale Phi so that its psi = Laplacian/(2 pi) has unit L^2 norm."""
    return phi.scaled(1 / math.sqrt(2 * c2_limit_reference(phi)))


@dataclass
class STConditionReport:
    c1_values: dict
    c2_ratio: dict
    c2_limit_reference: float

    def to_dict(self):
        return {
            "c1_values": {str(k): v for k, v in self.c1_values.items()},
            "c2_ratio": {str(k): v for k, v in self.c2_ratio.items()},
            "c2_limit_reference": self.c2_limit_reference,
        }


def st_conditions(w: WeightSequence, phi: TestFunction, n_list, grid_size: int = 20) -> STConditionReport:
    X = Disc(phi.center, phi.radius)
    c1, c2 = {}, {}
    for n in n_list:
        b = build_onb(None, w, int(n))
        num, den = c2_terms(b, phi, X, grid_size)
        c1[int(n)] = den
        c2[int(n)] = num / den
    return STConditionReport(c1, c2, c2_limit_reference(phi))
