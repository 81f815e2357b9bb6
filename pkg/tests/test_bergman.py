import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bzl import weights as W
from bzl.bergman import (
    bergman_function,
    correlation,
    correlation_matrix,
    density_check,
    kernel,
    near_diagonal_ratio,
    normal_frame,
    offdiag_decay_fit,
    tyz_ratio,
)
from bzl.errors import FrameInvalid, InsufficientPoints, OutsideBulk
from bzl.orthobasis import build_onb, default_quadrature
from bzl.zerostats import sample_polynomial

from conftest import gaussian_basis, gaussian_kernel_oracle, power_basis


def small_gaussian(n):
    w = W.gaussian()
    return build_onb(default_quadrature(w, n, R=6, n_radial=80), w, n)


# kernel ----------------------------------------------------------------------

def test_kernel_oracle_values_n2():
    assert gaussian_kernel_oracle(2, 0, 0) == pytest.approx(2 / math.pi)
    assert gaussian_kernel_oracle(2, 1, 1) == pytest.approx(10 / math.pi)
    assert 10 / math.pi == pytest.approx(3.18310, abs=1e-5)
    b = small_gaussian(2)
    assert kernel(b, 0, 0).real == pytest.approx(2 / math.pi, rel=1e-10)
    assert kernel(b, 1, 1).real == pytest.approx(10 / math.pi, rel=1e-10)


@pytest.mark.parametrize("n", [10, 50])
def test_kernel_matches_truncated_exponential(n):
    b = gaussian_basis(n)
    for z, w in [(0.3 + 0.1j, -0.2 + 0.4j), (0.7, 0.7), (0.5j, 0.1)]:
        oracle = gaussian_kernel_oracle(n, z, w)
        assert abs(kernel(b, z, w) - oracle) < 1e-9 * abs(oracle)


def test_kernel_hermitian_exactly():
    b = build_onb(None, W.gaussian_bump(), 20)
    rng = np.random.default_rng(1)
    for _ in range(10):
        z, w = rng.normal(size=2) * 0.5 + 1j * rng.normal(size=2) * 0.5
        assert kernel(b, z, w) - np.conj(kernel(b, w, z)) == 0


def test_bergman_function_at_origin():
    b = gaussian_basis(10)
    assert bergman_function(b, 0.0) == pytest.approx(10 / math.pi, rel=1e-12)


@pytest.mark.parametrize("w", [W.gaussian(), W.power(2), W.gaussian_bump()], ids=lambda w: w.name)
def test_extremal_inequality(w):
    n = 20
    q = default_quadrature(w, n)
    b = build_onb(q, w, n)
    rng = np.random.default_rng(7)
    zs = np.array([0, 0.3 + 0.3j, -0.5, 0.8j, 1.2])
    B = bergman_function(b, zs)
    for _ in range(100):
        f = sample_polynomial(b, rng)
        norm2 = np.sum(np.abs(f.c) ** 2)  # orthonormal expansion
        val = np.abs(f.weighted_eval(zs)) ** 2 / norm2
        assert np.all(B >= val * (1 - 1e-10))


def test_reproducing_property():
    w = W.gaussian_bump()
    n = 15
    q = default_quadrature(w, n)
    b = build_onb(q, w, n)
    # weighted kernel times weighted monomial integrates to the weighted monomial
    z0 = 0.2 - 0.3j
    kw = b.weighted_values(z0) @ b.weighted_values(q.nodes).conj().T  # K(z0, zeta) e^{-n phi(z0) - n phi(zeta)}
    scale = np.exp(-n * w.eval(n, q.nodes))
    for k in (0, 3, n):
        p = q.nodes**k * scale
        got = np.dot(q.weights, kw * p)
        expected = z0**k * np.exp(-n * w.eval(n, z0))
        assert abs(got - expected) < 1e-6 * abs(expected)


def test_kernel_matrix_psd():
    b = build_onb(None, W.power(2), 30)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, 40) + 1j * rng.uniform(-1, 1, 40)
    V = b.weighted_values(pts)
    K = V @ V.conj().T
    assert np.allclose(K, K.conj().T)
    assert np.linalg.eigvalsh(K).min() > -1e-8 * np.trace(K).real


# correlation ----------------------------------------------------------------

def test_correlation_diagonal_and_n2_value():
    b = small_gaussian(2)
    assert correlation(b, 0.3 + 0.2j, 0.3 + 0.2j) == 1
    oracle = (2 / math.pi) / math.sqrt((2 / math.pi) * (10 / math.pi))
    assert oracle == pytest.approx(2 / math.sqrt(20))
    assert oracle == pytest.approx(0.44721, abs=1e-5)
    assert abs(correlation(b, 0, 1)) == pytest.approx(oracle, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
)
def test_correlation_bounded(z, zp):
    b = gaussian_basis(30)
    assert abs(correlation(b, z, zp)) <= 1 + 1e-12


# tyz ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [5, 25, 100, 200])
def test_tyz_exact_at_origin(n):
    assert abs(tyz_ratio(gaussian_basis(n), 0.0) - 1) < 1e-10


def test_tyz_bulk_values():
    assert tyz_ratio(gaussian_basis(100), 0.5) == pytest.approx(1.0, abs=0.05)
    assert tyz_ratio(power_basis(100), 0.8) == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize("make,z", [("g", 0.5), ("g", 0.3 + 0.6j), ("p", 0.5), ("p", 0.8)])
def test_tyz_improves_with_n(make, z):
    basis = gaussian_basis if make == "g" else power_basis
    e25 = abs(tyz_ratio(basis(25), z) - 1)
    e50 = abs(tyz_ratio(basis(50), z) - 1)
    e100 = abs(tyz_ratio(basis(100), z) - 1)
    assert e50 < e25 and e100 < e50


def test_tyz_outside_bulk():
    with pytest.raises(OutsideBulk):
        tyz_ratio(gaussian_basis(25), 1.2)
    with pytest.raises(OutsideBulk):
        tyz_ratio(power_basis(25), 0.0)  # zero curvature


# near diagonal ----------------------------------------------------------------

def test_near_diagonal_reduces_to_tyz():
    for basis, w, z0 in [(gaussian_basis(50), W.gaussian(), 0.2j), (power_basis(50), W.power(2), 0.5)]:
        frame = normal_frame(w, 50, z0)
        r = near_diagonal_ratio(basis, frame, 0, 0)
        assert abs(r.imag) < 1e-12
        assert r.real == pytest.approx(tyz_ratio(basis, z0), rel=1e-10)


def test_near_diagonal_gaussian_unit_offsets():
    frame = normal_frame(W.gaussian(), 100, 0j)
    assert near_diagonal_ratio(gaussian_basis(100), frame, 1, 1) == pytest.approx(1.0, abs=0.05)


def test_near_diagonal_symmetry():
    b = power_basis(50)
    frame = normal_frame(W.power(2), 50, 0.4 + 0.2j)
    for u, v in [(0.5, -1j), (1 + 1j, 0.3), (-0.5, 0.5j)]:
        assert near_diagonal_ratio(b, frame, u, v) == pytest.approx(np.conj(near_diagonal_ratio(b, frame, v, u)), rel=1e-10)


def test_normal_frame_checks():
    frame = normal_frame(W.power(2), 50, 0.5)
    assert frame.lam == pytest.approx(0.25)
    assert frame.g2 == pytest.approx(0.125)  # phi_zz of |z|^4/4 at 1/2 is zbar^2/2
    with pytest.raises(FrameInvalid):
        near_diagonal_ratio(power_basis(100), frame, 0, 0)
    bad = W.WeightSequence("kink", lambda n, z: np.abs(z.real) + 0.5 * np.abs(z) ** 2, c3_norm=lambda n, R: 0.0)
    with pytest.raises(FrameInvalid):
        normal_frame(bad, 50, 0.0)


# decay -----------------------------------------------------------------------

def test_decay_oracle_gaussian_n50():
    oracle = math.exp(-50 * 0.5**2 / 2)
    assert oracle == pytest.approx(1.9e-3, rel=0.02)
    b = gaussian_basis(50)
    rho = abs(correlation(b, 0, 0.5))
    # the truncated kernel differs from the full Gaussian only in the tail terms
    exact = abs(gaussian_kernel_oracle(50, 0, 0.5)) / math.sqrt(
        gaussian_kernel_oracle(50, 0, 0).real * gaussian_kernel_oracle(50, 0.5, 0.5).real
    )
    assert rho == pytest.approx(exact, rel=1e-9)
    assert rho == pytest.approx(oracle, rel=1e-6)
    assert rho <= math.exp(-1 * math.sqrt(50) * 0.5)


@pytest.mark.parametrize("n", [25, 50, 100])
def test_decay_fit_gaussian(n):
    radii = np.linspace(0, 0.8, 41)
    fit = offdiag_decay_fit(gaussian_basis(n), 0j, 1, radii)
    assert np.all(fit.radii > 0)
    assert fit.T_fit > 0 and fit.r_squared > 0.9
    assert np.all(fit.abs_rho <= fit.C_fit * np.exp(-fit.T_fit * math.sqrt(n) * fit.radii) * (1 + 1e-12))


def test_decay_small_r_tends_to_one():
    fit = offdiag_decay_fit(gaussian_basis(50), 0j, 1j, [1e-4, 1e-3, 0.01, 0.05])
    assert fit.abs_rho[0] == pytest.approx(1.0, abs=1e-6)


def test_decay_insufficient_points():
    with pytest.raises(InsufficientPoints):
        offdiag_decay_fit(gaussian_basis(50), 0j, 1, [0.1, 0.2, 0.3])


# density -----------------------------------------------------------------------

def test_density_check():
    w = W.gaussian()
    q = default_quadrature(w, 10)
    integral, dim = density_check(build_onb(q, w, 10), q)
    assert dim == 11 and integral == pytest.approx(11, abs=1e-5)
    q0 = default_quadrature(w, 0, R=6, n_radial=80)
    integral, dim = density_check(build_onb(q0, w, 0), q0)
    assert dim == 1 and integral == pytest.approx(1, abs=1e-10)


def test_correlation_matrix_shape():
    b = gaussian_basis(10)
    M = correlation_matrix(b, np.array([0, 0.1]), np.array([0.2, 0.3, 0.4]))
    assert M.shape == (2, 3)
