import math

import numpy as np
import pytest

from bzl import weights as W
from bzl.bergman import kernel
from bzl.errors import IllConditioned, NotPositiveDefinite
from bzl.orthobasis import OrthoBasis, build_onb, default_quadrature, gram_matrix, orthonormality_residual
from bzl.quadrature import build_polar_rule

from conftest import gaussian_basis, gaussian_moment


def test_oracle_moments():
    # independent oracle: closed-form moments vs direct radial quadrature
    from scipy.integrate import quad

    for n, k in [(2, 0), (2, 1), (2, 2), (10, 3)]:
        direct = quad(lambda r: r ** (2 * k + 1) * math.exp(-n * r * r) * 2 * math.pi, 0, np.inf)[0]
        assert direct == pytest.approx(gaussian_moment(n, k), rel=1e-10)
    assert [gaussian_moment(2, k) for k in range(3)] == pytest.approx([math.pi / 2, math.pi / 4, math.pi / 4])


def test_gram_raw_diagonal_gaussian_n2():
    w = W.gaussian()
    # R = 6: at R = 3 the truncated tail at n = 2 is still ~1e-7; the longer
    # interval needs more radial nodes than the default 2n + 16
    G = gram_matrix(default_quadrature(w, 2, R=6, n_radial=80), w, 2).raw()
    assert np.allclose(np.diag(G).real, [math.pi / 2, math.pi / 4, math.pi / 4], rtol=1e-10)
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off)) < 1e-12


@pytest.mark.parametrize("w", [W.gaussian(), W.power(2), W.gaussian_bump()], ids=lambda w: w.name)
def test_gram_hermitian_exactly(w):
    G = gram_matrix(default_quadrature(w, 12), w, 12).scaled
    assert np.array_equal(G, G.conj().T)
    assert np.allclose(np.diag(G), 1, atol=1e-14)


@pytest.mark.parametrize("w", [W.gaussian(), W.power(2), W.power(3)], ids=lambda w: w.name)
def test_gram_radial_off_diagonal(w):
    G = gram_matrix(default_quadrature(w, 15), w, 15).scaled
    assert np.max(np.abs(G - np.diag(np.diag(G)))) < 1e-12


def test_onb_gaussian_values():
    b = gaussian_basis(10)
    P = b.values(np.array([0.0, 1.0, 0.3 - 0.2j]))
    assert np.allclose(P[:, 0], math.sqrt(10 / math.pi), rtol=1e-12)
    assert math.sqrt(10 / math.pi) == pytest.approx(1.78412, abs=1e-5)
    oracle = math.sqrt(1 / gaussian_moment(10, 3))
    assert oracle == pytest.approx(23.033, abs=1e-3)
    assert abs(P[1, 3]) == pytest.approx(oracle, rel=1e-10)


@pytest.mark.parametrize(
    "w,n",
    [(W.gaussian(), 10), (W.gaussian(), 100), (W.power(2), 40), (W.gaussian_bump(), 30), (W.gaussian(1.0), 25)],
    ids=lambda x: getattr(x, "name", str(x)),
)
def test_orthonormality_same_rule(w, n):
    q = default_quadrature(w, n)
    b = build_onb(q, w, n)
    assert orthonormality_residual(b, q) < 1e-8


def test_orthonormality_finer_rule_and_perturbation():
    w = W.gaussian()
    b = build_onb(None, w, 20)
    fine = default_quadrature(w, 20, n_radial=120, n_angular=160)
    assert orthonormality_residual(b, fine) < 1e-8
    bad = OrthoBasis(w, 20, b.coeffs + 1e-3 * np.eye(21, k=-1), b.log_sigma, b.cond_estimate, b.gram)
    assert orthonormality_residual(bad, fine) >= 1e-4


def test_degree_zero_basis():
    w = W.gaussian()
    q = default_quadrature(w, 0, R=6, n_radial=80)
    b = build_onb(q, w, 0)
    G00 = b.gram.raw()[0, 0].real
    P0 = abs(b.values(0.3)[0])
    assert abs(G00 * P0**2 - 1) < 1e-12


def test_triangular_coefficients():
    b = build_onb(None, W.gaussian_bump(), 20)
    assert np.allclose(np.triu(b.coeffs, 1), 0)
    assert np.all(np.abs(np.diag(b.coeffs)) > 0)


def _eigh_kernel(b, z, w):
    """Kernel from an eigen-decomposition of the scaled Gram matrix."""
    lam, U = np.linalg.eigh(b.gram.scaled)
    C = (U / np.sqrt(lam)).T.conj()  # rows: orthonormal combinations of m_k
    mz = b.weighted_monomials(z) * np.exp(b.n * b.weight.eval(b.n, z))
    mw = b.weighted_monomials(w) * np.exp(b.n * b.weight.eval(b.n, w))
    # the Gram matrix is G_jk = <m_j, m_k> with the first slot linear
    # in conj-free form; orthonormal set sum_k C_jk m_k requires C G^T C^H = I
    return complex(np.sum((C.conj() @ mz) * np.conj(C.conj() @ mw)))


@pytest.mark.parametrize("w", [W.gaussian(), W.gaussian_bump(), W.power(2)], ids=lambda w: w.name)
def test_onb_independence(w):
    b = build_onb(None, w, 25)
    for z, zp in [(0.1 + 0.2j, 0.3 - 0.1j), (0.5, 0.5), (-0.4j, 0.2)]:
        k1 = kernel(b, z, zp)
        k2 = _eigh_kernel(b, z, zp)
        assert abs(k1 - k2) < 1e-6 * abs(k1)


def test_scaling_robustness():
    w = W.gaussian_bump()
    b = build_onb(None, w, 20)
    G2 = 4 * b.gram.scaled
    L = np.linalg.cholesky(G2)
    coeffs2 = np.linalg.inv(L)
    b2 = OrthoBasis(w, 20, coeffs2, b.log_sigma - math.log(2), b.cond_estimate, b.gram)
    for z, zp in [(0.1 + 0.2j, 0.3 - 0.1j), (0.45, 0.45)]:
        assert abs(kernel(b, z, zp) - kernel(b2, z, zp)) < 1e-10 * abs(kernel(b, z, zp))


def test_radial_fast_path_is_identity():
    b = gaussian_basis(30)
    assert np.array_equal(b.coeffs, np.eye(31))
    assert b.cond_estimate == pytest.approx(1.0, abs=1e-10)


def test_ill_conditioned_rule_rejected():
    w = W.gaussian_bump()
    coarse = build_polar_rule(3, 2, 4)  # 8 nodes for 13 monomials
    with pytest.raises((IllConditioned, NotPositiveDefinite)):
        build_onb(coarse, w, 12)


def test_large_degree_stays_finite():
    b = gaussian_basis(200)
    v = b.weighted_values(np.array([0.0, 0.5, 0.99, 2.0]))
    assert np.all(np.isfinite(v))
