import functools
import math

import numpy as np
import pytest

from bzl import weights as W
from bzl.orthobasis import build_onb, default_quadrature


@functools.lru_cache(maxsize=None)
def gaussian_basis(n, R=None):
    w = W.gaussian()
    q = default_quadrature(w, n, R) if R is not None else None
    return build_onb(q, w, n)


@functools.lru_cache(maxsize=None)
def power_basis(n):
    return build_onb(None, W.power(2), n)


def gaussian_kernel_oracle(n, z, w):
    """Truncated exponential (n/pi) sum_{k<=n} (n z conj w)^k / k!."""
    x = n * z * np.conj(w)
    return n / math.pi * sum(x**k / math.factorial(k) for k in range(n + 1))


def gaussian_moment(n, k):
    """int |z|^{2k} exp(-n |z|^2) dV = pi k! / n^{k+1}."""
    return math.pi * math.factorial(k) / n ** (k + 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
