"""Permanent kernel against a brute-force permutation oracle, both backends."""

import itertools
import math

import numpy as np
import pytest

from noonchip import _ryser_py, kernels


def permanent_by_permutations(a: np.ndarray) -> complex:
    # O(n! n) reference; only viable for tiny n, which is the point
    n = a.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        prod = 1.0 + 0j
        for i, j in enumerate(perm):
            prod *= a[i, j]
        total += prod
    return total


BACKENDS = [("python", _ryser_py.permanent)]
try:
    from noonchip import _ryser

    BACKENDS.append(("cython", _ryser.permanent))
except ImportError:
    pass


@pytest.mark.parametrize("name,perm", BACKENDS)
def test_against_permutation_oracle(name, perm):
    rng = np.random.default_rng(101)
    for n in range(1, 6):
        for _ in range(20):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            a = np.ascontiguousarray(a, dtype=np.complex128)
            ref = permanent_by_permutations(a)
            got = perm(a)
            assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref)), (name, n)


@pytest.mark.parametrize("name,perm", BACKENDS)
def test_empty_matrix_is_one(name, perm):
    a = np.zeros((0, 0), dtype=np.complex128)
    assert perm(a) == 1.0 + 0j


@pytest.mark.parametrize("name,perm", BACKENDS)
def test_identity_and_ones(name, perm):
    for n in range(1, 8):
        eye = np.ascontiguousarray(np.eye(n, dtype=np.complex128))
        assert abs(perm(eye) - 1.0) < 1e-12
        ones = np.ones((n, n), dtype=np.complex128)
        assert abs(perm(ones) - math.factorial(n)) < 1e-9 * math.factorial(n)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(55)
    for n in range(1, 11):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = np.ascontiguousarray(a, dtype=np.complex128)
        d = abs(BACKENDS[0][1](a) - BACKENDS[1][1](a))
        assert d <= 1e-9 * max(1.0, abs(BACKENDS[0][1](a)))


def test_wrapper_validates_and_coerces():
    with pytest.raises(ValueError):
        kernels.permanent(np.ones((2, 3)))
    # real input is accepted and coerced to complex
    assert kernels.permanent(np.eye(3)) == pytest.approx(1.0)


def test_size_cap():
    with pytest.raises(ValueError):
        _ryser_py.permanent(np.eye(31, dtype=np.complex128))


def test_backend_constant_exposed():
    assert kernels.BACKEND in ("python", "cython")


def test_row_expansion_recursion():
    # permanent satisfies Laplace-style expansion along the first row
    rng = np.random.default_rng(9)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    a = np.ascontiguousarray(a, dtype=np.complex128)
    expanded = 0j
    for j in range(5):
        minor = np.ascontiguousarray(np.delete(np.delete(a, 0, 0), j, 1))
        expanded += a[0, j] * kernels.permanent(minor)
    assert abs(kernels.permanent(a) - expanded) < 1e-10
