# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled Ryser permanent with Gray-code subset updates, O(2^n * n)."""

from libc.stdlib cimport free, malloc


def permanent(double complex[:, :] a):
    """Permanent of a square complex matrix."""
    cdef Py_ssize_t n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("matrix must be square")
    if n == 0:
        return 1.0 + 0j
    if n > 30:
        raise ValueError("matrix too large for exact permanent")

    cdef double complex *row_sums = <double complex *> malloc(n * sizeof(double complex))
    if row_sums == NULL:
        raise MemoryError()

    cdef double complex acc = 0
    cdef double complex term
    cdef unsigned long long k, gray, last_gray = 0, diff
    cdef Py_ssize_t i, j, bits = 0
    try:
        for i in range(n):
            row_sums[i] = 0
        for k in range(1, (<unsigned long long> 1) << n):
            gray = k ^ (k >> 1)
            diff = gray ^ last_gray  # exactly one bit flips
            j = 0
            while not (diff >> j) & 1:
                j += 1
            if (gray >> j) & 1:
                bits += 1
                for i in range(n):
                    row_sums[i] = row_sums[i] + a[i, j]
            else:
                bits -= 1
                for i in range(n):
                    row_sums[i] = row_sums[i] - a[i, j]
            term = 1
            for i in range(n):
                term = term * row_sums[i]
            if bits & 1:
                acc = acc - term
            else:
                acc = acc + term
            last_gray = gray
    finally:
        free(row_sums)
    if n & 1:
        return -acc
    return acc
