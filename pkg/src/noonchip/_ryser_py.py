"""Pure numpy fallback for the permanent kernel.

Ryser's formula with Gray-code subset updates:

    Per(A) = (-1)^n sum_{S != 0} (-1)^{|S|} prod_i sum_{j in S} A[i, j]

Each step toggles a single column in the running row-sum vector, so the cost
is O(2^n * n).  Matches noonchip._ryser bit for bit in exact arithmetic.
"""

from __future__ import annotations

import numpy as np


def permanent(a: np.ndarray) -> complex:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        return 1.0 + 0j
    if n > 30:
        raise ValueError("matrix too large for exact permanent")

    row_sums = np.zeros(n, dtype=np.complex128)
    acc = 0j
    bits = 0
    last_gray = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (gray ^ last_gray).bit_length() - 1  # exactly one bit flips
        if (gray >> j) & 1:
            bits += 1
            row_sums += a[:, j]
        else:
            bits -= 1
            row_sums -= a[:, j]
        term = complex(np.prod(row_sums))
        acc = acc - term if bits & 1 else acc + term
        last_gray = gray
    return -acc if n & 1 else acc
