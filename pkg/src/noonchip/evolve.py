"""State evolution through a compiled mode transformation.

Two independent routes are provided on purpose:

* `apply` expands the input's creation-operator polynomial term by term,
  substituting a_k^dag -> sum_j U[j, k] a_j^dag and collecting monomials.
* `transition_amplitude` evaluates a single matrix element
  <t|U|s> = Per(U[t, s]) / sqrt(prod s_i! prod t_j!) with the row/column
  repeated submatrix, using the Ryser permanent kernel.

They share no code beyond the matrix itself, so they cross-check each other.
Exact amplitude arithmetic throughout; global phase is never normalized away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .fock import FockState, Occupation, basis_occupations

#: hard cap: exact simulation beyond this photon number is out of scope
MAX_PHOTONS = 10

UNITARY_TOL = 1e-10


class NonUnitaryError(ValueError):
    """Raised when a transformation is not unitary within tolerance."""


def _check_matrix(matrix: np.ndarray, mode_count: int | None = None) -> np.ndarray:
    u = np.asarray(matrix, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    if mode_count is not None and u.shape[0] != mode_count:
        raise ValueError(f"matrix is {u.shape[0]}-mode but the state has {mode_count} modes")
    return u


def _check_photon_cap(n: int) -> None:
    if n > MAX_PHOTONS:
        raise ValueError(f"{n} photons exceeds the supported maximum of {MAX_PHOTONS}")


def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(matrix, dtype=np.complex128)
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) <= tol)


def apply(matrix: np.ndarray, state: FockState, *, unitary_tol: float = UNITARY_TOL) -> FockState:
    """Evolves a state by polynomial expansion of its creation operators.

    Loss must be pre-expanded into environment modes; non-unitary matrices
    are rejected.
    """
    u = _check_matrix(matrix, state.mode_count)
    if not is_unitary(u, unitary_tol):
        raise NonUnitaryError("matrix is not unitary; expand loss taps into environment modes first")

    modes = state.mode_count
    out: dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        _check_photon_cap(sum(occ))
        # |occ> = prod_k (a_k^dag)^{s_k} / sqrt(s_k!) |vac>
        start = amp / math.sqrt(math.prod(math.factorial(s) for s in occ))
        poly: dict[Occupation, complex] = {(0,) * modes: start}
        for k, s_k in enumerate(occ):
            column = u[:, k]
            for _ in range(s_k):
                poly = _raise_mode(poly, column)
        for target, coeff in poly.items():
            value = coeff * math.sqrt(math.prod(math.factorial(t) for t in target))
            out[target] = out.get(target, 0j) + value
    return FockState(modes, out)


def _raise_mode(poly: dict[Occupation, complex], column: np.ndarray) -> dict[Occupation, complex]:
    """Multiplies the monomial sum by sum_j column[j] a_j^dag."""
    result: dict[Occupation, complex] = {}
    nonzero = [(j, column[j]) for j in range(len(column)) if column[j] != 0]
    for occ, coeff in poly.items():
        for j, weight in nonzero:
            bumped = occ[:j] + (occ[j] + 1,) + occ[j + 1 :]
            result[bumped] = result.get(bumped, 0j) + coeff * weight
    return result


@dataclass(frozen=True)
class TransitionQuery:
    """A single matrix element <output_occ| U |input_occ>."""

    matrix: np.ndarray
    input_occ: Occupation
    output_occ: Occupation


def transition_amplitude(query: TransitionQuery) -> complex:
    """<t|U|s> via the permanent of the row/column repeated submatrix.

    Photon-number mismatch between input and output gives amplitude 0.
    """
    u = _check_matrix(query.matrix)
    s = tuple(int(n) for n in query.input_occ)
    t = tuple(int(n) for n in query.output_occ)
    if len(s) != u.shape[1] or len(t) != u.shape[0]:
        raise ValueError("occupation length does not match matrix dimension")
    if any(n < 0 for n in s + t):
        raise ValueError("occupation numbers must be non-negative")
    n_in, n_out = sum(s), sum(t)
    _check_photon_cap(max(n_in, n_out))
    if n_in != n_out:
        return 0j
    if n_in == 0:
        return 1.0 + 0j
    rows = np.repeat(np.arange(u.shape[0]), t)
    cols = np.repeat(np.arange(u.shape[1]), s)
    sub = u[np.ix_(rows, cols)]
    norm = math.sqrt(
        math.prod(math.factorial(n) for n in s) * math.prod(math.factorial(n) for n in t)
    )
    return kernels.permanent(sub) / norm


def amplitude(matrix: np.ndarray, input_occ: Iterable[int], output_occ: Iterable[int]) -> complex:
    """Convenience wrapper building the TransitionQuery."""
    return transition_amplitude(TransitionQuery(matrix, tuple(input_occ), tuple(output_occ)))


def output_distribution(matrix: np.ndarray, input_occ: Iterable[int]) -> dict[Occupation, float]:
    """|<t|U|s>|^2 over the full output sector, via the permanent route."""
    u = _check_matrix(matrix)
    s = tuple(int(n) for n in input_occ)
    _check_photon_cap(sum(s))
    dist: dict[Occupation, float] = {}
    for t in basis_occupations(sum(s), u.shape[0]):
        p = abs(amplitude(u, s, t)) ** 2
        if p > 0.0:
            dist[t] = p
    return dist


# -- sampling ----------------------------------------------------------------


def derived_rng(seed: int, worker_index: int = 0) -> np.random.Generator:
    """Deterministic per-worker stream: SeedSequence(seed, spawn_key=(worker,)).

    Parallel workers must call this with distinct worker_index values; the
    streams are independent and reproducible for a fixed root seed.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(worker_index,)))


def sample_output(matrix: np.ndarray, input_occ: Iterable[int], rng_seed: int) -> Occupation:
    """One draw from |<t|U|s>|^2."""
    occs, counts = sample_output_counts(matrix, input_occ, rng_seed, shots=1)
    return occs[int(np.argmax(counts))]


def sample_output_counts(
    matrix: np.ndarray,
    input_occ: Iterable[int],
    rng_seed: int,
    shots: int,
    worker_index: int = 0,
) -> tuple[list[Occupation], np.ndarray]:
    """Histogram of output occupations over the given number of draws."""
    dist = output_distribution(matrix, input_occ)
    occs = sorted(dist)
    probs = np.array([dist[o] for o in occs])
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"output probabilities sum to {total:.12g}, expected 1")
    rng = derived_rng(rng_seed, worker_index)
    draws = rng.choice(len(occs), size=shots, p=probs / total)
    counts = np.bincount(draws, minlength=len(occs))
    return occs, counts
