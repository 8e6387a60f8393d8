"""Matrix permanent kernels."""

from __future__ import annotations

import itertools

import numpy as np

from .fock import DimensionError

NAIVE_MAX_DIM = 9


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"permanent needs a square matrix, got shape {a.shape}")
    return a


def permanent_naive(m) -> complex:
    """Permanent by summing over all n! permutations."""
    a = _as_square(m)
    n = a.shape[0]
    if n > NAIVE_MAX_DIM:
        raise DimensionError(f"naive permanent limited to n <= {NAIVE_MAX_DIM}")
    if n == 0:
        return 1 + 0j
    rows = range(n)
    total = 0j
    for sigma in itertools.permutations(rows):
        prod = 1 + 0j
        for i in rows:
            prod *= a[i, sigma[i]]
        total += prod
    return complex(total)


def permanent_ryser(m) -> complex:
    """Ryser's inclusion-exclusion formula, columns visited in Gray-code order.

    Each step toggles one column in the running subset, so the row sums are
    updated with a single vector add and the cost is O(2^n * n).
    """
    a = _as_square(m)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    row_sums = np.zeros(n, dtype=np.complex128)
    in_subset = [False] * n
    size = 0
    total = 0j
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if in_subset[j]:
            row_sums -= a[:, j]
            size -= 1
        else:
            row_sums += a[:, j]
            size += 1
        in_subset[j] = not in_subset[j]
        term = np.prod(row_sums)
        total += term if size % 2 == 0 else -term
    return complex(total if n % 2 == 0 else -total)


permanent = permanent_ryser
