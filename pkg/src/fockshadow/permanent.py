"""Matrix permanents.

``permanent`` is the production route: Ryser's formula with Gray-code
column accumulation, O(2^k * k) time, jitted with numba when available.
``permanent_naive`` is the O(k! * k) permutation-sum reference kept as an
independent oracle for tests; it is never called from library code.
"""

import itertools

import numpy as np

try:
    import numba as _nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None


def _ryser_gray(a):
    """Ryser with Gray-code updates; `a` is a k x k complex128 array, k >= 1."""
    k = a.shape[0]
    v = np.zeros(k, dtype=np.complex128)
    total = 0.0 + 0.0j
    parity = 1.0
    gray = 0
    for g in range(1, 1 << k):
        tz = 0
        while not (g >> tz) & 1:
            tz += 1
        gray ^= 1 << tz
        if (gray >> tz) & 1:
            for i in range(k):
                v[i] += a[i, tz]
        else:
            for i in range(k):
                v[i] -= a[i, tz]
        parity = -parity
        prod = 1.0 + 0.0j
        for i in range(k):
            prod *= v[i]
        total += parity * prod
    if k & 1:
        return -total
    return total


if _nb is not None:
    _ryser_gray = _nb.njit(cache=True)(_ryser_gray)


def _ryser_chunked(a, chunk=1 << 16):
    """Vectorised Ryser fallback: subset row-sums via matmul, chunked."""
    k = a.shape[0]
    cols = np.arange(k)
    total = 0.0 + 0.0j
    for start in range(1, 1 << k, chunk):
        stop = min(start + chunk, 1 << k)
        subsets = np.arange(start, stop, dtype=np.int64)
        bits = ((subsets[:, None] >> cols) & 1).astype(np.complex128)
        rowsums = bits @ a.T
        signs = 1.0 - 2.0 * (bits.real.sum(axis=1).astype(np.int64) & 1)
        total += np.sum(signs * np.prod(rowsums, axis=1))
    return total if k % 2 == 0 else -total


def permanent(a: np.ndarray) -> complex:
    """Permanent of a square complex matrix; per(0x0) = 1 by convention.

    Sizes k <= 3 use the expanded definition directly; larger sizes run
    Ryser/Gray-code. Exact up to floating-point round-off.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    k = a.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    if k == 1:
        return complex(a[0, 0])
    if k == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])
    if k == 3:
        return complex(
            a[0, 0] * (a[1, 1] * a[2, 2] + a[1, 2] * a[2, 1])
            + a[0, 1] * (a[1, 0] * a[2, 2] + a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] + a[1, 1] * a[2, 0])
        )
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if _nb is not None:
        return complex(_ryser_gray(a))
    return complex(_ryser_chunked(a))


def permanent_naive(a: np.ndarray) -> complex:
    """Permutation-sum definition, test oracle only (k <= ~9)."""
    a = np.asarray(a, dtype=np.complex128)
    k = a.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    rows = np.arange(k)
    return complex(sum(np.prod(a[rows, sigma]) for sigma in itertools.permutations(range(k))))
