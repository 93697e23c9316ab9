"""Unitary Walsh-Hadamard transform in natural (Sylvester) ordering.

Bin ``l`` of a length-N input ``v`` is ``N**-0.5 * sum_x (-1)**popcount(l & x) * v[x]``.
Transforms act on the last axis, so a stack of spectra (one row per offset) is
transformed in a single call.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from rmsieve.errors import NonPowerOfTwoLength


def _log2_length(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise NonPowerOfTwoLength(f"Transform length must be a power of two, got {n}")
    return n.bit_length() - 1


def fwht(v: npt.ArrayLike) -> np.ndarray:
    """Fast transform along the last axis; O(N log N) butterflies, self-inverse."""
    data = np.array(v, dtype=np.complex128)
    n = data.shape[-1]
    m = _log2_length(n)
    lead = data.shape[:-1]
    h = 1
    for _ in range(m):
        # view as (..., blocks, 2, h): butterfly the two halves of each block
        block = data.reshape(*lead, n // (2 * h), 2, h)
        top = block[..., 0, :].copy()
        bottom = block[..., 1, :]
        block[..., 0, :] = top + bottom
        block[..., 1, :] = top - bottom
        h *= 2
    data *= 1.0 / np.sqrt(n)
    return data


def hadamard_signs(n: int) -> np.ndarray:
    """Dense +/-1 matrix H[l, x] = (-1)**popcount(l & x)."""
    _log2_length(n)
    idx = np.arange(n, dtype=np.int64)
    overlap = idx[:, None] & idx[None, :]
    parity = np.zeros_like(overlap)
    while overlap.any():
        parity ^= overlap & 1
        overlap >>= 1
    return 1 - 2 * parity


def naive_wht(v: npt.ArrayLike) -> np.ndarray:
    """Direct O(N^2) evaluation of the same transform; a test oracle."""
    data = np.asarray(v, dtype=np.complex128)
    n = data.shape[-1]
    signs = hadamard_signs(n).astype(np.complex128)
    return (data @ signs.T) / np.sqrt(n)
