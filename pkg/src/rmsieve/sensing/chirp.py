"""Chirp reconstruction: shift products, Hadamard spectra, evidence and regression.

For every offset ``a`` the measurement is multiplied by a shifted copy of
itself, which turns each chirp into a Walsh function living in bin ``aQ``.
Rotating that bin by ``i**(-aQa^T)`` and averaging over offsets accumulates
``|alpha|^2 / sqrt(N)`` at every true column.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
import scipy.linalg

from rmsieve.algebra.dgcodes import DgIndex
from rmsieve.errors import EmptySelection, InvalidOffsets, SingularGram, SupportTooLarge
from rmsieve.sensing.frame import (
    UNIT,
    FrameSpec,
    SparseSignal,
    bins_at,
    column_block,
    parity_table,
    quad_values_at,
    synthesize,
)
from rmsieve.sensing.wht import fwht

logger = logging.getLogger(__name__)

OFFSET_CHUNK = 16
PIVOT_RATIO = 1e-10


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

def _as_measurement(f: npt.ArrayLike, n: int | None = None) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128)
    if f.ndim != 1:
        raise ValueError(f"Measurement must be one-dimensional, got shape {f.shape}")
    if n is not None and f.shape[0] != n:
        raise ValueError(f"Measurement must have length {n}, got {f.shape[0]}")
    return f


def shift_product(f: npt.ArrayLike, a: int) -> np.ndarray:
    """g_a(x) = f(x xor a) * conj(f(x))."""
    f = _as_measurement(f)
    idx = np.arange(f.shape[0], dtype=np.int64)
    if not 0 <= a < f.shape[0]:
        raise InvalidOffsets(f"Offset {a} outside [0, {f.shape[0]})")
    return f[idx ^ a] * np.conj(f)


def bin_spectrum(f: npt.ArrayLike, a: int) -> np.ndarray:
    """Gamma_a: unitary Walsh-Hadamard transform of the shift product."""
    return fwht(shift_product(f, a))


def evidence_for_offset(fs: FrameSpec, spectrum: npt.ArrayLike, a: int) -> np.ndarray:
    """Lambda_{delta,a} = i**(-aQa^T) * Gamma_a[aQ] for every retained column."""
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    rows = fs.row_table
    ell = bins_at(rows, a, fs.m)
    phase = quad_values_at(rows, a, fs.m)
    return UNIT[(-phase) % 4] * spectrum[ell]


# ---------------------------------------------------------------------------
# Evidence accumulation
# ---------------------------------------------------------------------------

def resolve_offsets(
    n: int, offsets: Sequence[int] | None = None, include_zero: bool = True
) -> tuple[int, ...]:
    """Validated, sorted offsets. ``None`` means every vector of F_2^m."""
    if offsets is None:
        chosen = tuple(range(0 if include_zero else 1, n))
    else:
        chosen = tuple(sorted(int(a) for a in offsets))
        if any(b == a for a, b in zip(chosen, chosen[1:])):
            raise InvalidOffsets("Offsets must be distinct")
        if chosen and (chosen[0] < 0 or chosen[-1] >= n):
            raise InvalidOffsets(f"Offsets must lie in [0, {n})")
        if not include_zero:
            chosen = tuple(a for a in chosen if a != 0)
    if not chosen:
        raise InvalidOffsets("At least one offset is required")
    return chosen


def pairwise_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Tree summation in a fixed order; the result depends only on ``parts``."""
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return pairwise_sum(parts[:mid]) + pairwise_sum(parts[mid:])


def _chunks(offsets: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [offsets[i:i + OFFSET_CHUNK] for i in range(0, len(offsets), OFFSET_CHUNK)]


@dataclass
class EvidenceVector:
    """Offset-averaged evidence per retained column."""

    lam: np.ndarray
    columns: np.ndarray
    offsets_used: tuple[int, ...]

    def value(self, delta: int) -> complex:
        pos = int(np.searchsorted(self.columns, delta))
        if pos >= len(self.columns) or int(self.columns[pos]) != delta:
            raise KeyError(f"Column {delta} has no evidence entry")
        return complex(self.lam[pos])

    def scores(self, score: str = "magnitude") -> np.ndarray:
        if score == "magnitude":
            return np.abs(self.lam)
        if score == "real":
            return self.lam.real.copy()
        raise ValueError(f"Unknown score '{score}'. Available: magnitude, real")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "delta": self.columns,
            "re": self.lam.real,
            "im": self.lam.imag,
            "magnitude": np.abs(self.lam),
        })


def accumulate_evidence(
    fs: FrameSpec,
    f: npt.ArrayLike,
    offsets: Sequence[int] | None = None,
    include_zero: bool = True,
    threads: int = 1,
) -> EvidenceVector:
    """Average Lambda_{delta,a} over the offsets.

    Offsets are sorted, split into fixed chunks and each chunk is reduced
    pairwise, so the result is independent of ``threads`` and of the order in
    which offsets were given.
    """
    f = _as_measurement(f, fs.N)
    used = resolve_offsets(fs.N, offsets, include_zero)
    fs.row_table  # build once before worker threads share it
    logger.info("Accumulating evidence over %d offsets (%s, threads=%d)",
                len(used), fs.describe(), threads)

    idx = np.arange(fs.N, dtype=np.int64)

    def chunk_total(chunk: tuple[int, ...]) -> np.ndarray:
        products = np.stack([f[idx ^ a] * np.conj(f) for a in chunk])
        spectra = fwht(products)
        parts = [evidence_for_offset(fs, spectra[i], a) for i, a in enumerate(chunk)]
        return pairwise_sum(parts)

    chunks = _chunks(used)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            totals = list(pool.map(chunk_total, chunks))
    else:
        totals = [chunk_total(c) for c in chunks]
    lam = pairwise_sum(totals) / len(used)
    return EvidenceVector(lam=lam, columns=np.asarray(fs.columns), offsets_used=used)


def detect_at(
    fs: FrameSpec,
    f: npt.ArrayLike,
    delta: int | DgIndex,
    offsets: Sequence[int] | None = None,
    include_zero: bool = True,
) -> complex:
    """lambda(delta) alone: one direct O(N) bin sum per offset, no full-frame pass."""
    f = _as_measurement(f, fs.N)
    Q = fs.matrix(delta)
    used = resolve_offsets(fs.N, offsets, include_zero)
    rows = np.asarray([Q.rows], dtype=np.int64)
    idx = np.arange(fs.N, dtype=np.int64)
    parity = parity_table(fs.m)
    scale = 1.0 / math.sqrt(fs.N)

    totals = []
    for chunk in _chunks(used):
        parts = []
        for a in chunk:
            ell = int(bins_at(rows, a, fs.m)[0])
            signs = 1 - 2 * parity[idx & ell]
            value = scale * np.sum(signs * f[idx ^ a] * np.conj(f))
            phase = int(quad_values_at(rows, a, fs.m)[0])
            parts.append(np.asarray(UNIT[(-phase) % 4] * value))
        totals.append(pairwise_sum(parts))
    return complex(pairwise_sum(totals) / len(used))


# ---------------------------------------------------------------------------
# Selection and regression
# ---------------------------------------------------------------------------

def select_support(
    ev: EvidenceVector,
    k: int | None = None,
    threshold: float | None = None,
    score: str = "magnitude",
) -> tuple[int, ...]:
    """Top-k columns (ties to the smaller label) or every column scoring >= threshold.

    Exactly one of ``k`` and ``threshold`` must be given. The result is sorted.
    """
    if (k is None) == (threshold is None):
        raise ValueError("Give exactly one of k (top-k mode) or threshold")
    scores = ev.scores(score)
    if k is not None:
        if not 0 <= k <= len(ev.columns):
            raise ValueError(f"k must satisfy 0 <= k <= {len(ev.columns)}, got {k}")
        order = np.lexsort((ev.columns, -scores))
        return tuple(sorted(int(ev.columns[p]) for p in order[:k]))
    if threshold <= 0:
        raise ValueError(f"Threshold must be positive, got {threshold}")
    keep = np.flatnonzero(scores >= threshold)
    if keep.size == 0:
        raise EmptySelection(
            f"No column reaches threshold {threshold:.6g}; max score is {scores.max():.6g}"
        )
    return tuple(int(ev.columns[p]) for p in keep)


def ldl_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a Hermitian system with Bunch-Kaufman LDL^H (symmetric pivoting)."""
    lu, d, perm = scipy.linalg.ldl(gram, lower=True, hermitian=True)
    pivots = np.abs(scipy.linalg.eigvalsh(d))
    if pivots.min() < PIVOT_RATIO * pivots.max():
        raise SingularGram(
            f"Gram matrix is singular: pivot ratio {pivots.min() / pivots.max():.3g} "
            f"below {PIVOT_RATIO}"
        )
    tri = lu[perm]
    z = scipy.linalg.solve_triangular(tri, rhs[perm], lower=True, unit_diagonal=True)
    w = scipy.linalg.solve(d, z, assume_a="her")
    v = scipy.linalg.solve_triangular(tri.conj().T, w, lower=False, unit_diagonal=True)
    x = np.empty_like(v)
    x[perm] = v
    return x


def regress(fs: FrameSpec, f: npt.ArrayLike, support: Sequence[int]) -> SparseSignal:
    """Least squares on the support: (Phi_S^H Phi_S)^-1 Phi_S^H f."""
    f = _as_measurement(f, fs.N)
    support = tuple(sorted(int(d) for d in support))
    if len(support) > fs.N:
        raise SupportTooLarge(f"Support has {len(support)} columns but only {fs.N} rows")
    if not support:
        return SparseSignal()
    phi_s = column_block(fs, support)  # (k, N): rows are columns of Phi_S
    gram = phi_s.conj() @ phi_s.T
    rhs = phi_s.conj() @ f
    values = ldl_solve(gram, rhs)
    return SparseSignal(support, tuple(complex(v) for v in values))


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass
class ReconstructionResult:
    signal: SparseSignal
    evidence: EvidenceVector
    residual_norm: float
    timings: dict[str, float] = field(default_factory=dict)

    def to_report(self, include_timings: bool = False) -> dict[str, Any]:
        report: dict[str, Any] = {
            "support": list(self.signal.support),
            "values": [[v.real, v.imag] for v in self.signal.values],
            "residual_norm": self.residual_norm,
            "offsets_used": list(self.evidence.offsets_used),
        }
        if include_timings:
            report["timings"] = dict(self.timings)
        return report


def reconstruct(
    fs: FrameSpec,
    f: npt.ArrayLike,
    k: int,
    offsets: Sequence[int] | None = None,
    include_zero: bool = True,
    score: str = "magnitude",
    threads: int = 1,
) -> ReconstructionResult:
    """Shift products, transforms, evidence, top-k selection, regression."""
    f = _as_measurement(f, fs.N)
    timings: dict[str, float] = {}

    start = time.perf_counter()
    evidence = accumulate_evidence(fs, f, offsets, include_zero, threads)
    timings["evidence_s"] = time.perf_counter() - start

    start = time.perf_counter()
    support = select_support(evidence, k=k, score=score)
    signal = regress(fs, f, support)
    timings["regress_s"] = time.perf_counter() - start

    residual = float(np.linalg.norm(f - synthesize(fs, signal)))
    logger.info("Reconstructed support %s, residual %.3g", list(support), residual)
    return ReconstructionResult(signal, evidence, residual, timings)


# ---------------------------------------------------------------------------
# Evidence bookkeeping
# ---------------------------------------------------------------------------

@dataclass
class EvidenceDecomposition:
    """lambda(delta) = tone + alias + cross for a noiseless measurement."""

    delta: int
    tone: complex
    alias: complex
    cross: complex

    @property
    def residual(self) -> complex:
        return self.alias + self.cross

    @property
    def total(self) -> complex:
        return self.tone + self.alias + self.cross


def evidence_decomposition(
    fs: FrameSpec,
    signal: SparseSignal,
    delta: int,
    offsets: Sequence[int] | None = None,
    include_zero: bool = True,
) -> EvidenceDecomposition:
    """Split the evidence of Phi alpha at ``delta`` into its exact parts.

    The tone is |alpha_i|^2 / sqrt(N) when delta is in the support. The alias
    collects other tones at offsets with a(Q_delta + Q_j) = 0. The cross part
    is the averaged signal cross-correlation of distinct support pairs.
    """
    used = resolve_offsets(fs.N, offsets, include_zero)
    offs = np.asarray(used, dtype=np.int64)
    idx = np.arange(fs.N, dtype=np.int64)
    parity = parity_table(fs.m)
    m, n = fs.m, fs.N

    target = np.asarray([fs.matrix(delta).rows], dtype=np.int64)
    rows = {d: np.asarray([fs.matrix(d).rows], dtype=np.int64) for d in signal.support}
    phases = {d: fs.phases([fs.position(d)])[0].astype(np.int64) for d in signal.support}

    def per_offset(table: np.ndarray, fn) -> np.ndarray:
        return np.array([int(fn(table, int(a), m)[0]) for a in offs], dtype=np.int64)

    target_bins = per_offset(target, bins_at)
    target_q = per_offset(target, quad_values_at)

    tone = 0j
    alias = np.zeros(len(offs), dtype=np.complex128)
    cross = np.zeros(len(offs), dtype=np.complex128)
    for i, di in enumerate(signal.support):
        ai = signal.values[i]
        bins_i = per_offset(rows[di], bins_at)
        rot = UNIT[(per_offset(rows[di], quad_values_at) - target_q) % 4]
        if di == delta:
            tone = abs(ai) ** 2 / math.sqrt(n)
        else:
            hit = bins_i == target_bins
            alias += np.where(hit, abs(ai) ** 2 * rot / math.sqrt(n), 0)
        signs = 1 - 2 * parity[(bins_i ^ target_bins)[:, None] & idx[None, :]]
        for j, dj in enumerate(signal.support):
            if i == j:
                continue
            chirp_diff = UNIT[(phases[di] - phases[dj]) % 4]
            cross += ai * np.conj(signal.values[j]) * rot * (signs @ chirp_diff) / n ** 1.5
    return EvidenceDecomposition(
        delta=int(delta),
        tone=complex(tone),
        alias=complex(alias.mean()),
        cross=complex(cross.mean()),
    )


def residual_bound(fs: FrameSpec, alpha_norm: float, u_norm: float = 0.0) -> float:
    """9 sqrt(log C) (||alpha||^2 + ||alpha|| ||u||) / N^(3/2 - 2r/m), natural log."""
    scale = 9.0 * math.sqrt(math.log(fs.C)) / fs.N ** (1.5 - 2.0 * fs.r / fs.m)
    return scale * (alpha_norm ** 2 + alpha_norm * u_norm)


def default_threshold(alpha_min: float, n: int) -> float:
    """|alpha_min|^2 / (2 sqrt(N))."""
    return alpha_min ** 2 / (2.0 * math.sqrt(n))
