"""The implicit DG(m, r) sensing frame.

Column ``delta`` of the N x C matrix is ``phi(x) = i**(x Q_delta x^T) / sqrt(N)``.
Nothing is stored densely by default: columns are rebuilt from the packed rows
of their DG matrices, and the C x N phase table is materialized only when it
fits under ``PHASE_TABLE_GUARD`` entries.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any

import numpy as np
import numpy.typing as npt

from rmsieve.algebra.dgcodes import BinSymMatrix, DgIndex, dg_matrix, dg_row_table, nullspace_dim
from rmsieve.algebra.galois import FieldSpec
from rmsieve.algebra.gaussian import GaussianInt
from rmsieve.errors import MaskedColumn, TooLargeToEnumerate

logger = logging.getLogger(__name__)

UNIT = np.array([1, 1j, -1, -1j], dtype=np.complex128)

COLUMN_GUARD = 1 << 24
PHASE_TABLE_GUARD = 1 << 24
PAIR_GUARD = 1 << 30
DENSE_EXPORT_GUARD = 1 << 22
BLOCK_ENTRIES = 1 << 20


# ---------------------------------------------------------------------------
# Bit tables and quadratic phases
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def popcount_table(m: int) -> np.ndarray:
    counts = np.zeros(1 << m, dtype=np.int64)
    idx = np.arange(1 << m, dtype=np.int64)
    for bit in range(m):
        counts += (idx >> bit) & 1
    counts.setflags(write=False)
    return counts


def parity_table(m: int) -> np.ndarray:
    return popcount_table(m) & 1


def quad_phases(rows: np.ndarray, m: int) -> np.ndarray:
    """x Q x^T mod 4 for every x, one row per packed matrix; shape (K, 2^m), int8.

    Built bit by bit from Q(x' + e_u) = Q(x') + Q_uu + 2 <row_u, x'> for x' < 2^u.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    parity = parity_table(m)
    phases = np.zeros((rows.shape[0], 1 << m), dtype=np.int8)
    for u in range(m):
        block = 1 << u
        row_u = rows[:, u]
        cross = parity[row_u[:, None] & np.arange(block, dtype=np.int64)[None, :]]
        diag = (row_u >> u) & 1
        phases[:, block:2 * block] = (
            phases[:, :block] + diag[:, None] + 2 * cross
        ) % 4
    return phases


def quad_values_at(rows: np.ndarray, a: int, m: int) -> np.ndarray:
    """a Q a^T mod 4 for every packed matrix in ``rows``."""
    popcount = popcount_table(m)
    total = np.zeros(rows.shape[0], dtype=np.int64)
    for u in range(m):
        if (a >> u) & 1:
            total += popcount[rows[:, u] & a]
    return total & 3


def bins_at(rows: np.ndarray, a: int, m: int) -> np.ndarray:
    """Row products a Q over GF(2) for every packed matrix; the Hadamard bin of a."""
    ell = np.zeros(rows.shape[0], dtype=np.int64)
    for u in range(m):
        if (a >> u) & 1:
            ell ^= rows[:, u]
    return ell


def matrix_phases(Q: BinSymMatrix) -> np.ndarray:
    return quad_phases(np.asarray([Q.rows], dtype=np.int64), Q.m)[0]


# ---------------------------------------------------------------------------
# Frame
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameSpec:
    """Implicit normalized sensing matrix for DG(m, r), optionally column-masked."""

    field: FieldSpec
    r: int
    column_mask: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.r <= (self.field.m - 1) // 2:
            raise ValueError(
                f"r must satisfy 0 <= r <= {(self.field.m - 1) // 2} for m={self.field.m}, "
                f"got {self.r}"
            )
        if self.column_mask is not None:
            mask = tuple(int(d) for d in self.column_mask)
            if not mask:
                raise ValueError("Column mask must keep at least one column")
            if any(b <= a for a, b in zip(mask, mask[1:])):
                raise ValueError("Column mask must be strictly increasing")
            if mask[0] < 0 or mask[-1] >= self.full_size:
                raise ValueError(f"Column mask entries must lie in [0, {self.full_size})")
            object.__setattr__(self, "column_mask", mask)

    @property
    def m(self) -> int:
        return self.field.m

    @property
    def N(self) -> int:
        return 1 << self.field.m

    @property
    def full_size(self) -> int:
        return 1 << ((self.r + 1) * self.field.m)

    @property
    def C(self) -> int:
        return self.full_size if self.column_mask is None else len(self.column_mask)

    @property
    def masked(self) -> bool:
        return self.column_mask is not None

    @cached_property
    def columns(self) -> np.ndarray:
        """Retained column labels, ascending."""
        if self.column_mask is not None:
            cols = np.asarray(self.column_mask, dtype=np.int64)
        else:
            if self.full_size > COLUMN_GUARD:
                raise TooLargeToEnumerate(
                    f"DG({self.m},{self.r}) has {self.full_size} columns; "
                    f"guard is {COLUMN_GUARD}. Use a column mask."
                )
            cols = np.arange(self.full_size, dtype=np.int64)
        cols.setflags(write=False)
        return cols

    @cached_property
    def row_table(self) -> np.ndarray:
        """Packed DG rows per retained column, shape (C, m)."""
        logger.info("Building row table for DG(%d,%d): C=%d", self.m, self.r, self.C)
        table = dg_row_table(self.field, self.r, self.columns)
        table.setflags(write=False)
        return table

    @property
    def has_phase_table(self) -> bool:
        return self.C * self.N <= PHASE_TABLE_GUARD

    @cached_property
    def phase_table(self) -> np.ndarray:
        """x Q x^T mod 4 for every retained column and every x, shape (C, N), int8."""
        if not self.has_phase_table:
            raise TooLargeToEnumerate(
                f"Phase table needs {self.C * self.N} entries; guard is {PHASE_TABLE_GUARD}"
            )
        logger.info("Building phase table: N=%d, C=%d", self.N, self.C)
        table = quad_phases(self.row_table, self.m)
        table.setflags(write=False)
        return table

    def phases(self, positions: npt.ArrayLike) -> np.ndarray:
        """Phase rows for the given positions (not labels)."""
        positions = np.asarray(positions, dtype=np.int64)
        if self.has_phase_table:
            return self.phase_table[positions]
        return quad_phases(self.row_table[positions], self.m)

    def iter_phase_blocks(self) -> Iterable[tuple[int, np.ndarray]]:
        """Yield (start, phases) blocks covering all retained columns in order."""
        size = max(1, BLOCK_ENTRIES // self.N)
        for start in range(0, self.C, size):
            stop = min(self.C, start + size)
            yield start, self.phases(np.arange(start, stop))

    def position(self, delta: int | DgIndex) -> int:
        """Position of column label ``delta`` among the retained columns."""
        label = delta.to_int(self.m) if isinstance(delta, DgIndex) else int(delta)
        if self.column_mask is None:
            if not 0 <= label < self.full_size:
                raise MaskedColumn(f"Column {label} outside [0, {self.full_size})")
            return label
        pos = int(np.searchsorted(self.columns, label))
        if pos >= self.C or int(self.columns[pos]) != label:
            raise MaskedColumn(f"Column {label} is not retained by the column mask")
        return pos

    def positions(self, deltas: Iterable[int | DgIndex]) -> np.ndarray:
        return np.asarray([self.position(d) for d in deltas], dtype=np.int64)

    def label(self, position: int) -> int:
        return int(self.columns[position])

    def matrix(self, delta: int | DgIndex) -> BinSymMatrix:
        self.position(delta)
        if isinstance(delta, DgIndex):
            return dg_matrix(self.field, delta)
        return dg_matrix(self.field, int(delta), self.r)

    def subsample(self, count: int, seed: int) -> FrameSpec:
        """A frame keeping ``count`` columns drawn without replacement, seeded."""
        if not 1 <= count <= self.C:
            raise ValueError(f"Subsample size must satisfy 1 <= count <= {self.C}, got {count}")
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(self.C, size=count, replace=False))
        mask = tuple(int(self.columns[p]) for p in chosen)
        logger.info("Subsampled %d of %d columns (seed=%d)", count, self.C, seed)
        return FrameSpec(self.field, self.r, mask)

    def describe(self) -> str:
        base = f"DG({self.m},{self.r}) frame N={self.N} C={self.C}"
        return base + (" (masked)" if self.masked else "")


# ---------------------------------------------------------------------------
# Signals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseSignal:
    """Sparse coefficient vector over column labels.

    ``support`` is strictly increasing. Values may be zero only for estimates
    produced by regression; planted signals use nonzero values.
    """

    support: tuple[int, ...] = ()
    values: tuple[complex, ...] = ()

    def __post_init__(self) -> None:
        if len(self.support) != len(self.values):
            raise ValueError(
                f"Support has {len(self.support)} entries but {len(self.values)} values"
            )
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError("Support must be strictly increasing (distinct, sorted)")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, complex]]) -> SparseSignal:
        items = sorted((int(d), complex(v)) for d, v in pairs)
        return cls(tuple(d for d, _ in items), tuple(v for _, v in items))

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def alpha_min(self) -> float:
        magnitudes = [abs(v) for v in self.values if v != 0]
        return min(magnitudes) if magnitudes else 0.0

    @property
    def energy(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.values))

    @property
    def norm(self) -> float:
        return math.sqrt(self.energy)

    def value_at(self, delta: int) -> complex:
        try:
            return self.values[self.support.index(delta)]
        except ValueError:
            return 0j

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.complex128)

    def to_dense(self, fs: FrameSpec) -> np.ndarray:
        dense = np.zeros(fs.C, dtype=np.complex128)
        if self.k:
            dense[fs.positions(self.support)] = self.as_array()
        return dense

    def scaled(self, c: complex) -> SparseSignal:
        return SparseSignal(self.support, tuple(c * v for v in self.values))

    def to_dict(self) -> dict[str, Any]:
        return {
            "support": list(self.support),
            "values": [[v.real, v.imag] for v in self.values],
        }


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------

def column(fs: FrameSpec, delta: int | DgIndex) -> np.ndarray:
    """Normalized column ``delta``; entries i**(xQx^T) / sqrt(N)."""
    pos = fs.position(delta)
    return UNIT[fs.phases([pos])[0]] / math.sqrt(fs.N)


def column_block(fs: FrameSpec, deltas: Sequence[int]) -> np.ndarray:
    """Normalized columns as rows of a (len(deltas), N) array."""
    if len(deltas) == 0:
        return np.zeros((0, fs.N), dtype=np.complex128)
    return UNIT[fs.phases(fs.positions(deltas))] / math.sqrt(fs.N)


def synthesize(fs: FrameSpec, alpha: SparseSignal) -> np.ndarray:
    """Phi alpha = sum_i alpha_i phi_{pi_i}."""
    if alpha.k == 0:
        return np.zeros(fs.N, dtype=np.complex128)
    return alpha.as_array() @ column_block(fs, alpha.support)


def synthesize_dense(fs: FrameSpec, coefficients: npt.ArrayLike) -> np.ndarray:
    """Phi applied to a dense length-C vector; O(NC) in column blocks."""
    coefficients = np.asarray(coefficients)
    if coefficients.shape[-1] != fs.C:
        raise ValueError(f"Expected {fs.C} coefficients, got {coefficients.shape[-1]}")
    out = np.zeros(coefficients.shape[:-1] + (fs.N,), dtype=np.complex128)
    for start, phases in fs.iter_phase_blocks():
        stop = start + phases.shape[0]
        out += coefficients[..., start:stop] @ UNIT[phases]
    return out / math.sqrt(fs.N)


def analyze(fs: FrameSpec, f: npt.ArrayLike) -> np.ndarray:
    """Phi^H f: entry at position p is <column(p), f>, conjugate-linear in the column."""
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (fs.N,):
        raise ValueError(f"Measurement vector must have length {fs.N}, got {f.shape}")
    out = np.empty(fs.C, dtype=np.complex128)
    for start, phases in fs.iter_phase_blocks():
        out[start:start + phases.shape[0]] = UNIT[(-phases) % 4] @ f
    return out / math.sqrt(fs.N)


def inner_product_exact(fs: FrameSpec, delta1: int | DgIndex, delta2: int | DgIndex) -> GaussianInt:
    """Unnormalized sum_x i**(xQ1x^T - xQ2x^T), exact."""
    p1 = fs.phases([fs.position(delta1)])[0].astype(np.int64)
    p2 = fs.phases([fs.position(delta2)])[0].astype(np.int64)
    return GaussianInt.from_phases(p1 - p2)


def dense_matrix(fs: FrameSpec) -> np.ndarray:
    """The full normalized N x C matrix; guarded to N*C <= DENSE_EXPORT_GUARD."""
    if fs.N * fs.C > DENSE_EXPORT_GUARD:
        raise TooLargeToEnumerate(
            f"Dense matrix has {fs.N * fs.C} entries; guard is {DENSE_EXPORT_GUARD}"
        )
    return (UNIT[fs.phase_table] / math.sqrt(fs.N)).T


def format_dense_export(fs: FrameSpec) -> str:
    """Header ``N C`` then N lines of C comma-separated ``re:im`` values."""
    matrix = dense_matrix(fs)
    lines = [f"{fs.N} {fs.C}"]
    for row in matrix:
        lines.append(",".join(f"{v.real:.17g}:{v.imag:.17g}" for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Coherence
# ---------------------------------------------------------------------------

@dataclass
class CoherenceReport:
    m: int
    r: int
    N: int
    C: int
    mode: str
    pairs_examined: int
    mu: float
    mu_squared: Fraction
    max_pair: tuple[int, int] | None
    orthogonal_pairs: int
    magnitude_histogram: dict[str, int]
    row_sums: dict[str, int]
    row_sum_identical: bool
    max_row_sum: GaussianInt
    nu: float
    eta_hat: float | None
    gamma_hat: float | None

    @property
    def mu_bound(self) -> float:
        """2^r / sqrt(N), implied by the rank bound."""
        return 2.0 ** self.r / math.sqrt(self.N)

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "r": self.r,
            "N": self.N,
            "C": self.C,
            "mode": self.mode,
            "pairs_examined": self.pairs_examined,
            "mu": self.mu,
            "mu_squared": str(self.mu_squared),
            "mu_bound": self.mu_bound,
            "max_pair": list(self.max_pair) if self.max_pair else None,
            "orthogonal_pairs": self.orthogonal_pairs,
            "magnitude_histogram": self.magnitude_histogram,
            "row_sums": self.row_sums,
            "row_sum_identical": self.row_sum_identical,
            "max_row_sum": str(self.max_row_sum),
            "max_row_sum_average": [
                self.max_row_sum.re / (self.C - 1) if self.C > 1 else 0.0,
                self.max_row_sum.im / (self.C - 1) if self.C > 1 else 0.0,
            ],
            "nu": self.nu,
            "eta_hat": self.eta_hat,
            "gamma_hat": self.gamma_hat,
        }


def _rint_exact(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    re = np.rint(values.real)
    im = np.rint(values.imag)
    if max(np.abs(values.real - re).max(initial=0), np.abs(values.imag - im).max(initial=0)) > 1e-6:
        raise ArithmeticError("Inner products of fourth-root-of-unity columns left the integers")
    return re.astype(np.int64), im.astype(np.int64)


def column_phase_sums(fs: FrameSpec) -> tuple[np.ndarray, np.ndarray]:
    """G(x) = sum over retained columns of i**(xQx^T), as exact (re, im) arrays."""
    counts = np.zeros((4, fs.N), dtype=np.int64)
    for _, phases in fs.iter_phase_blocks():
        for d in range(4):
            counts[d] += (phases == d).sum(axis=0)
    return counts[0] - counts[2], counts[1] - counts[3]


def row_sums_exact(fs: FrameSpec) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized sum_{j != i} phi_i^H phi_j for every retained i, exact, in O(NC)."""
    g_re, g_im = column_phase_sums(fs)
    out_re = np.empty(fs.C, dtype=np.int64)
    out_im = np.empty(fs.C, dtype=np.int64)
    for start, phases in fs.iter_phase_blocks():
        p = phases.astype(np.int64)
        # rotate G(x) by i**(-p)
        rot_re = np.choose(p, [g_re, g_im, -g_re, -g_im])
        rot_im = np.choose(p, [g_im, -g_re, -g_im, g_re])
        stop = start + phases.shape[0]
        out_re[start:stop] = rot_re.sum(axis=1) - fs.N
        out_im[start:stop] = rot_im.sum(axis=1)
    return out_re, out_im


def coherence_stats(
    fs: FrameSpec,
    mode: str = "auto",
    sample_pairs: int = 1 << 16,
    seed: int = 0,
) -> CoherenceReport:
    """Worst-case and average coherence of the normalized frame.

    ``mode`` is ``exact`` (all C(C-1) ordered pairs, guarded), ``sampled``
    (seeded random pairs) or ``auto`` (exact when under the guard).
    """
    if mode not in ("auto", "exact", "sampled"):
        raise ValueError(f"Unknown coherence mode '{mode}'. Available: auto, exact, sampled")
    pairs = fs.C * (fs.C - 1)
    if mode == "auto":
        mode = "exact" if fs.C * fs.C <= PAIR_GUARD else "sampled"
        if mode == "sampled":
            logger.warning(
                "C^2 = %d exceeds pair guard %d; sampling %d pairs", fs.C * fs.C, PAIR_GUARD,
                sample_pairs,
            )
    elif mode == "exact" and fs.C * fs.C > PAIR_GUARD:
        raise TooLargeToEnumerate(f"C^2 = {fs.C * fs.C} pairs exceeds guard {PAIR_GUARD}")

    logger.info("Coherence (%s) for %s", mode, fs.describe())
    histogram: Counter[int] = Counter()
    best_norm = -1
    best_pair: tuple[int, int] | None = None

    if fs.C < 2:
        examined = 0
    elif mode == "exact":
        examined = pairs
        unit_all = UNIT[fs.phases(np.arange(fs.C))]
        block = max(1, BLOCK_ENTRIES // fs.C)
        for start in range(0, fs.C, block):
            stop = min(fs.C, start + block)
            gram = unit_all[start:stop].conj() @ unit_all.T
            re, im = _rint_exact(gram)
            norms = re * re + im * im
            rows = np.arange(stop - start)
            norms[rows, rows + start] = -1
            values, counts = np.unique(norms, return_counts=True)
            for value, count in zip(values.tolist(), counts.tolist()):
                if value >= 0:
                    histogram[value] += count
            flat = int(np.argmax(norms))
            local_best = int(norms.flat[flat])
            if local_best > best_norm:
                best_norm = local_best
                i, j = divmod(flat, fs.C)
                best_pair = (fs.label(start + i), fs.label(j))
    else:
        rng = np.random.default_rng(seed)
        examined = sample_pairs
        first = rng.integers(fs.C, size=sample_pairs)
        second = (first + rng.integers(1, fs.C, size=sample_pairs)) % fs.C
        for lo in range(0, sample_pairs, 4096):
            a = first[lo:lo + 4096]
            b = second[lo:lo + 4096]
            diff = (fs.phases(b).astype(np.int64) - fs.phases(a).astype(np.int64)) % 4
            re = (diff == 0).sum(axis=1) - (diff == 2).sum(axis=1)
            im = (diff == 1).sum(axis=1) - (diff == 3).sum(axis=1)
            norms = re * re + im * im
            for value, count in zip(*np.unique(norms, return_counts=True)):
                histogram[int(value)] += int(count)
            k = int(np.argmax(norms))
            if int(norms[k]) > best_norm:
                best_norm = int(norms[k])
                best_pair = (fs.label(int(a[k])), fs.label(int(b[k])))

    best_norm = max(best_norm, 0)
    mu_squared = Fraction(best_norm, fs.N * fs.N)
    mu = math.sqrt(best_norm) / fs.N

    row_re, row_im = row_sums_exact(fs)
    row_counts = Counter(str(GaussianInt(int(a), int(b))) for a, b in zip(row_re, row_im))
    worst = int(np.argmax(row_re * row_re + row_im * row_im))
    max_row_sum = GaussianInt(int(row_re[worst]), int(row_im[worst]))
    nu = abs(max_row_sum) / (fs.N * (fs.C - 1)) if fs.C > 1 else 0.0

    log_n = math.log(fs.N)
    report = CoherenceReport(
        m=fs.m,
        r=fs.r,
        N=fs.N,
        C=fs.C,
        mode=mode,
        pairs_examined=examined,
        mu=mu,
        mu_squared=mu_squared,
        max_pair=best_pair,
        orthogonal_pairs=histogram.get(0, 0),
        magnitude_histogram={
            str(Fraction(norm, fs.N * fs.N)): count for norm, count in sorted(histogram.items())
        },
        row_sums=dict(sorted(row_counts.items())),
        row_sum_identical=len(row_counts) == 1,
        max_row_sum=max_row_sum,
        nu=nu,
        eta_hat=-math.log(mu) / log_n if mu > 0 else None,
        gamma_hat=-math.log(nu) / log_n if nu > 0 else None,
    )
    logger.info("mu=%.6g nu=%.6g (row sums identical: %s)", mu, nu, report.row_sum_identical)
    return report


# ---------------------------------------------------------------------------
# Partial column sums
# ---------------------------------------------------------------------------

def partial_column_sum(fs: FrameSpec, V: BinSymMatrix, W: BinSymMatrix) -> GaussianInt:
    """S = sum over (x, a) of i**(aVa^T + xWx^T + 2 aWx^T), by the direct double sum."""
    m = fs.m
    if V.m != m or W.m != m:
        raise ValueError(f"Matrices must be {m} x {m}")
    pv = matrix_phases(V).astype(np.int64)
    pw = matrix_phases(W).astype(np.int64)
    rows = np.asarray([W.rows], dtype=np.int64)
    aw = np.array([bins_at(rows, a, m)[0] for a in range(fs.N)], dtype=np.int64)
    bilinear = parity_table(m)[aw[:, None] & np.arange(fs.N, dtype=np.int64)[None, :]]
    return GaussianInt.from_phases(pv[:, None] + pw[None, :] + 2 * bilinear)


def predicted_partial_norm(V: BinSymMatrix, W: BinSymMatrix) -> int:
    """2^(2m + dim ker W + dim ker (V - W)), the squared magnitude when S != 0."""
    return 1 << (2 * V.m + nullspace_dim(W) + nullspace_dim(V ^ W))
