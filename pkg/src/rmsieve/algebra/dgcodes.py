"""Delsarte-Goethals sets DG(m, r) of binary symmetric matrices.

A member of DG(m, r) is labelled by coefficients ``(t_0, ..., t_r)`` in
GF(2^m) and is the Gram matrix, in the polynomial basis, of the symmetric
bilinear form

    B(x, y) = Tr(t_0 x y) + sum_{j=1..r} Tr(t_j (x^(2^j) y + x y^(2^j))).

The j = 0 part has diagonal ``Tr(t_0 x^2)`` and makes DG(m, 0) the Kerdock
set. Each j >= 1 part is the polarization of ``Tr(t_j x^(1+2^j))`` and has a
zero diagonal. Matrices are stored bit-packed per row.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from rmsieve.algebra.galois import FieldSpec, fast_trace, gf_mul, gf_pow_1p2j
from rmsieve.algebra.gaussian import GaussianInt
from rmsieve.errors import TooLargeToEnumerate

logger = logging.getLogger(__name__)

ENUMERATION_GUARD = 1 << 24


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinSymMatrix:
    """An m x m symmetric matrix over GF(2); bit v of ``rows[u]`` is Q[u][v]."""

    m: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.m:
            raise ValueError(f"Expected {self.m} rows, got {len(self.rows)}")
        limit = 1 << self.m
        for u, row in enumerate(self.rows):
            if not 0 <= row < limit:
                raise ValueError(f"Row {u} = {row} does not fit in {self.m} bits")
            for v in range(u + 1, self.m):
                if ((row >> v) & 1) != ((self.rows[v] >> u) & 1):
                    raise ValueError(f"Matrix is not symmetric at ({u}, {v})")

    @classmethod
    def zeros(cls, m: int) -> BinSymMatrix:
        return cls(m, (0,) * m)

    @classmethod
    def identity(cls, m: int) -> BinSymMatrix:
        return cls(m, tuple(1 << u for u in range(m)))

    @classmethod
    def from_parts(cls, m: int, diag: int, upper: int) -> BinSymMatrix:
        """Build from the diagonal bits and the packed upper triangle."""
        rows = [((diag >> u) & 1) << u for u in range(m)]
        for k, (u, v) in enumerate(upper_pairs(m)):
            if (upper >> k) & 1:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
        return cls(m, tuple(rows))

    @classmethod
    def from_dense(cls, array) -> BinSymMatrix:
        dense = np.asarray(array, dtype=np.int64) % 2
        m = dense.shape[0]
        rows = tuple(int(sum(int(dense[u, v]) << v for v in range(m))) for u in range(m))
        return cls(m, rows)

    @property
    def diag(self) -> int:
        """d_Q as an m-bit vector."""
        return sum(((row >> u) & 1) << u for u, row in enumerate(self.rows))

    @property
    def upper(self) -> int:
        bits = 0
        for k, (u, v) in enumerate(upper_pairs(self.m)):
            bits |= self.entry(u, v) << k
        return bits

    def entry(self, u: int, v: int) -> int:
        return (self.rows[u] >> v) & 1

    def is_zero(self) -> bool:
        return not any(self.rows)

    def __xor__(self, other: BinSymMatrix) -> BinSymMatrix:
        if self.m != other.m:
            raise ValueError(f"Dimension mismatch: {self.m} vs {other.m}")
        return BinSymMatrix(self.m, tuple(a ^ b for a, b in zip(self.rows, other.rows)))

    # Over GF(2) sum and difference coincide.
    __add__ = __xor__
    __sub__ = __xor__

    def row_product(self, x: int) -> int:
        """Return the row vector xQ over GF(2)."""
        result = 0
        u = 0
        while x:
            if x & 1:
                result ^= self.rows[u]
            x >>= 1
            u += 1
        return result

    def to_dense(self) -> np.ndarray:
        return np.array(
            [[(row >> v) & 1 for v in range(self.m)] for row in self.rows], dtype=np.uint8
        )


@dataclass(frozen=True)
class DgIndex:
    """Column label (t_0, ..., t_r); r = len(coeffs) - 1."""

    coeffs: tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_int(cls, delta: int, m: int, r: int) -> DgIndex:
        if not 0 <= delta < 1 << ((r + 1) * m):
            raise ValueError(f"Column index {delta} outside [0, 2^{(r + 1) * m})")
        mask = (1 << m) - 1
        return cls(tuple((delta >> (j * m)) & mask for j in range(r + 1)))

    def to_int(self, m: int) -> int:
        return sum(t << (j * m) for j, t in enumerate(self.coeffs))

    def __xor__(self, other: DgIndex) -> DgIndex:
        if len(self.coeffs) != len(other.coeffs):
            raise ValueError("Indices belong to different DG levels")
        return DgIndex(tuple(a ^ b for a, b in zip(self.coeffs, other.coeffs)))


def upper_pairs(m: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(m) for v in range(u + 1, m)]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _check_level(spec: FieldSpec, r: int) -> None:
    if not 0 <= r <= (spec.m - 1) // 2:
        raise ValueError(f"r must satisfy 0 <= r <= {(spec.m - 1) // 2} for m={spec.m}, got {r}")


def quadratic_trace_form(spec: FieldSpec, j: int, t: int, x: int) -> int:
    """q_{j,t}(x) = Tr(t * x^(1+2^j))."""
    return fast_trace(spec, gf_mul(spec, t, gf_pow_1p2j(spec, x, j)))


def form_matrix(spec: FieldSpec, j: int, t: int) -> BinSymMatrix:
    """Gram matrix of the j-th trace form with coefficient t."""
    m = spec.m
    rows = [0] * m
    for u in range(m):
        for v in range(u, m):
            eu, ev = 1 << u, 1 << v
            if j == 0:
                bit = fast_trace(spec, gf_mul(spec, t, gf_mul(spec, eu, ev)))
            elif u == v:
                bit = 0
            else:
                bit = (
                    quadratic_trace_form(spec, j, t, eu ^ ev)
                    ^ quadratic_trace_form(spec, j, t, eu)
                    ^ quadratic_trace_form(spec, j, t, ev)
                )
            if bit:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return BinSymMatrix(m, tuple(rows))


@lru_cache(maxsize=None)
def _basis_matrices(spec: FieldSpec, r: int) -> tuple[BinSymMatrix, ...]:
    """Matrices of the unit labels, in the bit order of the integer column index."""
    return tuple(form_matrix(spec, j, 1 << b) for j in range(r + 1) for b in range(spec.m))


def dg_matrix(spec: FieldSpec, idx: DgIndex | int, r: int | None = None) -> BinSymMatrix:
    """Return Q(t_0, ..., t_r), the XOR of the per-coefficient forms."""
    if isinstance(idx, DgIndex):
        r = idx.r
        delta = idx.to_int(spec.m)
    else:
        if r is None:
            raise ValueError("r is required when the index is given as an integer")
        delta = int(idx)
    _check_level(spec, r)
    if not 0 <= delta < 1 << ((r + 1) * spec.m):
        raise ValueError(f"Column index {delta} outside DG({spec.m},{r})")
    rows = [0] * spec.m
    for b, basis in enumerate(_basis_matrices(spec, r)):
        if (delta >> b) & 1:
            rows = [a ^ c for a, c in zip(rows, basis.rows)]
    return BinSymMatrix(spec.m, tuple(rows))


def dg_row_table(spec: FieldSpec, r: int, columns: np.ndarray | None = None) -> np.ndarray:
    """Packed rows of every member, shape (C, m); row u of column delta at [delta, u]."""
    _check_level(spec, r)
    if columns is None:
        columns = np.arange(1 << ((r + 1) * spec.m), dtype=np.int64)
    table = np.zeros((len(columns), spec.m), dtype=np.int64)
    for b, basis in enumerate(_basis_matrices(spec, r)):
        selected = ((columns >> b) & 1).astype(bool)
        table[selected] ^= np.asarray(basis.rows, dtype=np.int64)
    return table


def dg_size(spec: FieldSpec, r: int) -> int:
    return 1 << ((r + 1) * spec.m)


def enumerate_dg(spec: FieldSpec, r: int) -> Iterator[tuple[int, BinSymMatrix]]:
    """Yield (delta, Q) for every member, in column order."""
    size = dg_size(spec, r)
    if size > ENUMERATION_GUARD:
        raise TooLargeToEnumerate(
            f"DG({spec.m},{r}) has {size} members; guard is {ENUMERATION_GUARD}"
        )
    table = dg_row_table(spec, r)
    for delta in range(size):
        yield delta, BinSymMatrix(spec.m, tuple(int(v) for v in table[delta]))


# ---------------------------------------------------------------------------
# Forms, rank, kernel
# ---------------------------------------------------------------------------

def quad_form_mod4(Q: BinSymMatrix, x: int) -> int:
    """x Q x^T over the integers, reduced mod 4."""
    total = 0
    u = 0
    rest = x
    while rest:
        if rest & 1:
            total += (Q.rows[u] & x).bit_count()
        rest >>= 1
        u += 1
    return total & 3


def _echelon(rows: Sequence[int], m: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form over GF(2); returns (pivot rows, pivot columns)."""
    work = [r for r in rows]
    pivots: list[int] = []
    pivot_cols: list[int] = []
    for col in range(m):
        pivot = next((i for i, row in enumerate(work) if (row >> col) & 1), None)
        if pivot is None:
            continue
        prow = work.pop(pivot)
        work = [row ^ prow if (row >> col) & 1 else row for row in work]
        pivots = [row ^ prow if (row >> col) & 1 else row for row in pivots]
        pivots.append(prow)
        pivot_cols.append(col)
    return pivots, pivot_cols


def rank_f2(Q: BinSymMatrix) -> int:
    """Rank over GF(2) by Gaussian elimination."""
    work = list(Q.rows)
    rank = 0
    for col in range(Q.m):
        pivot = None
        for i in range(rank, len(work)):
            if (work[i] >> col) & 1:
                pivot = i
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for i in range(len(work)):
            if i != rank and (work[i] >> col) & 1:
                work[i] ^= work[rank]
        rank += 1
    return rank


def nullspace_dim(Q: BinSymMatrix) -> int:
    return Q.m - rank_f2(Q)


def nullspace_basis(Q: BinSymMatrix) -> list[int]:
    """Basis of {z : zQ = 0} as m-bit vectors."""
    pivots, pivot_cols = _echelon(Q.rows, Q.m)
    free_cols = [c for c in range(Q.m) if c not in pivot_cols]
    basis = []
    for free in free_cols:
        z = 1 << free
        for prow, pcol in zip(pivots, pivot_cols):
            if (prow >> free) & 1:
                z |= 1 << pcol
        basis.append(z)
    return basis


def gauss_sum(Q: BinSymMatrix) -> GaussianInt:
    """Exact sum over all x of i^(x Q x^T)."""
    counts = [0, 0, 0, 0]
    for x in range(1 << Q.m):
        counts[quad_form_mod4(Q, x)] += 1
    return GaussianInt.from_phase_counts(counts)


def form_vanishes_on_radical(Q: BinSymMatrix) -> bool:
    """True when x Q x^T = 0 mod 4 on the GF(2) kernel of Q.

    On the kernel the form is additive with values in {0, 2}, so checking a
    basis is enough. The Gauss sum is nonzero exactly when this holds.
    """
    return all(quad_form_mod4(Q, z) == 0 for z in nullspace_basis(Q))


def expected_gauss_norm(Q: BinSymMatrix) -> int:
    """|sum_x i^(xQx^T)|^2 predicted from rank and radical: 0 or 2^(2m - rank)."""
    if not form_vanishes_on_radical(Q):
        return 0
    return 1 << (2 * Q.m - rank_f2(Q))


# ---------------------------------------------------------------------------
# Structural verification
# ---------------------------------------------------------------------------

@dataclass
class PropertyCheck:
    name: str
    passed: bool
    detail: str = ""
    counterexample: Any = None


@dataclass
class DgReport:
    m: int
    r: int
    size: int
    observed_dimension: int
    rank_bound: int
    min_rank: int
    rank_histogram: dict[int, int] = field(default_factory=dict)
    checks: list[PropertyCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "r": self.r,
            "size": self.size,
            "observed_dimension": self.observed_dimension,
            "rank_bound": self.rank_bound,
            "min_rank": self.min_rank,
            "rank_histogram": {str(k): v for k, v in sorted(self.rank_histogram.items())},
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                    "counterexample": c.counterexample,
                }
                for c in self.checks
            ],
        }


def verify_dg_properties(spec: FieldSpec, r: int) -> DgReport:
    """Exhaustively check closure, injectivity, rank bound, nesting and Kerdock facts."""
    _check_level(spec, r)
    m = spec.m
    size = dg_size(spec, r)
    if size > ENUMERATION_GUARD:
        raise TooLargeToEnumerate(f"DG({m},{r}) has {size} members; guard is {ENUMERATION_GUARD}")
    logger.info("Verifying DG(%d,%d): %d members", m, r, size)

    members = [Q.rows for _, Q in enumerate_dg(spec, r)]
    lookup = {rows: delta for delta, rows in enumerate(members)}
    checks: list[PropertyCheck] = []

    # (a) additive closure and additivity of the labelling
    basis = _basis_matrices(spec, r)
    closure_fail = None
    for delta, rows in enumerate(members):
        for b, gen in enumerate(basis):
            summed = tuple(a ^ c for a, c in zip(rows, gen.rows))
            if lookup.get(summed) != delta ^ (1 << b):
                closure_fail = {"delta": delta, "generator_bit": b}
                break
        if closure_fail:
            break
    checks.append(PropertyCheck(
        "additive_closure",
        closure_fail is None,
        "Q(i xor e_b) = Q(i) xor Q(e_b) for every member and generator",
        closure_fail,
    ))

    distinct = len(lookup)
    observed_dimension = distinct.bit_length() - 1
    checks.append(PropertyCheck(
        "injective",
        distinct == size,
        f"{distinct} distinct matrices out of {size}; observed dimension {observed_dimension}",
        None if distinct == size else {"distinct": distinct},
    ))

    # (b) rank bound
    rank_bound = m - 2 * r
    histogram: Counter[int] = Counter()
    rank_fail = None
    for delta, rows in enumerate(members):
        if delta == 0:
            continue
        rk = rank_f2(BinSymMatrix(m, rows))
        histogram[rk] += 1
        if rk < rank_bound and rank_fail is None:
            rank_fail = {"delta": delta, "rank": rk}
    checks.append(PropertyCheck(
        "rank_bound",
        rank_fail is None,
        f"every nonzero member has rank >= {rank_bound}",
        rank_fail,
    ))

    # (c) nesting DG(m, r) in DG(m, r + 1)
    if r + 1 <= (m - 1) // 2:
        nest_fail = None
        for delta, rows in enumerate(members):
            if dg_matrix(spec, delta, r + 1).rows != rows:
                nest_fail = {"delta": delta}
                break
        checks.append(PropertyCheck(
            "nested", nest_fail is None, f"DG({m},{r}) is contained in DG({m},{r + 1})", nest_fail
        ))
    else:
        checks.append(PropertyCheck("nested", True, f"r={r} is the top level for m={m}"))

    # (d) Kerdock facts
    kerdock = members[: 1 << m]
    diagonals = {BinSymMatrix(m, rows).diag for rows in kerdock}
    singular = next(
        (t for t, rows in enumerate(kerdock) if t and rank_f2(BinSymMatrix(m, rows)) < m), None
    )
    checks.append(PropertyCheck(
        "kerdock_distinct_diagonals",
        len(diagonals) == 1 << m,
        f"{len(diagonals)} distinct diagonals among {1 << m} Kerdock matrices",
    ))
    checks.append(PropertyCheck(
        "kerdock_nonsingular",
        singular is None,
        "every nonzero Kerdock matrix has full rank",
        None if singular is None else {"t0": singular},
    ))

    report = DgReport(
        m=m,
        r=r,
        size=size,
        observed_dimension=observed_dimension,
        rank_bound=rank_bound,
        min_rank=min(histogram) if histogram else m,
        rank_histogram=dict(histogram),
        checks=checks,
    )
    for check in checks:
        if not check.passed:
            logger.warning("DG(%d,%d) check %s failed: %s", m, r, check.name, check.counterexample)
    return report


# ---------------------------------------------------------------------------
# Text dump
# ---------------------------------------------------------------------------

def format_matrix_dump(spec: FieldSpec, r: int) -> str:
    """Line ``m r`` then ``delta t_0..t_r diag upper`` per member (hex except delta)."""
    lines = [f"{spec.m} {r}"]
    for delta, Q in enumerate_dg(spec, r):
        coeffs = DgIndex.from_int(delta, spec.m, r).coeffs
        fields = [str(delta), *(format(t, "x") for t in coeffs), format(Q.diag, "x"),
                  format(Q.upper, "x")]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"
