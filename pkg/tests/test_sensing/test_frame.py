"""Tests for sensing/frame.py."""

import math
from fractions import Fraction

import numpy as np
import pytest

from rmsieve.algebra.dgcodes import (
    BinSymMatrix,
    dg_matrix,
    enumerate_dg,
    gauss_sum,
    nullspace_dim,
    quad_form_mod4,
)
from rmsieve.algebra.galois import field_spec
from rmsieve.algebra.gaussian import GaussianInt, log2_exact
from rmsieve.errors import MaskedColumn, TooLargeToEnumerate
from rmsieve.sensing.frame import (
    FrameSpec,
    SparseSignal,
    analyze,
    coherence_stats,
    column,
    column_block,
    dense_matrix,
    format_dense_export,
    inner_product_exact,
    matrix_phases,
    partial_column_sum,
    predicted_partial_norm,
    quad_phases,
    row_sums_exact,
    synthesize,
    synthesize_dense,
)


class TestFrameSpec:
    def test_sizes(self, dg31, dg51):
        assert (dg31.N, dg31.C) == (8, 64)
        assert (dg51.N, dg51.C) == (32, 1024)
        assert not dg31.masked

    def test_r_out_of_range(self):
        with pytest.raises(ValueError, match="r must satisfy"):
            FrameSpec(field_spec(3), 2)

    def test_mask_validation(self):
        spec = field_spec(3)
        with pytest.raises(ValueError, match="strictly increasing"):
            FrameSpec(spec, 1, (3, 3))
        with pytest.raises(ValueError, match="at least one"):
            FrameSpec(spec, 1, ())
        with pytest.raises(ValueError, match="lie in"):
            FrameSpec(spec, 1, (0, 64))

    def test_position_and_label(self, dg31):
        assert dg31.position(17) == 17
        assert dg31.label(17) == 17
        with pytest.raises(MaskedColumn):
            dg31.position(64)

    def test_subsample(self, dg51):
        small = dg51.subsample(40, seed=5)
        assert small.C == 40
        assert small.masked
        assert list(small.columns) == sorted(small.columns)
        assert small == dg51.subsample(40, seed=5)
        kept = set(small.columns.tolist())
        missing = next(d for d in range(dg51.C) if d not in kept)
        with pytest.raises(MaskedColumn, match="not retained"):
            small.position(missing)

    def test_masked_frame_columns_match_full(self, dg51):
        small = dg51.subsample(10, seed=1)
        for delta in small.columns:
            assert np.array_equal(column(small, int(delta)), column(dg51, int(delta)))

    def test_quad_phases_match_forms(self, dg31):
        for delta, Q in enumerate_dg(dg31.field, 1):
            expected = [quad_form_mod4(Q, x) for x in range(dg31.N)]
            assert dg31.phase_table[delta].tolist() == expected

    def test_quad_phases_without_table(self):
        rows = np.asarray([BinSymMatrix.identity(3).rows], dtype=np.int64)
        assert quad_phases(rows, 3)[0].tolist() == [0, 1, 1, 2, 1, 2, 2, 3]

    def test_describe(self, dg31):
        assert dg31.describe() == "DG(3,1) frame N=8 C=64"


class TestSparseSignal:
    def test_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            SparseSignal((3, 1), (1, 1))
        with pytest.raises(ValueError, match="values"):
            SparseSignal((1,), ())

    def test_from_pairs_sorts(self):
        sig = SparseSignal.from_pairs([(9, 2.0), (4, -1j)])
        assert sig.support == (4, 9)
        assert sig.values == (-1j, 2.0)

    def test_derived_quantities(self):
        sig = SparseSignal((1, 2, 3), (3.0, 0.0, 4j))
        assert sig.k == 3
        assert sig.alpha_min == 3.0
        assert sig.energy == 25.0
        assert sig.norm == 5.0
        assert sig.value_at(3) == 4j
        assert sig.value_at(7) == 0j

    def test_to_dense_and_scaled(self, dg31):
        sig = SparseSignal((2, 5), (1.0, 2.0))
        dense = sig.to_dense(dg31)
        assert dense[2] == 1.0 and dense[5] == 2.0 and dense.sum() == 3.0
        assert sig.scaled(1j).values == (1j, 2j)


class TestProducts:
    def test_columns_unit_norm(self, dg31):
        for delta in range(dg31.C):
            assert abs(np.linalg.norm(column(dg31, delta)) - 1.0) <= 1e-12

    def test_zero_column_is_flat(self, dg31):
        assert np.allclose(column(dg31, 0), np.full(8, 1 / math.sqrt(8)))

    def test_synthesize_matches_dense(self, dg31):
        rng = np.random.default_rng(2)
        support = tuple(sorted(rng.choice(64, size=5, replace=False).tolist()))
        values = tuple(complex(v) for v in rng.standard_normal(5) + 1j * rng.standard_normal(5))
        sig = SparseSignal(support, values)
        phi = dense_matrix(dg31)
        assert np.abs(synthesize(dg31, sig) - phi @ sig.to_dense(dg31)).max() <= 1e-12
        dense = synthesize_dense(dg31, sig.to_dense(dg31))
        assert np.abs(dense - synthesize(dg31, sig)).max() <= 1e-12

    def test_synthesize_dense_batched(self, dg31):
        rng = np.random.default_rng(4)
        coeffs = rng.standard_normal((3, 64))
        out = synthesize_dense(dg31, coeffs)
        assert out.shape == (3, 8)
        assert np.allclose(out[1], synthesize_dense(dg31, coeffs[1]))

    def test_analyze_is_adjoint(self, dg31):
        rng = np.random.default_rng(3)
        f = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        assert np.abs(analyze(dg31, f) - dense_matrix(dg31).conj().T @ f).max() <= 1e-12

    def test_analyze_on_support_is_gram_action(self, dg31):
        sig = SparseSignal((3, 20, 41), (1.0, -0.5j, 2.0))
        corr = analyze(dg31, synthesize(dg31, sig))
        phi_s = column_block(dg31, sig.support)
        gram = phi_s.conj() @ phi_s.T
        assert np.abs(corr[list(sig.support)] - gram @ sig.as_array()).max() <= 1e-12

    def test_analyze_wrong_length(self, dg31):
        with pytest.raises(ValueError, match="length 8"):
            analyze(dg31, np.ones(4))

    def test_dense_export(self, kerdock3):
        text = format_dense_export(kerdock3)
        lines = text.splitlines()
        assert lines[0] == "8 8"
        assert len(lines) == 9
        assert all(len(line.split(",")) == 8 for line in lines[1:])

    def test_dense_guard(self):
        with pytest.raises(TooLargeToEnumerate):
            dense_matrix(FrameSpec(field_spec(11), 1))


class TestInnerProducts:
    def test_dichotomy_exhaustive(self, dg31):
        forms = [dg_matrix(dg31.field, d, 1) for d in range(dg31.C)]
        for d1, Q1 in enumerate(forms):
            for d2, Q2 in enumerate(forms):
                norm = inner_product_exact(dg31, d1, d2).norm()
                assert norm in (0, dg31.N << nullspace_dim(Q1 ^ Q2))

    def test_self_inner_product(self, dg31):
        assert inner_product_exact(dg31, 9, 9) == GaussianInt(8, 0)


class TestCoherence:
    def test_kerdock5_exact_value(self, kerdock5):
        report = coherence_stats(kerdock5)
        assert report.mode == "exact"
        assert report.mu_squared == Fraction(1, 32)
        assert abs(report.mu - 2 ** -2.5) <= 1e-15
        assert report.orthogonal_pairs == 0
        assert report.magnitude_histogram == {"1/32": 32 * 31}
        assert report.pairs_examined == 32 * 31
        assert abs(report.eta_hat - 0.5) <= 1e-12

    def test_dg51_within_bound(self, dg51):
        report = coherence_stats(dg51)
        assert report.mu_squared <= Fraction(4, 32)
        assert report.mu <= report.mu_bound + 1e-12
        assert report.max_pair is not None
        d1, d2 = report.max_pair
        assert d1 != d2
        assert inner_product_exact(dg51, d1, d2).norm() == report.mu_squared * 32 * 32

    def test_histogram_values_are_dyadic(self, dg31):
        report = coherence_stats(dg31)
        for key, count in report.magnitude_histogram.items():
            value = Fraction(key)
            assert value == 0 or log2_exact(value) is not None
            assert count > 0
        assert sum(report.magnitude_histogram.values()) == 64 * 63

    def test_row_sums_match_brute_force(self, dg31):
        re, im = row_sums_exact(dg31)
        for i in range(dg31.C):
            total = GaussianInt()
            for j in range(dg31.C):
                if j != i:
                    total = total + inner_product_exact(dg31, j, i)
            assert (int(re[i]), int(im[i])) == (total.re, total.im)

    def test_row_sum_report(self, dg31):
        report = coherence_stats(dg31)
        assert sum(report.row_sums.values()) == 64
        assert report.row_sum_identical == (len(report.row_sums) == 1)
        assert report.nu == abs(report.max_row_sum) / (8 * 63)

    def test_row_sum_baselines(self, kerdock3, dg31):
        # Row sums vary with the column at m=3.
        kerdock = coherence_stats(kerdock3)
        assert kerdock.row_sums == {
            "14+10i": 1,
            "14+6i": 2,
            "14-6i": 2,
            "14-10i": 1,
            "10+2i": 1,
            "10-2i": 1,
        }
        assert not kerdock.row_sum_identical

        # DG(3, 1) holds every symmetric 3x3 matrix; the sum depends on the diagonal weight.
        dg = coherence_stats(dg31)
        assert dg.row_sums == {"152-96i": 8, "152-32i": 24, "152+32i": 24, "152+96i": 8}
        assert not dg.row_sum_identical

    def test_sampled_mode_is_seeded(self, dg51):
        a = coherence_stats(dg51, mode="sampled", sample_pairs=2000, seed=11)
        b = coherence_stats(dg51, mode="sampled", sample_pairs=2000, seed=11)
        assert a.mode == "sampled"
        assert a.pairs_examined == 2000
        assert a.to_dict() == b.to_dict()
        assert a.mu_squared <= coherence_stats(dg51).mu_squared

    def test_unknown_mode(self, dg31):
        with pytest.raises(ValueError, match="Unknown coherence mode"):
            coherence_stats(dg31, mode="fast")


class TestPartialColumnSum:
    def test_zero_matrices(self, dg31):
        zero = BinSymMatrix.zeros(3)
        assert partial_column_sum(dg31, zero, zero) == GaussianInt(64, 0)

    def test_factorization_and_norm_exhaustive(self, dg31):
        members = [Q for _, Q in enumerate_dg(dg31.field, 1)]
        for V in members:
            for W in members:
                S = partial_column_sum(dg31, V, W)
                offset_sum = GaussianInt.from_phases(
                    matrix_phases(V).astype(np.int64) - matrix_phases(W).astype(np.int64)
                )
                assert S == gauss_sum(W) * offset_sum
                if S:
                    assert S.norm() == predicted_partial_norm(V, W)

    def test_kerdock_w(self, dg31):
        W = dg_matrix(dg31.field, 5, 0)
        S = partial_column_sum(dg31, BinSymMatrix.zeros(3), W)
        assert S.norm() == 1 << 6
