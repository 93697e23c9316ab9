"""Tests for sensing/chirp.py."""

import math

import numpy as np
import pytest

from rmsieve.algebra.dgcodes import dg_matrix, rank_f2
from rmsieve.errors import EmptySelection, InvalidOffsets, SingularGram, SupportTooLarge
from rmsieve.sensing.chirp import (
    EvidenceVector,
    accumulate_evidence,
    bin_spectrum,
    default_threshold,
    detect_at,
    evidence_for_offset,
    evidence_decomposition,
    ldl_solve,
    pairwise_sum,
    reconstruct,
    regress,
    resolve_offsets,
    residual_bound,
    select_support,
    shift_product,
)
from rmsieve.sensing.frame import SparseSignal, bins_at, column, quad_values_at, synthesize


def _random_signal(fs, k, seed):
    rng = np.random.default_rng(seed)
    support = sorted(int(d) for d in rng.choice(fs.C, size=k, replace=False))
    values = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return SparseSignal(tuple(support), tuple(complex(v) for v in values))


class TestSpectra:
    def test_shift_product_of_chirp_is_walsh(self, dg31):
        f = column(dg31, 37)
        Q = dg_matrix(dg31.field, 37, 1)
        rows = np.asarray([Q.rows], dtype=np.int64)
        for a in range(dg31.N):
            g = shift_product(f, a)
            ell = int(bins_at(rows, a, 3)[0])
            phase = int(quad_values_at(rows, a, 3)[0])
            signs = np.array([(-1) ** bin(x & ell).count("1") for x in range(8)])
            assert np.allclose(g, 1j ** phase * signs / 8, atol=1e-14)

    def test_spectrum_is_a_single_bin(self, dg31):
        for delta in (0, 5, 63):
            f = column(dg31, delta)
            rows = dg31.row_table[[delta]]
            for a in range(dg31.N):
                spectrum = bin_spectrum(f, a)
                ell = int(bins_at(rows, a, 3)[0])
                phase = int(quad_values_at(rows, a, 3)[0])
                expected = np.zeros(8, dtype=complex)
                expected[ell] = 1j ** phase / math.sqrt(8)
                assert np.abs(spectrum - expected).max() <= 1e-12

    def test_single_tone_evidence_exhaustive(self, dg31):
        target = 1 / math.sqrt(dg31.N)
        for delta in range(dg31.C):
            f = column(dg31, delta)
            for a in range(dg31.N):
                lam = evidence_for_offset(dg31, bin_spectrum(f, a), a)
                assert abs(lam[delta] - target) <= 1e-12

    def test_zero_offset_is_flat(self, dg51):
        f = synthesize(dg51, _random_signal(dg51, 3, 0))
        lam = evidence_for_offset(dg51, bin_spectrum(f, 0), 0)
        expected = np.linalg.norm(f) ** 2 / math.sqrt(dg51.N)
        assert np.abs(lam - expected).max() <= 1e-12

    def test_bad_offset(self):
        with pytest.raises(InvalidOffsets, match="outside"):
            shift_product(np.ones(8), 8)


class TestResolveOffsets:
    def test_default_is_every_vector(self):
        assert resolve_offsets(8) == tuple(range(8))
        assert resolve_offsets(8, include_zero=False) == tuple(range(1, 8))

    def test_sorted(self):
        assert resolve_offsets(8, [5, 1, 3]) == (1, 3, 5)

    def test_zero_dropped_when_excluded(self):
        assert resolve_offsets(8, [0, 2], include_zero=False) == (2,)

    def test_duplicates(self):
        with pytest.raises(InvalidOffsets, match="distinct"):
            resolve_offsets(8, [1, 1])

    def test_out_of_range(self):
        with pytest.raises(InvalidOffsets, match="lie in"):
            resolve_offsets(8, [3, 8])

    def test_empty(self):
        with pytest.raises(InvalidOffsets, match="At least one"):
            resolve_offsets(8, [0], include_zero=False)


class TestAccumulateEvidence:
    def test_matches_direct_average(self, dg51):
        f = synthesize(dg51, _random_signal(dg51, 4, 1))
        direct = np.mean(
            [evidence_for_offset(dg51, bin_spectrum(f, a), a) for a in range(dg51.N)], axis=0
        )
        ev = accumulate_evidence(dg51, f)
        assert np.abs(ev.lam - direct).max() <= 1e-12
        assert ev.offsets_used == tuple(range(32))

    def test_independent_of_threads_and_order(self, dg51):
        f = synthesize(dg51, _random_signal(dg51, 4, 2))
        offsets = list(range(1, 32))
        single = accumulate_evidence(dg51, f, offsets)
        threaded = accumulate_evidence(dg51, f, offsets[::-1], threads=4)
        assert np.array_equal(single.lam, threaded.lam)

    def test_detect_matches_batch(self, dg51):
        f = synthesize(dg51, _random_signal(dg51, 3, 3))
        ev = accumulate_evidence(dg51, f)
        rng = np.random.default_rng(4)
        for delta in rng.choice(dg51.C, size=50, replace=False):
            assert abs(detect_at(dg51, f, int(delta)) - ev.value(int(delta))) <= 1e-12

    def test_detect_matches_batch_on_offset_subset(self, dg51):
        f = synthesize(dg51, _random_signal(dg51, 2, 5))
        offsets = [3, 7, 12, 30]
        ev = accumulate_evidence(dg51, f, offsets)
        for delta in (0, 99, 1023):
            assert abs(detect_at(dg51, f, delta, offsets) - ev.value(delta)) <= 1e-12

    def test_masked_frame_agrees_with_full(self, dg51):
        small = dg51.subsample(50, seed=9)
        f = synthesize(dg51, _random_signal(dg51, 2, 6))
        full = accumulate_evidence(dg51, f)
        part = accumulate_evidence(small, f)
        for delta in small.columns:
            assert abs(part.value(int(delta)) - full.value(int(delta))) <= 1e-12

    def test_single_tone_dichotomy(self, dg31):
        pi = 21
        Q_pi = dg_matrix(dg31.field, pi, 1)
        ev = accumulate_evidence(dg31, column(dg31, pi))
        assert abs(ev.value(pi) - 1 / math.sqrt(8)) <= 1e-12
        for delta in range(dg31.C):
            if delta == pi:
                continue
            rank = rank_f2(dg_matrix(dg31.field, delta, 1) ^ Q_pi)
            magnitude = abs(ev.value(delta))
            assert min(magnitude, abs(magnitude - 2.0 ** -rank / math.sqrt(8))) <= 1e-12

    def test_wrong_length(self, dg31):
        with pytest.raises(ValueError, match="length 8"):
            accumulate_evidence(dg31, np.ones(16))

    def test_value_of_missing_column(self, dg51):
        small = dg51.subsample(5, seed=0)
        ev = accumulate_evidence(small, np.ones(32))
        missing = next(d for d in range(dg51.C) if d not in set(small.columns.tolist()))
        with pytest.raises(KeyError):
            ev.value(missing)

    def test_to_frame(self, dg31):
        frame = accumulate_evidence(dg31, column(dg31, 2)).to_frame()
        assert list(frame.columns) == ["delta", "re", "im", "magnitude"]
        assert len(frame) == 64


class TestPairwiseSum:
    def test_sums(self):
        parts = [np.array([float(i)]) for i in range(7)]
        assert pairwise_sum(parts).tolist() == [21.0]


def _evidence(lam, columns):
    return EvidenceVector(
        lam=np.asarray(lam, dtype=complex),
        columns=np.asarray(columns, dtype=np.int64),
        offsets_used=(0,),
    )


class TestSelectSupport:
    def test_ties_go_to_smaller_label(self):
        ev = _evidence([1, 2, 2, 0.5], [0, 3, 5, 9])
        assert select_support(ev, k=1) == (3,)
        assert select_support(ev, k=2) == (3, 5)
        assert select_support(ev, k=0) == ()

    def test_result_sorted(self):
        ev = _evidence([3, 1, 2], [4, 7, 8])
        assert select_support(ev, k=2) == (4, 8)

    def test_threshold(self):
        ev = _evidence([1, 2, 2, 0.5], [0, 3, 5, 9])
        assert select_support(ev, threshold=1.0) == (0, 3, 5)

    def test_threshold_empty(self):
        ev = _evidence([1, 2], [0, 1])
        with pytest.raises(EmptySelection, match="threshold"):
            select_support(ev, threshold=3.0)

    def test_real_score(self):
        ev = _evidence([-5, 1], [0, 1])
        assert select_support(ev, k=1) == (0,)
        assert select_support(ev, k=1, score="real") == (1,)

    def test_exactly_one_mode(self):
        ev = _evidence([1], [0])
        with pytest.raises(ValueError, match="exactly one"):
            select_support(ev)
        with pytest.raises(ValueError, match="exactly one"):
            select_support(ev, k=1, threshold=0.5)

    def test_unknown_score(self):
        with pytest.raises(ValueError, match="Unknown score"):
            select_support(_evidence([1], [0]), k=1, score="phase")


class TestRegression:
    def test_scaled_column(self, dg31):
        c = 0.75 - 2j
        estimate = regress(dg31, c * column(dg31, 11), [11])
        assert estimate.support == (11,)
        assert abs(estimate.values[0] - c) <= 1e-12

    def test_exact_on_true_support(self, kerdock5):
        alpha = _random_signal(kerdock5, 4, 7)
        estimate = regress(kerdock5, synthesize(kerdock5, alpha), alpha.support)
        assert estimate.support == alpha.support
        assert np.abs(estimate.as_array() - alpha.as_array()).max() <= 1e-10

    def test_empty_support(self, dg31):
        assert regress(dg31, np.ones(8), []) == SparseSignal()

    def test_support_too_large(self, dg31):
        with pytest.raises(SupportTooLarge, match="only 8 rows"):
            regress(dg31, np.ones(8), range(9))

    def test_ldl_singular(self):
        with pytest.raises(SingularGram, match="singular"):
            ldl_solve(np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex), np.ones(2, dtype=complex))

    def test_ldl_matches_dense_solve(self):
        rng = np.random.default_rng(8)
        b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        gram = b.conj().T @ b + np.eye(6)
        rhs = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert np.abs(ldl_solve(gram, rhs) - np.linalg.solve(gram, rhs)).max() <= 1e-10


class TestReconstruct:
    def test_zero_measurement(self, dg31):
        result = reconstruct(dg31, np.zeros(8), 1)
        assert result.signal.support == (0,)
        assert result.signal.values == (0j,)
        assert result.residual_norm == 0.0

    @pytest.mark.parametrize("delta", [0, 9, 40, 63])
    def test_single_tone_recovered(self, dg31, delta):
        result = reconstruct(dg31, (1.5 + 0.5j) * column(dg31, delta), 1)
        assert result.signal.support == (delta,)
        assert abs(result.signal.values[0] - (1.5 + 0.5j)) <= 1e-12
        assert result.residual_norm <= 1e-12

    def test_scaling_equivariance(self, kerdock5):
        f = synthesize(kerdock5, _random_signal(kerdock5, 2, 10))
        c = 2 - 1j
        base = reconstruct(kerdock5, f, 2)
        scaled = reconstruct(kerdock5, c * f, 2)
        assert scaled.signal.support == base.signal.support
        assert np.abs(scaled.signal.as_array() - c * base.signal.as_array()).max() <= 1e-10

    def test_report(self, dg31):
        result = reconstruct(dg31, column(dg31, 4), 1)
        report = result.to_report()
        assert report["support"] == [4]
        assert report["offsets_used"] == list(range(8))
        assert "timings" not in report
        assert set(result.to_report(include_timings=True)["timings"]) == {"evidence_s", "regress_s"}


class TestEvidenceDecomposition:
    def test_parts_sum_to_evidence(self, dg51):
        alpha = _random_signal(dg51, 3, 11)
        f = synthesize(dg51, alpha)
        for delta in (*alpha.support, 0, 512):
            parts = evidence_decomposition(dg51, alpha, delta)
            assert abs(parts.total - detect_at(dg51, f, delta)) <= 1e-10

    def test_tone_on_support(self, dg51):
        alpha = _random_signal(dg51, 3, 12)
        delta = alpha.support[1]
        parts = evidence_decomposition(dg51, alpha, delta)
        assert abs(parts.tone - abs(alpha.values[1]) ** 2 / math.sqrt(32)) <= 1e-12

    def test_single_tone_has_no_residual(self, dg31):
        alpha = SparseSignal((7,), (2.0,))
        parts = evidence_decomposition(dg31, alpha, 7)
        assert parts.residual == 0
        assert abs(parts.tone - 4 / math.sqrt(8)) <= 1e-12


class TestBounds:
    def test_default_threshold(self):
        assert default_threshold(1.0, 16) == 0.125

    def test_residual_bound_scaling(self, dg31):
        scale = 9 * math.sqrt(math.log(64)) / 8 ** (1.5 - 2 / 3)
        assert residual_bound(dg31, 1.0) == pytest.approx(scale)
        assert residual_bound(dg31, 2.0, 1.0) == pytest.approx(6 * scale)
