"""The checks run by ``rm-sieve verify``."""

from __future__ import annotations

import logging
import math
from collections import Counter
from fractions import Fraction

import numpy as np

from rmsieve.algebra.dgcodes import (
    dg_matrix,
    dg_size,
    enumerate_dg,
    expected_gauss_norm,
    gauss_sum,
    nullspace_dim,
    rank_f2,
    verify_dg_properties,
)
from rmsieve.algebra.gaussian import GaussianInt, log2_exact
from rmsieve.errors import TooLargeToEnumerate
from rmsieve.sensing.chirp import resolve_offsets
from rmsieve.sensing.frame import (
    UNIT,
    bins_at,
    coherence_stats,
    column,
    matrix_phases,
    partial_column_sum,
    predicted_partial_norm,
    quad_values_at,
)
from rmsieve.sensing.wht import fwht

from .context import VerifyContext
from .workflow import CheckStep, Router, StepOutput, StepResult

logger = logging.getLogger(__name__)

VERIFY_SUITE = "verify"
GAUSS_EXHAUSTIVE = 1 << 12
GAUSS_SAMPLES = 500
COHERENCE_EXACT_PAIRS = 1 << 24
TONE_EXHAUSTIVE = 1 << 16
TONE_SAMPLES = 64
TONE_TOLERANCE = 1e-12
MAX_LISTED = 20


def _sample_labels(ctx: VerifyContext, total: int, count: int) -> list[int]:
    rng = np.random.default_rng(ctx.extra.get("seed", 0))
    return sorted(int(v) for v in rng.choice(total, size=count, replace=False))


class DgPropertiesStep(CheckStep):
    name = "dg_properties"

    def execute(self, ctx: VerifyContext) -> StepOutput:
        try:
            report = verify_dg_properties(ctx.spec, ctx.r)
        except TooLargeToEnumerate as exc:
            return StepOutput(StepResult.SKIP, str(exc))
        failed = [c.name for c in report.checks if not c.passed]
        message = (
            f"{report.size} members, dimension {report.observed_dimension}, "
            f"min rank {report.min_rank} (bound {report.rank_bound})"
        )
        if failed:
            message += f"; failed: {', '.join(failed)}"
        result = StepResult.PASS if report.passed else StepResult.FAIL
        return StepOutput(result, message, report.to_dict())


class GaussSumStep(CheckStep):
    """|sum_x i^(xQx^T)|^2 is 2^(2m - rank) or 0, nonzero iff the form vanishes on the radical."""

    name = "gauss_sum"

    def execute(self, ctx: VerifyContext) -> StepOutput:
        size = dg_size(ctx.spec, ctx.r)
        if size <= GAUSS_EXHAUSTIVE:
            mode = "exhaustive"
            labels = range(size)
        else:
            mode = "sampled"
            labels = _sample_labels(ctx, size, ctx.extra.get("gauss_samples", GAUSS_SAMPLES))

        examined = 0
        vanishing = 0
        mismatches = []
        for delta in labels:
            Q = dg_matrix(ctx.spec, delta, ctx.r)
            norm = gauss_sum(Q).norm()
            examined += 1
            if norm == 0:
                vanishing += 1
            if norm != expected_gauss_norm(Q):
                mismatches.append({"delta": int(delta), "norm": norm, "rank": rank_f2(Q)})

        data = {
            "mode": mode,
            "examined": examined,
            "vanishing": vanishing,
            "mismatches": mismatches[:MAX_LISTED],
            "mismatch_count": len(mismatches),
        }
        message = f"{examined} matrices ({mode}), {vanishing} vanishing sums"
        if mismatches:
            return StepOutput(StepResult.FAIL, f"{message}; {len(mismatches)} mismatches", data)
        return StepOutput(StepResult.PASS, message, data)


class CoherenceStep(CheckStep):
    """Worst-case coherence against 2^r/sqrt(N), plus the 0-or-dyadic dichotomy."""

    name = "coherence"

    def execute(self, ctx: VerifyContext) -> StepOutput:
        fs = ctx.frame
        mode = "exact" if fs.C * fs.C <= COHERENCE_EXACT_PAIRS else "sampled"
        if mode == "sampled":
            logger.warning("C = %d too large for exact coherence; sampling pairs", fs.C)
        report = coherence_stats(fs, mode=mode, seed=ctx.extra.get("seed", 0))

        bound_sq = Fraction(4 ** fs.r, fs.N)
        non_dyadic = [
            key for key in report.magnitude_histogram
            if Fraction(key) != 0 and log2_exact(Fraction(key)) is None
        ]
        data = report.to_dict()
        data["non_dyadic_magnitudes"] = non_dyadic
        message = (
            f"mu={report.mu:.6g} (mu^2={report.mu_squared}, bound {bound_sq}), "
            f"nu={report.nu:.6g}, row sums identical: {report.row_sum_identical}"
        )
        ok = report.mu_squared <= bound_sq and not non_dyadic
        return StepOutput(StepResult.PASS if ok else StepResult.FAIL, message, data)


class PartialColumnSumStep(CheckStep):
    """Exhaustive S(V, W) over DG(3, r)^2 against 2^(2m + dim ker W + dim ker (V - W)).

    S factors as G(W) times sum_a i^(aVa^T - aWa^T); zero sums are listed with
    the factor that vanishes and never fail the check.
    """

    name = "partial_column_sum"

    def execute(self, ctx: VerifyContext) -> StepOutput:
        if ctx.m != 3:
            return StepOutput(StepResult.SKIP, f"exhaustive only at m=3, got m={ctx.m}")

        fs = ctx.frame
        members = list(enumerate_dg(ctx.spec, ctx.r))
        phases = {delta: matrix_phases(Q).astype(np.int64) for delta, Q in members}
        pairs = 0
        vanishing: list[dict] = []
        mismatches: list[dict] = []
        for v_delta, V in members:
            for w_delta, W in members:
                pairs += 1
                S = partial_column_sum(fs, V, W)
                if not S:
                    factor = "W" if not gauss_sum(W) else "V-W"
                    vanishing.append({"V": v_delta, "W": w_delta, "vanishing_factor": factor})
                    continue
                predicted = predicted_partial_norm(V, W)
                if S.norm() != predicted:
                    offset_sum = GaussianInt.from_phases(phases[v_delta] - phases[w_delta])
                    mismatches.append({
                        "V": v_delta,
                        "W": w_delta,
                        "S": str(S),
                        "norm": S.norm(),
                        "predicted": predicted,
                        "kernel_dims": [nullspace_dim(W), nullspace_dim(V ^ W)],
                        "offset_sum": str(offset_sum),
                    })
                    logger.warning("Partial sum mismatch at V=%d W=%d: %s", v_delta, w_delta, S)

        reasons = Counter(item["vanishing_factor"] for item in vanishing)
        data = {
            "pairs": pairs,
            "vanishing": vanishing,
            "vanishing_by_factor": dict(sorted(reasons.items())),
            "mismatches": mismatches,
        }
        message = f"{pairs} pairs, {len(vanishing)} zero sums, {len(mismatches)} mismatches"
        result = StepResult.FAIL if mismatches else StepResult.PASS
        return StepOutput(result, message, data)


class SingleToneStep(CheckStep):
    """Lambda_{delta,a} of a lone unit chirp is exactly 1/sqrt(N) at every offset."""

    name = "single_tone"

    def execute(self, ctx: VerifyContext) -> StepOutput:
        fs = ctx.frame
        if fs.C * fs.N <= TONE_EXHAUSTIVE:
            mode = "exhaustive"
            labels = [int(v) for v in fs.columns]
        else:
            mode = "sampled"
            positions = _sample_labels(ctx, fs.C, min(TONE_SAMPLES, fs.C))
            labels = [fs.label(p) for p in positions]

        offsets = resolve_offsets(fs.N)
        idx = np.arange(fs.N, dtype=np.int64)
        target = 1.0 / math.sqrt(fs.N)
        worst = 0.0
        worst_at = None
        for delta in labels:
            f = column(fs, delta)
            products = f[idx[None, :] ^ np.asarray(offsets)[:, None]] * np.conj(f)[None, :]
            spectra = fwht(products)
            rows = fs.row_table[fs.position(delta)][None, :]
            for row, a in enumerate(offsets):
                ell = int(bins_at(rows, a, fs.m)[0])
                phase = int(quad_values_at(rows, a, fs.m)[0])
                value = UNIT[(-phase) % 4] * spectra[row, ell]
                err = abs(value - target)
                if err > worst:
                    worst = err
                    worst_at = (delta, a)

        data = {
            "mode": mode,
            "columns": len(labels),
            "offsets": len(offsets),
            "max_error": worst,
            "worst": list(worst_at) if worst_at else None,
        }
        message = f"{len(labels)} columns x {len(offsets)} offsets ({mode}), max error {worst:.3g}"
        ok = worst <= TONE_TOLERANCE
        return StepOutput(StepResult.PASS if ok else StepResult.FAIL, message, data)


def default_router() -> Router:
    router = Router()
    router.register(VERIFY_SUITE, [
        DgPropertiesStep(),
        GaussSumStep(),
        CoherenceStep(),
        PartialColumnSumStep(),
        SingleToneStep(),
    ])
    return router
