"""Recovery-rate sweeps for chirp reconstruction."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
import pandas as pd

from rmsieve.errors import EmptySelection, SingularGram, SupportTooLarge
from rmsieve.sensing.chirp import (
    accumulate_evidence,
    default_threshold,
    regress,
    select_support,
)
from rmsieve.sensing.frame import FrameSpec, SparseSignal, synthesize
from rmsieve.stats.noise import measure
from rmsieve.stats.sampling import NoiseModel, TrialConfig, planted_signal

logger = logging.getLogger(__name__)

RECOVERY_COLUMNS = [
    "m", "r", "k", "sigma_d", "sigma_m", "trials",
    "success_rate", "partial_rate", "mean_meas_err", "c_hat",
]
CONDITION_CONSTANT = 36.0


@dataclass(frozen=True)
class RecoveryConditions:
    """The two sufficient conditions for support recovery, with their margins."""

    measurement_lhs: float
    measurement_rhs: float
    noise_lhs: float
    noise_rhs: float

    @property
    def measurements_ok(self) -> bool:
        return self.measurement_lhs >= self.measurement_rhs

    @property
    def noise_ok(self) -> bool:
        return self.noise_lhs <= self.noise_rhs

    @property
    def holds(self) -> bool:
        return self.measurements_ok and self.noise_ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "measurement_lhs": self.measurement_lhs,
            "measurement_rhs": self.measurement_rhs,
            "noise_lhs": self.noise_lhs,
            "noise_rhs": self.noise_rhs,
            "holds": self.holds,
        }


def recovery_conditions(
    fs: FrameSpec, alpha: SparseSignal, noise: NoiseModel
) -> RecoveryConditions:
    """N^(1-2r/m) >= 36 sqrt(log C) ||a||^2/|a_min|^2 and
    sigma^2 <= (|a_min|^2 N^(1/2-2r/m) / (36 log C ||a||))^2.
    """
    log_c = math.log(fs.C)
    exponent = 2.0 * fs.r / fs.m
    a_min_sq = alpha.alpha_min ** 2
    if alpha.k == 0:
        return RecoveryConditions(fs.N ** (1 - exponent), 0.0, noise.variance(fs), math.inf)
    noise_rhs = (
        a_min_sq * fs.N ** (0.5 - exponent) / (CONDITION_CONSTANT * log_c * alpha.norm)
    ) ** 2
    return RecoveryConditions(
        measurement_lhs=fs.N ** (1 - exponent),
        measurement_rhs=CONDITION_CONSTANT * math.sqrt(log_c) * alpha.energy / a_min_sq,
        noise_lhs=noise.variance(fs),
        noise_rhs=noise_rhs,
    )


@dataclass
class TrialOutcome:
    trial: int
    true_support: tuple[int, ...]
    found_support: tuple[int, ...]
    meas_err: float
    data_err: float

    @property
    def exact(self) -> bool:
        return self.true_support == self.found_support

    @property
    def partial(self) -> float:
        if not self.true_support:
            return 1.0
        hits = len(set(self.true_support) & set(self.found_support))
        return hits / len(self.true_support)


def _data_error(alpha: SparseSignal, estimate: SparseSignal) -> float:
    labels = set(alpha.support) | set(estimate.support)
    return float(sum(abs(alpha.value_at(d) - estimate.value_at(d)) ** 2 for d in labels))


def run_trial(fs: FrameSpec, cfg: TrialConfig, trial: int) -> TrialOutcome:
    """Plant, measure, reconstruct and score one seeded trial."""
    alpha = planted_signal(fs, cfg, trial)
    f = measure(fs, alpha, cfg.noise, cfg.master_seed, trial, cfg.measure_mode).f

    estimate = SparseSignal()
    if cfg.k > 0:
        evidence = accumulate_evidence(fs, f, include_zero=cfg.include_zero_offset)
        try:
            if cfg.selection == "top_k":
                support = select_support(evidence, k=cfg.k, score=cfg.score)
            else:
                tau = cfg.threshold or default_threshold(alpha.alpha_min, fs.N)
                support = select_support(evidence, threshold=tau, score=cfg.score)
            estimate = regress(fs, f, support)
        except (EmptySelection, SupportTooLarge, SingularGram) as exc:
            logger.warning("Trial %d: reconstruction failed: %s", trial, exc)

    residual = synthesize(fs, alpha) - synthesize(fs, estimate)
    return TrialOutcome(
        trial=trial,
        true_support=alpha.support,
        found_support=estimate.support,
        meas_err=float(np.sum(np.abs(residual) ** 2)),
        data_err=_data_error(alpha, estimate),
    )


def run_trials(fs: FrameSpec, cfg: TrialConfig, threads: int = 1) -> list[TrialOutcome]:
    """All trials of one cell, returned in trial-index order."""
    indices = range(cfg.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda t: run_trial(fs, cfg, t), indices))
    return [run_trial(fs, cfg, t) for t in indices]


@dataclass
class SweepResult:
    table: pd.DataFrame
    sidecar: list[dict[str, Any]]

    def to_dict(self) -> dict[str, Any]:
        return {"rows": self.sidecar}


def summarize(
    fs: FrameSpec, cfg: TrialConfig, outcomes: Sequence[TrialOutcome]
) -> tuple[dict, dict]:
    """One CSV row plus its JSON sidecar entry."""
    successes = [o for o in outcomes if o.exact]
    pool = successes or list(outcomes)
    mean_meas = float(np.mean([o.meas_err for o in pool]))
    mean_data = float(np.mean([o.data_err for o in pool]))
    sigma_sq = cfg.noise.variance(fs)
    denom = cfg.k * math.log(fs.C) * sigma_sq
    row = {
        "m": cfg.m,
        "r": cfg.r,
        "k": cfg.k,
        "sigma_d": cfg.noise.sigma_d,
        "sigma_m": cfg.noise.sigma_m,
        "trials": len(outcomes),
        "success_rate": len(successes) / len(outcomes),
        "partial_rate": float(np.mean([o.partial for o in outcomes])),
        "mean_meas_err": mean_meas,
        "c_hat": mean_meas / denom if denom > 0 else float("nan"),
    }
    example = planted_signal(fs, cfg, 0)
    sidecar = {
        "k": cfg.k,
        "sigma_d": cfg.noise.sigma_d,
        "sigma_m": cfg.noise.sigma_m,
        "conditioned_on_success": bool(successes),
        "mean_data_err": mean_data,
        "recovery_conditions": recovery_conditions(fs, example, cfg.noise).to_dict(),
        "failed_trials": [o.trial for o in outcomes if not o.exact],
    }
    return row, sidecar


def recovery_sweep(
    cfg: TrialConfig,
    k_values: Sequence[int],
    noise_grid: Sequence[NoiseModel] | None = None,
    threads: int = 1,
) -> SweepResult:
    """Success, partial-recovery rate and error per (k, noise) cell."""
    fs = cfg.frame()
    noise_grid = list(noise_grid) if noise_grid else [cfg.noise]
    rows: list[dict[str, Any]] = []
    sidecar: list[dict[str, Any]] = []
    for noise in noise_grid:
        for k in k_values:
            cell = replace(cfg, k=int(k), noise=noise)
            logger.info(
                "Recovery cell k=%d sigma_d=%g sigma_m=%g (%d trials)",
                cell.k, noise.sigma_d, noise.sigma_m, cell.trials,
            )
            outcomes = run_trials(fs, cell, threads)
            row, extra = summarize(fs, cell, outcomes)
            rows.append(row)
            sidecar.append(extra)
    table = pd.DataFrame(rows, columns=RECOVERY_COLUMNS)
    return SweepResult(table=table, sidecar=sidecar)
