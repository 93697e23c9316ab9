"""Noisy measurements and the noise-shaping experiment."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from rmsieve.errors import ExactModeTooLarge
from rmsieve.sensing.frame import FrameSpec, SparseSignal, synthesize, synthesize_dense
from rmsieve.stats.sampling import NoiseModel, Stream, trial_rng

logger = logging.getLogger(__name__)

EXACT_MODE_GUARD = 1 << 22
NOISE_COLUMNS = ["sigma_d", "sigma_m", "emp_var", "pred_var", "tail_freq", "one_over_C"]
MIN_NOISE_TRIALS = 1000


@dataclass
class Measurement:
    f: np.ndarray
    u: np.ndarray
    mode: str


def _gaussian(rng: np.random.Generator, sigma: float, size: Any, complex_noise: bool) -> np.ndarray:
    if complex_noise:
        draws = rng.standard_normal(size=(2,) + tuple(np.atleast_1d(size)))
        return sigma * (draws[0] + 1j * draws[1]) / math.sqrt(2)
    return sigma * rng.standard_normal(size=size)


def noise_vector(
    fs: FrameSpec, noise: NoiseModel, seed: int, trial: int = 0, mode: str = "surrogate"
) -> np.ndarray:
    """u = Phi s + e (exact) or a Gaussian surrogate with the same per-entry variance."""
    meas_rng = trial_rng(seed, trial, Stream.MEAS_NOISE)
    if mode == "exact":
        if fs.N * fs.C > EXACT_MODE_GUARD:
            raise ExactModeTooLarge(
                f"Exact data-domain noise needs N*C = {fs.N * fs.C} > {EXACT_MODE_GUARD}; "
                "use the surrogate mode"
            )
        data_rng = trial_rng(seed, trial, Stream.DATA_NOISE)
        s = _gaussian(data_rng, noise.sigma_d, fs.C, noise.complex_noise)
        e = _gaussian(meas_rng, noise.sigma_m, fs.N, noise.complex_noise)
        return synthesize_dense(fs, s) + e
    if mode != "surrogate":
        raise ValueError(f"Unknown measure mode '{mode}'. Available: exact, surrogate")
    sigma = math.sqrt(noise.variance(fs))
    return _gaussian(meas_rng, sigma, fs.N, noise.complex_noise).astype(np.complex128)


def measure(
    fs: FrameSpec,
    alpha: SparseSignal,
    noise: NoiseModel,
    seed: int,
    trial: int = 0,
    mode: str = "surrogate",
) -> Measurement:
    """f = Phi alpha + u."""
    clean = synthesize(fs, alpha)
    if noise.is_zero:
        return Measurement(clean, np.zeros(fs.N, dtype=np.complex128), mode)
    u = noise_vector(fs, noise, seed, trial, mode)
    return Measurement(clean + u, u, mode)


@dataclass
class NoiseReport:
    sigma_d: float
    sigma_m: float
    emp_var: float
    pred_var: float
    tail_freq: float
    one_over_C: float
    trials: int
    mode: str

    def to_row(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in NOISE_COLUMNS}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.to_row()], columns=NOISE_COLUMNS)

    @property
    def relative_error(self) -> float:
        return abs(self.emp_var - self.pred_var) / self.pred_var if self.pred_var else 0.0


def noise_variance_experiment(
    fs: FrameSpec,
    noise: NoiseModel,
    trials: int,
    seed: int = 0,
    mode: str = "exact",
) -> NoiseReport:
    """Per-entry variance of u and Pr[||u|| >= sqrt(N log C) sigma] over seeded trials."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if trials < MIN_NOISE_TRIALS:
        logger.warning(
            "Only %d noise trials; variance estimates want at least %d", trials, MIN_NOISE_TRIALS
        )
    logger.info("Noise experiment: %d trials, %s, mode=%s", trials, fs.describe(), mode)
    pred_var = noise.variance(fs)
    limit = math.sqrt(fs.N * math.log(fs.C) * pred_var)
    energy = 0.0
    exceed = 0
    for trial in range(trials):
        u = noise_vector(fs, noise, seed, trial, mode)
        sq = float(np.sum(np.abs(u) ** 2))
        energy += sq
        if pred_var > 0 and math.sqrt(sq) >= limit:
            exceed += 1
    report = NoiseReport(
        sigma_d=noise.sigma_d,
        sigma_m=noise.sigma_m,
        emp_var=energy / (trials * fs.N),
        pred_var=pred_var,
        tail_freq=exceed / trials,
        one_over_C=1.0 / fs.C,
        trials=trials,
        mode=mode,
    )
    logger.info("Empirical variance %.6g vs predicted %.6g", report.emp_var, pred_var)
    return report
