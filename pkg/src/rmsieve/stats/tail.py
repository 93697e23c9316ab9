"""Compressible signals: the tail beyond the best k-term approximation as noise."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from rmsieve.sensing.frame import FrameSpec, synthesize_dense
from rmsieve.stats.sampling import Stream, TrialConfig, trial_rng

logger = logging.getLogger(__name__)


def power_law_magnitudes(count: int, exponent: float) -> np.ndarray:
    """n^(-exponent) for n = 1..count, already in decreasing order."""
    return np.arange(1, count + 1, dtype=np.float64) ** (-exponent)


def best_k_term(alpha: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries (ties to the smaller index), zero the rest."""
    alpha = np.asarray(alpha)
    order = np.lexsort((np.arange(alpha.shape[0]), -np.abs(alpha)))
    kept = np.zeros_like(alpha)
    kept[order[:k]] = alpha[order[:k]]
    return kept


@dataclass
class TailReport:
    k: int
    delta_prime: float
    exponent: float
    trials: int
    tail_norm: float
    event_freq: float
    mean_u_norm: float
    mean_e_norm: float

    @property
    def within_bound(self) -> bool:
        return self.event_freq <= self.delta_prime

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "delta_prime": self.delta_prime,
            "exponent": self.exponent,
            "trials": self.trials,
            "tail_norm": self.tail_norm,
            "event_freq": self.event_freq,
            "within_bound": self.within_bound,
            "mean_u_norm": self.mean_u_norm,
            "mean_e_norm": self.mean_e_norm,
        }


def tail_noise_experiment(
    fs: FrameSpec,
    cfg: TrialConfig,
    alpha: np.ndarray | None = None,
    exponent: float = 1.0,
) -> TailReport:
    """Frequency of ||u|| > ||e|| + ||alpha - alpha_k|| / sqrt(delta') over random placements.

    ``alpha`` lists the entry values in any order (a power law by default);
    each trial scatters them over the frame's columns with a seeded
    permutation. u = Phi (alpha - alpha_k) + e with e ~ N(0, sigma_m^2).
    """
    if alpha is None:
        alpha = power_law_magnitudes(fs.C, exponent)
    alpha = np.asarray(alpha, dtype=np.complex128)
    if alpha.shape != (fs.C,):
        raise ValueError(f"Signal must have {fs.C} entries, got {alpha.shape}")
    tail = alpha - best_k_term(alpha, cfg.k)
    tail_norm = float(np.linalg.norm(tail))
    margin = tail_norm / math.sqrt(cfg.delta_prime)
    logger.info("Tail experiment: k=%d, ||tail||=%.6g, %d trials", cfg.k, tail_norm, cfg.trials)

    events = 0
    u_norms = []
    e_norms = []
    for trial in range(cfg.trials):
        perm = trial_rng(cfg.master_seed, trial, Stream.PERMUTATION).permutation(fs.C)
        placed = np.empty_like(tail)
        placed[perm] = tail
        meas_rng = trial_rng(cfg.master_seed, trial, Stream.MEAS_NOISE)
        e = cfg.noise.sigma_m * meas_rng.standard_normal(fs.N)
        u = synthesize_dense(fs, placed) + e
        u_norm = float(np.linalg.norm(u))
        e_norm = float(np.linalg.norm(e))
        u_norms.append(u_norm)
        e_norms.append(e_norm)
        if u_norm > e_norm + margin:
            events += 1

    return TailReport(
        k=cfg.k,
        delta_prime=cfg.delta_prime,
        exponent=exponent,
        trials=cfg.trials,
        tail_norm=tail_norm,
        event_freq=events / cfg.trials,
        mean_u_norm=float(np.mean(u_norms)),
        mean_e_norm=float(np.mean(e_norms)),
    )
