"""Monte Carlo check of the statistical restricted isometry statements.

For random supports the three statistics are

* Sp1: max over off-support w of |sum_j a_j h(w, pi_j)| / ||a||
* Sp2: max over i of |sum_{j != i} a_i h(pi_i, pi_j)| / ||a||
* Sp3: |sum_i sum_{j != i} a_i conj(a_j) h(pi_i, pi_j)| / ||a||^2

with h(i, j) = <phi_i, phi_j>. Each is compared with epsilon and the
failure-probability bound k C exp(-N^(2 eta) eps^2 / 32).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from rmsieve.sensing.frame import FrameSpec, SparseSignal, analyze, column_block, synthesize
from rmsieve.stats.sampling import TrialConfig, planted_signal

logger = logging.getLogger(__name__)

STRIP_COLUMNS = ["statistic", "epsilon", "exceed_freq", "paper_bound"]
STATISTICS = ("Sp1", "Sp2", "Sp3")
ETA_CAP = 0.5


@dataclass(frozen=True)
class StripSample:
    sp1: float
    sp2: float
    sp3: float
    sp3_applies: bool


def strip_statistics(fs: FrameSpec, alpha: SparseSignal) -> StripSample:
    """The three normalized statistics for one signal."""
    if alpha.k == 0:
        return StripSample(0.0, 0.0, 0.0, True)
    norm = alpha.norm
    correlations = analyze(fs, synthesize(fs, alpha))
    off = np.ones(fs.C, dtype=bool)
    off[fs.positions(alpha.support)] = False
    sp1 = float(np.abs(correlations[off]).max()) if off.any() else 0.0

    phi = column_block(fs, alpha.support)
    gram = phi.conj() @ phi.T
    np.fill_diagonal(gram, 0)
    values = alpha.as_array()
    sp2 = float(np.abs(values * gram.sum(axis=1)).max())
    sp3 = float(abs(values @ gram @ values.conj()))
    return StripSample(
        sp1=sp1 / norm,
        sp2=sp2 / norm,
        sp3=sp3 / norm ** 2,
        sp3_applies=fs.C * alpha.alpha_min ** 2 >= alpha.energy,
    )


def failure_bound(fs: FrameSpec, k: int, eta: float, epsilon: float) -> float:
    """k C exp(-N^(2 eta) eps^2 / 32), eta capped to its admissible range."""
    eta = min(max(eta, 0.0), ETA_CAP)
    return k * fs.C * math.exp(-(fs.N ** (2 * eta)) * epsilon ** 2 / 32.0)


def strip_montecarlo(
    fs: FrameSpec,
    cfg: TrialConfig,
    epsilons: Sequence[float],
    eta: float,
) -> pd.DataFrame:
    """Exceedance frequencies of the three statistics over ``cfg.trials`` supports.

    Sp3 is counted only on trials with C |a_min|^2 >= ||a||^2; its frequency is
    NaN when no trial qualifies.

    ``eta`` is the coherence exponent, usually the empirical one from
    ``coherence_stats``.
    """
    if not epsilons or any(e <= 0 for e in epsilons):
        raise ValueError(f"epsilon values must be positive, got {list(epsilons)}")
    logger.info("StRIP Monte Carlo: k=%d, %d trials, %s", cfg.k, cfg.trials, fs.describe())
    samples = [strip_statistics(fs, planted_signal(fs, cfg, t)) for t in range(cfg.trials)]
    applies = np.array([s.sp3_applies for s in samples])
    if not applies.all():
        logger.info("Sp3 applies on %d of %d trials", int(applies.sum()), len(samples))
    sp = {
        "Sp1": np.array([s.sp1 for s in samples]),
        "Sp2": np.array([s.sp2 for s in samples]),
        "Sp3": np.array([s.sp3 for s in samples])[applies],
    }
    rows = []
    for name in STATISTICS:
        for epsilon in epsilons:
            values = sp[name]
            rows.append({
                "statistic": name,
                "epsilon": float(epsilon),
                "exceed_freq": float(np.mean(values > epsilon)) if values.size else math.nan,
                "paper_bound": failure_bound(fs, cfg.k, eta, epsilon),
            })
    return pd.DataFrame(rows, columns=STRIP_COLUMNS)
