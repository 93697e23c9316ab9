"""Seeded randomness and the trial model.

Every random draw comes from a counter-based Philox stream keyed by
``(master_seed, trial_index, stream_id)``, so trials can run in any order or in
parallel and still reproduce bit for bit.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from rmsieve.algebra.galois import field_spec
from rmsieve.errors import ConfigError
from rmsieve.sensing.frame import FrameSpec, SparseSignal

logger = logging.getLogger(__name__)

SELECTIONS = ("threshold", "top_k")
SCORES = ("magnitude", "real")
MEASURE_MODES = ("exact", "surrogate")


def check_choice(kind: str, value: str, allowed: tuple[str, ...]) -> None:
    if value not in allowed:
        raise ConfigError(f"Unknown {kind} '{value}'. Available: {', '.join(allowed)}")


class Stream(enum.IntEnum):
    """Independent substreams within one trial."""

    SUPPORT = 0
    PHASE = 1
    DATA_NOISE = 2
    MEAS_NOISE = 3
    PERMUTATION = 4


def trial_rng(master_seed: int, trial: int, stream: Stream) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial), int(stream)))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class NoiseModel:
    """Data-domain (length C) and measurement (length N) Gaussian noise levels."""

    sigma_d: float = 0.0
    sigma_m: float = 0.0
    complex_noise: bool = False

    def __post_init__(self) -> None:
        if self.sigma_d < 0 or self.sigma_m < 0:
            raise ConfigError(
                f"Noise levels must be non-negative, got sigma_d={self.sigma_d}, "
                f"sigma_m={self.sigma_m}"
            )

    def variance(self, fs: FrameSpec) -> float:
        """sigma^2 = (C/N) sigma_d^2 + sigma_m^2."""
        return fs.C / fs.N * self.sigma_d ** 2 + self.sigma_m ** 2

    @property
    def is_zero(self) -> bool:
        return self.sigma_d == 0 and self.sigma_m == 0


@dataclass(frozen=True)
class TrialConfig:
    """One experiment cell: frame, sparsity, signal values, noise and seeding."""

    m: int
    r: int
    k: int
    magnitudes: tuple[float, ...] = (1.0,)
    noise: NoiseModel = field(default_factory=NoiseModel)
    trials: int = 100
    master_seed: int = 0
    include_zero_offset: bool = True
    selection: str = "top_k"
    score: str = "magnitude"
    threshold: float | None = None
    measure_mode: str = "surrogate"
    random_phase: bool = False
    delta_prime: float = 0.1

    def __post_init__(self) -> None:
        full_c = 1 << ((self.r + 1) * self.m)
        if not 0 <= self.k <= full_c // 2:
            raise ConfigError(f"k must satisfy 0 <= k <= C/2 = {full_c // 2}, got {self.k}")
        if not self.magnitudes or any(v <= 0 for v in self.magnitudes):
            raise ConfigError(f"Magnitudes must be positive, got {self.magnitudes}")
        if self.trials < 1:
            raise ConfigError(f"trials must be positive, got {self.trials}")
        check_choice("selection", self.selection, SELECTIONS)
        check_choice("score", self.score, SCORES)
        check_choice("measure mode", self.measure_mode, MEASURE_MODES)
        if not 0 < self.delta_prime <= 1:
            raise ConfigError(f"delta_prime must lie in (0, 1], got {self.delta_prime}")

    def frame(self) -> FrameSpec:
        return FrameSpec(field_spec(self.m), self.r)

    def values(self, trial: int) -> tuple[complex, ...]:
        """The k fixed magnitudes, cycled; random unit phases when enabled."""
        mags = [complex(v) for v in itertools.islice(itertools.cycle(self.magnitudes), self.k)]
        if not self.random_phase:
            return tuple(mags)
        rng = trial_rng(self.master_seed, trial, Stream.PHASE)
        angles = rng.uniform(0.0, 2 * np.pi, size=self.k)
        return tuple(v * complex(np.exp(1j * t)) for v, t in zip(mags, angles))


def sample_support(fs: FrameSpec, k: int, master_seed: int, trial: int) -> tuple[int, ...]:
    """k distinct retained column labels, uniform without replacement, sorted."""
    if not 0 <= k <= fs.C:
        raise ValueError(f"k must satisfy 0 <= k <= {fs.C}, got {k}")
    rng = trial_rng(master_seed, trial, Stream.SUPPORT)
    chosen = rng.choice(fs.C, size=k, replace=False)
    return tuple(sorted(fs.label(int(p)) for p in chosen))


def planted_signal(fs: FrameSpec, cfg: TrialConfig, trial: int) -> SparseSignal:
    support = sample_support(fs, cfg.k, cfg.master_seed, trial)
    values = cfg.values(trial)
    return SparseSignal.from_pairs(zip(support, values))
