"""Noise models and randomized experiments around chirp reconstruction."""

from .noise import measure, noise_variance_experiment
from .recovery import recovery_sweep, recovery_conditions
from .sampling import NoiseModel, TrialConfig, sample_support
from .strip import strip_montecarlo
from .tail import tail_noise_experiment

__all__ = [
    "NoiseModel",
    "TrialConfig",
    "sample_support",
    "measure",
    "noise_variance_experiment",
    "recovery_sweep",
    "recovery_conditions",
    "strip_montecarlo",
    "tail_noise_experiment",
]
