"""Run configuration: ``key = value`` files, typed RunConfig and thread resolution."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, fields
from typing import Any

from dotenv import load_dotenv

from rmsieve.errors import ConfigError, ParseError
from rmsieve.stats.sampling import (
    MEASURE_MODES,
    SCORES,
    SELECTIONS,
    NoiseModel,
    TrialConfig,
    check_choice,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "RM_SIEVE_THREADS"

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse line-oriented ``key = value`` text.

    ``#`` starts a comment anywhere on a line; blank lines are skipped.

    Raises:
        ParseError: a line has no ``=``, an empty key, or a duplicate key.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"Line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError(f"Line {lineno}: empty key")
        if key in values:
            raise ParseError(f"Line {lineno}: duplicate key '{key}'")
        values[key] = value
    return values


def _to_bool(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"Key '{key}' expects a boolean (true/false/yes/no/1/0), got {value!r}")


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"Key '{key}' expects an integer, got {value!r}") from None


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"Key '{key}' expects a number, got {value!r}") from None


def _to_list(key: str, value: str, convert) -> tuple:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"Key '{key}' expects a comma-separated list, got {value!r}")
    return tuple(convert(key, item) for item in items)


@dataclass(frozen=True)
class RunConfig:
    """Every documented configuration key with its default."""

    m: int = 5
    r: int = 1
    k_values: tuple[int, ...] = (1,)
    magnitudes: tuple[float, ...] = (1.0,)
    sigma_d: tuple[float, ...] = (0.0,)
    sigma_m: tuple[float, ...] = (0.0,)
    trials: int = 100
    master_seed: int = 0
    include_zero_offset: bool = True
    selection: str = "top_k"
    score: str = "magnitude"
    threshold: float | None = None
    measure_mode: str = "surrogate"
    complex_noise: bool = False
    random_phase: bool = False
    epsilon: tuple[float, ...] = (0.5,)
    delta_prime: float = 0.1
    tail_exponent: float = 1.0
    noise_trials: int = 3125
    output: str = "out"
    threads: int | None = None

    def __post_init__(self) -> None:
        check_choice("selection", self.selection, SELECTIONS)
        check_choice("score", self.score, SCORES)
        check_choice("measure mode", self.measure_mode, MEASURE_MODES)

    @classmethod
    def allowed_keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> RunConfig:
        """Convert raw strings to typed values; unknown keys are rejected."""
        allowed = cls.allowed_keys()
        unknown = sorted(set(raw) - set(allowed))
        if unknown:
            raise ConfigError(
                f"Unknown config key(s) {', '.join(unknown)}. Available: {', '.join(allowed)}"
            )
        converters = {
            "m": _to_int,
            "r": _to_int,
            "trials": _to_int,
            "master_seed": _to_int,
            "noise_trials": _to_int,
            "threads": _to_int,
            "k_values": lambda k, v: _to_list(k, v, _to_int),
            "magnitudes": lambda k, v: _to_list(k, v, _to_float),
            "sigma_d": lambda k, v: _to_list(k, v, _to_float),
            "sigma_m": lambda k, v: _to_list(k, v, _to_float),
            "epsilon": lambda k, v: _to_list(k, v, _to_float),
            "threshold": _to_float,
            "delta_prime": _to_float,
            "tail_exponent": _to_float,
            "include_zero_offset": _to_bool,
            "complex_noise": _to_bool,
            "random_phase": _to_bool,
        }
        typed: dict[str, Any] = {}
        for key, value in raw.items():
            convert = converters.get(key)
            typed[key] = convert(key, value) if convert else value
        return cls(**typed)

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        return cls.from_mapping(parse_config_text(text))

    def noise_grid(self) -> list[NoiseModel]:
        """Every (sigma_d, sigma_m) combination, sigma_d outermost."""
        return [
            NoiseModel(sd, sm, self.complex_noise) for sd in self.sigma_d for sm in self.sigma_m
        ]

    def trial_config(self, k: int | None = None, noise: NoiseModel | None = None) -> TrialConfig:
        return TrialConfig(
            m=self.m,
            r=self.r,
            k=self.k_values[0] if k is None else k,
            magnitudes=self.magnitudes,
            noise=noise or self.noise_grid()[0],
            trials=self.trials,
            master_seed=self.master_seed,
            include_zero_offset=self.include_zero_offset,
            selection=self.selection,
            score=self.score,
            threshold=self.threshold,
            measure_mode=self.measure_mode,
            random_phase=self.random_phase,
            delta_prime=self.delta_prime,
        )

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def resolve_threads(cli_value: int | None = None, config_value: int | None = None) -> int:
    """--threads, then the config file, then RM_SIEVE_THREADS (.env honoured), then 1."""
    load_dotenv()
    for source, value in (("--threads", cli_value), ("config", config_value)):
        if value is not None:
            if value < 1:
                raise ConfigError(f"{source} must be a positive integer, got {value}")
            return value
    env = os.getenv(THREADS_ENV)
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if threads < 1:
            raise ConfigError(f"{THREADS_ENV} must be positive, got {threads}")
        logger.debug("Using %d threads from %s", threads, THREADS_ENV)
        return threads
    return 1
