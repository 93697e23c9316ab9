"""Deterministic persistence for reports, measurements and config files."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd

from rmsieve.config import RunConfig
from rmsieve.errors import ParseError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Write a table with fixed float formatting and LF line endings."""
    path = _prepare(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def write_json(payload: dict[str, Any], path: str | Path) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n")
    logger.info("Wrote %s", path)
    return path


def write_text(text: str, path: str | Path) -> Path:
    path = _prepare(path)
    path.write_text(text)
    logger.info("Wrote %s", path)
    return path


def write_measurement(f: npt.ArrayLike, path: str | Path) -> Path:
    """One ``re im`` line per entry, full double precision."""
    values = np.asarray(f, dtype=np.complex128)
    lines = [f"{v.real:.17g} {v.imag:.17g}" for v in values]
    return write_text("\n".join(lines) + "\n", path)


def read_measurement(path: str | Path, n: int | None = None) -> np.ndarray:
    """Parse a measurement file; ``n`` checks the length when given.

    Raises:
        ParseError: a line is not two numbers, or the length is wrong.
    """
    entries = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 're im', got {line!r}")
        try:
            entries.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: not a number pair: {line!r}") from None
    if n is not None and len(entries) != n:
        raise ParseError(f"{path}: expected {n} entries, found {len(entries)}")
    if not entries:
        raise ParseError(f"{path}: no measurement entries")
    return np.asarray(entries, dtype=np.complex128)


def read_config(path: str | Path) -> RunConfig:
    return RunConfig.from_text(Path(path).read_text())
