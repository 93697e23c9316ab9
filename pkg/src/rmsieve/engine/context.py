"""Typed state shared by the steps of one verification run."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from rmsieve.algebra.galois import FieldSpec, field_spec
from rmsieve.sensing.frame import FrameSpec

from .workflow import StepOutput, StepResult


@dataclass
class VerifyContext:
    """Field, frame and accumulated step outputs for one (m, r).

    ``extra`` carries tuning knobs such as ``seed`` and ``gauss_samples``.
    """

    m: int
    r: int
    spec: FieldSpec
    frame: FrameSpec
    outputs: dict[str, StepOutput] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def create(cls, m: int, r: int, **extra: Any) -> VerifyContext:
        spec = field_spec(m)
        return cls(m=m, r=r, spec=spec, frame=FrameSpec(spec, r), extra=dict(extra))

    @property
    def passed(self) -> bool:
        return all(out.result != StepResult.FAIL for out in self.outputs.values())

    def to_dict(self) -> dict[str, Any]:
        """Plain dict for the JSON verify report."""
        return {
            "m": self.m,
            "r": self.r,
            "field": self.spec.describe(),
            "frame": self.frame.describe(),
            "passed": self.passed,
            "checks": {name: out.to_dict() for name, out in self.outputs.items()},
        }
