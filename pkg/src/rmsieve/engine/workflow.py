"""Check-step abstractions for the verification suite engine.

Defines the CheckStep ABC, StepOutput/StepResult types, and the Router
that maps suite names to step sequences.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .context import VerifyContext


class StepResult(enum.Enum):
    """Outcome of a check step."""

    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"  # Not applicable at this (m, r)


@dataclass
class StepOutput:
    """Value returned by CheckStep.execute().

    Attributes:
        result: Whether the check passed, failed or was skipped.
        message: One-line summary for the console.
        data: Structured findings, written to the JSON report.
    """

    result: StepResult
    message: str = ""
    data: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"result": self.result.value, "message": self.message, "data": self.data}


class CheckStep(ABC):
    """Abstract base for all verification checks.

    Subclasses implement ``execute()`` which receives the verify context and
    returns a ``StepOutput``.
    """

    @property
    def name(self) -> str:
        """Report key for this check, defaults to class name."""
        return self.__class__.__name__

    @abstractmethod
    def execute(self, ctx: VerifyContext) -> StepOutput:
        ...


class Router:
    """Maps suite names to ordered sequences of check steps.

    Usage::

        router = Router()
        router.register("verify", [DgPropertiesStep(), CoherenceStep(), ...])
        steps = router.get("verify")
    """

    def __init__(self) -> None:
        self._routes: dict[str, list[CheckStep]] = {}

    def register(self, suite: str, steps: list[CheckStep]) -> None:
        self._routes[suite.lower()] = steps

    def get(self, suite: str) -> list[CheckStep]:
        """Retrieve the step sequence for a suite.

        Raises:
            KeyError: If the suite is not registered.
        """
        key = suite.lower()
        if key not in self._routes:
            raise KeyError(
                f"Unknown suite '{suite}'. "
                f"Available: {', '.join(sorted(self._routes))}"
            )
        return self._routes[key]

    @property
    def suites(self) -> list[str]:
        return sorted(self._routes.keys())
