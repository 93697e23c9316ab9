"""Verification suite engine behind ``rm-sieve verify``."""

from .context import VerifyContext
from .runner import SuiteRunner
from .steps import VERIFY_SUITE, default_router
from .workflow import CheckStep, Router, StepOutput, StepResult

__all__ = [
    "CheckStep",
    "StepOutput",
    "StepResult",
    "Router",
    "VerifyContext",
    "SuiteRunner",
    "VERIFY_SUITE",
    "default_router",
]
