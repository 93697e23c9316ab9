"""Suite runner that executes every check step of a suite in order."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from rmsieve.reports.audit import RunJournal

from .workflow import Router, StepOutput, StepResult

if TYPE_CHECKING:
    from .context import VerifyContext

logger = logging.getLogger(__name__)


class SuiteRunner:
    """Runs a registered suite against a VerifyContext.

    A failing or raising step is recorded and the runner moves on; it never
    stops early.

    Usage::

        runner = SuiteRunner(default_router())
        ctx = VerifyContext.create(3, 1)
        runner.run("verify", ctx)
        ok = runner.passed
    """

    def __init__(self, router: Router) -> None:
        self._router = router
        self._outputs: dict[str, StepOutput] = {}

    @property
    def passed(self) -> bool:
        return all(out.result != StepResult.FAIL for out in self._outputs.values())

    @property
    def outputs(self) -> dict[str, StepOutput]:
        return dict(self._outputs)

    def run(self, suite: str, ctx: VerifyContext) -> dict[str, StepOutput]:
        steps = self._router.get(suite)
        self._outputs = {}
        logger.info("Suite started: %s, steps=%d, m=%d, r=%d", suite, len(steps), ctx.m, ctx.r)

        for index, step in enumerate(steps, start=1):
            logger.info("Executing step %d/%d: %s", index, len(steps), step.name)
            try:
                output = step.execute(ctx)
            except ArithmeticError as exc:
                output = StepOutput(StepResult.FAIL, f"{type(exc).__name__}: {exc}")
            ctx.outputs[step.name] = output
            self._outputs[step.name] = output
            if output.result == StepResult.FAIL:
                logger.warning("Check failed: %s: %s", step.name, output.message)
                RunJournal.log_event(
                    "check_failed", check=step.name, message=output.message, m=ctx.m, r=ctx.r
                )
            else:
                logger.info("%s: %s %s", step.name, output.result.value, output.message)

        logger.info("Suite done: %s (%s)", suite, "passed" if self.passed else "failed")
        return self.outputs
