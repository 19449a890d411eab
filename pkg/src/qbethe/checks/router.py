"""
router.py — Dispatches the configured checks for one grid point.

A numerical failure inside one check is recorded as that check's outcome
and does not stop the remaining checks.
"""

import logging

from ..errors import ConfigError, NumericalFailure
from .base import BaseCheck, CheckOutcome, PointContext


class CheckRouter:
    """Runs registered checks by name, in the order requested."""

    def __init__(self, checks: dict[str, BaseCheck]):
        self.checks = checks

    def descriptions(self) -> str:
        return "\n".join(f"{name}: {c.description}" for name, c in self.checks.items())

    def dispatch(self, names: list[str], context: PointContext) -> list[CheckOutcome]:
        unknown = [n for n in names if n not in self.checks]
        if unknown:
            raise ConfigError(f"checks: no check registered as {', '.join(unknown)}")
        return [self._run_one(self.checks[name], context) for name in names]

    def _run_one(self, check: BaseCheck, context: PointContext) -> CheckOutcome:
        if not check.applies(context):
            logging.debug("check %s does not apply at %s", check.name, context.params)
            return CheckOutcome(check.name, "skipped")
        try:
            report = check.run(context)
        except NumericalFailure as e:
            logging.warning("check %s failed numerically: %s", check.name, e)
            return CheckOutcome(
                check.name, "error", message=str(e), error=type(e).__name__
            )
        return CheckOutcome(check.name, "pass" if report.passed else "fail", report)
