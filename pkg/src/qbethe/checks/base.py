"""
base.py — Base classes for the pluggable identity checks.

All checks subclass BaseCheck and return an IdentityReport.  The
CheckRouter passes a PointContext to each check's run() method.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from ..bethe import BetheState
from ..config import Settings
from ..errors import NumericalFailure
from ..hfun import HPair
from ..identities import IdentityReport
from ..qseries import ModelParams
from ..wronskian import ThetaData

#: Floor for the tolerance of pointwise checks that divide by Theta.
POINTWISE_TOL = 1e-7


@dataclass
class PointContext:
    """Everything computed for one Bethe state at one grid point."""

    params: ModelParams
    state: BetheState
    settings: Settings
    hpair: HPair | None = None
    theta: ThetaData | None = None
    probes: list[complex] = field(default_factory=list)
    failure: NumericalFailure | None = None
    """Why hpair or theta is missing, re-raised by the checks that need them."""

    def require_hpair(self) -> HPair:
        if self.hpair is None:
            raise self.failure or NumericalFailure("H series unavailable")
        return self.hpair

    def require_theta(self) -> ThetaData:
        if self.theta is None:
            raise self.failure or NumericalFailure("Theta zeros unavailable")
        return self.theta

    @property
    def tolerance(self) -> float:
        return self.settings.tolerance

    @property
    def pointwise_tolerance(self) -> float:
        return max(self.settings.tolerance, POINTWISE_TOL)


@dataclass
class CheckOutcome:
    """What the router records for one check at one point."""

    name: str
    status: str
    """One of pass, fail, error, skipped."""
    report: IdentityReport | None = None
    message: str | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        out: dict = {"check": self.name, "status": self.status}
        if self.report is not None:
            out["max_residual"] = self.report.max_residual
            out["tolerance"] = self.report.tolerance
            out["samples"] = self.report.as_dict()["samples"]
            out["context"] = self.report.context
        if self.error is not None:
            out["error"] = self.error
            out["message"] = self.message
        return out


class BaseCheck(ABC):
    """Abstract base class for pluggable checks.

    To create a new check:
    1. Subclass BaseCheck
    2. Set ``name`` (the identifier used in the ``checks`` config list)
    3. Set ``description`` (shown by ``qbethe verify --help``)
    4. Implement ``run()``, and ``applies()`` if the check is restricted
    5. Register the instance in app.py when building the CheckRouter
    """

    name: str = ""
    description: str = ""

    def applies(self, context: PointContext) -> bool:
        """Whether the check is defined at this point."""
        return True

    @abstractmethod
    def run(self, context: PointContext) -> IdentityReport:
        """Run the check and return its report.

        Raises:
            NumericalFailure: the check could not be evaluated.
        """
        ...
