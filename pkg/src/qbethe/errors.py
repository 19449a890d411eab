"""
errors.py — Exception hierarchy.

Library code raises these; the CLI maps them to exit codes
(``ConfigError`` -> 2, ``NumericalFailure`` -> 3).
"""


class QBetheError(Exception):
    """Base class for every error raised by qbethe."""


class ConfigError(QBetheError, ValueError):
    """Malformed or inconsistent run configuration."""


class ParameterError(QBetheError, ValueError):
    """Model parameters violate the |q| < 1, |xi| < 1 regime or are degenerate."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericalFailure(QBetheError, ArithmeticError):
    """A computation could not produce a certified result."""


# ---------------------------------------------------------------------------
# qseries
# ---------------------------------------------------------------------------
class EmptyTrustWindow(NumericalFailure):
    """No coefficient of a series result can be certified."""


class UntrustedEvaluation(NumericalFailure):
    """The tail estimate of a series evaluation exceeds the tolerance."""


class PoleHit(NumericalFailure):
    """A vanishing factor was met in a denominator."""


# ---------------------------------------------------------------------------
# bethe
# ---------------------------------------------------------------------------
class DegenerateRoots(NumericalFailure):
    """Bethe roots coincide, vanish, or sit on a q-shift of one another."""


class RootFindFailure(NumericalFailure):
    """No seed converged within the Newton iteration budget."""


class NonVanishingRemainder(NumericalFailure):
    """Division of the TQ numerator by Q(x) left a remainder."""


class StructureViolation(NumericalFailure):
    """t(x) endpoint coefficients disagree with the fixed form."""


# ---------------------------------------------------------------------------
# hfun
# ---------------------------------------------------------------------------
class Resonance(NumericalFailure):
    """A recursion denominator is too close to zero."""


class NonConvergentProduct(NumericalFailure):
    """Matrix-product ratios did not settle within the step budget."""


class SubstitutionFailure(NumericalFailure):
    """A computed series does not satisfy its defining functional equation."""


# ---------------------------------------------------------------------------
# wronskian
# ---------------------------------------------------------------------------
class ZeroCountMismatch(NumericalFailure):
    """The number of theta-zero orbits differs from N."""


class NormalizationFailure(NumericalFailure):
    """No integer q-shift brings the zero product to 1/omega."""


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------
class ProbeAtPole(NumericalFailure):
    """A probe point sits on a zero of the Wronskian."""


class ZeroDenominator(NumericalFailure):
    """A quantisation ratio has a vanishing denominator at a theta zero."""


class NonConvergentTail(NumericalFailure):
    """A bilateral sum failed its tail-decay certification."""


class RegionViolation(NumericalFailure):
    """Parameters lie outside the bilateral convergence region."""
