"""
checks — Pluggable identity checks dispatched per grid point.

To add a new check:
1. Create a new module in this package (or extend one)
2. Subclass BaseCheck, set name + description, implement run()
3. Register the check in app.py when building the CheckRouter
"""

from .base import BaseCheck, CheckOutcome, PointContext
from .bilateral import OnePsiOneCheck, RrCheck, RrgenCheck
from .router import CheckRouter
from .spectral import Bae2Check, BaeCheck, HqCheck, HSolvedCheck, Q2Check, ThetaCheck

__all__ = [
    "Bae2Check",
    "BaeCheck",
    "BaseCheck",
    "CheckOutcome",
    "CheckRouter",
    "HSolvedCheck",
    "HqCheck",
    "OnePsiOneCheck",
    "PointContext",
    "Q2Check",
    "RrCheck",
    "RrgenCheck",
    "ThetaCheck",
]
