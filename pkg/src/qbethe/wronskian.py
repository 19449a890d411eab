"""
wronskian.py — The Wronskian Theta(x) of H and H' and its theta zeros.

    Theta(x) = H'(x) H(x/q) - q^S (xi - x)^N (xi - q/x)^N H'(x/q) H(x)

is quasi-periodic, Theta(x) = omega (-x)^N Theta(qx), hence a product of N
Jacobi theta factors whose zeros z_k multiply to 1/omega.
"""

from __future__ import annotations

import cmath
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .bethe import canonical_order
from .errors import (
    NormalizationFailure,
    PoleHit,
    UntrustedEvaluation,
    ZeroCountMismatch,
)
from .hfun import HPair
from .qseries import (
    DEFAULT_TOLERANCE,
    LaurentSeries,
    ModelParams,
    poch_inf,
    poly_pow,
    principal_log_ratio,
    series_dilate,
    series_eval,
    series_mul,
    series_prod,
    series_restrict,
    series_scale,
    series_sub,
)

#: Companion roots come from the coefficients above this fraction of the max.
ROOT_WINDOW = 1e-18

#: Two representatives within this relative distance are one q-orbit.
ORBIT_TOL = 1e-6

#: A polished root is accepted when |Theta| is below this times its term scale.
ZERO_TOL = 1e-7

#: Candidate roots must evaluate with a tail below this fraction.
CANDIDATE_TAIL_TOL = 1e-6

#: Multiple of a zero's estimated rounding error that still counts as agreement.
ROUNDING_SLACK = 10.0

_NEWTON_STEPS = 30

_EPS = float(np.finfo(np.float64).eps)

# Orbits closer than this are never merged, however poor the conditioning.
_ORBIT_TOL_CAP = 1e-3

# Reference points for Theta_0 sit on the unit circle.
_REFERENCE_COUNT = 16

# Samples of |Theta| on the circle through a zero, for the simplicity test.
_CIRCLE_POINTS = 32


@dataclass(frozen=True, eq=False)
class ThetaData:
    """Theta with its normalised zeros and the constant of its product form."""

    params: ModelParams
    theta: LaurentSeries
    zeros: tuple[complex, ...]
    theta0: complex
    orbit_shifts: tuple[int, ...]
    """Power of q applied to each fundamental representative."""
    reference: complex
    """Point at which theta0 was measured."""

    def value(self, x: complex, tol: float = 1e-12) -> complex:
        return series_eval(self.theta, x, tol).value

    def product(self, x: complex) -> complex:
        return theta_product(self.zeros, self.params.q, x)

    def as_dict(self) -> dict:
        return {
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "theta0": [self.theta0.real, self.theta0.imag],
            "orbit_shifts": list(self.orbit_shifts),
        }


# ---------------------------------------------------------------------------
# Theta as a Laurent series
# ---------------------------------------------------------------------------


def _prefactor(params: ModelParams) -> LaurentSeries:
    """q^S (xi - x)^N (xi - q/x)^N on powers -N .. N."""
    up = LaurentSeries.exact(poly_pow([params.xi, -1], params.N))
    down = LaurentSeries.exact(
        poly_pow([params.xi, -params.q], params.N)[::-1], lo=-params.N
    )
    return series_scale(series_mul(up, down), params.q**params.S)


def compute_theta(params: ModelParams, hpair: HPair) -> LaurentSeries:
    """Theta on powers -M .. M with the trust window of the products."""
    q = params.q
    h = hpair.h_series()
    hp = hpair.hp_series()
    first = series_mul(hp, series_dilate(h, 1 / q))
    second = series_prod(_prefactor(params), series_dilate(hp, 1 / q), h)
    theta = series_restrict(series_sub(first, second), -hpair.M, hpair.M)
    logging.debug(
        "Theta trusted on [%d, %d] of [%d, %d]",
        theta.trust_lo,
        theta.trust_hi,
        theta.lo,
        theta.hi,
    )
    return theta


def quasi_periodicity_residual(theta: LaurentSeries, params: ModelParams) -> float:
    """Largest |Theta_m - omega (-1)^N q^(m-N) Theta_(m-N)| relative to the norm.

    Only pairs with both powers in the trust window are compared.
    """
    N = params.N
    factor = params.omega * (-1) ** N
    scale = theta.norm()
    worst = 0.0
    for m in range(theta.trust_lo + N, theta.trust_hi + 1):
        diff = theta.coeff(m) - factor * params.q ** (m - N) * theta.coeff(m - N)
        worst = max(worst, abs(diff) / scale)
    return worst


def pointwise_quasi_periodicity(
    theta: LaurentSeries, params: ModelParams, points: Sequence[complex]
) -> list[float]:
    """Relative residual of Theta(x) = omega (-x)^N Theta(qx) at each point."""
    out = []
    for x in points:
        lhs = series_eval(theta, x).value
        rhs = params.omega * (-x) ** params.N * series_eval(theta, params.q * x).value
        out.append(abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return out


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------


def to_fundamental(z: complex, q: complex) -> tuple[complex, int]:
    """(z q^k, k) with |q|^(1/2) <= |z q^k| < |q|^(-1/2)."""
    k = math.floor(0.5 - principal_log_ratio(z, q))
    return z * q**k, k


def theta_product(zeros: Sequence[complex], q: complex, x: complex) -> complex:
    """prod_k (x/z_k; q)_inf (q z_k/x; q)_inf."""
    if x == 0:
        raise PoleHit("theta product at x = 0")
    out = 1 + 0j
    for z in zeros:
        out *= poch_inf(x / z, q) * poch_inf(q * z / x, q)
    return out


def theta_terms(theta: LaurentSeries, x: complex) -> tuple[complex, complex, float]:
    """Theta(x), Theta'(x) and sum |Theta_k x^k| over the trust window."""
    powers = np.arange(theta.trust_lo, theta.trust_hi + 1)
    coeffs = theta.trusted()
    terms = coeffs * np.power(complex(x), powers)
    value = complex(np.sum(terms))
    deriv = complex(np.sum(powers * terms)) / x
    return value, deriv, float(np.sum(np.abs(terms)))


def _polish(theta: LaurentSeries, x: complex) -> complex:
    for _ in range(_NEWTON_STEPS):
        value, deriv, _ = theta_terms(theta, x)
        if deriv == 0:
            break
        step = value / deriv
        x -= step
        if abs(step) <= 1e-15 * abs(x):
            break
    return x


def _root_window(theta: LaurentSeries) -> np.ndarray:
    """Trusted coefficients trimmed to the span above ROOT_WINDOW of the max."""
    coeffs = theta.trusted()
    mags = np.abs(coeffs)
    big = np.flatnonzero(mags >= ROOT_WINDOW * mags.max())
    return coeffs[big[0] : big[-1] + 1]


def _candidates(theta: LaurentSeries) -> list[complex]:
    window = _root_window(theta)
    if window.size < 2:
        return []
    out = []
    with np.errstate(all="ignore"):
        roots = P.polyroots(window)
    for r in roots:
        r = complex(r)
        if r == 0 or not cmath.isfinite(r):
            continue
        try:
            series_eval(theta, r, CANDIDATE_TAIL_TOL)
        except UntrustedEvaluation:
            continue
        out.append(r)
    return out


def _circle_scale(theta: LaurentSeries, radius: float) -> float:
    """max |Theta| over _CIRCLE_POINTS points on |x| = radius."""
    angles = 2 * np.pi * np.arange(_CIRCLE_POINTS) / _CIRCLE_POINTS
    return max(abs(theta_terms(theta, radius * cmath.exp(1j * a))[0]) for a in angles)


def _same_orbit(a: complex, b: complex, q: complex, tol: float = ORBIT_TOL) -> bool:
    return any(
        abs(a - b * q**k) <= tol * max(abs(a), abs(b * q**k)) for k in (-1, 0, 1)
    )


def _orbit_representatives(
    theta: LaurentSeries, q: complex
) -> tuple[list[complex], float]:
    """Fundamental representatives of the zero orbits.

    Also returns the summed relative rounding error of the representatives,
    eps * sum |Theta_k z^k| / |Theta'(z) z| per zero.  Orbit matching and the
    product normalisation are never asked to be tighter than that.
    """
    reps: list[complex] = []
    errors: list[float] = []
    for root in _candidates(theta):
        z, _ = to_fundamental(root, q)
        with np.errstate(all="ignore"):
            z = _polish(theta, z)
        if not cmath.isfinite(z) or z == 0:
            continue
        z, _ = to_fundamental(z, q)
        value, deriv, scale = theta_terms(theta, z)
        if abs(value) > ZERO_TOL * scale:
            logging.debug("discarding spurious companion root %s", root)
            continue
        if deriv == 0:
            raise ZeroCountMismatch(f"theta zero at {z} is not simple")
        error = _EPS * scale / abs(deriv * z)
        if any(
            _same_orbit(z, r, q, _orbit_tol(max(error, e)))
            for r, e in zip(reps, errors)
        ):
            continue
        # local scale: |Theta| on the circle through z
        if abs(deriv * z) <= ZERO_TOL * _circle_scale(theta, abs(z)):
            raise ZeroCountMismatch(f"theta zero at {z} is not simple")
        reps.append(z)
        errors.append(error)
    return reps, sum(errors)


def _orbit_tol(error: float) -> float:
    return min(max(ORBIT_TOL, ROUNDING_SLACK * error), _ORBIT_TOL_CAP)


def _normalise(
    reps: Sequence[complex], params: ModelParams, tol: float, error: float = 0.0
) -> tuple[list[complex], list[int]]:
    """Shift the largest representative so the zeros multiply to 1/omega.

    The product is checked against 1/omega to max(tol, ROUNDING_SLACK * error),
    error being the summed relative rounding error of the representatives.
    """
    q = params.q
    total = complex(np.prod(reps)) * params.omega
    n = round(principal_log_ratio(total, q))
    if ROUNDING_SLACK * error > tol:
        logging.debug("zero product checked to %.1e", ROUNDING_SLACK * error)
        tol = ROUNDING_SLACK * error
    if abs(total * q ** (-n) - 1) > tol:
        raise NormalizationFailure(
            f"omega * prod z_k = {total} is not an integer power of q"
        )
    zeros = list(reps)
    shifts = [0] * len(zeros)
    largest = max(range(len(zeros)), key=lambda i: abs(zeros[i]))
    zeros[largest] *= q ** (-n)
    shifts[largest] = -n
    return zeros, shifts


def _reference_point(zeros: Sequence[complex], q: complex) -> complex:
    """Unit-circle point where the theta product is largest."""
    points = [
        cmath.exp(2j * math.pi * j / _REFERENCE_COUNT) for j in range(_REFERENCE_COUNT)
    ]
    return max(points, key=lambda x: abs(theta_product(zeros, q, x)))


def extract_zeros(
    theta: LaurentSeries, params: ModelParams, tol: float = DEFAULT_TOLERANCE
) -> ThetaData:
    """Theta zeros from the companion matrix of the trusted window.

    Roots are polished by Newton on the full trusted series, mapped into the
    fundamental annulus |q|^(1/2) <= |x| < |q|^(-1/2) and grouped into
    q-orbits.  Exactly N orbits are required.  The zero of largest modulus is
    then shifted by the integer power of q that makes prod z_k = 1/omega, and
    Theta_0 is read off at a unit-circle reference point.
    """
    q = params.q
    found, error = _orbit_representatives(theta, q)
    reps = canonical_order(found)
    if len(reps) != params.N:
        raise ZeroCountMismatch(
            f"found {len(reps)} theta-zero orbits in the fundamental annulus, "
            f"expected N = {params.N}"
        )
    zeros, shifts = _normalise(reps, params, tol, error)
    reference = _reference_point(zeros, q)
    theta0 = series_eval(theta, reference).value / theta_product(zeros, q, reference)
    logging.info("theta zeros %s (shifts %s)", zeros, shifts)
    return ThetaData(
        params=params,
        theta=theta,
        zeros=tuple(zeros),
        theta0=theta0,
        orbit_shifts=tuple(shifts),
        reference=reference,
    )


# ---------------------------------------------------------------------------
# Product form checks
# ---------------------------------------------------------------------------


def product_reconstruction(data: ThetaData, points: Sequence[complex]) -> list[float]:
    """Relative residual of Theta(x) = Theta_0 prod_k theta(x/z_k) per point."""
    out = []
    for x in points:
        lhs = data.value(x)
        rhs = data.theta0 * data.product(x)
        out.append(abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    return out


def theta0_consistency(data: ThetaData, points: Sequence[complex]) -> float:
    """Largest relative deviation of Theta(x)/product(x) from Theta_0."""
    worst = 0.0
    for x in points:
        estimate = data.value(x) / data.product(x)
        worst = max(worst, abs(estimate - data.theta0) / abs(data.theta0))
    return worst
