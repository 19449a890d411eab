"""
hfun.py — The series H(x) and H'(x) solving the twin TQ-type equations.

    t(x) H(x)   = H(x/q)  + gamma(x)  H(qx)
    t'(x) H'(x) = H'(qx)  + gamma'(x) H'(x/q)

H is a power series in x and H' a power series in u = 1/x, both normalised
to 1 at their expansion point.  The second line is the first one with
omega -> 1/omega, t -> t' and x -> 1/x, so a single recursion and a single
matrix-product routine serve both; the "dual" pieces below perform the
mirroring.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    NonConvergentProduct,
    PoleHit,
    Resonance,
    SubstitutionFailure,
    UntrustedEvaluation,
)
from .qseries import (
    DEFAULT_TRUNCATION,
    LaurentSeries,
    ModelParams,
    certified_prefix,
    poly_pow,
    series_eval,
    series_reflect,
)

#: Relative size of a recursion denominator below which it counts as resonant.
RESONANCE_TOL = 1e-8

#: Acceptance threshold for the substitution residual of either line.
DEFAULT_SUBSTITUTION_TOL = 1e-9

#: Matrix products stop once both ratios move less than this per step...
PRODUCT_TOL = 1e-12

#: ...for this many consecutive steps.
PRODUCT_SETTLE = 5

# Coefficients below this are left out of residuals; products of them are
# subnormal and carry no relative precision.
_RESIDUAL_FLOOR = 1e-200


# ---------------------------------------------------------------------------
# Polynomial data of the two lines
# ---------------------------------------------------------------------------


def gamma_coeffs(params: ModelParams, dual: bool = False) -> np.ndarray:
    """Ascending coefficients of gamma (in x), or of gamma' (in u = 1/x).

    gamma(x)  = omega q^S (1 - xi x)^N (xi - q x)^N
    gamma'(u) = omega^-1 q^S (1 - xi u)^N (xi - q u)^N
    """
    omega = 1 / params.omega if dual else params.omega
    core = P.polymul(
        poly_pow([1, -params.xi], params.N), poly_pow([params.xi, -params.q], params.N)
    )
    return omega * params.q**params.S * core


def dual_t_coeffs(params: ModelParams, t_coeffs: Sequence[complex]) -> np.ndarray:
    """t'(u) = t(x) / (omega (-x)^N) as ascending coefficients in u = 1/x."""
    t = np.asarray(t_coeffs, dtype=np.complex128)
    return (-1) ** params.N * t[::-1] / params.omega


def _line(
    params: ModelParams, t_coeffs: Sequence[complex], dual: bool
) -> tuple[np.ndarray, np.ndarray, complex]:
    """(t, gamma, weight) of one line; weight is gamma at the expansion point."""
    if len(t_coeffs) != params.N + 1:
        raise ValueError(f"t(x) needs {params.N + 1} coefficients, got {len(t_coeffs)}")
    if dual:
        t = dual_t_coeffs(params, t_coeffs)
        return t, gamma_coeffs(params, dual=True), params.twist_dual
    t = np.asarray(t_coeffs, dtype=np.complex128)
    return t, gamma_coeffs(params), params.twist


# ---------------------------------------------------------------------------
# Coefficient recursion
# ---------------------------------------------------------------------------


def _recursion(
    t: np.ndarray, gamma: np.ndarray, weight: complex, q: complex, M: int
) -> np.ndarray:
    """Solve t(y) F(y) = F(y/q) + gamma(y) F(qy), F(0) = 1, to order M.

    Matching y^m gives D_m f_m = sum_{j>=1} (t_j - gamma_j q^(m-j)) f_(m-j)
    with D_m = (1 - q^m)(q^-m - weight).  D_m q^m is used in place of D_m so
    that no negative power of q is ever formed.
    """
    if M < 0:
        raise ValueError(f"truncation order must be non-negative, got {M}")
    f = np.zeros(M + 1, dtype=np.complex128)
    f[0] = 1
    width = gamma.size - 1
    limit = RESONANCE_TOL * (1 + abs(weight))
    for m in range(1, M + 1):
        qm = q**m
        scaled = (1 - qm) * (1 - weight * qm)
        if abs(scaled) < limit * abs(qm):
            raise Resonance(
                f"denominator D_{m} = {scaled / qm:.3e} is resonant (weight {weight})"
            )
        acc = 0j
        for j in range(1, min(m, width) + 1):
            tj = t[j] if j < t.size else 0
            acc += (tj - gamma[j] * q ** (m - j)) * f[m - j]
        f[m] = acc * qm / scaled
    return f


def compute_h(params: ModelParams, t_coeffs: Sequence[complex], M: int) -> np.ndarray:
    """Coefficients h_0 .. h_M of H(x); h_0 = 1."""
    t, gamma, weight = _line(params, t_coeffs, dual=False)
    return _recursion(t, gamma, weight, params.q, M)


def compute_hprime(
    params: ModelParams, t_coeffs: Sequence[complex], M: int
) -> np.ndarray:
    """Coefficients h'_0 .. h'_M of H'(x) in powers of 1/x; h'_0 = 1."""
    t, gamma, weight = _line(params, t_coeffs, dual=True)
    return _recursion(t, gamma, weight, params.q, M)


# ---------------------------------------------------------------------------
# HPair
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HPair:
    """H and H' for one t(x), truncated at order M."""

    h: np.ndarray
    hp: np.ndarray
    M: int
    params: ModelParams
    t_coeffs: np.ndarray

    def h_series(self) -> LaurentSeries:
        """H as a series in x, open above."""
        last = max(certified_prefix(self.h), 0)
        return LaurentSeries(0, self.h, 0, last, open_hi=True)

    def hp_series(self) -> LaurentSeries:
        """H' as a Laurent series in x (powers 0 down to -M), open below."""
        last = max(certified_prefix(self.hp), 0)
        return series_reflect(LaurentSeries(0, self.hp, 0, last, open_hi=True))

    def H(self, x: complex, tol: float = 1e-12) -> complex:
        return series_eval(self.h_series(), x, tol).value

    def Hp(self, x: complex, tol: float = 1e-12) -> complex:
        return series_eval(self.hp_series(), x, tol).value


def _line_residual(
    coeffs: np.ndarray, t: np.ndarray, gamma: np.ndarray, q: complex
) -> float:
    """Largest relative coefficient residual of t F - F(y/q) - gamma F(qy).

    Each coefficient is measured against the summed magnitudes of the terms
    that formed it.
    """
    mags = np.abs(coeffs)
    keep = np.flatnonzero((mags > 0) & (mags < _RESIDUAL_FLOOR))
    n = int(keep[0]) if keep.size else coeffs.size
    f = coeffs[:n]
    k = np.arange(n)
    up = f * np.power(q, k)
    down = f * np.power(1 / q, k)
    lhs = np.convolve(t, f)[:n]
    rhs = np.convolve(gamma, up)[:n]
    diff = np.abs(lhs - down - rhs)
    scale = (
        np.convolve(np.abs(t), np.abs(f))[:n]
        + np.abs(down)
        + np.convolve(np.abs(gamma), np.abs(up))[:n]
    )
    ratio = np.divide(diff, scale, out=np.zeros(n), where=scale > 0)
    return float(np.max(ratio))


def th_residual(hpair: HPair, line: int = 1) -> float:
    """Substitution residual of the first (H) or second (H') line."""
    if line not in (1, 2):
        raise ValueError(f"line must be 1 or 2, got {line}")
    dual = line == 2
    t, gamma, _ = _line(hpair.params, hpair.t_coeffs, dual)
    return _line_residual(hpair.hp if dual else hpair.h, t, gamma, hpair.params.q)


def compute_hpair(
    params: ModelParams,
    t_coeffs: Sequence[complex],
    M: int = DEFAULT_TRUNCATION,
    tol: float = DEFAULT_SUBSTITUTION_TOL,
) -> HPair:
    """Both series, accepted only after substitution into both lines."""
    t = np.array(t_coeffs, dtype=np.complex128)
    pair = HPair(
        h=compute_h(params, t, M),
        hp=compute_hprime(params, t, M),
        M=M,
        params=params,
        t_coeffs=t,
    )
    for line in (1, 2):
        residual = th_residual(pair, line)
        if residual > tol:
            raise SubstitutionFailure(
                f"line {line} substitution residual {residual:.3e} exceeds {tol:.1e}"
            )
        logging.debug("H line %d residual %.2e", line, residual)
    return pair


# ---------------------------------------------------------------------------
# Matrix-product oracle
# ---------------------------------------------------------------------------


class OracleRatios(NamedTuple):
    ratio: complex
    """H(x0/q)/H(x0), or H'(q x0)/H'(x0) for the dual product."""
    offdiag: complex
    """Limit -omega q^S xi^N, or -omega^-1 q^S xi^N for the dual product."""


class _Product(NamedTuple):
    matrix: np.ndarray
    log_scale: float
    steps: int
    settled: bool
    ratios: OracleRatios


def _settled(new: complex, old: complex, tol: float) -> bool:
    return abs(new - old) <= tol * max(1.0, abs(new))


def _run_product(
    t: np.ndarray,
    gamma: np.ndarray,
    y0: complex,
    q: complex,
    K: int,
    stop_early: bool,
) -> _Product:
    """L(y0) L(q y0) ... L(q^K y0) with L = [[t, -gamma], [1, 0]].

    The running product is rescaled to unit max-norm after every factor;
    ``log_scale`` accumulates what was divided out.
    """
    prod = np.eye(2, dtype=np.complex128)
    log_scale = 0.0
    previous: OracleRatios | None = None
    quiet = 0
    ratios = OracleRatios(complex("nan"), complex("nan"))
    with np.errstate(all="ignore"):
        for k in range(K + 1):
            y = y0 * q**k
            factor = np.array(
                [[P.polyval(y, t), -P.polyval(y, gamma)], [1, 0]], dtype=np.complex128
            )
            prod = prod @ factor
            norm = float(np.max(np.abs(prod)))
            if norm == 0 or not math.isfinite(norm):
                raise NonConvergentProduct(f"product degenerated at step {k}")
            prod /= norm
            log_scale += math.log(norm)
            if prod[1, 0] == 0 or prod[0, 0] == 0:
                previous = None
                quiet = 0
                continue
            ratios = OracleRatios(
                complex(prod[0, 0] / prod[1, 0]), complex(prod[0, 1] / prod[0, 0])
            )
            if previous is not None and all(
                _settled(a, b, PRODUCT_TOL)
                for a, b in zip(ratios, previous, strict=True)
            ):
                quiet += 1
            else:
                quiet = 0
            previous = ratios
            if stop_early and quiet >= PRODUCT_SETTLE:
                logging.debug("matrix product settled after %d factors", k + 1)
                return _Product(prod, log_scale, k + 1, True, ratios)
    return _Product(prod, log_scale, K + 1, False, ratios)


def _oracle_inputs(
    params: ModelParams, t_coeffs: Sequence[complex], x0: complex, dual: bool
) -> tuple[np.ndarray, np.ndarray, complex]:
    t, gamma, weight = _line(params, t_coeffs, dual)
    if abs(weight) >= 1:
        raise NonConvergentProduct(
            f"|{'omega^-1' if dual else 'omega'} q^S xi^N| = {abs(weight):.3f} >= 1"
        )
    x0 = complex(x0)
    if dual:
        if x0 == 0:
            raise PoleHit("dual matrix product needs x0 != 0")
        return t, gamma, 1 / x0
    return t, gamma, x0


def matrix_product_oracle(
    params: ModelParams,
    t_coeffs: Sequence[complex],
    x0: complex,
    K: int | None = None,
    *,
    dual: bool = False,
    M: int = DEFAULT_TRUNCATION,
) -> OracleRatios:
    """Ratios read off the semi-infinite product of transfer matrices.

    The direct product L(x0) L(q x0) ... tends to a rank-one matrix with
    column (H(x0/q), H(x0)) and row (1, -omega q^S xi^N).  With ``dual`` the
    product ... L'(x0/q) L'(x0) is used instead; its transpose has the same
    shape in u = 1/x, so it is computed as the direct product of the mirrored
    line.  K defaults to 4 M factors.
    """
    t, gamma, y0 = _oracle_inputs(params, t_coeffs, x0, dual)
    budget = 4 * M if K is None else K
    result = _run_product(t, gamma, y0, params.q, budget, stop_early=True)
    if not result.settled:
        raise NonConvergentProduct(
            f"ratios did not settle to {PRODUCT_TOL:.0e} within {budget} factors"
        )
    return result.ratios


def product_determinant(
    params: ModelParams,
    t_coeffs: Sequence[complex],
    x0: complex,
    K: int,
    *,
    dual: bool = False,
) -> complex:
    """det of the K+1 factor product, taken from the matrices themselves."""
    t, gamma, y0 = _oracle_inputs(params, t_coeffs, x0, dual)
    result = _run_product(t, gamma, y0, params.q, K, stop_early=False)
    det = complex(np.linalg.det(result.matrix))
    return det * math.exp(2 * result.log_scale) if det != 0 else 0j


# ---------------------------------------------------------------------------
# Certified region
# ---------------------------------------------------------------------------


class CertifiedAnnulus(NamedTuple):
    inner: float
    """Smallest |x| at which H' evaluates within tolerance."""
    outer: float
    """Largest |x| at which H evaluates within tolerance."""


# Radii 2^(j/4), j = 0..80.
_RADIUS_GRID = tuple(2 ** (j / 4) for j in range(81))


def _reach(series: LaurentSeries, tol: float, invert: bool) -> float:
    reach = 0.0
    for r in _RADIUS_GRID:
        try:
            series_eval(series, 1 / r if invert else r, tol)
        except UntrustedEvaluation:
            break
        reach = r
    return reach


def certified_radius(hpair: HPair, tol: float = 1e-12) -> CertifiedAnnulus:
    """The annulus in which both truncated series pass their tail test.

    Radii are scanned on a 2^(1/4) grid between 1 and 2^20 (or its inverse);
    a series that fails already at |x| = 1 reports the corresponding bound
    as 0 (outer) or infinity (inner).
    """
    outer = _reach(hpair.h_series(), tol, invert=False)
    inner_reach = _reach(hpair.hp_series(), tol, invert=True)
    inner = 1 / inner_reach if inner_reach > 0 else math.inf
    logging.debug("certified annulus %.3g <= |x| <= %.3g", inner, outer)
    return CertifiedAnnulus(inner, outer)
