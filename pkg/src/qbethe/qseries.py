"""
qseries.py — Truncated Laurent series and q-Pochhammer primitives.

Every series object in the package (Q, t, H, H', Theta and all identity
residuals) is a :class:`LaurentSeries`: a window of complex coefficients
together with the sub-window whose coefficients are certified after the
arithmetic that produced them.  Values are immutable; all functions are pure.
"""

from __future__ import annotations

import cmath
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyTrustWindow,
    ParameterError,
    PoleHit,
    UntrustedEvaluation,
)

#: Default number of retained coefficients per expansion direction.
DEFAULT_TRUNCATION = 64

#: Products whose magnitude falls below this are treated as lost to underflow.
UNDERFLOW_FLOOR = 1e-280

#: Relative weight of untrusted or missing partner terms tolerated in a product.
DEFAULT_EDGE_TOL = 1e-12

#: Absolute size below which a Pochhammer factor counts as a zero.
POLE_TOL = 1e-14

#: Infinite products stop once |a q^k| drops below this.
POCH_CUTOFF = float(np.finfo(np.float64).eps) / 4

# Residual pass threshold shared by all checks unless overridden.
DEFAULT_TOLERANCE = 1e-8


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """The quintuple (q, xi, omega, N, S) fixing the chain and its regime."""

    q: complex
    xi: complex
    omega: complex
    N: int
    S: int

    def __post_init__(self):
        for name in ("q", "xi", "omega"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ParameterError(
                "N", f"chain length must be a positive integer, got {self.N!r}"
            )
        if isinstance(self.S, bool) or int(self.S) != self.S or self.S < 0:
            raise ParameterError(
                "S", f"total spin must be a non-negative integer, got {self.S!r}"
            )
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "S", int(self.S))
        if self.q == 0 or abs(self.q) >= 1:
            raise ParameterError("q", f"need 0 < |q| < 1, got {self.q}")
        if abs(self.xi) >= 1:
            raise ParameterError("xi", f"need |xi| < 1, got {self.xi}")
        if self.omega == 0:
            raise ParameterError("omega", "field must be non-zero")

    @property
    def twist(self) -> complex:
        """omega q^S xi^N, the weight of the H-side recursions and sums."""
        return self.omega * self.q**self.S * self.xi**self.N

    @property
    def twist_dual(self) -> complex:
        """omega^-1 q^S xi^N, the weight of the H'-side."""
        return self.q**self.S * self.xi**self.N / self.omega

    @property
    def convergent(self) -> bool:
        """Gate for bilateral sums and semi-infinite matrix products."""
        return abs(self.twist) < 1 and abs(self.twist_dual) < 1

    def as_dict(self) -> dict:
        return {
            "q": complex_repr(self.q),
            "xi": complex_repr(self.xi),
            "omega": complex_repr(self.omega),
            "N": self.N,
            "S": self.S,
        }


def complex_repr(z: complex) -> float | list[float]:
    """Real numbers as floats, genuinely complex ones as [re, im]."""
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


# ---------------------------------------------------------------------------
# Laurent series
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Coefficients for powers ``lo .. lo+len-1`` of x.

    ``trust_lo``/``trust_hi`` bound the certified coefficients.  ``open_lo``
    and ``open_hi`` record that the represented object continues beyond the
    stored window on that side (an infinite expansion); a closed side means
    the coefficients beyond it are exactly zero.
    """

    lo: int
    coeffs: np.ndarray
    trust_lo: int
    trust_hi: int
    open_lo: bool = False
    open_hi: bool = False

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if arr.size < 1:
            raise ValueError("a series needs at least one coefficient")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "lo", int(self.lo))
        if not (self.lo <= self.trust_lo <= self.trust_hi <= self.hi):
            raise ValueError(
                f"trust window [{self.trust_lo}, {self.trust_hi}] "
                f"outside storage window [{self.lo}, {self.hi}]"
            )

    @classmethod
    def exact(
        cls, coeffs: Sequence[complex] | np.ndarray, lo: int = 0
    ) -> LaurentSeries:
        """A Laurent polynomial: every coefficient certified, both sides closed."""
        arr = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        return cls(lo, arr, lo, lo + arr.size - 1)

    @classmethod
    def one(cls) -> LaurentSeries:
        return cls.exact([1.0])

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.size - 1

    @property
    def powers(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @property
    def trust_mask(self) -> np.ndarray:
        p = self.powers
        return (p >= self.trust_lo) & (p <= self.trust_hi)

    def coeff(self, k: int) -> complex:
        """Coefficient of x^k (zero outside the stored window)."""
        if self.lo <= k <= self.hi:
            return complex(self.coeffs[k - self.lo])
        return 0j

    def trusted(self) -> np.ndarray:
        return self.coeffs[self.trust_lo - self.lo : self.trust_hi - self.lo + 1]

    def norm(self) -> float:
        """Largest certified coefficient magnitude."""
        return float(np.max(np.abs(self.trusted())))


class Evaluation(NamedTuple):
    value: complex
    tail: float


def _peak_run(mask: np.ndarray, weight: np.ndarray) -> tuple[int, int] | None:
    """(start, stop) indices of the run of True holding the largest weight.

    Runs of exact zeros left behind by underflow never outweigh the run that
    carries the series.  Equal weights resolve to the lowest index.
    """
    if not mask.any():
        return None
    peak = int(np.argmax(np.where(mask, weight, -1.0)))
    start, stop = peak, peak
    while start > 0 and mask[start - 1]:
        start -= 1
    while stop < mask.size - 1 and mask[stop + 1]:
        stop += 1
    return start, stop


def _antidiagonal(matrix: np.ndarray, reduce) -> np.ndarray:
    """Reduce ``matrix[i, j]`` over each i + j = k."""
    rows, cols = matrix.shape
    flipped = matrix[:, ::-1]
    return np.array(
        [
            reduce(np.diagonal(flipped, offset=cols - 1 - k))
            for k in range(rows + cols - 1)
        ]
    )


def _windowed(
    lo: int,
    values: np.ndarray,
    certified: np.ndarray,
    weight: np.ndarray,
    open_lo: bool,
    open_hi: bool,
    what: str,
) -> LaurentSeries:
    run = _peak_run(certified, weight)
    if run is None:
        raise EmptyTrustWindow(f"{what}: no certified coefficient")
    return LaurentSeries(lo, values, lo + run[0], lo + run[1], open_lo, open_hi)


def series_mul(
    a: LaurentSeries, b: LaurentSeries, edge_tol: float = DEFAULT_EDGE_TOL
) -> LaurentSeries:
    """Cauchy product with trust bookkeeping.

    For each power k the product coefficient is certified when the combined
    weight of (i) pairs touching an untrusted stored coefficient, (ii) the
    first missing term beyond each open end, estimated by the edge
    coefficient times its partner, and (iii) pairs lost to underflow is at
    most ``edge_tol`` times the largest pair magnitude.  Structural zeros
    (no pair contributes) are certified.  The trust window is the certified
    run around the largest certified pair magnitude.
    """
    values = np.convolve(a.coeffs, b.coeffs)
    abs_a = np.abs(a.coeffs)
    abs_b = np.abs(b.coeffs)
    pairs = np.outer(abs_a, abs_b)
    scale = _antidiagonal(pairs, np.max)

    untrusted = ~a.trust_mask[:, None] | ~b.trust_mask[None, :]
    err = _antidiagonal(np.where(untrusted, pairs, 0.0), np.sum)

    lost = (abs_a[:, None] > 0) & (abs_b[None, :] > 0) & (pairs < UNDERFLOW_FLOOR)
    err = err + UNDERFLOW_FLOOR * _antidiagonal(lost, np.sum)

    la, lb = abs_a.size, abs_b.size
    if a.open_hi and lb > 1:
        err[la : la + lb - 1] += abs_a[-1] * abs_b[: lb - 1]
    if a.open_lo and lb > 1:
        err[: lb - 1] += abs_a[0] * abs_b[1:]
    if b.open_hi and la > 1:
        err[lb : la + lb - 1] += abs_b[-1] * abs_a[: la - 1]
    if b.open_lo and la > 1:
        err[: la - 1] += abs_b[0] * abs_a[1:]

    certified = (err <= edge_tol * scale) & ((scale >= UNDERFLOW_FLOOR) | (scale == 0))
    out = _windowed(
        a.lo + b.lo,
        values,
        certified,
        scale,
        a.open_lo or b.open_lo,
        a.open_hi or b.open_hi,
        "series_mul",
    )
    logging.debug(
        "series_mul: window [%d, %d] trusted [%d, %d]",
        out.lo,
        out.hi,
        out.trust_lo,
        out.trust_hi,
    )
    return out


def series_prod(
    *factors: LaurentSeries, edge_tol: float = DEFAULT_EDGE_TOL
) -> LaurentSeries:
    out = factors[0]
    for f in factors[1:]:
        out = series_mul(out, f, edge_tol)
    return out


def series_pow(
    a: LaurentSeries, n: int, edge_tol: float = DEFAULT_EDGE_TOL
) -> LaurentSeries:
    out = LaurentSeries.one()
    for _ in range(n):
        out = series_mul(out, a, edge_tol)
    return out


def _combine(a: LaurentSeries, b: LaurentSeries, sign: float) -> LaurentSeries:
    lo = min(a.lo, b.lo)
    hi = max(a.hi, b.hi)
    powers = np.arange(lo, hi + 1)
    values = np.zeros(powers.size, dtype=np.complex128)
    values[a.lo - lo : a.hi - lo + 1] += a.coeffs
    values[b.lo - lo : b.hi - lo + 1] += sign * b.coeffs

    def ok(s: LaurentSeries) -> np.ndarray:
        inside = (powers >= s.trust_lo) & (powers <= s.trust_hi)
        below = (powers < s.lo) & (not s.open_lo)
        above = (powers > s.hi) & (not s.open_hi)
        return inside | below | above

    return _windowed(
        lo,
        values,
        ok(a) & ok(b),
        np.abs(values),
        a.open_lo or b.open_lo,
        a.open_hi or b.open_hi,
        "series_add",
    )


def series_add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return _combine(a, b, 1.0)


def series_sub(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return _combine(a, b, -1.0)


def series_scale(a: LaurentSeries, c: complex) -> LaurentSeries:
    return LaurentSeries(
        a.lo, a.coeffs * c, a.trust_lo, a.trust_hi, a.open_lo, a.open_hi
    )


def series_dilate(a: LaurentSeries, c: complex) -> LaurentSeries:
    """The series of f(c x): coefficient k picks up c^k."""
    c = complex(c)
    factors = np.array([c**int(k) for k in a.powers], dtype=np.complex128)
    return LaurentSeries(
        a.lo, a.coeffs * factors, a.trust_lo, a.trust_hi, a.open_lo, a.open_hi
    )


def series_reflect(a: LaurentSeries) -> LaurentSeries:
    """The series of f(1/x)."""
    return LaurentSeries(
        -a.hi, a.coeffs[::-1], -a.trust_hi, -a.trust_lo, a.open_hi, a.open_lo
    )


def series_restrict(a: LaurentSeries, lo: int, hi: int) -> LaurentSeries:
    """Keep powers lo..hi; a side that loses coefficients becomes open."""
    new_lo = max(lo, a.lo)
    new_hi = min(hi, a.hi)
    t_lo = max(a.trust_lo, new_lo)
    t_hi = min(a.trust_hi, new_hi)
    if new_lo > new_hi or t_lo > t_hi:
        raise EmptyTrustWindow(f"series_restrict: nothing certified in [{lo}, {hi}]")
    cut = a.coeffs[new_lo - a.lo : new_hi - a.lo + 1]
    return LaurentSeries(
        new_lo,
        cut,
        t_lo,
        t_hi,
        a.open_lo or new_lo > a.lo,
        a.open_hi or new_hi < a.hi,
    )


def series_eval(s: LaurentSeries, x0: complex, tol: float = 1e-12) -> Evaluation:
    """Horner evaluation over the trust window with a tail estimate.

    The tail sums the magnitudes of untrusted stored terms and, for each open
    end, the next term estimated from the edge coefficient.  Raises
    :class:`UntrustedEvaluation` when the tail exceeds ``tol`` relative to the
    largest certified term.
    """
    x0 = complex(x0)
    if x0 == 0 and (s.trust_lo < 0 or (s.lo < 0 and s.open_lo)):
        raise PoleHit("series_eval: x0 = 0 with negative powers present")

    value = 0j
    for c in s.trusted()[::-1]:
        value = value * x0 + complex(c)
    if s.trust_lo != 0:
        value *= x0**s.trust_lo

    r = abs(x0)
    if r == 0:
        terms = np.abs(s.coeffs) * (s.powers == 0)
    else:
        terms = np.abs(s.coeffs) * np.exp(s.powers * np.log(r))
    mask = s.trust_mask
    scale = float(np.max(terms[mask]))
    tail = float(np.sum(terms[~mask]))
    if s.open_hi and r > 0:
        tail += float(abs(s.coeffs[-1]) * r ** (s.hi + 1))
    if s.open_lo and r > 0:
        tail += float(abs(s.coeffs[0]) * r ** (s.lo - 1))

    if tail > tol * scale:
        raise UntrustedEvaluation(
            f"series_eval at {x0}: tail {tail:.3e} exceeds {tol:.1e} "
            f"of scale {scale:.3e}"
        )
    return Evaluation(value, tail)


def relative_residual(diff: complex, *terms: complex) -> float:
    """|diff| over the largest magnitude among the terms that formed it."""
    scale = max((abs(t) for t in terms), default=0.0)
    if scale == 0:
        return 0.0 if diff == 0 else float("inf")
    return abs(diff) / scale


# ---------------------------------------------------------------------------
# q-Pochhammer symbols
# ---------------------------------------------------------------------------


def _require_nome(q: complex) -> complex:
    q = complex(q)
    if not 0 < abs(q) < 1:
        raise ParameterError("q", f"need 0 < |q| < 1, got {q}")
    return q


def poch_finite(a: complex, q: complex, n: int) -> complex:
    """(a;q)_n for any integer n.

    For n < 0 this is 1 / prod_{k=n}^{-1} (1 - a q^k); a vanishing factor
    raises :class:`PoleHit`.
    """
    a, q = complex(a), complex(q)
    if n >= 0:
        out = 1 + 0j
        for k in range(n):
            out *= 1 - a * q**k
        return out
    denom = 1 + 0j
    for k in range(n, 0):
        factor = 1 - a * q**k
        if abs(factor) < POLE_TOL:
            raise PoleHit(f"(a;q)_{n}: factor 1 - a q^{k} vanishes for a={a}")
        denom *= factor
    return 1 / denom


def poch_ratio(a: complex, b: complex, q: complex, n: int) -> complex:
    """(a;q)_n / (b;q)_n, factor by factor.

    For n < 0 a zero of (b;q)_n's reciprocal gives an exact 0 instead of a pole.
    """
    a, b, q = complex(a), complex(b), complex(q)
    out = 1 + 0j
    if n >= 0:
        for k in range(n):
            den = 1 - b * q**k
            if abs(den) < POLE_TOL:
                raise PoleHit(f"(b;q)_{n}: factor 1 - b q^{k} vanishes for b={b}")
            out *= (1 - a * q**k) / den
        return out
    for k in range(n, 0):
        den = 1 - a * q**k
        if abs(den) < POLE_TOL:
            raise PoleHit(f"(a;q)_{n}: factor 1 - a q^{k} vanishes for a={a}")
        out *= (1 - b * q**k) / den
    return out


def poch_inf(a: complex, q: complex) -> complex:
    """(a;q)_inf, truncated once |a q^k| < POCH_CUTOFF."""
    q = _require_nome(q)
    out = 1 + 0j
    term = complex(a)
    while abs(term) >= POCH_CUTOFF:
        out *= 1 - term
        term *= q
    return out


def poch_inf_multi(args: Sequence[complex], q: complex) -> complex:
    """(a1, a2, ...; q)_inf."""
    out = 1 + 0j
    for a in args:
        out *= poch_inf(a, q)
    return out


def certified_prefix(coeffs: np.ndarray) -> int:
    """Index of the last coefficient before the first one lost to underflow."""
    mags = np.abs(coeffs)
    bad = np.flatnonzero((mags > 0) & (mags < UNDERFLOW_FLOOR))
    return int(bad[0]) - 1 if bad.size else coeffs.size - 1


def poch_inf_series(a_coeff: complex, q: complex, power: int, M: int) -> LaurentSeries:
    """(a_coeff x^power; q)_inf expanded to M coefficients.

    Uses Euler's expansion, coefficient k = (-a)^k q^{k(k-1)/2} / (q;q)_k,
    built by the exact ratio recursion.  ``power`` is +1 (series in x) or
    -1 (series in 1/x).
    """
    q = _require_nome(q)
    if power not in (1, -1):
        raise ValueError(f"power must be +1 or -1, got {power}")
    if M < 1:
        raise ValueError(f"need at least one coefficient, got M={M}")
    a = complex(a_coeff)
    coeffs = np.zeros(M, dtype=np.complex128)
    coeffs[0] = 1
    for k in range(1, M):
        coeffs[k] = coeffs[k - 1] * (-a) * q ** (k - 1) / (1 - q**k)
    last = certified_prefix(coeffs)
    if last < 0:
        last = 0
    series = LaurentSeries(0, coeffs, 0, last, False, a != 0)
    return series if power == 1 else series_reflect(series)


def poly_pow(coeffs: Sequence[complex], n: int) -> np.ndarray:
    """Ascending coefficients of p(x)^n."""
    return np.polynomial.polynomial.polypow(np.asarray(coeffs, dtype=np.complex128), n)


def principal_log_ratio(z: complex, q: complex) -> float:
    """Real part of log(z)/log(q): the q-power that carries |1| to |z|."""
    return cmath.log(z).real / cmath.log(q).real
