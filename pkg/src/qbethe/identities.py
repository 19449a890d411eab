"""
identities.py — Numerical verification of the H/Q/Theta identities.

Every check returns an :class:`IdentityReport`.  Coefficient-wise checks use
the power of x as the sample "probe"; pointwise checks use the probe point.
All bilateral sums go through :func:`bilateral_sum`, so the same sum reached
through different identities is computed by identical arithmetic.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bethe import BetheState
from .errors import (
    NonConvergentTail,
    PoleHit,
    ProbeAtPole,
    RegionViolation,
    ZeroDenominator,
)
from .hfun import HPair
from .qseries import (
    DEFAULT_TOLERANCE,
    POLE_TOL,
    LaurentSeries,
    ModelParams,
    complex_repr,
    poch_inf,
    poch_inf_multi,
    poch_inf_series,
    poly_pow,
    series_dilate,
    series_mul,
    series_pow,
    series_prod,
    series_scale,
    series_sub,
)
from .wronskian import ThetaData, theta_terms

#: Initial truncation of bilateral sums.
DEFAULT_BILATERAL = 40

#: Largest truncation reached by doubling.
DEFAULT_BILATERAL_MAX = 320

#: Tail terms inspected on each side of a bilateral sum.
TAIL_TERMS = 5

#: Each inspected tail term must be below this fraction of the partial sum.
TAIL_TOL = 1e-12

#: |Theta(x)| below this fraction of its term scale makes x a pole of Q2.
PROBE_POLE_TOL = 1e-10

DEFAULT_PROBE_COUNT = 10
DEFAULT_PROBE_SEED = 20240601
PROBE_ANNULUS = (0.4, 1.6)

#: Probes closer than this to a pole or zero are redrawn.
PROBE_CLEARANCE = 1e-3


class Sample(NamedTuple):
    probe: complex
    lhs: complex
    rhs: complex
    residual: float


@dataclass(frozen=True)
class IdentityReport:
    name: str
    samples: tuple[Sample, ...]
    tolerance: float
    passed: bool
    context: dict = field(default_factory=dict)

    @property
    def residuals(self) -> list[tuple[complex, float]]:
        return [(s.probe, s.residual) for s in self.samples]

    @property
    def max_residual(self) -> float:
        return max((s.residual for s in self.samples), default=0.0)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "samples": [
                {
                    "probe": complex_repr(s.probe),
                    "lhs": complex_repr(s.lhs),
                    "rhs": complex_repr(s.rhs),
                    "residual": s.residual,
                }
                for s in self.samples
            ],
            "context": self.context,
        }


def _relative(lhs: complex, rhs: complex) -> float:
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def make_report(
    name: str, samples: Sequence[Sample], tol: float, context: dict | None = None
) -> IdentityReport:
    passed = all(s.residual < tol for s in samples)
    report = IdentityReport(name, tuple(samples), tol, passed, context or {})
    log = logging.info if passed else logging.warning
    verdict = "pass" if passed else "FAIL"
    log("%s: %s (max residual %.2e)", name, verdict, report.max_residual)
    return report


# ---------------------------------------------------------------------------
# Probe sampling
# ---------------------------------------------------------------------------


def orbit_points(
    points: Sequence[complex], q: complex, annulus: tuple[float, float] = PROBE_ANNULUS
) -> list[complex]:
    """Every q^k z of the given points that falls in (a widened) annulus."""
    lo, hi = annulus[0] / 2, annulus[1] * 2
    out = []
    for z in points:
        if z == 0:
            continue
        y = complex(z)
        while abs(y) > lo:
            y *= q
        while abs(y) <= hi:
            if abs(y) > lo:
                out.append(y)
            y /= q
    return out


def sample_probes(
    count: int = DEFAULT_PROBE_COUNT,
    seed: int = DEFAULT_PROBE_SEED,
    avoid: Sequence[complex] = (),
    annulus: tuple[float, float] = PROBE_ANNULUS,
) -> list[complex]:
    """Reproducible probe points in the annulus, clear of ``avoid``."""
    rng = np.random.default_rng(seed)
    probes: list[complex] = []
    for _ in range(1000 * max(count, 1)):
        if len(probes) == count:
            return probes
        r = rng.uniform(*annulus)
        x = complex(r * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        if all(abs(x - p) > PROBE_CLEARANCE * max(1.0, abs(p)) for p in avoid):
            probes.append(x)
    if len(probes) == count:
        return probes
    raise ProbeAtPole(f"could only place {len(probes)} of {count} probes")


# ---------------------------------------------------------------------------
# Bilateral sums
# ---------------------------------------------------------------------------


class BilateralSum(NamedTuple):
    value: complex
    positive: complex
    """Sum over n >= 0."""
    negative: complex
    """Sum over n < 0."""
    K: int


class _Side:
    """Terms z^n f(q^n x) prod_k (u_k; q)_n / (l_k; q)_n on one side of n = 0."""

    def __init__(
        self,
        uppers: Sequence[complex],
        lowers: Sequence[complex],
        z: complex,
        q: complex,
        weight: Callable[[int], complex],
        forward: bool,
    ):
        self.uppers = [complex(u) for u in uppers]
        self.lowers = [complex(v) for v in lowers]
        self.z, self.q = complex(z), complex(q)
        self.weight = weight
        self.forward = forward
        self.core = 1 + 0j
        self.n = 0 if forward else -1
        self.terms: list[complex] = []

    def _step(self) -> None:
        # core holds z^n (u;q)_n/(l;q)_n for the next n to be emitted.
        q, n = self.q, self.n
        if self.forward:
            if n > 0:
                self.core *= self.z
                for u, v in zip(self.uppers, self.lowers, strict=True):
                    den = 1 - v * q ** (n - 1)
                    if abs(den) < POLE_TOL:
                        raise PoleHit(f"(l;q)_{n} vanishes for l={v}")
                    self.core *= (1 - u * q ** (n - 1)) / den
        else:
            self.core /= self.z
            for u, v in zip(self.uppers, self.lowers, strict=True):
                den = 1 - u * q**n
                if abs(den) < POLE_TOL:
                    raise PoleHit(f"(u;q)_{n} has a pole for u={u}")
                self.core *= (1 - v * q**n) / den
        try:
            term = self.core * self.weight(n)
        except ZeroDivisionError as e:
            raise PoleHit(f"weight f has a pole at n={n}") from e
        self.terms.append(term)
        self.n += 1 if self.forward else -1

    def extend(self, count: int) -> None:
        while len(self.terms) < count:
            self._step()


def _tail_ok(terms: Sequence[complex], total: complex) -> bool:
    tail = [abs(t) for t in terms[-TAIL_TERMS:]]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:], strict=False))
    return decreasing and all(t <= TAIL_TOL * abs(total) for t in tail)


def bilateral_sum(
    uppers: Sequence[complex],
    lowers: Sequence[complex],
    z: complex,
    q: complex,
    f: Callable[[complex], complex] | None = None,
    x: complex = 1.0,
    K: int = DEFAULT_BILATERAL,
    K_max: int = DEFAULT_BILATERAL_MAX,
    one_sided: bool = False,
) -> BilateralSum:
    """sum_n z^n f(q^n x) prod_k (u_k;q)_n/(l_k;q)_n with certified tails.

    The Pochhammer ratios are built factor by factor, so a vanishing factor
    of a lower symbol at negative n gives exact zeros.  K is doubled until
    the last TAIL_TERMS terms on each side decrease and sit below TAIL_TOL
    of the total, or K_max is exceeded.
    """
    if abs(z) >= 1:
        raise NonConvergentTail(f"|z| = {abs(z):.3f} >= 1: the n > 0 side diverges")
    if z == 0 and not one_sided:
        raise NonConvergentTail("z = 0: the n < 0 side is undefined")
    x, q = complex(x), complex(q)

    def weight(n: int) -> complex:
        return 1.0 if f is None else f(q**n * x)

    pos = _Side(uppers, lowers, z, q, weight, forward=True)
    neg = _Side(uppers, lowers, z, q, weight, forward=False)
    k = K
    while k <= K_max:
        pos.extend(k + 1)
        if not one_sided:
            neg.extend(k)
        positive = sum(pos.terms[: k + 1])
        negative = sum(neg.terms[:k]) if not one_sided else 0j
        total = positive + negative
        if _tail_ok(pos.terms[: k + 1], total) and (
            one_sided or _tail_ok(neg.terms[:k], total)
        ):
            logging.debug("bilateral sum certified with K=%d", k)
            return BilateralSum(complex(total), complex(positive), complex(negative), k)
        logging.debug("bilateral sum tail not certified at K=%d, doubling", k)
        k *= 2
    raise NonConvergentTail(f"tail decay not certified within K_max={K_max}")


# ---------------------------------------------------------------------------
# HQ Wronskians
# ---------------------------------------------------------------------------


def _coefficient_samples(lhs: LaurentSeries, rhs: LaurentSeries) -> list[Sample]:
    lo = max(lhs.trust_lo, rhs.trust_lo)
    hi = min(lhs.trust_hi, rhs.trust_hi)
    scale = max(lhs.norm(), rhs.norm())
    return [
        Sample(k, lhs.coeff(k), rhs.coeff(k), abs(lhs.coeff(k) - rhs.coeff(k)) / scale)
        for k in range(lo, hi + 1)
    ]


def hq_lines(
    state: BetheState, hpair: HPair
) -> tuple[tuple[LaurentSeries, LaurentSeries], ...]:
    """(lhs, rhs) series of both HQ Wronskian lines."""
    params, q = state.params, state.params.q
    N, S, M = params.N, params.S, hpair.M
    h, hp = hpair.h_series(), hpair.hp_series()
    Q = state.q_series()
    Qp = LaurentSeries.exact(state.q_coeffs, lo=-S)

    # H(x/q) Q(x) - omega q^S (xi - x)^N H(x) Q(x/q) = (1 - p)(xi x; q)^N
    d = LaurentSeries.exact(params.omega * q**S * poly_pow([params.xi, -1], N))
    lhs1 = series_sub(
        series_mul(series_dilate(h, 1 / q), Q),
        series_prod(d, h, series_dilate(Q, 1 / q)),
    )
    rhs1 = series_scale(
        series_pow(poch_inf_series(params.xi, q, 1, M + 1), N), 1 - params.twist
    )

    # H'(x) Q'(x/q) - omega^-1 q^S (xi - q/x)^N H'(x/q) Q'(x)
    #   = kappa (1 - p') (q xi / x; q)^N
    dp = LaurentSeries.exact(
        q**S / params.omega * poly_pow([params.xi, -q], N)[::-1], lo=-N
    )
    lhs2 = series_sub(
        series_mul(hp, series_dilate(Qp, 1 / q)),
        series_prod(dp, series_dilate(hp, 1 / q), Qp),
    )
    rhs2 = series_scale(
        series_pow(poch_inf_series(q * params.xi, q, -1, M + 1), N),
        state.kappa * (1 - params.twist_dual),
    )
    return (lhs1, rhs1), (lhs2, rhs2)


def hq_wronskian_check(
    state: BetheState, hpair: HPair, tol: float = DEFAULT_TOLERANCE
) -> IdentityReport:
    """Both HQ Wronskian lines, coefficient by coefficient."""
    samples = []
    windows = []
    for lhs, rhs in hq_lines(state, hpair):
        line = _coefficient_samples(lhs, rhs)
        samples += line
        windows.append([line[0].probe, line[-1].probe] if line else [])
    return make_report(
        "hq", samples, tol, {"params": state.params.as_dict(), "windows": windows}
    )


# ---------------------------------------------------------------------------
# Q reconstruction and the alternative quantisation
# ---------------------------------------------------------------------------


def _theta_at(theta: ThetaData, x: complex) -> complex:
    value, _, scale = theta_terms(theta.theta, x)
    if abs(value) < PROBE_POLE_TOL * scale:
        raise ProbeAtPole(f"Theta vanishes at probe {x}")
    return theta.value(x)


def q2_value(state: BetheState, hpair: HPair, theta: ThetaData, x: complex) -> complex:
    """Right-hand side of the Q reconstruction formula at x."""
    params = state.params
    q, N = params.q, params.N
    first = (
        (1 - params.twist)
        * hpair.Hp(x)
        * poch_inf(params.xi * x, q) ** N
        / _theta_at(theta, x)
    )
    second = (
        state.kappa
        * x**params.S
        * (1 - params.twist_dual)
        * hpair.H(x)
        * poch_inf(params.xi / x, q) ** N
        / _theta_at(theta, q * x)
    )
    return first + second


def reconstruct_q(
    state: BetheState,
    hpair: HPair,
    theta: ThetaData,
    probes: Sequence[complex],
    tol: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """Q(x) rebuilt from H, H' and Theta against the polynomial from the roots."""
    samples = []
    for x in probes:
        rhs = q2_value(state, hpair, theta, x)
        lhs = state.Q(x)
        samples.append(Sample(x, lhs, rhs, _relative(lhs, rhs)))
    return make_report("q2", samples, tol, {"params": state.params.as_dict()})


def bae2_ratio(hpair: HPair, z: complex) -> complex:
    """-H'(z)(xi z;q)^N / [z^S (-z)^N H(z) (xi/z;q)^N]: kappa' read off at z."""
    params = hpair.params
    q, N, S = params.q, params.N, params.S
    num = hpair.Hp(z) * poch_inf(params.xi * z, q) ** N
    den = z**S * (-z) ** N * hpair.H(z) * poch_inf(params.xi / z, q) ** N
    if abs(den) < POLE_TOL * max(1.0, abs(num)):
        raise ZeroDenominator(f"H(z) (xi/z;q)^N vanishes at theta zero {z}")
    return -num / den


def predicted_kappa_prime(state: BetheState) -> complex:
    """kappa omega (1 - p') / (1 - p), fixed by the residues of Q2 at the zeros."""
    p = state.params
    return state.kappa * p.omega * (1 - p.twist_dual) / (1 - p.twist)


def bae2_check(
    state: BetheState, hpair: HPair, theta: ThetaData, tol: float = 1e-7
) -> IdentityReport:
    """Pairwise agreement of kappa' over the theta zeros.

    With one zero there is nothing to compare and the check passes.
    """
    rhos = [bae2_ratio(hpair, z) for z in theta.zeros]
    samples = [
        Sample(theta.zeros[j], rhos[j], rhos[i], _relative(rhos[j], rhos[i]))
        for i in range(len(rhos))
        for j in range(i + 1, len(rhos))
    ]
    measured = rhos[0]
    predicted = predicted_kappa_prime(state)
    context = {
        "params": state.params.as_dict(),
        "kappa_prime": complex_repr(measured),
        "kappa_prime_predicted": complex_repr(predicted),
        "kappa_prime_residual": max(_relative(r, predicted) for r in rhos),
        "zeros": [complex_repr(z) for z in theta.zeros],
    }
    return make_report("bae2", samples, tol, context)


# ---------------------------------------------------------------------------
# Bilateral identities
# ---------------------------------------------------------------------------


class RRMapping(NamedTuple):
    a: tuple[complex, ...]
    b: tuple[complex, ...]
    z: complex


def rr_mapping(params: ModelParams) -> RRMapping:
    """a_k = xi, b_k = 1/xi, z = omega q^S xi^N."""
    if params.xi == 0:
        raise RegionViolation("the bilateral form needs xi != 0")
    N = params.N
    return RRMapping((params.xi,) * N, (1 / params.xi,) * N, params.twist)


def bethe_weight(state: BetheState) -> Callable[[complex], complex]:
    """f(x) = 1 / (Q(x/q) Q(x))."""
    q = state.params.q

    def f(x: complex) -> complex:
        return 1 / (state.Q(x / q) * state.Q(x))

    return f


def _psi(
    a_list: Sequence[complex],
    b_list: Sequence[complex],
    z: complex,
    q: complex,
    f: Callable[[complex], complex] | None,
    x: complex,
    K: int,
    K_max: int,
) -> BilateralSum:
    uppers = [x / a for a in a_list]
    lowers = [x / b for b in b_list]
    return bilateral_sum(uppers, lowers, z, q, f, x, K, K_max)


def rr_rhs(state: BetheState, theta: ThetaData, x: complex) -> complex:
    """(q/x)^S Theta(x) / [kappa (1-p)(1-p') (xi x;q)^N (q xi/x;q)^N]."""
    p = state.params
    q, N = p.q, p.N
    den = (
        state.kappa
        * (1 - p.twist)
        * (1 - p.twist_dual)
        * poch_inf(p.xi * x, q) ** N
        * poch_inf(q * p.xi / x, q) ** N
    )
    if abs(den) < POLE_TOL:
        raise PoleHit(f"Pochhammer denominator vanishes at {x}")
    return (q / x) ** p.S * theta.value(x) / den


def rr_check(
    state: BetheState,
    theta: ThetaData,
    probes: Sequence[complex],
    K: int = DEFAULT_BILATERAL,
    *,
    K_max: int = DEFAULT_BILATERAL_MAX,
    tol: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """The bilateral sum over Bethe data against its Theta closed form."""
    params = state.params
    if not params.convergent:
        raise NonConvergentTail(
            f"|p| = {abs(params.twist):.3f}, |p'| = {abs(params.twist_dual):.3f}: "
            "both must be below 1"
        )
    mapping = rr_mapping(params)
    f = bethe_weight(state)
    samples = []
    halves = []
    used = K
    for x in probes:
        total = _psi(mapping.a, mapping.b, mapping.z, params.q, f, x, K, K_max)
        rhs = rr_rhs(state, theta, x)
        samples.append(Sample(x, total.value, rhs, _relative(total.value, rhs)))
        halves.append([complex_repr(total.positive), complex_repr(total.negative)])
        used = max(used, total.K)
    context = {"params": params.as_dict(), "K": used, "half_sums": halves}
    return make_report("rr", samples, tol, context)


def _terminates_below(b: complex, q: complex, K_max: int) -> bool:
    """True if (b;q)_n has a zero factor that kills every term with n <= -m."""
    return any(abs(1 - b * q ** (-m)) < POLE_TOL for m in range(1, K_max + 1))


def onepsi1_rhs(a: complex, b: complex, z: complex, q: complex) -> complex:
    """(q, b/a, az, q/(az); q)_inf / (b, q/a, z, b/(az); q)_inf."""
    num = poch_inf_multi([q, b / a, a * z, q / (a * z)], q)
    den = poch_inf_multi([b, q / a, z, b / (a * z)], q)
    if abs(den) < POLE_TOL:
        raise PoleHit(f"1psi1 denominator vanishes for a={a}, b={b}, z={z}")
    return num / den


def onepsi1_check(
    a: complex,
    b: complex,
    z: complex,
    q: complex,
    K: int = DEFAULT_BILATERAL,
    *,
    K_max: int = DEFAULT_BILATERAL_MAX,
    tol: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """Bilateral 1psi1 sum against its infinite-product closed form."""
    a, b, z, q = complex(a), complex(b), complex(z), complex(q)
    if abs(z) >= 1:
        raise RegionViolation(f"|z| = {abs(z):.3f} must be below 1")
    if abs(b / a) >= abs(z) and not _terminates_below(b, q, K_max):
        raise RegionViolation(
            f"|b/a| = {abs(b / a):.3f} must be below |z| = {abs(z):.3f}"
        )
    total = bilateral_sum([a], [b], z, q, None, 1.0, K, K_max)
    rhs = onepsi1_rhs(a, b, z, q)
    context = {
        "a": complex_repr(a),
        "b": complex_repr(b),
        "z": complex_repr(z),
        "q": complex_repr(q),
        "K": total.K,
    }
    sample = Sample(z, total.value, rhs, _relative(total.value, rhs))
    return make_report("onepsi1", [sample], tol, context)


F_CHOICES = ("unit", "bethe")

RR_MAPPING_NOTE = "a_k = xi, b_k = 1/xi, z = omega q^S xi^N, f = 1/(Q(x/q) Q(x))"


def rrgen_check(
    a_list: Sequence[complex],
    b_list: Sequence[complex],
    z: complex,
    q: complex,
    f_id: str,
    probes: Sequence[complex],
    K: int = DEFAULT_BILATERAL,
    *,
    state: BetheState | None = None,
    theta: ThetaData | None = None,
    f: Callable[[complex], complex] | None = None,
    K_max: int = DEFAULT_BILATERAL_MAX,
    tol: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """Functional equations of psi and W, plus agreement with the RR form.

    psi(x) = sum_n z^n f(q^n x) prod_k (x/a_k;q)_n/(x/b_k;q)_n satisfies
    psi(x) = z prod_k (1 - x/a_k)/(1 - x/b_k) psi(qx) for any f, and
    W(x) = psi(x) prod_k (x/b_k;q)_inf (q a_k/x;q)_inf satisfies
    W(x) = z (-x)^N / prod_k a_k W(qx).  With f_id "bethe" and a ThetaData,
    psi is also compared with the Theta side of the RR identity.  An explicit
    ``f`` overrides the named choice.
    """
    if f_id not in F_CHOICES:
        raise ValueError(f"f_id must be one of {F_CHOICES}, got {f_id!r}")
    if len(a_list) != len(b_list) or not a_list:
        raise ValueError("a_list and b_list must be non-empty and of equal length")
    q, z = complex(q), complex(z)
    if f is None and f_id == "bethe":
        if state is None:
            raise ValueError("f_id 'bethe' needs a BetheState")
        f = bethe_weight(state)
    N = len(a_list)
    prod_a = complex(np.prod(np.asarray(a_list, dtype=np.complex128)))

    samples = []
    used = K
    for x in probes:
        here = _psi(a_list, b_list, z, q, f, x, K, K_max)
        there = _psi(a_list, b_list, z, q, f, q * x, K, K_max)
        used = max(used, here.K, there.K)
        ratio = z
        for a, b in zip(a_list, b_list, strict=True):
            ratio *= (1 - x / a) / (1 - x / b)
        rhs = ratio * there.value
        samples.append(Sample(x, here.value, rhs, _relative(here.value, rhs)))

        frame_x = poch_inf_multi(
            [x / b for b in b_list] + [q * a / x for a in a_list], q
        )
        frame_qx = poch_inf_multi(
            [q * x / b for b in b_list] + [a / x for a in a_list], q
        )
        w_here = here.value * frame_x
        w_rhs = z * (-x) ** N / prod_a * there.value * frame_qx
        samples.append(Sample(x, w_here, w_rhs, _relative(w_here, w_rhs)))

        if f_id == "bethe" and theta is not None and state is not None:
            rr = rr_rhs(state, theta, x)
            samples.append(Sample(x, here.value, rr, _relative(here.value, rr)))

    context = {
        "f": f_id,
        "a": [complex_repr(a) for a in a_list],
        "b": [complex_repr(b) for b in b_list],
        "z": complex_repr(z),
        "q": complex_repr(q),
        "K": used,
    }
    if f_id == "bethe" and state is not None:
        context["mapping"] = RR_MAPPING_NOTE
        context["params"] = state.params.as_dict()
    return make_report("rrgen", samples, tol, context)


# ---------------------------------------------------------------------------
# Solved forms of H and H'
# ---------------------------------------------------------------------------


def solved_h_check(
    state: BetheState,
    hpair: HPair,
    probes: Sequence[complex],
    K: int = DEFAULT_BILATERAL,
    *,
    K_max: int = DEFAULT_BILATERAL_MAX,
    tol: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """H(x/q) and H'(qx) from their unilateral sums over Q.

    H(x/q) = (1-p) Q(x/q) (xi x;q)^N sum_{n>=0} p^n (x/xi;q)_n^N
             / [Q(q^(n-1) x) Q(q^n x) (xi x;q)_n^N]
    H'(qx) = kappa (1-p') Q'(qx) (xi/x;q)^N sum_{n>=0} p'^n (1/(xi x);q)_n^N
             / [Q'(q^(n+1) x) Q'(q^n x) (xi/x;q)_n^N]
    """
    params = state.params
    q, N, S, xi = params.q, params.N, params.S, params.xi
    if xi == 0:
        raise RegionViolation("the solved forms need xi != 0")
    f = bethe_weight(state)

    def qp(y: complex) -> complex:
        return state.Q(y) / y**S

    def fp(y: complex) -> complex:
        return 1 / (qp(q * y) * qp(y))

    samples = []
    for x in probes:
        up = bilateral_sum(
            [x / xi] * N, [xi * x] * N, params.twist, q, f, x, K, K_max, one_sided=True
        )
        rhs = (1 - params.twist) * state.Q(x / q) * poch_inf(xi * x, q) ** N * up.value
        lhs = hpair.H(x / q)
        samples.append(Sample(x, lhs, rhs, _relative(lhs, rhs)))

        down = bilateral_sum(
            [1 / (xi * x)] * N,
            [xi / x] * N,
            params.twist_dual,
            q,
            fp,
            x,
            K,
            K_max,
            one_sided=True,
        )
        rhs = (
            state.kappa
            * (1 - params.twist_dual)
            * qp(q * x)
            * poch_inf(xi / x, q) ** N
            * down.value
        )
        lhs = hpair.Hp(q * x)
        samples.append(Sample(x, lhs, rhs, _relative(lhs, rhs)))
    return make_report("hsolved", samples, tol, {"params": params.as_dict()})
