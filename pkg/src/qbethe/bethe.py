"""
bethe.py — Bethe-Ansatz equations and the transfer-matrix polynomial.

Solves the BAE for the S zeros of Q(x) by damped Newton iteration, reads the
TQ relation as a definition of t(x) by exact polynomial long division, and
validates the fixed endpoint coefficients of t(x).
"""

from __future__ import annotations

import cmath
import itertools
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    DegenerateRoots,
    NonVanishingRemainder,
    RootFindFailure,
    StructureViolation,
)
from .qseries import LaurentSeries, ModelParams, poly_pow, relative_residual

#: Newton iteration budget per seed.
DEFAULT_MAX_ITER = 200

#: Convergence threshold on the scaled sup-norm of the BAE residual.
DEFAULT_BAE_TOL = 1e-10

#: Relative tolerance for the division remainder and the t(x) endpoints.
DEFAULT_STRUCTURE_TOL = 1e-9

#: Roots closer than this times max(1, |x|) are coincident.
COINCIDENCE_TOL = 1e-6

#: Relative gap below which two moduli tie in the canonical order.
ORDER_TOL = 1e-8

DEFAULT_ATTEMPTS = 64
DEFAULT_RNG_SEED = 12345

# Multistart annulus for random seeds.
SEED_RADII = (0.1, 10.0)

_MAX_HALVINGS = 30


@dataclass(frozen=True, eq=False)
class BetheState:
    """A solved state: roots of Q, Q itself, kappa and t(x)."""

    params: ModelParams
    roots: tuple[complex, ...]
    q_coeffs: np.ndarray
    """Ascending coefficients of Q(x) = prod_j (1 - x/x_j); Q(0) = 1."""
    kappa: complex
    """Leading coefficient of Q, i.e. Q(x)/x^S at infinity."""
    t_coeffs: np.ndarray
    """Ascending coefficients t_0 .. t_N of t(x)."""

    def Q(self, x: complex) -> complex:
        return complex(P.polyval(complex(x), self.q_coeffs))

    def t(self, x: complex) -> complex:
        return complex(P.polyval(complex(x), self.t_coeffs))

    def q_series(self) -> LaurentSeries:
        return LaurentSeries.exact(self.q_coeffs)

    def t_series(self) -> LaurentSeries:
        return LaurentSeries.exact(self.t_coeffs)

    def as_dict(self) -> dict:
        return {
            "roots": [[z.real, z.imag] for z in self.roots],
            "kappa": [self.kappa.real, self.kappa.imag],
            "t": [[complex(c).real, complex(c).imag] for c in self.t_coeffs],
        }


# ---------------------------------------------------------------------------
# Polynomial pieces of the TQ relation
# ---------------------------------------------------------------------------


def q_poly_coeffs(roots: Sequence[complex]) -> np.ndarray:
    """Ascending coefficients of prod_j (1 - x/x_j)."""
    if len(roots) == 0:
        return np.array([1.0 + 0j])
    monic = P.polyfromroots(np.asarray(roots, dtype=np.complex128))
    return monic * np.prod([-1 / complex(r) for r in roots])


def a_poly(params: ModelParams) -> np.ndarray:
    """(1 - xi x)^N."""
    return poly_pow([1, -params.xi], params.N)


def d_poly(params: ModelParams) -> np.ndarray:
    """omega q^S (xi - x)^N."""
    return params.omega * params.q**params.S * poly_pow([params.xi, -1], params.N)


def _dilated(coeffs: np.ndarray, c: complex) -> np.ndarray:
    """Coefficients of p(c x)."""
    return coeffs * np.array([c**k for k in range(coeffs.size)], dtype=np.complex128)


def tq_numerator(params: ModelParams, q_coeffs: np.ndarray) -> np.ndarray:
    """(1 - xi x)^N Q(q x) + omega q^S (xi - x)^N Q(x/q)."""
    q = params.q
    return P.polyadd(
        P.polymul(a_poly(params), _dilated(q_coeffs, q)),
        P.polymul(d_poly(params), _dilated(q_coeffs, 1 / q)),
    )


# ---------------------------------------------------------------------------
# Root bookkeeping
# ---------------------------------------------------------------------------


def _coincident(a: complex, b: complex) -> bool:
    return abs(a - b) < COINCIDENCE_TOL * max(1.0, abs(a), abs(b))


def check_distinct(roots: Sequence[complex]) -> None:
    """Raise DegenerateRoots if roots vanish or coincide."""
    for r in roots:
        if abs(r) < 1e-12:
            raise DegenerateRoots(f"root {r} is zero")
    for a, b in itertools.combinations(roots, 2):
        if _coincident(a, b):
            raise DegenerateRoots(f"roots {a} and {b} coincide")


def check_nondegenerate(roots: Sequence[complex], q: complex) -> None:
    """Distinct, non-zero, and no root on a q-power shift of another."""
    check_distinct(roots)
    log_q = abs(cmath.log(q).real)
    for a, b in itertools.permutations(roots, 2):
        k = round(cmath.log(a / b).real / -log_q)
        if k != 0 and _coincident(a, q**k * b):
            raise DegenerateRoots(f"root {a} is q^{k} times root {b}")


def canonical_order(roots: Iterable[complex]) -> tuple[complex, ...]:
    """Sort by |x|, then by arg x among roots of equal modulus.

    Moduli within ORDER_TOL count as equal, so a conjugate pair whose moduli
    differ in the last digits always comes out in the same order.
    """
    out: list[complex] = []
    group: list[complex] = []
    for z in sorted((complex(r) for r in roots), key=abs):
        if group and abs(z) - abs(group[0]) > ORDER_TOL * max(1.0, abs(z)):
            out += sorted(group, key=cmath.phase)
            group = []
        group.append(z)
    out += sorted(group, key=cmath.phase)
    return tuple(out)


# ---------------------------------------------------------------------------
# BAE residual and Jacobian
# ---------------------------------------------------------------------------


def _prod_except(y: complex, roots: Sequence[complex], skip: Iterable[int]) -> complex:
    skipped = set(skip)
    out = 1 + 0j
    for idx, r in enumerate(roots):
        if idx not in skipped:
            out *= 1 - y / r
    return out


def bae_terms(
    params: ModelParams, roots: Sequence[complex]
) -> tuple[np.ndarray, np.ndarray]:
    """The two terms of each BAE: A(x_j) Q(q x_j) and D(x_j) Q(x_j/q)."""
    q, xi, N = params.q, params.xi, params.N
    d0 = params.omega * q**params.S
    left = np.empty(len(roots), dtype=np.complex128)
    right = np.empty(len(roots), dtype=np.complex128)
    for j, x in enumerate(roots):
        left[j] = (1 - xi * x) ** N * _prod_except(q * x, roots, ())
        right[j] = d0 * (xi - x) ** N * _prod_except(x / q, roots, ())
    return left, right


def bae_residual(params: ModelParams, roots: Sequence[complex]) -> np.ndarray:
    """F_j = (1 - xi x_j)^N Q(q x_j) + omega q^S (xi - x_j)^N Q(x_j/q)."""
    roots = [complex(r) for r in roots]
    if len(roots) != params.S:
        raise ValueError(f"expected {params.S} roots, got {len(roots)}")
    check_distinct(roots)
    left, right = bae_terms(params, roots)
    return left + right


def bae_scaled_residual(params: ModelParams, roots: Sequence[complex]) -> float:
    """max_j |F_j| / (|A_j Q(q x_j)| + |D_j Q(x_j/q)|)."""
    if params.S == 0:
        return 0.0
    roots = [complex(r) for r in roots]
    check_distinct(roots)
    left, right = bae_terms(params, roots)
    scale = np.abs(left) + np.abs(right)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(scale > 0, np.abs(left + right) / scale, 0.0)
    return float(np.max(ratios))


def bae_jacobian(params: ModelParams, roots: Sequence[complex]) -> np.ndarray:
    """Analytic complex Jacobian dF_j/dx_k.

    With the j-th factor of Q pulled out, F_j = (1-q) A(x_j) R_j(q x_j)
    + (1-1/q) D(x_j) R_j(x_j/q) where R_j omits root j.
    """
    q, xi, N = params.q, params.xi, params.N
    d0 = params.omega * q**params.S
    roots = [complex(r) for r in roots]
    S = len(roots)
    jac = np.zeros((S, S), dtype=np.complex128)
    for j, x in enumerate(roots):
        A = (1 - xi * x) ** N
        dA = -N * xi * (1 - xi * x) ** (N - 1)
        D = d0 * (xi - x) ** N
        dD = -N * d0 * (xi - x) ** (N - 1)
        yu, yd = q * x, x / q

        def r_prime(y: complex, j=j) -> complex:
            return sum(
                (-1 / roots[ell]) * _prod_except(y, roots, (j, ell))
                for ell in range(S)
                if ell != j
            )

        jac[j, j] = (1 - q) * (
            dA * _prod_except(yu, roots, (j,)) + A * q * r_prime(yu)
        ) + (1 - 1 / q) * (dD * _prod_except(yd, roots, (j,)) + D / q * r_prime(yd))
        for k in range(S):
            if k == j:
                continue
            xk = roots[k]
            jac[j, k] = (1 - q) * A * (yu / xk**2) * _prod_except(yu, roots, (j, k)) + (
                1 - 1 / q
            ) * D * (yd / xk**2) * _prod_except(yd, roots, (j, k))
    return jac


# ---------------------------------------------------------------------------
# t(x) from a Bethe state
# ---------------------------------------------------------------------------


def build_t(
    params: ModelParams,
    roots: Sequence[complex],
    tol: float = DEFAULT_STRUCTURE_TOL,
) -> BetheState:
    """Divide the TQ numerator by Q(x) and validate the endpoints of t(x)."""
    roots = canonical_order(roots)
    if len(roots) != params.S:
        raise ValueError(f"expected {params.S} roots, got {len(roots)}")
    check_distinct(roots)
    q_coeffs = q_poly_coeffs(roots)
    numerator = tq_numerator(params, q_coeffs)
    quotient, remainder = P.polydiv(numerator, q_coeffs)

    scale = float(np.max(np.abs(numerator)))
    rem = float(np.max(np.abs(remainder)))
    if rem > tol * scale:
        raise NonVanishingRemainder(
            f"TQ division remainder {rem:.3e} exceeds {tol:.1e} of {scale:.3e}; "
            "roots do not solve the BAE"
        )

    t_coeffs = np.zeros(params.N + 1, dtype=np.complex128)
    t_coeffs[: min(quotient.size, params.N + 1)] = quotient[: params.N + 1]

    N, S = params.N, params.S
    t0 = 1 + params.twist
    tN = (-1) ** N * (params.omega + params.q**S * params.xi**N)
    for label, got, want in (("t_0", t_coeffs[0], t0), ("t_N", t_coeffs[N], tN)):
        if relative_residual(got - want, got, want) > tol:
            raise StructureViolation(f"{label} = {got}, expected {want}")

    return BetheState(
        params=params,
        roots=roots,
        q_coeffs=q_coeffs,
        kappa=complex(q_coeffs[-1]),
        t_coeffs=t_coeffs,
    )


def tq_residual(state: BetheState) -> float:
    """Largest relative coefficient residual of t Q - A Q(qx) - D Q(x/q)."""
    params, qc = state.params, state.q_coeffs
    tq = P.polymul(state.t_coeffs, qc)
    up = P.polymul(a_poly(params), _dilated(qc, params.q))
    down = P.polymul(d_poly(params), _dilated(qc, 1 / params.q))
    size = max(tq.size, up.size, down.size)
    tq, up, down = (np.pad(c, (0, size - c.size)) for c in (tq, up, down))
    return max(
        relative_residual(a - b - c, a, b, c)
        for a, b, c in zip(tq, up, down, strict=True)
    )


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------


def _newton(
    params: ModelParams, seed: Sequence[complex], max_iter: int, tol: float
) -> np.ndarray | None:
    x = np.asarray(seed, dtype=np.complex128)
    try:
        current = bae_scaled_residual(params, x)
    except DegenerateRoots:
        return None
    with np.errstate(all="ignore"):
        for it in range(max_iter):
            if current < tol:
                logging.debug("Newton converged after %d steps (%.2e)", it, current)
                return x
            F = bae_residual(params, x)
            try:
                delta = np.linalg.solve(bae_jacobian(params, x), -F)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(delta)):
                return None
            step = 1.0
            for _ in range(_MAX_HALVINGS):
                trial = x + step * delta
                try:
                    value = bae_scaled_residual(params, trial)
                except (DegenerateRoots, OverflowError, ZeroDivisionError):
                    value = np.inf
                if np.isfinite(value) and value < current:
                    x, current = trial, value
                    break
                step /= 2
            else:
                return None
    return x if current < tol else None


def _multistart_seeds(S: int, attempts: int, rng_seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(rng_seed)
    lo, hi = np.log(SEED_RADII[0]), np.log(SEED_RADII[1])
    seeds = []
    for _ in range(attempts):
        radius = np.exp(rng.uniform(lo, hi, S))
        angle = rng.uniform(0, 2 * np.pi, S)
        seeds.append(radius * np.exp(1j * angle))
    return seeds


def _converged_states(
    params: ModelParams,
    seeds: Sequence[Sequence[complex]],
    attempts: int,
    rng_seed: int,
    max_iter: int,
    tol: float,
    first_only: bool,
) -> list[BetheState]:
    candidates = [np.asarray(s, dtype=np.complex128) for s in seeds]
    candidates += _multistart_seeds(params.S, attempts, rng_seed)
    states: list[BetheState] = []
    degenerate = 0
    for idx, seed in enumerate(candidates):
        if seed.size != params.S:
            raise ValueError(f"seed {idx} has {seed.size} roots, expected {params.S}")
        roots = _newton(params, seed, max_iter, tol)
        if roots is None:
            continue
        try:
            check_nondegenerate(roots, params.q)
            state = build_t(params, roots)
        except (DegenerateRoots, NonVanishingRemainder, StructureViolation) as e:
            logging.debug("Seed %d converged to a rejected set: %s", idx, e)
            degenerate += 1
            continue
        if any(same_roots(state.roots, s.roots) for s in states):
            continue
        logging.info("Bethe state from seed %d: roots %s", idx, state.roots)
        states.append(state)
        if first_only:
            break
    if not states:
        if degenerate:
            raise DegenerateRoots(
                f"{degenerate} seed(s) converged only to degenerate roots"
            )
        raise RootFindFailure(
            f"no seed converged within {max_iter} iterations ({len(candidates)} tried)"
        )
    return states


def same_roots(a: Sequence[complex], b: Sequence[complex]) -> bool:
    """True if a and b pair off one to one as coincident roots, in any order."""
    if len(a) != len(b):
        return False
    unused = list(b)
    for x in a:
        match = next((i for i, y in enumerate(unused) if _coincident(x, y)), None)
        if match is None:
            return False
        del unused[match]
    return True


def solve_bae(
    params: ModelParams,
    seeds: Sequence[Sequence[complex]] = (),
    *,
    attempts: int = DEFAULT_ATTEMPTS,
    rng_seed: int = DEFAULT_RNG_SEED,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_BAE_TOL,
) -> BetheState:
    """First converged, non-degenerate Bethe state.

    User seeds are tried in order, then ``attempts`` random seeds drawn with
    a fixed RNG seed from the annulus 0.1 < |x| < 10.
    """
    if params.S == 0:
        return build_t(params, [])
    return _converged_states(params, seeds, attempts, rng_seed, max_iter, tol, True)[0]


def enumerate_states(
    params: ModelParams,
    seeds: Sequence[Sequence[complex]] = (),
    *,
    attempts: int = DEFAULT_ATTEMPTS,
    rng_seed: int = DEFAULT_RNG_SEED,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_BAE_TOL,
) -> list[BetheState]:
    """Every distinct state reached from the seeds, in seed priority order.

    No claim of completeness.  States sharing t(x) are logged, not merged.
    """
    if params.S == 0:
        return [build_t(params, [])]
    states = _converged_states(params, seeds, attempts, rng_seed, max_iter, tol, False)
    for a, b in itertools.combinations(states, 2):
        gap = np.max(np.abs(a.t_coeffs - b.t_coeffs))
        if gap < COINCIDENCE_TOL * max(1.0, float(np.max(np.abs(a.t_coeffs)))):
            logging.warning("States %s and %s share t(x)", a.roots, b.roots)
    return states


def _max_jump(new: Sequence[complex], old: Sequence[complex]) -> float:
    """Largest relative displacement under the best matching of roots."""
    if not old:
        return 0.0
    return min(
        max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(perm, old, strict=True))
        for perm in itertools.permutations(new)
    )


def track_omega(
    params: ModelParams,
    roots: Sequence[complex],
    omegas: Sequence[complex],
    max_jump: float = 0.5,
    *,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_BAE_TOL,
) -> list[BetheState]:
    """Follow a state along a path of fields, seeding each step with the last.

    Raises RootFindFailure if a step fails or any root moves further than
    ``max_jump * max(1, |x|)``.
    """
    previous = canonical_order(roots)
    path = []
    for omega in omegas:
        step_params = replace(params, omega=complex(omega))
        state = solve_bae(
            step_params, [previous], attempts=0, max_iter=max_iter, tol=tol
        )
        jump = _max_jump(state.roots, previous)
        if jump > max_jump:
            raise RootFindFailure(f"roots jumped by {jump:.3e} at omega={omega}")
        logging.debug("omega=%s: roots %s (jump %.2e)", omega, state.roots, jump)
        path.append(state)
        previous = state.roots
    return path
