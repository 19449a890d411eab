"""
app.py — Pipeline orchestration.

Sets up logging, builds the check router and runs the solve, verify,
identity and emit commands over the configured grid.  Grid points are
processed concurrently; records are assembled in grid order.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import NamedTuple

from dotenv import load_dotenv

from .bethe import BetheState, bae_scaled_residual, enumerate_states, solve_bae
from .checks import (
    Bae2Check,
    BaeCheck,
    CheckOutcome,
    CheckRouter,
    HqCheck,
    HSolvedCheck,
    OnePsiOneCheck,
    PointContext,
    Q2Check,
    RrCheck,
    RrgenCheck,
    ThetaCheck,
)
from .config import RunConfig, Settings
from .errors import ConfigError, NumericalFailure
from .hfun import compute_hpair
from .identities import (
    IdentityReport,
    onepsi1_check,
    orbit_points,
    rrgen_check,
    sample_probes,
)
from .qseries import LaurentSeries, ModelParams
from .report import write_report, write_series_csv
from .wronskian import compute_theta, extract_zeros

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

SERIES_CHOICES = ("H", "Hprime", "Theta", "Q", "t")

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------


def configure_logging(verbose: bool = False) -> None:
    """Load .env, then configure the root logger once for the CLI."""
    load_dotenv()
    level = os.environ.get("QBETHE_LOG_LEVEL", "INFO").strip().upper() or "INFO"
    if verbose:
        level = "DEBUG"
    if level not in logging.getLevelNamesMapping():
        raise ConfigError(f"QBETHE_LOG_LEVEL: unknown level {level!r}")
    logging.basicConfig(level=level, format=LOG_FORMAT)


# ---------------------------------------------------------------------------
# Router
# ---------------------------------------------------------------------------


def build_router() -> CheckRouter:
    """Register every pluggable check by name."""
    checks = [
        BaeCheck(),
        HqCheck(),
        ThetaCheck(),
        Q2Check(),
        Bae2Check(),
        RrCheck(),
        OnePsiOneCheck(),
        RrgenCheck(),
        HSolvedCheck(),
    ]
    return CheckRouter(checks={c.name: c for c in checks})


# ---------------------------------------------------------------------------
# Per-point work
# ---------------------------------------------------------------------------


def _error_record(base: dict, check: str, error: NumericalFailure) -> dict:
    return {
        **base,
        "check": check,
        "status": "error",
        "error": type(error).__name__,
        "message": str(error),
    }


def find_states(params: ModelParams, config: RunConfig) -> list[BetheState]:
    """The first state, or every distinct one, as the config asks."""
    seeds = [s for s in config.seeds if len(s) == params.S]
    s = config.settings
    solver = enumerate_states if s.states == "all" else solve_bae
    found = solver(params, seeds, attempts=s.attempts, rng_seed=s.rng_seed)
    return found if isinstance(found, list) else [found]


def build_context(state: BetheState, settings: Settings) -> PointContext:
    """Compute H, H', Theta and the probes for one state.

    A failure in H or Theta is stored on the context so that only the checks
    needing them report it.
    """
    params = state.params
    context = PointContext(params=params, state=state, settings=settings)
    avoid = list(state.roots)
    try:
        context.hpair = compute_hpair(params, state.t_coeffs, settings.truncation)
        theta = compute_theta(params, context.hpair)
        context.theta = extract_zeros(theta, params, settings.tolerance)
        avoid += list(context.theta.zeros)
    except NumericalFailure as e:
        logging.warning("H/Theta unavailable at %s: %s", params, e)
        context.failure = e
    if params.xi != 0:
        avoid += [params.xi, 1 / params.xi]
    context.probes = sample_probes(
        settings.probe_count,
        settings.probe_seed,
        orbit_points(avoid, params.q),
    )
    return context


def solve_point(index: int, params: ModelParams, config: RunConfig) -> list[dict]:
    base = {"index": index, "params": params.as_dict()}
    try:
        states = find_states(params, config)
    except NumericalFailure as e:
        logging.warning("point %d: no Bethe state: %s", index, e)
        return [_error_record({**base, "state": None}, "solve", e)]
    return [
        {
            **base,
            "state": n,
            **state.as_dict(),
            "check": "solve",
            "status": "pass",
            "max_residual": bae_scaled_residual(params, state.roots),
        }
        for n, state in enumerate(states)
    ]


def verify_point(
    index: int, params: ModelParams, config: RunConfig, router: CheckRouter
) -> list[dict]:
    base = {"index": index, "params": params.as_dict()}
    try:
        states = find_states(params, config)
    except NumericalFailure as e:
        logging.warning("point %d: no Bethe state: %s", index, e)
        return [_error_record({**base, "state": None}, "solve", e)]
    records = []
    for n, state in enumerate(states):
        try:
            context = build_context(state, config.settings)
        except NumericalFailure as e:
            logging.warning("point %d state %d: %s", index, n, e)
            records.append(_error_record({**base, "state": n}, "probes", e))
            continue
        for outcome in router.dispatch(list(config.checks), context):
            records.append(
                {**base, "state": n, **state.as_dict(), **outcome.as_dict()}
            )
    return records


# ---------------------------------------------------------------------------
# Identity grid
# ---------------------------------------------------------------------------


def _identity_record(index: int, name: str, report: IdentityReport) -> dict:
    outcome = CheckOutcome(name, "pass" if report.passed else "fail", report)
    return {"index": index, "state": None, **outcome.as_dict()}


def identity_point(index: int, point: tuple, settings: Settings) -> dict:
    """onepsi1 for scalar a and b, rrgen with f = 1 for lists."""
    a, b, z, q = point
    if isinstance(a, tuple) != isinstance(b, tuple):
        raise ConfigError("identity: a and b must both be scalars or both lists")
    name = "rrgen" if isinstance(a, tuple) else "onepsi1"
    if isinstance(z, tuple) or isinstance(q, tuple):
        raise ConfigError("identity: z and q must be scalars")
    if q == 0 or abs(q) >= 1:
        raise ConfigError(f"identity.q: need 0 < |q| < 1, got {q}")
    if name == "rrgen" and (len(a) != len(b) or not a):
        raise ConfigError("identity: a and b lists must be non-empty and equal length")
    try:
        if name == "onepsi1":
            report = onepsi1_check(
                a,
                b,
                z,
                q,
                settings.bilateral,
                K_max=settings.bilateral_max,
                tol=settings.tolerance,
            )
        else:
            probes = sample_probes(
                settings.probe_count,
                settings.probe_seed,
                orbit_points(list(a) + list(b), q),
            )
            report = rrgen_check(
                a,
                b,
                z,
                q,
                "unit",
                probes,
                settings.bilateral,
                K_max=settings.bilateral_max,
                tol=max(settings.tolerance, 1e-7),
            )
    except NumericalFailure as e:
        logging.warning("identity point %d: %s", index, e)
        return _error_record({"index": index, "state": None}, name, e)
    return _identity_record(index, name, report)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


class PipelineResult(NamedTuple):
    records: list[dict]
    status: int
    report: Path | None


def exit_status(records: list[dict]) -> int:
    """3 if anything errored, else 1 if anything failed, else 0."""
    statuses = {r.get("status") for r in records}
    if "error" in statuses:
        return EXIT_NUMERICAL_FAILURE
    if "fail" in statuses:
        return EXIT_CHECK_FAILURE
    return EXIT_PASS


def collect_records(config: RunConfig, command: str = "verify") -> list[dict]:
    """Run the command over the grid and return records in grid order."""
    if command == "identity":
        points = config.identity.points()
        if not points:
            raise ConfigError("identity: section with a, b, z and q is required")
        tasks = [
            (identity_point, (i, p, config.settings)) for i, p in enumerate(points)
        ]
    elif command in ("solve", "verify"):
        router = build_router()
        tasks = [
            (solve_point, (i, p, config))
            if command == "solve"
            else (verify_point, (i, p, config, router))
            for i, p in enumerate(config.points())
        ]
    else:
        raise ConfigError(f"unknown command {command!r}")

    logging.info(
        "Running %s over %d point(s) with %d worker(s)",
        command,
        len(tasks),
        config.workers,
    )
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = list(pool.map(lambda task: task[0](*task[1]), tasks))

    records: list[dict] = []
    for result in results:
        records.extend(result if isinstance(result, list) else [result])
    return records


def run_pipeline(config: RunConfig, command: str = "verify") -> PipelineResult:
    """Run a grid command, write the report and summary, return the exit status."""
    records = collect_records(config, command)
    path = write_report(records, config.output_path, config.output_format)
    status = exit_status(records)
    logging.info("%s finished with exit status %d", command, status)
    return PipelineResult(records, status, path)


# ---------------------------------------------------------------------------
# Series dump
# ---------------------------------------------------------------------------


def series_for(config: RunConfig, which: str) -> LaurentSeries:
    """The named object at the single grid point, first Bethe state."""
    if which not in SERIES_CHOICES:
        raise ConfigError(f"which: expected one of {SERIES_CHOICES}, got {which!r}")
    points = config.points()
    if len(points) != 1:
        raise ConfigError(f"params: emit needs a single grid point, got {len(points)}")
    params = points[0]
    state = find_states(params, config)[0]
    if which == "Q":
        return state.q_series()
    if which == "t":
        return state.t_series()
    hpair = compute_hpair(params, state.t_coeffs, config.settings.truncation)
    if which == "H":
        return hpair.h_series()
    if which == "Hprime":
        return hpair.hp_series()
    return compute_theta(params, hpair)


def emit_series(config: RunConfig, which: str) -> Path:
    """Write ``<which>.csv`` with columns power,re,im,trusted."""
    series = series_for(config, which)
    return write_series_csv(series, config.output_path / f"{which}.csv")
