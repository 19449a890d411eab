"""
config.py — Run configuration.

A run is described by a single YAML file.  Every scalar model parameter may
be given as a list, in which case the run covers the Cartesian product of
all lists.  Unknown keys are rejected so that a typo can never silently
change a verification campaign.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from .errors import ConfigError, ParameterError
from .qseries import DEFAULT_TOLERANCE, DEFAULT_TRUNCATION, ModelParams

yaml = YAML(typ="safe")

#: Every check the verify pipeline knows, in default execution order.
KNOWN_CHECKS = (
    "bae",
    "hq",
    "theta",
    "q2",
    "bae2",
    "rr",
    "onepsi1",
    "rrgen",
    "hsolved",
)
DEFAULT_CHECKS = ("bae", "hq", "theta", "q2", "bae2", "rr", "rrgen")

DEFAULT_GRID_LIMIT = 10_000
OUTPUT_FORMATS = ("json", "yaml")
PARAM_FIELDS = ("q", "xi", "omega", "N", "S")

_TOP_KEYS = {
    "params",
    "seeds",
    "truncation",
    "bilateral",
    "bilateral_max",
    "tolerance",
    "probes",
    "multistart",
    "states",
    "checks",
    "identity",
    "output",
    "grid_limit",
    "workers",
}


# ---------------------------------------------------------------------------
# Config dataclasses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Settings:
    """Numerical knobs handed to the library for one grid point."""

    truncation: int = DEFAULT_TRUNCATION
    bilateral: int = 40
    bilateral_max: int = 320
    tolerance: float = DEFAULT_TOLERANCE
    probe_count: int = 10
    probe_seed: int = 20240601
    attempts: int = 64
    rng_seed: int = 12345
    states: str = "first"


@dataclass(frozen=True)
class IdentityGrid:
    """(a, b, z, q) grid for the standalone identity subcommand.

    Scalar a/b entries select the 1psi1 check; list entries select the
    general bilateral family with f = 1.
    """

    a: tuple = ()
    b: tuple = ()
    z: tuple = ()
    q: tuple = ()

    def points(self) -> list[tuple]:
        return list(itertools.product(self.a, self.b, self.z, self.q))


@dataclass(frozen=True)
class RunConfig:
    grid: dict[str, tuple] = field(default_factory=dict)
    seeds: tuple[tuple[complex, ...], ...] = ()
    settings: Settings = Settings()
    checks: tuple[str, ...] = DEFAULT_CHECKS
    identity: IdentityGrid = IdentityGrid()
    output_path: Path = Path("report")
    output_format: str = "json"
    grid_limit: int = DEFAULT_GRID_LIMIT
    workers: int = 1

    def points(self) -> list[ModelParams]:
        """Grid points in row-major order of (q, xi, omega, N, S)."""
        if not self.grid:
            raise ConfigError("params: section is required for this command")
        values = [self.grid[name] for name in PARAM_FIELDS]
        return [
            ModelParams(q=q, xi=xi, omega=omega, N=N, S=S)
            for q, xi, omega, N, S in itertools.product(*values)
        ]


# ---------------------------------------------------------------------------
# Field parsers
# ---------------------------------------------------------------------------


def _complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, int | float | complex):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{where}: expected a number, got {value!r}")


def _int(value: Any, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}, got {value}")
    return value


def _float(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if value <= 0:
        raise ConfigError(f"{where}: must be positive, got {value}")
    return float(value)


def _as_list(value: Any) -> list:
    return list(value) if isinstance(value, list) else [value]


def _mapping(value: Any, where: str, allowed: set[str]) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(value).__name__}")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(str, unknown))}")
    return value


def _parse_params(section: Any) -> dict[str, tuple]:
    section = _mapping(section, "params", set(PARAM_FIELDS))
    missing = [name for name in PARAM_FIELDS if name not in section]
    if missing:
        raise ConfigError(f"params: missing {', '.join(missing)}")
    grid: dict[str, tuple] = {}
    for name in PARAM_FIELDS:
        values = _as_list(section[name])
        if not values:
            raise ConfigError(f"params.{name}: empty list")
        if name in ("N", "S"):
            minimum = 1 if name == "N" else 0
            grid[name] = tuple(_int(v, f"params.{name}", minimum) for v in values)
        else:
            grid[name] = tuple(_complex(v, f"params.{name}") for v in values)
    return grid


def _parse_seeds(value: Any) -> tuple[tuple[complex, ...], ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise ConfigError("seeds: expected a list of root lists")
    return tuple(
        tuple(_complex(v, f"seeds[{i}]") for v in _as_list(seed))
        for i, seed in enumerate(value)
    )


def _parse_identity(value: Any) -> IdentityGrid:
    section = _mapping(value, "identity", {"a", "b", "z", "q"})

    def entry(v: Any, where: str) -> complex | tuple[complex, ...]:
        if isinstance(v, list):
            return tuple(_complex(x, where) for x in v)
        return _complex(v, where)

    columns = {}
    for key in ("a", "b", "z", "q"):
        values = _as_list(section.get(key, []))
        columns[key] = tuple(entry(v, f"identity.{key}") for v in values)
    return IdentityGrid(**columns)


def parse_checks(value: Any) -> tuple[str, ...]:
    if value is None:
        return DEFAULT_CHECKS
    names = [str(v) for v in _as_list(value)]
    unknown = [n for n in names if n not in KNOWN_CHECKS]
    if unknown:
        raise ConfigError(
            f"checks: unknown check(s) {', '.join(unknown)}; "
            f"known: {', '.join(KNOWN_CHECKS)}"
        )
    return tuple(names)


def _default_workers() -> int:
    raw = os.environ.get("QBETHE_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"QBETHE_WORKERS: expected an integer, got {raw!r}") from e
    return _int(value, "QBETHE_WORKERS", 1)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def parse_config(data: Any) -> RunConfig:
    """Validate a parsed YAML document and build the RunConfig."""
    data = _mapping(data, "config", _TOP_KEYS)
    probes = _mapping(data.get("probes"), "probes", {"count", "seed"})
    multistart = _mapping(data.get("multistart"), "multistart", {"attempts", "seed"})
    output = _mapping(data.get("output"), "output", {"path", "format"})

    states = data.get("states", "first")
    if states not in ("first", "all"):
        raise ConfigError(f"states: expected 'first' or 'all', got {states!r}")
    fmt = output.get("format", "json")
    if fmt not in OUTPUT_FORMATS:
        raise ConfigError(
            f"output.format: expected one of {OUTPUT_FORMATS}, got {fmt!r}"
        )

    defaults = Settings()
    settings = Settings(
        truncation=_int(data.get("truncation", defaults.truncation), "truncation", 1),
        bilateral=_int(data.get("bilateral", defaults.bilateral), "bilateral", 1),
        bilateral_max=_int(
            data.get("bilateral_max", defaults.bilateral_max), "bilateral_max", 1
        ),
        tolerance=_float(data.get("tolerance", defaults.tolerance), "tolerance"),
        probe_count=_int(probes.get("count", defaults.probe_count), "probes.count", 1),
        probe_seed=_int(probes.get("seed", defaults.probe_seed), "probes.seed"),
        attempts=_int(
            multistart.get("attempts", defaults.attempts), "multistart.attempts"
        ),
        rng_seed=_int(multistart.get("seed", defaults.rng_seed), "multistart.seed"),
        states=states,
    )
    if settings.bilateral_max < settings.bilateral:
        raise ConfigError("bilateral_max: must not be below bilateral")

    grid = _parse_params(data["params"]) if "params" in data else {}
    grid_limit = _int(data.get("grid_limit", DEFAULT_GRID_LIMIT), "grid_limit", 1)
    size = 1
    for values in grid.values():
        size *= len(values)
    if grid and size > grid_limit:
        raise ConfigError(
            f"params: grid of {size} points exceeds grid_limit {grid_limit}"
        )

    config = RunConfig(
        grid=grid,
        seeds=_parse_seeds(data.get("seeds")),
        settings=settings,
        checks=parse_checks(data.get("checks")),
        identity=_parse_identity(data.get("identity")),
        output_path=Path(str(output.get("path", "report"))),
        output_format=fmt,
        grid_limit=grid_limit,
        workers=_int(data["workers"], "workers", 1)
        if "workers" in data
        else _default_workers(),
    )
    if grid:
        try:
            config.points()
        except ParameterError as e:
            raise ConfigError(f"params.{e}") from e
    return config


def load_config(path: Path) -> RunConfig:
    """Read and validate a YAML run configuration."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        data = yaml.load(text)
    except YAMLError as e:
        raise ConfigError(f"malformed YAML in {path}: {e}") from e
    return parse_config(data if data is not None else {})
