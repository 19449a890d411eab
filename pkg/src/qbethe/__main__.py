"""Interface for ``python -m qbethe``."""

import logging
from argparse import ArgumentParser, Namespace, RawDescriptionHelpFormatter
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from . import __version__

__all__ = ["main"]


def main(args: Sequence[str] | None = None) -> None:
    """Parse the command line, run one subcommand and exit with its status."""
    parser = ArgumentParser(
        description="qbethe: Bethe states, TQ Wronskians and bilateral q-series"
    )
    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version=__version__,
    )

    sub = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, help: str, **kwargs) -> ArgumentParser:
        cmd = sub.add_parser(name, help=help, **kwargs)
        cmd.add_argument(
            "--config", type=Path, required=True, help="YAML run configuration"
        )
        cmd.add_argument(
            "--out",
            type=Path,
            default=None,
            help="Output directory (overrides output.path)",
        )
        cmd.add_argument(
            "--workers",
            type=int,
            default=None,
            help="Grid points processed concurrently (overrides workers)",
        )
        cmd.add_argument(
            "--verbose", action="store_true", help="Log at DEBUG level"
        )
        return cmd

    # --- solve: Bethe roots only ---
    add_command("solve", "Solve the Bethe equations over the parameter grid")

    # --- verify: full pipeline with checks ---
    from .app import build_router

    verify = add_command(
        "verify",
        "Run the identity checks over the parameter grid",
        epilog="checks:\n" + build_router().descriptions(),
        formatter_class=RawDescriptionHelpFormatter,
    )
    verify.add_argument(
        "--check",
        default=None,
        help="Comma-separated checks to run (overrides checks)",
    )

    # --- identity: standalone bilateral identities over (a, b, z, q) ---
    add_command("identity", "Check 1psi1 or the general bilateral sum standalone")

    # --- emit: coefficient table ---
    emit = add_command("emit", "Write the coefficients of one series as CSV")
    emit.add_argument(
        "--which",
        required=True,
        choices=("H", "Hprime", "Theta", "Q", "t"),
        help="Series to write",
    )

    parsed = parser.parse_args(args)
    status = _run(parsed)
    if status:
        raise SystemExit(status)


def _run(parsed: Namespace) -> int:
    """Execute a subcommand and map errors onto exit codes."""
    from .app import (
        EXIT_CONFIG_ERROR,
        EXIT_NUMERICAL_FAILURE,
        configure_logging,
        emit_series,
        run_pipeline,
    )
    from .config import load_config, parse_checks
    from .errors import ConfigError, NumericalFailure

    try:
        configure_logging(parsed.verbose)
        config = load_config(parsed.config)
        if parsed.out is not None:
            config = replace(config, output_path=parsed.out)
        if parsed.workers is not None:
            if parsed.workers < 1:
                raise ConfigError(
                    f"--workers: must be at least 1, got {parsed.workers}"
                )
            config = replace(config, workers=parsed.workers)
        if getattr(parsed, "check", None):
            names = [n.strip() for n in parsed.check.split(",") if n.strip()]
            config = replace(config, checks=parse_checks(names))

        if parsed.command == "emit":
            emit_series(config, parsed.which)
            return 0
        return run_pipeline(config, parsed.command).status
    except ConfigError as e:
        logging.critical("Configuration error: %s", e)
        return EXIT_CONFIG_ERROR
    except NumericalFailure as e:
        logging.critical("Numerical failure: %s", e)
        return EXIT_NUMERICAL_FAILURE


if __name__ == "__main__":
    main()
