"""Shared fixtures: the reference parameter points used across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from qbethe.app import build_context
from qbethe.bethe import BetheState, solve_bae
from qbethe.checks import PointContext
from qbethe.config import Settings
from qbethe.qseries import ModelParams

# (q, xi, omega) of the closed-form anchors.
REFERENCE = (0.5, 0.3, 0.7)


def make_params(N: int = 1, S: int = 0, q=0.5, xi=0.3, omega=0.7) -> ModelParams:
    return ModelParams(q=q, xi=xi, omega=omega, N=N, S=S)


def desk_params(
    rng: np.random.Generator, N: int, *, complex_q: bool = True
) -> ModelParams:
    """A random S = 0 point with |q|, |xi| <= 0.7 and 0.1 <= |omega| <= 10."""
    q = rng.uniform(0.1, 0.7)
    if complex_q:
        q *= np.exp(1j * rng.uniform(-0.5, 0.5))
    xi = rng.uniform(0.05, 0.7) * np.exp(1j * rng.uniform(-np.pi, np.pi))
    omega = 10 ** rng.uniform(-1, 1) * np.exp(1j * rng.uniform(-np.pi, np.pi))
    return ModelParams(q=q, xi=xi, omega=omega, N=N, S=0)


def make_context(params: ModelParams, settings: Settings | None = None) -> PointContext:
    """Solve, then build H, H', Theta and probes exactly as the pipeline does."""
    state = solve_bae(params)
    return build_context(state, settings or Settings())


@pytest.fixture()
def params_s0() -> ModelParams:
    """N = 1, S = 0 at the reference point."""
    return make_params()


@pytest.fixture()
def state_s0(params_s0: ModelParams) -> BetheState:
    return solve_bae(params_s0)


@pytest.fixture()
def context_s0(params_s0: ModelParams) -> PointContext:
    return make_context(params_s0)


@pytest.fixture()
def context_s1() -> PointContext:
    """N = 1, S = 1: one Bethe root at (omega xi - 1)/(omega - xi)."""
    return make_context(make_params(N=1, S=1))
