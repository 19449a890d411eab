"""Tests for the identity checks and certified bilateral sums."""

from __future__ import annotations

from typing import cast

import pytest

from conftest import make_context, make_params
from qbethe.app import build_context
from qbethe.bethe import enumerate_states, solve_bae
from qbethe.checks import PointContext
from qbethe.config import Settings
from qbethe.errors import NonConvergentTail, RegionViolation
from qbethe.identities import (
    bae2_check,
    bilateral_sum,
    hq_wronskian_check,
    onepsi1_check,
    onepsi1_rhs,
    orbit_points,
    predicted_kappa_prime,
    reconstruct_q,
    rr_check,
    rr_mapping,
    rrgen_check,
    sample_probes,
    solved_h_check,
)
from qbethe.qseries import poch_inf
from qbethe.wronskian import ThetaData

# Parameter points of the equivalence chain, (N, S, q, xi, omega).
CHAIN_POINTS = [
    (1, 0, 0.5, 0.3, 0.7),
    (2, 0, 0.5, 0.3, 0.7),
    (3, 0, 0.5, 0.3, 0.7),
    (1, 1, 0.5, 0.3, 0.7),
    (2, 1, 0.5, 0.3, 0.7),
    (1, 1, 0.4, 0.2, 0.9 + 0.2j),
    (2, 1, 0.3, 0.4, 0.5),
    (3, 2, 0.5, 0.3, 0.7),
    (2, 2, 0.45, 0.25, 0.8),
    (3, 1, 0.5, 0.2, 0.6),
]

# (a, b, z, q) inside |b/a| < |z| < 1.
ONEPSI1_GRID = [
    (0.9, 0.2, 0.5, 0.5),
    (1.5, 0.3, 0.4, 0.3),
    (0.8 + 0.3j, 0.1, 0.6, 0.45),
    (-1.2, 0.5, 0.7, 0.6),
    (2.0, -0.4, 0.3, 0.2),
    (1.1, 0.25, 0.6, 0.5),
    (0.7j, 0.2, 0.55, 0.4),
    (1.3, 0.2 + 0.2j, 0.5, 0.35),
    (-0.9, -0.3, 0.6, 0.5),
    (1.7, 0.4, 0.45, 0.3),
    (0.95, 0.15, 0.3 + 0.3j, 0.5),
    (1.2 - 0.5j, 0.35, 0.65, 0.55),
    (2.5, 0.6, 0.5, 0.6),
    (0.85, -0.1j, 0.4, 0.25),
    (-1.5j, 0.45, 0.55, 0.45),
    (1.05, 0.3, -0.6, 0.5),
    (3.0, 0.9, 0.5, 0.4),
    (0.75, 0.1, 0.4 + 0.2j, 0.3),
    (1.4, 0.35 - 0.2j, 0.6, 0.6),
    (0.9, 0.2, 0.5, 0.3 + 0.2j),
]


@pytest.fixture(params=CHAIN_POINTS, ids=lambda p: "N{}-S{}-q{}-xi{}-w{}".format(*p))
def chain_context(request: pytest.FixtureRequest) -> PointContext:
    N, S, q, xi, omega = request.param
    return make_context(make_params(N=N, S=S, q=q, xi=xi, omega=omega))


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


class TestProbes:
    def test_reproducible(self) -> None:
        assert sample_probes(10, 42) == sample_probes(10, 42)
        assert sample_probes(10, 42) != sample_probes(10, 43)

    def test_inside_annulus_and_clear_of_avoided_points(self) -> None:
        avoid = orbit_points([1.0, -0.8j], 0.5)
        probes = sample_probes(20, 1, avoid)
        assert len(probes) == 20
        for x in probes:
            assert 0.4 <= abs(x) <= 1.6
            assert all(abs(x - a) > 1e-3 for a in avoid)

    def test_orbit_points_cover_the_annulus(self) -> None:
        points = orbit_points([3.0], 0.5)
        assert points == pytest.approx([0.375, 0.75, 1.5, 3.0])

    def test_no_probes_requested(self) -> None:
        assert sample_probes(0) == []


# ---------------------------------------------------------------------------
# Bilateral sums
# ---------------------------------------------------------------------------


class TestBilateralSum:
    def test_divergent_positive_side(self) -> None:
        with pytest.raises(NonConvergentTail):
            bilateral_sum([0.5], [0.2], 1.0, 0.5)

    def test_zero_argument_two_sided(self) -> None:
        with pytest.raises(NonConvergentTail):
            bilateral_sum([0.5], [0.2], 0, 0.5)

    def test_q_binomial_one_sided(self) -> None:
        # sum_n (a;q)_n/(q;q)_n z^n = (az;q)_inf/(z;q)_inf
        total = bilateral_sum([0.3], [0.5], 0.4, 0.5, one_sided=True)
        expected = poch_inf(0.12, 0.5) / poch_inf(0.4, 0.5)
        assert total.value == pytest.approx(expected, rel=1e-12)
        assert total.negative == 0

    def test_halves_add_up(self) -> None:
        total = bilateral_sum([0.9], [0.2], 0.5, 0.5)
        assert total.positive + total.negative == pytest.approx(total.value)
        assert total.K >= 40


class TestOnePsiOne:
    @pytest.mark.parametrize("a, b, z, q", ONEPSI1_GRID)
    def test_grid(self, a: complex, b: complex, z: complex, q: complex) -> None:
        report = onepsi1_check(a, b, z, q)
        assert report.passed, report.max_residual

    def test_reference_point(self) -> None:
        report = onepsi1_check(0.9, 0.2, 0.5, 0.5)
        (sample,) = report.samples
        assert sample.rhs == pytest.approx(onepsi1_rhs(0.9, 0.2, 0.5, 0.5))
        assert sample.residual < 1e-8

    def test_terminating_lower_parameter(self) -> None:
        # b = q reduces the sum to the q-binomial theorem
        report = onepsi1_check(0.2, 0.5, 0.5, 0.5)
        assert report.passed
        expected = poch_inf(0.1, 0.5) / poch_inf(0.5, 0.5)
        assert report.samples[0].lhs == pytest.approx(expected, rel=1e-10)

    def test_outside_region(self) -> None:
        with pytest.raises(RegionViolation):
            onepsi1_check(0.9, 0.8, 0.5, 0.5)
        with pytest.raises(RegionViolation):
            onepsi1_check(0.9, 0.2, 1.2, 0.5)


class TestRrgen:
    def test_unit_weight_functional_equations(self) -> None:
        probes = sample_probes(6, 3, orbit_points([0.4, 2.0], 0.5))
        report = rrgen_check([0.4], [2.0], 0.3, 0.5, "unit", probes, tol=1e-7)
        assert report.passed, report.max_residual
        # one psi and one W sample per probe
        assert len(report.samples) == 12

    def test_divergent_negative_side(self) -> None:
        probes = sample_probes(2, 3, orbit_points([2.0, 0.4], 0.5))
        with pytest.raises(NonConvergentTail):
            rrgen_check([2.0], [0.4], 0.3, 0.5, "unit", probes)

    def test_unknown_weight(self) -> None:
        with pytest.raises(ValueError):
            rrgen_check([0.4], [2.0], 0.3, 0.5, "other", [1.0])

    def test_two_factor_family(self) -> None:
        a, b = [0.4, 0.5 + 0.1j], [2.5, 3.0]
        probes = sample_probes(4, 5, orbit_points(a + b, 0.4))
        report = rrgen_check(a, b, 0.5, 0.4, "unit", probes, tol=1e-7)
        assert report.passed, report.max_residual

    @pytest.mark.parametrize("f_id", ["unit", "bethe"])
    def test_matches_onepsi1_bitwise(
        self, context_s0: PointContext, f_id: str
    ) -> None:
        # with no Bethe roots Q = 1 and the Bethe weight is exactly 1
        params = context_s0.params
        mapping = rr_mapping(params)
        x = context_s0.probes[0]
        direct = onepsi1_check(
            x / mapping.a[0], x / mapping.b[0], params.twist, params.q
        )
        family = rrgen_check(
            mapping.a,
            mapping.b,
            mapping.z,
            params.q,
            f_id,
            [x],
            state=context_s0.state,
        )
        assert family.samples[0].lhs == direct.samples[0].lhs


# ---------------------------------------------------------------------------
# Equivalence chain on Bethe data
# ---------------------------------------------------------------------------


class TestEquivalenceChain:
    def test_hq_wronskians(self, chain_context: PointContext) -> None:
        c = chain_context
        report = hq_wronskian_check(c.state, c.require_hpair())
        assert report.passed, report.max_residual

    def test_q_reconstruction(self, chain_context: PointContext) -> None:
        c = chain_context
        report = reconstruct_q(
            c.state, c.require_hpair(), c.require_theta(), c.probes, 1e-7
        )
        assert report.passed, report.max_residual
        assert len(report.samples) == 10

    def test_alternative_quantisation(self, chain_context: PointContext) -> None:
        c = chain_context
        report = bae2_check(c.state, c.require_hpair(), c.require_theta())
        assert report.passed, report.max_residual
        assert report.context["kappa_prime_residual"] < 1e-7

    def test_bilateral_against_theta(self, chain_context: PointContext) -> None:
        c = chain_context
        report = rr_check(c.state, c.require_theta(), c.probes, tol=1e-7)
        assert report.passed, report.max_residual

    def test_solved_forms(self, chain_context: PointContext) -> None:
        c = chain_context
        report = solved_h_check(c.state, c.require_hpair(), c.probes, tol=1e-7)
        assert report.passed, report.max_residual

    def test_bethe_weight_family(self, chain_context: PointContext) -> None:
        c = chain_context
        mapping = rr_mapping(c.params)
        report = rrgen_check(
            mapping.a,
            mapping.b,
            mapping.z,
            c.params.q,
            "bethe",
            c.probes,
            state=c.state,
            theta=c.require_theta(),
            tol=1e-7,
        )
        assert report.passed, report.max_residual
        assert "mapping" in report.context


class TestEveryState:
    @pytest.mark.parametrize(
        "N, S, q, xi, omega", [(2, 1, 0.5, 0.3, 0.7), (2, 2, 0.45, 0.25, 0.8)]
    )
    def test_chain_holds_on_each_converged_state(
        self, N: int, S: int, q: float, xi: float, omega: float
    ) -> None:
        states = enumerate_states(make_params(N=N, S=S, q=q, xi=xi, omega=omega))
        assert states
        for state in states:
            c = build_context(state, Settings())
            assert c.failure is None, c.failure
            hpair, theta = c.require_hpair(), c.require_theta()
            reports = [
                hq_wronskian_check(state, hpair),
                reconstruct_q(state, hpair, theta, c.probes, 1e-7),
                bae2_check(state, hpair, theta),
                rr_check(state, theta, c.probes, tol=1e-7),
            ]
            for report in reports:
                assert report.passed, (state.roots, report.max_residual)


class TestKappaPrime:
    def test_zero_magnons(self, context_s0: PointContext) -> None:
        p = context_s0.params
        expected = p.omega * (1 - p.twist_dual) / (1 - p.twist)
        assert predicted_kappa_prime(context_s0.state) == pytest.approx(expected)

    def test_single_root(self, context_s1: PointContext) -> None:
        c = context_s1
        report = bae2_check(c.state, c.require_hpair(), c.require_theta())
        # one zero: nothing to compare pairwise
        assert report.samples == ()
        assert report.passed
        assert report.context["kappa_prime_residual"] < 1e-7

    def test_rr_requires_convergence(self) -> None:
        state = solve_bae(make_params(N=1, S=0, omega=0.2))
        assert abs(state.params.twist_dual) > 1
        with pytest.raises(NonConvergentTail):
            rr_check(state, cast(ThetaData, None), [1.0])
