"""Tests for Laurent series arithmetic and q-Pochhammer symbols."""

from __future__ import annotations

import numpy as np
import pytest

from qbethe.errors import (
    EmptyTrustWindow,
    ParameterError,
    PoleHit,
    UntrustedEvaluation,
)
from qbethe.qseries import (
    LaurentSeries,
    ModelParams,
    complex_repr,
    poch_finite,
    poch_inf,
    poch_inf_series,
    poch_ratio,
    relative_residual,
    series_add,
    series_dilate,
    series_eval,
    series_mul,
    series_reflect,
    series_restrict,
    series_sub,
)

# ---------------------------------------------------------------------------
# ModelParams
# ---------------------------------------------------------------------------


class TestModelParams:
    def test_twists(self) -> None:
        p = ModelParams(q=0.5, xi=0.3, omega=0.7, N=1, S=0)
        assert p.twist == pytest.approx(0.21)
        assert p.twist_dual == pytest.approx(0.3 / 0.7)
        assert p.convergent

    def test_twist_includes_q_power(self) -> None:
        p = ModelParams(q=0.5, xi=0.3, omega=0.7, N=2, S=1)
        assert p.twist == pytest.approx(0.7 * 0.5 * 0.09)

    @pytest.mark.parametrize(
        "kwargs, field",
        [
            ({"q": 1.2}, "q"),
            ({"q": 0}, "q"),
            ({"xi": 1.0}, "xi"),
            ({"omega": 0}, "omega"),
            ({"N": 0}, "N"),
            ({"S": -1}, "S"),
            ({"N": True}, "N"),
        ],
    )
    def test_invalid_field_is_named(self, kwargs: dict, field: str) -> None:
        values = {"q": 0.5, "xi": 0.3, "omega": 0.7, "N": 1, "S": 0, **kwargs}
        with pytest.raises(ParameterError) as err:
            ModelParams(**values)
        assert err.value.field == field
        assert str(err.value).startswith(f"{field}:")

    def test_not_convergent_for_large_field(self) -> None:
        p = ModelParams(q=0.5, xi=0.3, omega=5.0, N=1, S=0)
        assert abs(p.twist) > 1
        assert not p.convergent

    def test_as_dict_keeps_complex_values(self) -> None:
        p = ModelParams(q=0.5, xi=0.3, omega=0.7 + 0.1j, N=1, S=0)
        assert p.as_dict()["omega"] == [0.7, 0.1]
        assert p.as_dict()["q"] == 0.5
        assert complex_repr(2) == 2.0


# ---------------------------------------------------------------------------
# Series arithmetic
# ---------------------------------------------------------------------------


class TestLaurentSeries:
    def test_trust_window_must_fit_storage(self) -> None:
        with pytest.raises(ValueError):
            LaurentSeries(0, [1.0, 2.0], 0, 3)

    def test_coeff_outside_window_is_zero(self) -> None:
        s = LaurentSeries.exact([1.0, 2.0], lo=-1)
        assert s.coeff(-1) == 1
        assert s.coeff(0) == 2
        assert s.coeff(5) == 0
        assert list(s.powers) == [-1, 0]

    def test_polynomial_product_is_fully_trusted(self) -> None:
        a = LaurentSeries.exact([1.0, 1.0])
        b = LaurentSeries.exact([1.0, -1.0])
        c = series_mul(a, b)
        np.testing.assert_allclose(c.coeffs, [1, 0, -1])
        assert (c.trust_lo, c.trust_hi) == (0, 2)
        assert not c.open_hi

    def test_open_end_shrinks_the_trust_window(self) -> None:
        a = LaurentSeries(0, [1.0, 0.5, 0.25], 0, 2, open_hi=True)
        b = LaurentSeries.exact([1.0, 1.0])
        c = series_mul(a, b)
        assert c.hi == 3
        assert (c.trust_lo, c.trust_hi) == (0, 2)
        assert c.open_hi

    def test_untrusted_input_coefficient_propagates(self) -> None:
        a = LaurentSeries(0, [1.0, 0.5, 0.25], 0, 1)
        b = LaurentSeries.exact([1.0, 1.0])
        c = series_mul(a, b)
        assert c.trust_hi == 1

    def test_add_and_sub(self) -> None:
        a = LaurentSeries.exact([1.0, 2.0])
        b = LaurentSeries.exact([3.0], lo=-1)
        s = series_add(a, b)
        assert s.lo == -1
        np.testing.assert_allclose(s.coeffs, [3, 1, 2])
        d = series_sub(s, b)
        np.testing.assert_allclose(d.coeffs, [0, 1, 2])

    def test_dilate_and_reflect(self) -> None:
        a = LaurentSeries.exact([1.0, 1.0, 1.0])
        d = series_dilate(a, 2.0)
        np.testing.assert_allclose(d.coeffs, [1, 2, 4])
        r = series_reflect(a)
        assert (r.lo, r.hi) == (-2, 0)
        assert series_eval(r, 2.0).value == pytest.approx(1 + 0.5 + 0.25)

    def test_restrict_opens_the_cut_side(self) -> None:
        a = LaurentSeries.exact([1.0, 2.0, 3.0, 4.0], lo=-2)
        r = series_restrict(a, -1, 1)
        assert (r.lo, r.hi) == (-1, 1)
        assert r.open_lo and not r.open_hi

    def test_restrict_outside_trust_is_empty(self) -> None:
        a = LaurentSeries(0, [1.0, 2.0, 3.0], 0, 1)
        with pytest.raises(EmptyTrustWindow):
            series_restrict(a, 2, 2)

    def test_underflowed_tail_does_not_capture_the_window(self) -> None:
        # a long run of exact zeros after an underflowed coefficient
        coeffs = [1.0, 0.5, 0.25, 1e-300] + [0.0] * 26
        a = LaurentSeries(0, coeffs, 0, 2, open_hi=True)
        c = series_mul(a, LaurentSeries.exact([1.0, 1.0]))
        assert (c.trust_lo, c.trust_hi) == (0, 3)
        np.testing.assert_allclose(c.trusted(), [1, 1.5, 0.75, 0.25])


class TestSeriesAlgebra:
    @staticmethod
    def _random_series(rng: np.random.Generator, open_hi: bool) -> LaurentSeries:
        size = int(rng.integers(3, 12))
        lo = int(rng.integers(-4, 3))
        coeffs = rng.normal(size=size) + 1j * rng.normal(size=size)
        return LaurentSeries(lo, coeffs, lo, lo + size - 1, open_hi=open_hi)

    @pytest.mark.parametrize("seed", range(5))
    def test_product_commutes(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        a = self._random_series(rng, open_hi=True)
        b = self._random_series(rng, open_hi=False)
        ab, ba = series_mul(a, b), series_mul(b, a)
        assert (ab.lo, ab.trust_lo, ab.trust_hi) == (ba.lo, ba.trust_lo, ba.trust_hi)
        np.testing.assert_allclose(ab.coeffs, ba.coeffs, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_product_associates(self, seed: int) -> None:
        rng = np.random.default_rng(100 + seed)
        a, b, c = (self._random_series(rng, open_hi=False) for _ in range(3))
        left = series_mul(series_mul(a, b), c)
        right = series_mul(a, series_mul(b, c))
        assert (left.lo, left.hi) == (right.lo, right.hi)
        scale = left.norm()
        np.testing.assert_allclose(
            left.trusted(), right.trusted(), rtol=1e-12, atol=1e-12 * scale
        )

    def test_geometric_product(self) -> None:
        # sum q^m x^m times sum (-q)^m x^m = 1/(1 - q^2 x^2)
        q = 0.5
        m = np.arange(65)
        a = LaurentSeries(0, q**m, 0, 64, open_hi=True)
        b = LaurentSeries(0, (-q) ** m, 0, 64, open_hi=True)
        c = series_mul(a, b)
        assert (c.trust_lo, c.trust_hi) == (0, 64)
        expected = np.where(m % 2 == 0, q**m, 0.0)
        np.testing.assert_allclose(c.trusted(), expected, rtol=1e-12, atol=1e-12)

    def test_unit_factor_keeps_the_window(self) -> None:
        a = LaurentSeries(0, [1.0, 0.5, 0.25], 0, 1, open_hi=True)
        c = series_mul(a, LaurentSeries.one())
        np.testing.assert_array_equal(c.coeffs, a.coeffs)
        assert (c.trust_lo, c.trust_hi) == (0, 1)

    @pytest.mark.parametrize("x", [0.6, -0.9 + 0.3j, 1.2j])
    def test_value_of_product_is_product_of_values(self, x: complex) -> None:
        up = poch_inf_series(0.3, 0.5, 1, 32)
        down = poch_inf_series(0.2, 0.5, -1, 32)
        both = series_mul(up, down)
        expected = series_eval(up, x).value * series_eval(down, x).value
        assert series_eval(both, x).value == pytest.approx(expected, rel=1e-12)


class TestSeriesEval:
    def test_polynomial_value(self) -> None:
        s = LaurentSeries.exact([1.0, -2.0, 1.0], lo=-1)
        result = series_eval(s, 2.0)
        assert result.value == pytest.approx(0.5 - 2 + 2)
        assert result.tail == 0

    def test_tail_beyond_open_end_is_rejected(self) -> None:
        s = LaurentSeries(0, [1.0, 1.0, 1.0], 0, 2, open_hi=True)
        with pytest.raises(UntrustedEvaluation):
            series_eval(s, 2.0)

    def test_negative_powers_at_zero(self) -> None:
        s = series_reflect(LaurentSeries.exact([1.0, 1.0]))
        with pytest.raises(PoleHit):
            series_eval(s, 0)

    def test_relative_residual(self) -> None:
        assert relative_residual(1e-9, 1.0, -2.0) == pytest.approx(5e-10)
        assert relative_residual(0, 0) == 0.0
        assert relative_residual(1, 0) == float("inf")


# ---------------------------------------------------------------------------
# Pochhammer symbols
# ---------------------------------------------------------------------------


class TestPochhammer:
    def test_finite_positive(self) -> None:
        assert poch_finite(0.3, 0.5, 0) == 1
        assert poch_finite(0.3, 0.5, 2) == pytest.approx((1 - 0.3) * (1 - 0.15))

    def test_finite_negative(self) -> None:
        assert poch_finite(0.3, 0.5, -1) == pytest.approx(1 / (1 - 0.6))
        assert poch_finite(0.3, 0.5, -2) == pytest.approx(1 / ((1 - 0.6) * (1 - 1.2)))

    def test_finite_negative_pole(self) -> None:
        with pytest.raises(PoleHit):
            poch_finite(0.5, 0.5, -1)

    def test_ratio_gives_exact_zero_at_negative_n(self) -> None:
        # b = q: 1/(b;q)_n has a zero factor for every n < 0
        assert poch_ratio(0.2, 0.5, 0.5, -1) == 0
        assert poch_ratio(0.2, 0.5, 0.5, -4) == 0

    def test_ratio_matches_quotient(self) -> None:
        expected = poch_finite(0.2, 0.5, 3) / poch_finite(0.7, 0.5, 3)
        assert poch_ratio(0.2, 0.7, 0.5, 3) == pytest.approx(expected)

    def test_finite_recurrence(self) -> None:
        a, q = 0.3 + 0.2j, 0.5 + 0.1j
        for n in range(-20, 21):
            step = poch_finite(a, q, n) * (1 - a * q**n)
            assert poch_finite(a, q, n + 1) == pytest.approx(step, rel=1e-12)

    def test_finite_composition(self) -> None:
        a, q = 0.3 + 0.2j, 0.5 + 0.1j
        for n in range(-10, 11):
            for m in range(-10, 11):
                joined = poch_finite(a, q, n) * poch_finite(a * q**n, q, m)
                assert poch_finite(a, q, n + m) == pytest.approx(joined, rel=1e-12)

    @pytest.mark.parametrize("a", [0.3, -0.8 + 0.4j, 2.5, 0.0])
    def test_infinite_shift(self, a: complex) -> None:
        q = 0.45 + 0.2j
        shifted = (1 - a) * poch_inf(a * q, q)
        assert poch_inf(a, q) == pytest.approx(shifted, rel=1e-12)

    def test_euler_function(self) -> None:
        assert poch_inf(0.5, 0.5) == pytest.approx(0.2887880950866024, rel=1e-13)

    def test_infinite_product_vanishes_at_one(self) -> None:
        assert poch_inf(1.0, 0.5) == 0

    def test_infinite_product_needs_nome(self) -> None:
        with pytest.raises(ParameterError):
            poch_inf(0.3, 1.5)

    @pytest.mark.parametrize("x", [0.7, -1.3 + 0.4j, 2.5])
    def test_series_matches_product(self, x: complex) -> None:
        s = poch_inf_series(0.3, 0.5, 1, 48)
        value = series_eval(s, x).value
        assert value == pytest.approx(poch_inf(0.3 * x, 0.5), rel=1e-12)

    def test_series_in_inverse_powers(self) -> None:
        s = poch_inf_series(0.15, 0.5, -1, 48)
        assert s.hi == 0
        assert series_eval(s, 0.8).value == pytest.approx(
            poch_inf(0.15 / 0.8, 0.5), rel=1e-12
        )
