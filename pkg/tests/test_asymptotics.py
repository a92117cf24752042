import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from podbounds.asymptotics import (
    ThetaSeries,
    empirical_rate,
    subexp_check,
    theorem5_bracket,
    theta_rate,
    theta_series_eval,
    theta_series_sum,
)
from podbounds.errors import NotSummable
from podbounds.weights import FactorialPower, PODSpec, PolyDecay


def direct_theta(theta, m):
    """Plain partial sum in log domain, run well past the peak m^(1/theta)."""
    from scipy.special import gammaln

    ell = np.arange(4 * int(m ** (1 / theta)) + 400)
    logs = ell * math.log(m) - theta * gammaln(ell + 1)
    top = logs.max()
    return top + math.log(math.fsum(np.exp(logs - top)))


class TestThetaSeries:
    def test_exponential_series(self):
        assert theta_series_eval(ThetaSeries(1.0), 5.0).log_value == pytest.approx(5.0, rel=1e-15)

    @pytest.mark.parametrize("m", [1.0, 3.7, 12.0, 30.0])
    def test_generic_summation_on_exponential(self, m):
        # the outward summation itself, without the closed form shortcut
        assert abs(theta_series_sum(ThetaSeries(1.0), m).log_value - m) <= 1e-12 * m

    def test_bessel_value(self):
        from scipy.special import i0

        f = math.exp(theta_series_eval(ThetaSeries(2.0), 4.0).log_value)
        assert f == pytest.approx(11.3019, abs=1e-4)
        assert f == pytest.approx(i0(4.0), rel=1e-14)

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 3.0])
    def test_small_m_limit(self, theta):
        assert theta_series_eval(ThetaSeries(theta), 1e-12).log_value == pytest.approx(1e-12, rel=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(theta=st.floats(0.3, 4.0), m=st.floats(0.01, 50.0))
    def test_matches_direct_summation(self, theta, m):
        got = theta_series_eval(ThetaSeries(theta), m).log_value
        assert got == pytest.approx(direct_theta(theta, m), rel=1e-12, abs=1e-14)

    @settings(max_examples=60, deadline=None)
    # m drawn through its peak index m^(1/theta) in [1e-2, 1e8]; cost grows like sqrt(peak)
    @given(theta=st.floats(0.3, 4.0), log10_peak=st.floats(-2.0, 8.0))
    def test_peak_sandwich(self, theta, log10_peak):
        m = 10 ** (theta * log10_peak)
        ev = theta_series_eval(ThetaSeries(theta), m)
        assert ev.log_peak <= ev.log_value <= ev.log_upper + 1e-12 * abs(ev.log_upper)

    def test_sandwich_counts_the_peak_block(self):
        # peak index 0 with m near 1: f is about 1 + m, above 1/(1 - 2^-theta) alone
        ev = theta_series_eval(ThetaSeries(8.0), 0.99)
        assert ev.peak_index == 0
        assert math.log(1 / (1 - 2.0**-8)) < ev.log_value <= ev.log_upper

    def test_start_index_drops_leading_terms(self):
        full = theta_series_eval(ThetaSeries(1.0), 2.0).log_value
        tail = theta_series_eval(ThetaSeries(1.0), 2.0, start=2).log_value
        assert math.exp(tail) == pytest.approx(math.exp(full) - 1 - 2.0, rel=1e-14)

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            ThetaSeries(0.0)


class TestThetaRate:
    def test_theta_one_is_one(self):
        for _, v in theta_rate(ThetaSeries(1.0), [1.0, 7.0, 30.0]):
            assert v == pytest.approx(1.0, rel=1e-15)

    def test_theta_two_from_below(self):
        (_, a), (_, b) = theta_rate(ThetaSeries(2.0), [1e2, 1e4])
        assert 1.5 < b < 2.0
        assert abs(b - 2) < abs(a - 2)

    def test_theta_half(self):
        (_, v), = theta_rate(ThetaSeries(0.5), [1e6])
        assert abs(v - 0.5) <= 0.25 * 0.5


class TestRateBracket:
    def test_basel_constants(self):
        br = theorem5_bracket(2.0, 0.0, 1.0)
        assert br.lower_const == 2.0
        assert br.c_rho == pytest.approx(math.e)
        assert br.upper_const == pytest.approx(2 * math.sqrt(math.e), rel=1e-15)
        assert br.upper_const == pytest.approx(3.2974, abs=1e-4)

    def test_not_summable(self):
        with pytest.raises(NotSummable, match="rho > sigma"):
            theorem5_bracket(1.5, 2.0, 1.0)

    def test_c_rho_small_gap(self):
        assert theorem5_bracket(1.5, 0.0, 1.0).c_rho == pytest.approx(2 * math.e)

    def test_exponent(self):
        assert theorem5_bracket(3.0, 1.0, 1.0).exponent == 0.5

    @pytest.mark.parametrize("rho", [1.0, 0.5])
    def test_rho_at_most_one(self, rho):
        with pytest.raises(ValueError):
            theorem5_bracket(rho, 0.0, 1.0)


class TestEmpiricalRate:
    def test_lower_series_in_bracket(self):
        spec = PODSpec(FactorialPower(0.0), PolyDecay(1.0, 2.0))
        (p,) = empirical_rate(spec, [1e3])
        assert 2 * 0.7 <= p.lower_series <= 2 * math.sqrt(math.e) * 1.3

    def test_curve_ordering(self):
        spec = PODSpec(FactorialPower(0.0), PolyDecay(1.0, 2.0))
        for p in empirical_rate(spec, [10.0, 100.0]):
            assert p.lower_series <= p.exact_lo * (1 + 1e-12)
            assert p.exact_lo <= p.theorem1

    def test_sigma_rho_minus_one(self):
        spec = PODSpec(FactorialPower(1.0), PolyDecay(1.0, 2.0))
        (p,) = empirical_rate(spec, [0.5])
        assert 0 < p.exact_lo < math.inf and math.isfinite(p.lower_series)

    def test_requires_power_family(self):
        from podbounds.weights import Explicit

        with pytest.raises(ValueError):
            empirical_rate(PODSpec(FactorialPower(1.0), Explicit([0.5])), [1.0])


class TestSubexp:
    def test_single_product_weight(self):
        rep = subexp_check([(m, math.log1p(m)) for m in (10.0, 100.0, 1000.0)])
        assert rep.decreasing and rep.last < 0.01

    def test_theta_series_trend(self):
        ts = ThetaSeries(2.0)
        grid = [1e2, 1e3, 1e4, 1e5]
        rep = subexp_check([(m, theta_series_eval(ts, m).log_value) for m in grid])
        assert rep.decreasing
        # (1/m) * 2 sqrt(m) scales like m^(-1/2)
        for (m, v) in rep.points:
            assert v * math.sqrt(m) == pytest.approx(2.0, rel=0.3)

    def test_constant(self):
        rep = subexp_check([(m, math.log(5.0)) for m in (1.0, 10.0, 100.0)])
        assert rep.decreasing and rep.last == pytest.approx(math.log(5.0) / 100)

    def test_enclosure_uses_upper_end(self):
        rep = subexp_check([(1.0, 0.1, 0.5), (2.0, 0.1, 0.6), (4.0, 0.1, 0.7)])
        assert rep.points[0] == (1.0, 0.5)

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            subexp_check([(1.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
