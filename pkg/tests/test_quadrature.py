import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mechlab import (
    MonotonicityViolation,
    QuadratureBudgetError,
    QuadratureConfig,
    bracket_monotone_integral,
)


def step_at(threshold):
    return lambda z: 1.0 if z >= threshold else 0.0


class TestBracketing:
    def test_constant_function(self):
        r = bracket_monotone_integral(lambda z: 0.5, 8.0)
        assert r.value == pytest.approx(4.0, abs=1e-6)
        assert r.width <= 1e-6

    def test_step_function_closed_form(self):
        # integral of 1[z >= 3] over [0, 10] is 7
        r = bracket_monotone_integral(step_at(3.0), 10.0)
        assert r.value == pytest.approx(7.0, abs=1e-6)

    def test_linear_ramp(self):
        # same linear-narrowing story as the smooth curve below
        config = QuadratureConfig(max_subdivisions=2 ** 18, tol_quad=1e-4)
        r = bracket_monotone_integral(lambda z: z / 10.0, 10.0, config)
        assert r.value == pytest.approx(5.0, abs=1e-4)

    def test_smooth_share_curve(self):
        # z / (z + 5) integrates to b - 5*log(1 + b/5); bracketing narrows
        # only linearly on smooth curves, so certify a coarser tolerance
        upper = 7.0
        exact = upper - 5.0 * math.log1p(upper / 5.0)
        config = QuadratureConfig(max_subdivisions=2 ** 18, tol_quad=1e-4)
        r = bracket_monotone_integral(lambda z: z / (z + 5.0), upper, config)
        assert r.value == pytest.approx(exact, abs=1e-4)
        assert r.width <= 1e-4

    def test_zero_upper_limit(self):
        r = bracket_monotone_integral(step_at(1.0), 0.0)
        assert r.value == 0.0 and r.width == 0.0 and r.evaluations == 0

    def test_result_brackets_true_value(self):
        # midpoint +- half width must contain the exact integral
        exact = 10.0 - 3.0
        r = bracket_monotone_integral(step_at(3.0), 10.0)
        assert abs(r.value - exact) <= r.width / 2.0 + 1e-15

    def test_reports_evaluations(self):
        r = bracket_monotone_integral(step_at(3.0), 10.0)
        assert r.evaluations > 0


class TestFailureModes:
    def test_monotonicity_violation_names_the_pair(self):
        with pytest.raises(MonotonicityViolation) as info:
            bracket_monotone_integral(lambda z: -z, 10.0)
        err = info.value
        assert err.z_lo < err.z_hi
        assert err.f_lo > err.f_hi

    def test_budget_exhaustion(self):
        sharp = step_at(math.pi)  # irrational jump defeats any coarse grid
        config = QuadratureConfig(max_subdivisions=8, tol_quad=1e-12)
        with pytest.raises(QuadratureBudgetError):
            bracket_monotone_integral(sharp, 10.0, config)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QuadratureConfig(max_subdivisions=1)
        with pytest.raises(ValueError):
            QuadratureConfig(tol_quad=0.0)


class TestProperties:
    @given(st.floats(min_value=0.01, max_value=9.99),
           st.floats(min_value=0.1, max_value=10.0))
    def test_step_integral_matches_closed_form(self, threshold, upper):
        r = bracket_monotone_integral(step_at(threshold), upper)
        assert r.value == pytest.approx(max(0.0, upper - threshold), abs=1e-6)

    @given(st.floats(min_value=0.1, max_value=10.0),
           st.floats(min_value=0.1, max_value=10.0))
    def test_proportional_integrand_matches_closed_form(self, rivals, upper):
        exact = upper - rivals * math.log1p(upper / rivals)
        config = QuadratureConfig(max_subdivisions=2 ** 18, tol_quad=1e-4)
        r = bracket_monotone_integral(lambda z: z / (z + rivals), upper, config)
        assert r.value == pytest.approx(exact, abs=1e-4)

    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_width_meets_requested_tolerance(self, upper):
        config = QuadratureConfig(tol_quad=1e-4)
        r = bracket_monotone_integral(step_at(upper / 2.0), upper, config)
        assert r.width <= 1e-4
