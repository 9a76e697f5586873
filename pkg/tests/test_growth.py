import math

import numpy as np
import pytest

from szego_lab.errors import WindowUnresolvedError
from szego_lab.experiments import blaschke_lower_bound_check, fit_growth, fit_pole_approach, pole_radius
from szego_lab.experiments.growth import default_p_sequence, default_windows, slope_ratio
from szego_lab.hardy import BlaschkeProduct, FourierState, RationalState, rational_to_fourier
from tests.conftest import synthetic_trajectory


class TestPoleRadius:
    def test_single_pole(self, geometric_state):
        assert pole_radius(geometric_state) == pytest.approx(0.5, abs=1e-8)

    def test_two_poles(self):
        u = rational_to_fourier(RationalState(A=[1.0, 0.3], B=[1.0, -0.25, -0.125]), 64)
        assert pole_radius(u) == pytest.approx(0.5, abs=1e-8)

    def test_polynomial(self):
        assert pole_radius(FourierState.from_coeffs([1.0, 1.0, 0.5], 64)) == 0.0
        assert pole_radius(FourierState.zeros(64)) == 0.0

    def test_rank_one_state_with_constant(self):
        u = rational_to_fourier(RationalState(A=[1.0, 0.4], B=[1.0, -0.6]), 128)
        assert pole_radius(u) == pytest.approx(0.6, abs=1e-8)


class TestFitGrowth:
    def test_exponential_growth(self):
        traj = synthetic_trajectory(0.3)
        fits = fit_growth(traj, 1.0)
        assert [fit.window for fit in fits] == [(2.0, 10.0), (2.0, 6.0), (6.0, 10.0)]
        for fit in fits:
            assert fit.slope == pytest.approx(0.3)
            assert fit.r_squared == pytest.approx(1.0)
            assert fit.c_alpha == pytest.approx(0.3)
        assert fits[0].intercept == pytest.approx(0.5 * math.log(2.0))

    def test_half_order_has_no_constant(self):
        fit = fit_growth(synthetic_trajectory(0.3), 0.5, [(2.0, 10.0)])[0]
        assert fit.c_alpha is None
        assert slope_ratio(fit, fit) == pytest.approx(1.0)

    def test_windows_stop_at_the_resolved_time(self):
        traj = synthetic_trajectory(0.3, resolved_until=6.0)
        assert default_windows(traj)[0] == (2.0, 6.0)
        with pytest.raises(WindowUnresolvedError):
            fit_growth(traj, 1.0, [(2.0, 10.0)])

    def test_too_few_samples(self):
        with pytest.raises(WindowUnresolvedError):
            fit_growth(synthetic_trajectory(0.3), 1.0, [(2.0, 2.5)])

    def test_pole_approach_of_a_polynomial_trajectory(self):
        fit = fit_pole_approach(synthetic_trajectory(0.3))
        assert fit.radii == [0.0] * len(fit.radii)
        assert fit.slope == pytest.approx(0.0, abs=1e-12)


class TestLowerBound:
    def test_default_sequence(self):
        values = default_p_sequence()
        assert len(values) == 7
        assert values[0] == pytest.approx(1 - 2**-6)
        assert values[-1] == pytest.approx(1 - 2**-12)

    def test_closed_form_for_z(self):
        report = blaschke_lower_bound_check(BlaschkeProduct.factor(0.0), 0.0, [0.9, 0.95, 0.99])
        assert report.closed_form_residual is not None
        assert report.closed_form_residual < 1e-9

    @pytest.mark.parametrize("s", [0.0, 0.25, 0.5])
    def test_slope_respects_the_bound(self, s):
        report = blaschke_lower_bound_check(BlaschkeProduct.factor(0.0), s)
        assert report.passed
        assert report.slope == pytest.approx(-(s + 0.5), abs=0.05)

    def test_degree_two(self):
        report = blaschke_lower_bound_check(BlaschkeProduct(zeros=[0.0, 0.5]), 0.0)
        assert report.degree == 2
        assert report.closed_form_residual is None
        assert report.passed

    @pytest.mark.parametrize(("s", "p"), [(1.0, 0.5), (-0.1, 0.5), (0.0, 1.0)])
    def test_invalid_arguments(self, s, p):
        with pytest.raises(ValueError):
            blaschke_lower_bound_check(BlaschkeProduct.factor(0.0), s, [p])

    def test_series_length_grows_near_the_circle(self):
        report = blaschke_lower_bound_check(BlaschkeProduct.factor(0.0), 0.0, [0.5, 0.999])
        assert report.terms[0] < report.terms[1]
        assert np.all(np.diff(report.norms) > 0)
