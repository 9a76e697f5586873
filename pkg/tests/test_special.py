import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special as sp

from szego_lab.errors import ModulusRangeError
from szego_lab.special import (
    CrossingOracleParams,
    carlson_rf,
    complete_K,
    crossing_oracle_I,
    crossing_oracle_spectra,
    crossing_times,
    elliptic_F,
    jacobi_sn_cn_dn,
    oracle_ode_residual,
)


@pytest.mark.parametrize("k", [0.0, 0.3, 1 / math.sqrt(2), 0.9, 0.999])
def test_complete_integral(k):
    assert complete_K(k) == pytest.approx(sp.ellipk(k * k), rel=1e-12)


@pytest.mark.parametrize("k", [0.2, 0.7, 0.95])
@pytest.mark.parametrize("phi", [0.3, 1.2, 2.5, -4.0])
def test_incomplete_integral(k, phi):
    assert elliptic_F(phi, k) == pytest.approx(sp.ellipkinc(phi, k * k), rel=1e-12)


def test_carlson_at_equal_arguments():
    assert carlson_rf(4.0, 4.0, 4.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        carlson_rf(0.0, 0.0, 1.0)


@pytest.mark.parametrize("k", [0.0, 0.5, 0.9])
def test_jacobi_functions(k):
    x = np.linspace(-3.0, 3.0, 25)
    sn, cn, dn, _ = sp.ellipj(x, k * k)
    ours = jacobi_sn_cn_dn(x, k)
    assert_allclose(ours[0], sn, atol=1e-12)
    assert_allclose(ours[1], cn, atol=1e-12)
    assert_allclose(ours[2], dn, atol=1e-12)


def test_modulus_range():
    with pytest.raises(ModulusRangeError):
        complete_K(1.0)
    with pytest.raises(ModulusRangeError):
        jacobi_sn_cn_dn([0.0], -0.1)


class TestCrossingOracle:
    @pytest.fixture
    def params(self) -> CrossingOracleParams:
        return CrossingOracleParams.from_p(0.5)

    def test_roots(self, params):
        assert params.a * params.b == pytest.approx(0.25 * 0.75)
        assert params.b - params.a == pytest.approx(0.75)
        assert params.energy == pytest.approx(0.375)

    @pytest.mark.parametrize("p", [0.3, 0.6j, 0.7 * np.exp(0.4j)])
    def test_root_difference_away_from_one_half(self, p):
        params = CrossingOracleParams.from_p(p)
        r2 = abs(p) ** 2
        assert params.b - params.a == pytest.approx(1.25 - 2.0 * r2, abs=1e-14)
        assert params.a * params.b == pytest.approx(r2 * (1.0 - r2), abs=1e-14)

    def test_starts_on_a_crossing(self, params):
        assert crossing_oracle_I(0.0, params) == pytest.approx(0.0, abs=1e-14)
        rho1, rho2 = crossing_oracle_spectra(np.array([0.0, 1.0]), params)
        assert_allclose(rho1 + rho2, 2.0)

    def test_solves_the_ode(self, params):
        t = np.linspace(0.0, 20.0, 101)
        assert np.max(np.abs(oracle_ode_residual(t, params))) < 1e-8

    def test_amplitude(self, params):
        t = np.linspace(0.0, 20.0, 2001)
        assert np.max(np.abs(crossing_oracle_I(t, params))) == pytest.approx(math.sqrt(params.a), rel=1e-4)

    def test_crossing_times_are_zeros(self, params):
        times = crossing_times(params, 20.0)
        assert times[0] == 0.0
        assert_allclose(crossing_oracle_I(np.array(times), params), 0.0, atol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, 1.5j])
    def test_rejects_out_of_range(self, p):
        with pytest.raises(ValueError):
            CrossingOracleParams.from_p(p)

    def test_inconsistent_roots(self):
        with pytest.raises(ValueError):
            CrossingOracleParams(p=0.5, a=0.1, b=0.2)
