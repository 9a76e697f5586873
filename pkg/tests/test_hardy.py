import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from szego_lab.errors import (
    AliasingError,
    InvalidStateError,
    PoleOnDiscError,
    UnresolvedStateError,
    UnresolvedStateWarning,
)
from szego_lab.hardy import (
    BlaschkeProduct,
    FourierState,
    GridPlan,
    RationalState,
    compose_with_blaschke,
    inner_product,
    l4_norm_fourth,
    project_grid,
    random_rational_state,
    rational_to_fourier,
    rescale_alpha,
    sobolev_norm,
    szego_project,
    to_grid,
)


class TestFourierState:
    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(ValidationError):
            FourierState(coeffs=[])
        with pytest.raises(ValidationError):
            FourierState(coeffs=[1.0, np.nan])

    def test_support_and_tail(self):
        u = FourierState.monomial(3, 16, 2.0)
        assert u.support() == 4
        assert u.tail_start == 14
        assert u.tail_max() == 0.0
        assert u.is_resolved()
        assert not FourierState.monomial(15, 16).is_resolved()
        assert FourierState.zeros(8).support() == 0

    def test_resized_pads_and_truncates(self):
        u = FourierState.from_coeffs([1, 2, 3])
        assert_allclose(u.resized(5).coeffs, [1, 2, 3, 0, 0])
        assert_allclose(u.resized(2).coeffs, [1, 2])

    def test_arithmetic(self):
        u = FourierState.from_coeffs([1, 1j])
        v = FourierState.from_coeffs([0, 1, 2])
        assert_allclose((u + v).coeffs, [1, 1 + 1j, 2])
        assert_allclose((2 * u).coeffs, [2, 2j])
        assert_allclose((u - u).coeffs, [0, 0])

    def test_inner_product_is_linear_in_first_slot(self):
        u = FourierState.from_coeffs([1, 1j])
        v = FourierState.from_coeffs([1j, 1])
        assert inner_product(u * 2j, v) == pytest.approx(2j * inner_product(u, v))
        assert inner_product(u, u) == pytest.approx(2.0)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.0])
    def test_sobolev_norm_of_monomial(self, s):
        assert sobolev_norm(FourierState.monomial(1, 4), s) == pytest.approx(2.0 ** (s / 2))

    def test_sobolev_norm_rejects_negative_index(self):
        with pytest.raises(ValueError):
            sobolev_norm(FourierState.monomial(1, 4), -0.5)


class TestRationalState:
    def test_pole_in_disc(self):
        with pytest.raises(PoleOnDiscError):
            RationalState(A=[1.0], B=[1.0, -2.0])

    def test_common_root(self):
        with pytest.raises(InvalidStateError):
            RationalState(A=[-2.0, 1.0], B=[-2.0, 1.0])

    def test_zero_denominator(self):
        with pytest.raises(InvalidStateError):
            RationalState(A=[1.0], B=[0.0, 0.0])

    def test_rank_and_decay_rate(self):
        r = RationalState(A=[1.0, 0.3], B=[1.0, -0.25, -0.125])
        assert r.rank == 2
        assert r.decay_rate() == pytest.approx(0.5)

    def test_taylor_coefficients(self, geometric_state):
        assert_allclose(geometric_state.coeffs, 0.5 ** np.arange(64), atol=1e-15)

    def test_unresolved_truncation(self):
        with pytest.raises(UnresolvedStateError):
            rational_to_fourier(RationalState(A=[1.0], B=[1.0, -0.9]), 16)

    def test_random_state_lies_in_the_manifold(self, rng):
        r = random_rational_state(rng, 3, pole_modulus=(2.0, 3.0))
        assert r.rank == 3
        assert np.all((np.abs(r.poles()) >= 2.0 - 1e-9) & (np.abs(r.poles()) <= 3.0 + 1e-9))
        assert r.B[0] == pytest.approx(1.0)


def test_szego_project_keeps_non_negative_frequencies():
    two_sided = np.array([1, 2, 3, 4, 5], dtype=complex)
    assert_allclose(szego_project(two_sided).coeffs, [1, 2, 3])
    assert_allclose(szego_project(two_sided, 5).coeffs, [1, 2, 3, 0, 0])


def test_rescale_alpha():
    v, sign = rescale_alpha(FourierState.from_coeffs([2.0, 4.0]), -4.0)
    assert_allclose(v.coeffs, [1.0, 2.0])
    assert sign == -1.0
    with pytest.raises(ValueError):
        rescale_alpha(v, 0.0)


class TestGrid:
    def test_plan_validation(self):
        with pytest.raises(ValidationError):
            GridPlan(M=32, N=16)
        with pytest.raises(ValidationError):
            GridPlan(M=48, N=16)
        assert GridPlan.for_truncation(16).M == 64

    def test_monomial_samples_the_circle(self, plan):
        assert_allclose(to_grid(FourierState.monomial(1, plan.N), plan), plan.points, atol=1e-13)

    def test_projection_inverts_sampling(self, plan, rng):
        u = FourierState(coeffs=rng.standard_normal(plan.N) + 1j * rng.standard_normal(plan.N))
        assert_allclose(project_grid(to_grid(u, plan), plan).coeffs, u.coeffs, atol=1e-13)

    def test_l4_norm(self, plan, one_plus_z):
        assert l4_norm_fourth(one_plus_z, plan) == pytest.approx(6.0)

    def test_l4_norm_warns_on_unresolved_state(self, plan):
        with pytest.warns(UnresolvedStateWarning):
            l4_norm_fourth(FourierState.monomial(15, plan.N), plan)


class TestBlaschke:
    def test_zero_outside_disc(self):
        with pytest.raises(InvalidStateError):
            BlaschkeProduct.factor(1.2)

    def test_unimodular_with_normalized_denominator(self):
        psi = BlaschkeProduct(angle=0.7, zeros=[0.3, -0.5j])
        assert psi.degree == 2
        assert psi.is_unimodular()
        assert psi.denominator()[0] == pytest.approx(1.0)
        assert psi(0.3)[()] == pytest.approx(0.0)

    def test_angle_is_reduced(self):
        assert BlaschkeProduct(angle=-math.pi).angle == pytest.approx(math.pi)

    def test_evaluation_outside_disc(self):
        with pytest.raises(ValueError):
            BlaschkeProduct.factor(0.1)(1.5)

    def test_substitution_of_z(self):
        plan = GridPlan(M=32, N=8)
        lifted = compose_with_blaschke(FourierState.from_coeffs([1, 1], 8), BlaschkeProduct.factor(0.0), plan)
        assert_allclose(lifted.coeffs, [1, 0, 1, 0, 0, 0, 0, 0], atol=1e-14)

    def test_substitution_of_a_factor(self):
        plan = GridPlan(M=128, N=32)
        lifted = compose_with_blaschke(FourierState.monomial(1, 32), BlaschkeProduct.factor(0.3), plan)
        expected = rational_to_fourier(RationalState(A=[0.0, -0.3, 1.0], B=[1.0, -0.3]), 32)
        assert_allclose(lifted.coeffs, expected.coeffs, atol=1e-13)

    def test_substitution_is_an_isometry(self, rng):
        chi = BlaschkeProduct(angle=0.4, zeros=[0.3 + 0.2j, -0.4j])
        plan = GridPlan(M=512, N=128)
        u, v = (FourierState.from_coeffs(rng.standard_normal(4) + 1j * rng.standard_normal(4), 128) for _ in range(2))
        u_chi = compose_with_blaschke(u, chi, plan)
        v_chi = compose_with_blaschke(v, chi, plan)
        assert inner_product(u_chi, v_chi) == pytest.approx(inner_product(u, v), abs=1e-10)
        assert inner_product(u_chi, u_chi).real == pytest.approx(inner_product(u, u).real, rel=1e-12)

    def test_substitution_needs_room(self):
        with pytest.raises(AliasingError):
            compose_with_blaschke(
                FourierState.from_coeffs([1, 1], 3), BlaschkeProduct.factor(0.0), GridPlan(M=16, N=3)
            )
