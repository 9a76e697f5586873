import math
import warnings

import numpy as np
import pytest

from szego_lab.errors import NearResonanceError
from szego_lab.hardy import FourierState, GridPlan
from szego_lab.invariants import (
    FunctionalId,
    FunctionalKindEnum,
    energy,
    generating_values,
    hierarchy_independence,
    hierarchy_L,
    invariant_set,
    j_product_formula,
    l1_closed_form,
    l_functional,
    mass,
    moment_residuals,
    momentum,
    poisson_bracket,
    rank_one_growth_criterion,
)
from szego_lab.spectral import decompose


def test_mass_and_momentum():
    u = FourierState.from_coeffs([1.0, 2.0])
    assert mass(u) == pytest.approx(5.0)
    assert momentum(u) == pytest.approx(4.0)


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0, 2.5])
def test_energy_and_first_hierarchy_value(one_plus_z, plan, alpha):
    assert energy(one_plus_z, alpha, plan) == pytest.approx(1.5 + 0.5 * alpha)
    values = hierarchy_L(one_plus_z, alpha, 2)
    assert values[0] == pytest.approx(2.0 - alpha)
    assert values[1] == pytest.approx(1.0 - alpha)
    assert l1_closed_form(one_plus_z, alpha, plan) == pytest.approx(values[1])


def test_l_functional_matches_hierarchy(rank_two_state):
    alpha = 0.7
    values = hierarchy_L(rank_two_state, alpha, 2)
    assert l_functional(rank_two_state, alpha, lambda x: x) == pytest.approx(values[1], rel=1e-10, abs=1e-10)
    assert l_functional(rank_two_state, alpha, lambda x: x**2) == pytest.approx(values[2], rel=1e-10, abs=1e-10)


@pytest.mark.parametrize(("alpha", "b"), [(1.0, 1.0), (4.0, 2.0)])
def test_growth_criterion_vanishes_on_the_growth_family(alpha, b):
    u = FourierState.from_coeffs([b, 1.0], 16)
    assert rank_one_growth_criterion(u, alpha, GridPlan(M=64, N=16)) == pytest.approx(0.0, abs=1e-12)


def test_growth_criterion_off_the_family(plan):
    u = FourierState.from_coeffs([1.0, 1.0], 16)
    assert abs(rank_one_growth_criterion(u, 2.0, plan)) > 0.1


class TestGeneratingValues:
    def test_origin(self, one_plus_z):
        values = generating_values(one_plus_z, 1.0, 0.0)
        assert (values.J, values.E) == (1.0, 1.0)
        assert values.F == pytest.approx(2.0)
        assert values.L == pytest.approx(1.0)

    def test_relations_and_product_formula(self, rank_two_state):
        x = -0.3
        values = generating_values(rank_two_state, 1.0, x)
        assert max(values.relation_residuals) < 1e-10
        dec = decompose(rank_two_state)
        assert j_product_formula(dec, x) == pytest.approx(values.J, rel=1e-10)

    def test_resonance(self, one_plus_z):
        with pytest.raises(NearResonanceError):
            generating_values(one_plus_z, 1.0, 2.0 / (3.0 + math.sqrt(5.0)))


def test_moments_reproduce_the_hierarchy(rank_two_state):
    alpha = -0.5
    dec = decompose(rank_two_state)
    hierarchy = hierarchy_L(rank_two_state, alpha, 4)
    assert max(moment_residuals(dec, hierarchy, alpha)) < 1e-10 * max(1.0, max(map(abs, hierarchy)))


def test_invariant_set(one_plus_z, plan):
    values = invariant_set(one_plus_z, 1.0, plan, n_max=3, dec=decompose(one_plus_z))
    assert len(values.hierarchy) == 4
    assert values.mass == pytest.approx(2.0)
    assert values.per_level[0][0] == pytest.approx(1.0)
    assert values.per_level[0][1] == pytest.approx(0.0, abs=1e-12)


class TestBrackets:
    @pytest.fixture
    def small_state(self, rng) -> FourierState:
        coeffs = (rng.standard_normal(6) + 1j * rng.standard_normal(6)) * 0.5 ** np.arange(6)
        return FourierState.from_coeffs(coeffs, 8)

    @pytest.mark.parametrize("kind", [FunctionalKindEnum.MASS, FunctionalKindEnum.MOMENTUM])
    def test_energy_commutes_with_symmetries(self, small_state, kind):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bracket = poisson_bracket(
                FunctionalId(kind=FunctionalKindEnum.ENERGY),
                FunctionalId(kind=kind),
                small_state,
                1.0,
                GridPlan(M=32, N=8),
            )
        assert bracket.normalized < 1e-6

    def test_mass_and_momentum_commute(self, small_state):
        bracket = poisson_bracket(
            FunctionalId(kind=FunctionalKindEnum.MASS),
            FunctionalId(kind=FunctionalKindEnum.MOMENTUM),
            small_state,
            1.0,
            GridPlan(M=32, N=8),
        )
        assert bracket.normalized < 1e-8

    def test_functional_names(self):
        assert str(FunctionalId(kind=FunctionalKindEnum.L_X, x=0.5)) == "L_0.5"
        assert str(FunctionalId(kind=FunctionalKindEnum.MASS)) == "mass"


def test_hierarchy_is_independent(rng):
    coeffs = (rng.standard_normal(6) + 1j * rng.standard_normal(6)) * 0.5 ** np.arange(6)
    report = hierarchy_independence(FourierState.from_coeffs(coeffs, 8), 1.0, 3)
    assert report.functionals == 4
    assert report.rank >= 3
