import numpy as np
import pytest
from numpy.testing import assert_allclose

from szego_lab.config import SimulationConfig
from szego_lab.errors import TailBreachError, UnresolvedStateError
from szego_lab.experiments import builtin_cubic_lift
from szego_lab.hardy import FourierState, GridPlan
from szego_lab.integrator import advance, from_normalized, integrate, rhs, time_rescale
from szego_lab.reports import Checkpoint


@pytest.fixture
def small_plan() -> GridPlan:
    return GridPlan(M=32, N=8)


def test_rhs_of_a_constant(small_plan):
    c = 0.8 + 0.3j
    derivative = rhs(FourierState.from_coeffs([c], 8), 2.0, small_plan)
    expected = np.zeros(8, dtype=complex)
    expected[0] = -1j * (abs(c) ** 2 + 2.0) * c
    assert_allclose(derivative.coeffs, expected, atol=1e-14)


def test_rhs_is_the_integrated_vector_field(small_plan, rng):
    u = FourierState.from_coeffs((rng.standard_normal(3) + 1j * rng.standard_normal(3)) * 0.4, 8)
    dt = 1e-4
    centered = (advance(u, -1.5, small_plan, dt).coeffs - advance(u, -1.5, small_plan, -dt).coeffs) / (2 * dt)
    assert_allclose(rhs(u, -1.5, small_plan).coeffs, centered, atol=1e-7)


@pytest.mark.parametrize("alpha", [-1.0, 1.0])
def test_constant_orbit(small_plan, alpha):
    c = 0.8 + 0.3j
    state = advance(FourierState.from_coeffs([c], 8), alpha, small_plan, 2.0)
    assert state.coeffs[0] == pytest.approx(c * np.exp(-1j * (abs(c) ** 2 + alpha) * 2.0), abs=1e-10)
    assert_allclose(state.coeffs[1:], 0.0, atol=1e-14)


def test_monomial_orbit(small_plan):
    state = advance(FourierState.monomial(1, 8), 3.0, small_plan, 1.5)
    assert state.coeffs[1] == pytest.approx(np.exp(-1.5j), abs=1e-10)


def test_backward_step_inverts_forward(small_plan, rng):
    u = FourierState.from_coeffs((rng.standard_normal(4) + 1j * rng.standard_normal(4)) * 0.3, 8)
    there = advance(u, 1.0, small_plan, 0.7)
    back = advance(there, 1.0, small_plan, -0.7)
    assert_allclose(back.coeffs, u.coeffs, atol=1e-10)


def test_cubic_lift_follows_the_cubic_flow():
    base = FourierState.from_coeffs([1.0, 1.0], 32)
    lifted = builtin_cubic_lift(base)
    cubic = advance(base, 0.0, GridPlan(M=128, N=32), 1.0)
    perturbed = advance(lifted, 1.0, GridPlan(M=256, N=64), 1.0)
    assert_allclose(perturbed.coeffs[1::2], cubic.coeffs, atol=1e-9)
    assert_allclose(perturbed.coeffs[::2], 0.0, atol=1e-12)


def test_time_rescale_and_normalization():
    assert_allclose(time_rescale([0.0, 1.0], -4.0), [0.0, 4.0])
    assert_allclose(from_normalized(FourierState.from_coeffs([1.0]), 4.0).coeffs, [2.0])


class TestIntegrate:
    def test_samples_and_conservation(self, growth_run):
        assert growth_run.completed
        assert_allclose(growth_run.times, np.linspace(0.0, 1.0, 11), atol=1e-12)
        for name in ("energy", "mass", "momentum", "L_1"):
            series = growth_run.series(name)
            assert np.max(np.abs(series - series[0])) < 1e-9
        assert growth_run.series("L_1")[0] == pytest.approx(0.0, abs=1e-12)

    def test_spectrum_is_recorded(self, growth_run):
        first = growth_run.samples[0].spectrum
        assert first is not None
        assert first.k_dominant == pytest.approx([1.0, 0.0], abs=1e-10)

    def test_state_at_interpolates(self, growth_run):
        sample = growth_run.samples[5]
        assert_allclose(growth_run.state_at(sample.t).coeffs, sample.state.coeffs, atol=1e-12)
        with pytest.raises(ValueError):
            growth_run.state_at(2.0)

    def test_resume_from_checkpoint(self, growth_run):
        config = growth_run.config
        head = integrate(config.with_overrides(t_max=0.5), FourierState.from_coeffs([1.0, 1.0], 64))
        checkpoint = Checkpoint.model_validate_json(head.checkpoint().model_dump_json())
        tail = integrate(config, FourierState.zeros(64), resume=checkpoint)
        assert tail.samples[0].t == pytest.approx(0.5)
        assert_allclose(tail.final.state.coeffs, growth_run.final.state.coeffs, atol=1e-9)

    def test_callbacks_see_every_sample(self):
        seen = []
        config = SimulationConfig(N=8, M=32, t_max=0.3, sample_interval=0.1)
        integrate(config, FourierState.from_coeffs([0.5], 8), [lambda sample: seen.append(sample.t)])
        assert seen == pytest.approx([0.0, 0.1, 0.2, 0.3])

    def test_unresolved_datum(self):
        config = SimulationConfig(N=8, M=32, t_max=1.0)
        with pytest.raises(UnresolvedStateError):
            integrate(config, FourierState.monomial(7, 8))

    def test_tail_breach_stops_the_run(self):
        config = SimulationConfig(N=8, M=32, t_max=2.0, sample_interval=0.5, tail_guard=1e-12)
        u0 = FourierState.from_coeffs([1.0, 1.0, 1.0], 8)
        record = integrate(config, u0, with_spectrum=False)
        assert not record.completed
        assert not record.final.resolved
        assert TailBreachError.code() in record.events.counts_by_code()
        with pytest.raises(TailBreachError):
            integrate(config, u0, strict=True, with_spectrum=False)
