import pytest

from szego_lab.config import SimulationConfig
from szego_lab.errors import FiniteDifferenceStepWarning, NonSimpleLevelWarning
from szego_lab.hardy import FourierState
from szego_lab.integrator import integrate
from szego_lab.residuals import (
    blaschke_orbit_trace,
    blaschke_phase_trace,
    hu_evolution_residual,
    lax_residual_K,
    pk_system_residual,
    projection_evolution_residual,
)


def test_lax_pair_for_K(growth_run):
    assert lax_residual_K(growth_run, 0.5) < 1e-6


def test_halving_the_step_quarters_the_residual(growth_run):
    coarse = lax_residual_K(growth_run, 0.5, dt=1e-3)
    fine = lax_residual_K(growth_run, 0.5, dt=5e-4)
    assert coarse / fine == pytest.approx(4.0, rel=0.2)


def test_hu_evolution_needs_the_source_term(growth_run):
    assert hu_evolution_residual(growth_run, 0.5) < 1e-6
    assert hu_evolution_residual(growth_run, 0.5, include_source=False) > 1e-2


def test_projection_evolution(growth_run):
    assert projection_evolution_residual(growth_run, 1.0, 0.5) < 1e-6
    residual_u, residual_v = pk_system_residual(growth_run, 1.0, 0.5)
    assert residual_u < 1e-6
    assert residual_v >= 0.0


def test_projection_evolution_skips_a_double_level():
    # K_u^2 = I/4 on span{1, z} for 1 + z^2 / 2
    config = SimulationConfig(alpha=1.0, N=64, M=256, t_max=0.2, sample_interval=0.1)
    record = integrate(config, FourierState.from_coeffs([1.0, 0.0, 0.5], 64))
    with pytest.warns(NonSimpleLevelWarning):
        assert projection_evolution_residual(record, 0.5, 0.1) is None


def test_out_of_range_step_warns(growth_run):
    with pytest.warns(FiniteDifferenceStepWarning):
        lax_residual_K(growth_run, 0.5, dt=0.1)


def test_unknown_level(growth_run):
    with pytest.raises(ValueError):
        projection_evolution_residual(growth_run, 0.3, 0.5)


def test_simple_level_has_no_blaschke_zeros(growth_run):
    orbit = blaschke_orbit_trace(growth_run, 1.0)
    assert orbit.degree == 0
    assert orbit.max_drift == 0.0
    assert len(orbit.times) + len(orbit.skipped) == len(growth_run.samples)


def test_phase_trace_starts_at_the_measured_angle(growth_run):
    trace = blaschke_phase_trace(growth_run, 1.0)
    assert trace.times.size > 0
    assert trace.gamma[0] == 0.0
    assert trace.mismatch[0] == pytest.approx(0.0, abs=1e-12)
