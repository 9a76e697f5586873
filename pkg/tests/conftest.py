import numpy as np
import pytest

from szego_lab.config import SimulationConfig, get_settings
from szego_lab.hardy import FourierState, GridPlan, RationalState, random_rational_state, rational_to_fourier
from szego_lab.integrator import TrajectoryRecord, TrajectorySample, integrate
from szego_lab.invariants import InvariantSet


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def plan() -> GridPlan:
    return GridPlan(M=64, N=16)


@pytest.fixture
def one_plus_z() -> FourierState:
    return FourierState.from_coeffs([1.0, 1.0], 16)


@pytest.fixture
def rank_two_state(rng: np.random.Generator) -> FourierState:
    return rational_to_fourier(random_rational_state(rng, 2, pole_modulus=(2.5, 4.0)), 64)


@pytest.fixture
def geometric_state() -> FourierState:
    """``1 / (1 - z / 2)``."""
    return rational_to_fourier(RationalState(A=[1.0], B=[1.0, -0.5]), 64)


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def growth_run() -> TrajectoryRecord:
    """``1 + z`` under ``alpha = 1`` for one time unit."""
    config = SimulationConfig(alpha=1.0, N=64, M=256, t_max=1.0, sample_interval=0.1)
    return integrate(config, FourierState.from_coeffs([1.0, 1.0], 64))


def synthetic_trajectory(rate: float, t_max: float = 10.0, resolved_until: float | None = None) -> TrajectoryRecord:
    """``e^{rate t} z`` sampled every 0.5; samples after ``resolved_until`` are marked unresolved."""
    config = SimulationConfig(N=8, M=32, t_max=t_max, sample_interval=0.5)
    samples = []
    for t in np.arange(0.0, t_max + 0.25, 0.5):
        samples.append(
            TrajectorySample(
                t=float(t),
                state=FourierState.monomial(1, 8, np.exp(rate * t)),
                invariants=InvariantSet(energy=1.0, mass=1.0, momentum=1.0, hierarchy=[0.0, 0.0], alpha=1.0),
                resolved=resolved_until is None or t <= resolved_until,
            )
        )
    return TrajectoryRecord(config=config, samples=samples)
