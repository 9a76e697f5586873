import math
import warnings

import pytest

from szego_lab.config import SimulationConfig
from szego_lab.constants import ScenarioNameEnum
from szego_lab.errors import NearCrossingWarning, StepFailureError, TailBreachError
from szego_lab.experiments import Scenario, ScenarioContext, check_run, run_scenario, trajectory_tables
from szego_lab.experiments.base import EVENTS_FILE, SUMMARY_FILE, relative_drift
from szego_lab.hardy import FourierState
from szego_lab.integrator import TrajectoryRecord, TrajectorySample
from szego_lab.invariants import InvariantSet
from szego_lab.reports import EventLog, EventRecord, read_document
from szego_lab.spectral import SpectrumSummary
from tests.conftest import synthetic_trajectory

CONFIG = SimulationConfig(N=8, M=32, t_max=1.0)


def _scenario(runner, **kwargs) -> Scenario:
    return Scenario(name=ScenarioNameEnum.BOUNDED, runner=runner, **kwargs)


def test_relative_drift():
    assert relative_drift([2.0, 2.1, 1.9]) == pytest.approx(0.05)
    assert relative_drift([0.1, 0.3]) == pytest.approx(0.2)
    assert relative_drift([2.0, math.nan, 2.2]) == pytest.approx(0.1)
    assert math.isnan(relative_drift([]))


class TestScenarioContext:
    def test_checks_flags_and_values(self, tmp_path):
        context = ScenarioContext(ScenarioNameEnum.BOUNDED, CONFIG, tmp_path / "run")
        assert context.check("small", 1e-9, 1e-6).passed
        assert not context.check("large", 2.0, 1.0, "le").passed
        assert context.flag("flag", True, "ok").comparison == "bool"
        context.record("slope", 0.5)
        context.record("radii", [0.1, 0.2])
        assert context.values == {"slope": 0.5, "radii": [0.1, 0.2]}
        assert [check.passed for check in context.checks] == [True, False, True]

    def test_directories(self, tmp_path):
        context = ScenarioContext(ScenarioNameEnum.BOUNDED, CONFIG, tmp_path / "run")
        assert context.directory("lifted").is_dir()
        assert context.directory() == tmp_path / "run"

    def test_builtin_datum_without_data_file(self, tmp_path, one_plus_z):
        context = ScenarioContext(ScenarioNameEnum.BOUNDED, CONFIG, tmp_path)
        assert context.initial_data(lambda: one_plus_z) is one_plus_z


def test_trajectory_tables():
    traj = synthetic_trajectory(0.1, t_max=2.0)
    trajectory, audit, trace = trajectory_tables(traj, n_modes=4)
    assert len(trajectory) == len(audit) == len(trace) == 5
    assert trajectory.header[-2:] == ("re_3", "im_3")
    assert trajectory.column("re_1")[-1] == pytest.approx(math.exp(0.2))
    assert trajectory.column("h_one")[0] == pytest.approx(math.sqrt(2.0))
    assert audit.header[-2:] == ("drift_L_0", "drift_L_1")
    assert list(audit.column("drift_E_alpha")) == [0.0] * 5
    assert trajectory.column("Q")[0] == pytest.approx(1.0)
    assert list(trace.column("pole_radius")) == [0.0] * 5
    assert math.isnan(trace.column("gap")[0])


def test_trajectory_tables_carry_levels_and_zeros():
    invariants = InvariantSet(
        energy=2.0, mass=1.0, momentum=0.5, hierarchy=[1.0], per_level=[(0.9, 0.25), (0.3, 0.75)], alpha=1.0
    )
    spectrum = SpectrumSummary(h_dominant=[1.0, 0.5], k_dominant=[0.9, 0.3], k_zeros=[[(0.2, -0.1)], []])
    samples = [
        TrajectorySample(t=t, state=FourierState.monomial(1, 8), invariants=invariants, spectrum=spectrum)
        for t in (0.0, 0.5)
    ]
    traj = TrajectoryRecord(config=CONFIG, samples=samples)
    _, audit, trace = trajectory_tables(traj, n_modes=2)
    assert list(audit.column("ell_2")) == [0.75, 0.75]
    assert list(audit.column("sigma_1")) == [0.9, 0.9]
    assert trace.column("gap")[0] == pytest.approx(0.1)
    assert (trace.column("psi_1_re_1")[0], trace.column("psi_1_im_1")[0]) == (0.2, -0.1)
    assert "psi_2_re_1" not in trace.header


class TestRunScenario:
    def test_passing_run(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            context.check("residual", 1e-10, 1e-8)
            context.record("slope", 0.25)

        summary = run_scenario(_scenario(runner), CONFIG, tmp_path, seed=3)
        assert summary.passed
        assert [check.name for check in summary.checks] == ["residual", "completed", "no_error_events"]
        assert summary.seed == 3
        assert (tmp_path / SUMMARY_FILE).exists()
        assert read_document(EventLog, tmp_path / EVENTS_FILE).events == []

    def test_lab_error_stops_the_run(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            context.check("before", 0.0, 1.0)
            raise StepFailureError("step size underflow", t=0.5)

        summary = run_scenario(_scenario(runner), CONFIG, tmp_path)
        assert {check.name for check in summary.failed} == {"completed", "no_error_events"}
        events = read_document(EventLog, tmp_path / EVENTS_FILE).events
        assert [(event.code, event.t) for event in events] == [(StepFailureError.code(), 0.5)]

    def test_other_exceptions_propagate(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            raise KeyError("boom")

        with pytest.raises(KeyError):
            run_scenario(_scenario(runner), CONFIG, tmp_path)

    def test_warnings_are_recorded(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            warnings.warn(NearCrossingWarning("gap 1e-3"), stacklevel=1)

        summary = run_scenario(_scenario(runner), CONFIG, tmp_path)
        assert summary.passed
        events = read_document(EventLog, tmp_path / EVENTS_FILE).events
        assert [event.code for event in events] == [NearCrossingWarning.code()]

    def test_ignored_events(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            context.events.record(EventRecord.from_exception(TailBreachError("tail", t=4.0)))

        assert not run_scenario(_scenario(runner), CONFIG, tmp_path / "strict").passed
        scenario = _scenario(runner, ignored_events=("INTEGRATOR.TAIL",))
        assert run_scenario(scenario, CONFIG, tmp_path / "lenient").passed
        assert check_run(tmp_path / "lenient").passed


class TestCheckRun:
    def test_sourced_values_are_recomputed(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            context.write_trajectory(synthetic_trajectory(0.0, t_max=2.0))
            context.check("energy_drift", 1.0, 1e-6, source="invariant_audits.csv:E_alpha:drift")

        summary = run_scenario(_scenario(runner), CONFIG, tmp_path)
        assert [check.name for check in summary.failed] == ["energy_drift"]
        recomputed = check_run(tmp_path)
        assert recomputed.passed
        assert recomputed.checks[0].value == 0.0

    def test_ignored_prefixes_fix_the_event_check(self, tmp_path):
        def runner(context: ScenarioContext) -> None:
            context.events.record(EventRecord.from_exception(TailBreachError("tail")))

        run_scenario(_scenario(runner), CONFIG, tmp_path)
        assert not check_run(tmp_path).passed
        rechecked = check_run(tmp_path, ignored=["integrator"])
        assert rechecked.passed
        assert rechecked.ignored_events == ["INTEGRATOR"]

    def test_missing_summary(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            check_run(tmp_path)
