"""
Scenario plumbing: the per-run context handed to every runner, the report tables written from a
trajectory, and the re-evaluation of a finished run directory.
"""

__all__ = [
    "EVENTS_FILE",
    "SUMMARY_FILE",
    "RegimeEnum",
    "Scenario",
    "ScenarioContext",
    "check_run",
    "relative_drift",
    "run_scenario",
    "trajectory_tables",
]

import logging
import math
import warnings
from collections.abc import Callable, Collection, Mapping, Sequence
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field

from szego_lab.config import SimulationConfig
from szego_lab.constants import EventSeverityEnum, ScenarioNameEnum
from szego_lab.errors import SzegoLabError
from szego_lab.experiments.growth import pole_radius
from szego_lab.hardy import FourierState, sobolev_norm
from szego_lab.integrator import TrajectoryRecord
from szego_lab.reports import (
    INVARIANT_COLUMNS,
    CheckResult,
    CsvTable,
    EventLog,
    EventRecord,
    InvariantAudit,
    RunSummary,
    SpectralTrace,
    Trajectory,
    load_initial_data,
    read_document,
    write_document,
)

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"
EVENTS_FILE = "events.json"
COMPLETED_CHECK = "completed"
EVENTS_CHECK = "no_error_events"

_TABLES: dict[str, type[CsvTable]] = {
    table.file_name(): table for table in (Trajectory, InvariantAudit, SpectralTrace)
}


class RegimeEnum(StrEnum):
    DEFAULT = "default"
    GROWTH = "growth"


def relative_drift(values: ArrayLike) -> float:
    """``max_t |X(t) - X(0)| / max(|X(0)|, 1)``, ignoring blank samples."""
    series = np.asarray(values, dtype=np.float64)
    series = series[~np.isnan(series)]
    if series.size == 0:
        return math.nan
    return float(np.max(np.abs(series - series[0])) / max(abs(series[0]), 1.0))


_REDUCERS: dict[str, Callable[[np.ndarray], float]] = {
    "drift": relative_drift,
    "max": lambda series: float(np.nanmax(series)),
    "min": lambda series: float(np.nanmin(series)),
    "ptp": lambda series: float(np.nanmax(series) - np.nanmin(series)),
}


class ScenarioContext:
    """
    Mutable state of one scenario run.

    Arguments:
        name (ScenarioNameEnum): Scenario being run.
        config (SimulationConfig): Resolved configuration.
        out_dir (Path): Run directory; created if missing.
        seed (int): Seed of ``rng``.
        data_path (Path | None): [Optional] ``--data`` file replacing the built-in datum.
    """

    def __init__(
        self: Self,
        name: ScenarioNameEnum,
        config: SimulationConfig,
        out_dir: Path,
        seed: int = 0,
        data_path: Path | None = None,
    ) -> None:
        self.name = name
        self.config = config
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.data_path = data_path
        self.checks: list[CheckResult] = []
        self.values: dict[str, float | list[float]] = {}
        self.events = EventLog()

    def check(
        self: Self,
        name: str,
        value: float,
        threshold: float,
        comparison: str = "lt",
        *,
        details: str = "",
        source: str | None = None,
    ) -> CheckResult:
        draft = CheckResult(
            name=name,
            passed=False,
            value=float(value),
            threshold=float(threshold),
            comparison=comparison,
            details=details,
            source=source,
        )
        result = draft.model_copy(update={"passed": draft.reevaluate()})
        self.checks.append(result)
        logger.info(
            "%s %s: %.6g %s %.6g", "PASS" if result.passed else "FAIL", name, value, comparison, threshold
        )
        return result

    def flag(self: Self, name: str, passed: bool, details: str = "") -> CheckResult:
        result = CheckResult(name=name, passed=bool(passed), comparison="bool", details=details)
        self.checks.append(result)
        logger.info("%s %s %s", "PASS" if passed else "FAIL", name, details)
        return result

    def record(self: Self, key: str, value: float | Sequence[float]) -> None:
        self.values[key] = float(value) if np.ndim(value) == 0 else [float(item) for item in np.ravel(value)]

    def directory(self: Self, subdir: str | None = None) -> Path:
        path = self.out_dir / subdir if subdir else self.out_dir
        path.mkdir(parents=True, exist_ok=True)
        return path

    def initial_data(self: Self, default: Callable[[], FourierState]) -> FourierState:
        """The ``--data`` datum when one was given, ``default()`` otherwise."""
        if self.data_path is None:
            return default()
        logger.info("Initial datum from %s", self.data_path)
        return load_initial_data(self.data_path, self.config.N, self.config.tail_guard)

    def write_trajectory(self: Self, traj: TrajectoryRecord, subdir: str | None = None, n_modes: int = 8) -> Path:
        """Write the three report tables of ``traj`` and merge its events into the run log."""
        directory = self.directory(subdir)
        for table in trajectory_tables(traj, n_modes):
            table.write(directory)
        self.events.extend(traj.events.events)
        return directory


def _smallest_sigma(values: Sequence[float]) -> float | None:
    positive = [value for value in values if value > 0]
    return min(positive) if positive else None


def _spectral_gap(h_values: Sequence[float], k_values: Sequence[float]) -> float | None:
    """``min_{j,k} |rho_j - sigma_k|`` over the positive values; blank when either side is empty."""
    sigmas = [value for value in k_values if value > 0]
    if not h_values or not sigmas:
        return None
    return float(np.min(np.abs(np.subtract.outer(h_values, sigmas))))


def trajectory_tables(traj: TrajectoryRecord, n_modes: int = 8) -> tuple[Trajectory, InvariantAudit, SpectralTrace]:
    n_modes = min(n_modes, traj.config.N)
    n_max = len(traj.samples[0].invariants.hierarchy) - 1
    n_levels = max(len(sample.invariants.per_level) for sample in traj.samples)
    spectra = [sample.spectrum for sample in traj.samples if sample.spectrum is not None]
    n_h = max((len(spectrum.h_dominant) for spectrum in spectra), default=0)
    n_k = max((len(spectrum.k_dominant) for spectrum in spectra), default=0)
    zero_counts = [
        max((len(spectrum.k_zeros[k]) for spectrum in spectra if k < len(spectrum.k_zeros)), default=0)
        for k in range(max((len(spectrum.k_zeros) for spectrum in spectra), default=0))
    ]

    trajectory = Trajectory.for_modes(n_modes)
    audit = InvariantAudit.for_hierarchy(n_max, n_levels)
    trace = SpectralTrace.for_levels(n_h, n_k, zero_counts)
    start: dict[str, float] = {}
    for sample in traj.samples:
        state, t, invariants = sample.state, sample.t, sample.invariants
        conserved = {
            **{column: getattr(invariants, name) for name, column in INVARIANT_COLUMNS.items()},
            **{f"L_{n}": value for n, value in enumerate(invariants.hierarchy)},
        }
        start = start or conserved
        row: dict[str, Any] = {
            "t": t,
            "h_half": sobolev_norm(state, 0.5),
            "h_one": sobolev_norm(state, 1.0),
            "h_two": sobolev_norm(state, 2.0),
            "tail": state.tail_max(),
            "resolved": sample.resolved,
            **{column: conserved[column] for column in INVARIANT_COLUMNS.values()},
        }
        for k in range(n_modes):
            row[f"re_{k}"] = float(state.coeffs[k].real)
            row[f"im_{k}"] = float(state.coeffs[k].imag)
        trajectory.append(row)

        audit.append(
            {
                "t": t,
                **conserved,
                **{f"sigma_{k + 1}": sigma for k, (sigma, _) in enumerate(invariants.per_level)},
                **{f"ell_{k + 1}": ell for k, (_, ell) in enumerate(invariants.per_level)},
                **{f"drift_{name}": relative_drift([start[name], value]) for name, value in conserved.items()},
            }
        )

        spectral: dict[str, Any] = {"t": t, "pole_radius": pole_radius(state)}
        if sample.spectrum is not None:
            spectrum = sample.spectrum
            spectral["frozen_labels"] = spectrum.frozen_labels
            spectral["smallest_sigma"] = _smallest_sigma(spectrum.k_dominant)
            spectral["gap"] = _spectral_gap(sample.crossing_values(), spectrum.k_dominant)
            spectral.update({f"rho_{j + 1}": value for j, value in enumerate(spectrum.h_dominant)})
            spectral.update({f"sigma_{k + 1}": value for k, value in enumerate(spectrum.k_dominant)})
            for k, zeros in enumerate(spectrum.k_zeros):
                for i, (re, im) in enumerate(zeros):
                    spectral[f"psi_{k + 1}_re_{i + 1}"] = re
                    spectral[f"psi_{k + 1}_im_{i + 1}"] = im
        trace.append(spectral)
    return trajectory, audit, trace


class Scenario(BaseModel):
    """
    A registered scenario.

    Attributes:
        name (ScenarioNameEnum): Name used on the command line.
        runner (Callable[[ScenarioContext], None]): Body of the scenario; records its checks on the
            context.
        regime (RegimeEnum): Settings block the configuration starts from.
        overrides (dict[str, Any]): Scenario defaults applied on top of the settings block.
        ignored_events (tuple[str, ...]): Event code prefixes that do not fail the run.
        description (str): One line shown by ``szego-lab list``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: ScenarioNameEnum
    runner: Callable[[ScenarioContext], None]
    regime: RegimeEnum = RegimeEnum.DEFAULT
    overrides: dict[str, Any] = Field(default_factory=dict)
    ignored_events: tuple[str, ...] = ()
    description: str = ""

    def resolve_config(
        self: Self,
        base: SimulationConfig,
        configured: Mapping[str, Any] | None = None,
        **flags: Any,
    ) -> SimulationConfig:
        """
        ``flags`` over ``configured`` over the scenario defaults over ``base``.

        Arguments:
            base (SimulationConfig): Regime block of the settings.
            configured (Mapping[str, Any] | None): [Optional] Values the config file or environment
                set explicitly for the regime.
            **flags (Any): Command line values; ``None`` flags are skipped.
        """
        given = {name: value for name, value in flags.items() if value is not None}
        return base.with_overrides(**{**self.overrides, **(configured or {}), **given})


def _events_check(events: EventLog, ignored: Collection[str]) -> CheckResult:
    offending = [
        event
        for event in events.filtered(ignored)
        if event.severity in (EventSeverityEnum.ERROR, EventSeverityEnum.CRITICAL)
    ]
    details = "; ".join(f"{event.code} x{event.count}" for event in offending)
    return CheckResult(name=EVENTS_CHECK, passed=not offending, comparison="bool", details=details)


def run_scenario(
    scenario: Scenario,
    config: SimulationConfig,
    out_dir: Path,
    *,
    seed: int = 0,
    data_path: Path | None = None,
) -> RunSummary:
    """
    Run ``scenario`` and write ``summary.json`` and ``events.json`` into ``out_dir``.

    Warnings raised by the runner are recorded as events. An error of the lab stops the runner; it is
    recorded as an event and fails the ``completed`` check. Any other exception propagates.
    """
    context = ScenarioContext(scenario.name, config, out_dir, seed, data_path)
    logger.info("Running %s into %s", scenario.name, context.out_dir)
    completed = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            scenario.runner(context)
        except SzegoLabError as exc:
            logger.error("%s stopped: %s", scenario.name, exc)
            context.events.record(EventRecord.from_exception(exc))
            completed = False
    context.events.extend(EventRecord.from_warning(message) for message in caught)

    context.flag(COMPLETED_CHECK, completed)
    context.checks.append(_events_check(context.events, scenario.ignored_events))
    summary = RunSummary(
        scenario=scenario.name,
        config=config,
        checks=context.checks,
        values=context.values,
        seed=seed,
        ignored_events=list(scenario.ignored_events),
    )
    write_document(summary, context.out_dir / SUMMARY_FILE)
    write_document(context.events, context.out_dir / EVENTS_FILE)
    logger.info("%s: %d of %d checks failed", scenario.name, len(summary.failed), len(summary.checks))
    return summary


def _value_from_source(run_dir: Path, source: str) -> float:
    location, column, reducer = source.rsplit(":", 2)
    path = run_dir / location
    if path.name not in _TABLES:
        raise ValueError(f"Unknown table in check source '{source}'.")
    table = _TABLES[path.name].read(path.parent)
    return _REDUCERS[reducer](table.column(column))


def check_run(run_dir: Path, ignored: Collection[str] = ()) -> RunSummary:
    """
    Re-evaluate the checks of a finished run from its stored files.

    Checks with a ``source`` get their value recomputed from the CSV tables, the others are compared
    from the stored value and threshold. The event check is redone with ``ignored`` added to the
    prefixes the scenario already ignores.

    Raises:
        FileNotFoundError: ``run_dir`` holds no summary.
    """
    run_dir = Path(run_dir)
    summary = read_document(RunSummary, run_dir / SUMMARY_FILE)
    events_path = run_dir / EVENTS_FILE
    events = read_document(EventLog, events_path) if events_path.exists() else EventLog()
    ignored_events = sorted({*summary.ignored_events, *(code.upper() for code in ignored)})

    checks = []
    for check in summary.checks:
        if check.name == EVENTS_CHECK:
            checks.append(_events_check(events, ignored_events))
            continue
        if check.source is not None:
            check = check.model_copy(update={"value": _value_from_source(run_dir, check.source)})
        checks.append(check.model_copy(update={"passed": check.reevaluate()}))
    return summary.model_copy(update={"checks": checks, "ignored_events": ignored_events})
