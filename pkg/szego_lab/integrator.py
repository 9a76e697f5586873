"""
Time evolution of the truncated flow ``i u_t = Pi_N(|u|^2 u) + alpha (u|1)``.

The cubic term is evaluated on the grid and projected back to the ``N`` kept modes (Galerkin
truncation). With ``M >= 3N`` the product is alias free, so the truncated system is the restriction
of the Hamiltonian flow to the first ``N`` modes and conserves its truncated energy, mass and
momentum.

Stepping is the Dormand-Prince 5(4) pair with first-same-as-last reuse and a PI step controller.
Steps are shortened to land on the sample times exactly.
"""

__all__ = [
    "DormandPrince54",
    "TrajectoryRecord",
    "TrajectorySample",
    "advance",
    "from_normalized",
    "integrate",
    "rhs",
    "time_rescale",
]

import logging
import math
import warnings
from collections.abc import Callable, Iterable
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from szego_lab.config import SimulationConfig
from szego_lab.constants import EventSeverityEnum
from szego_lab.errors import NearCrossingWarning, StepFailureError, TailBreachError, UnresolvedStateError
from szego_lab.hardy import FourierState, GridPlan, from_grid, to_grid
from szego_lab.invariants import InvariantSet, invariant_set
from szego_lab.reports.documents import Checkpoint, EventLog, EventRecord
from szego_lab.spectral import CrossingReport, SpectrumSummary, detect_crossings, summarize_spectrum

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau, autonomous form
_TABLEAU = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_WEIGHTS = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_ERROR_WEIGHTS = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY = 0.9
BETA_1 = 0.7 / 5
BETA_2 = 0.4 / 5
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MIN_STEP = 1e-13


def _rhs_coeffs(y: NDArray[np.complex128], alpha: float, plan: GridPlan) -> NDArray[np.complex128]:
    values = to_grid(y, plan)
    out = -1j * from_grid(np.abs(values) ** 2 * values, plan)[: plan.N]
    out[0] -= 1j * alpha * y[0]
    return out


def rhs(u: FourierState, alpha: float, plan: GridPlan) -> FourierState:
    """
    ``du/dt = -i (Pi_N(|u|^2 u) + alpha u(0) e_0)``.

    Arguments:
        u (FourierState): Current state; resized to ``plan.N`` modes.
        alpha (float): Coupling of the ``(u|1)`` term.
        plan (GridPlan): Product grid.
    """
    return FourierState(coeffs=_rhs_coeffs(u.resized(plan.N).coeffs, alpha, plan))


class DormandPrince54:
    """
    Adaptive Dormand-Prince 5(4) stepper for the truncated flow.

    Arguments:
        alpha (float): Coupling.
        plan (GridPlan): Product grid.
        rel_tol (float): Relative tolerance.
        abs_tol (float): Absolute tolerance.
        max_steps (int): Cap on accepted plus rejected steps over the stepper's lifetime.
    """

    def __init__(
        self: Self,
        alpha: float,
        plan: GridPlan,
        rel_tol: float,
        abs_tol: float,
        max_steps: int = 2_000_000,
    ) -> None:
        self.alpha = alpha
        self.plan = plan
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_steps = max_steps
        self.accepted = 0
        self.rejected = 0
        self._previous_error = 1e-4

    def derivative(self: Self, y: NDArray[np.complex128]) -> NDArray[np.complex128]:
        return _rhs_coeffs(y, self.alpha, self.plan)

    def _error_norm(
        self: Self,
        error: NDArray[np.complex128],
        y: NDArray[np.complex128],
        y_new: NDArray[np.complex128],
    ) -> float:
        scale = self.abs_tol + self.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        return float(np.sqrt(np.mean((np.abs(error) / scale) ** 2)))

    def attempt(
        self: Self,
        y: NDArray[np.complex128],
        k1: NDArray[np.complex128],
        h: float,
    ) -> tuple[NDArray[np.complex128], NDArray[np.complex128], float]:
        """One trial step; returns the new state, its derivative and the scaled error norm."""
        stages = [k1]
        for row in _TABLEAU[1:]:
            increment = sum((a * k for a, k in zip(row, stages, strict=False) if a), np.zeros_like(y))
            stages.append(self.derivative(y + h * increment))
        y_new = y + h * sum((b * k for b, k in zip(_WEIGHTS, stages, strict=False) if b), np.zeros_like(y))
        k7 = self.derivative(y_new)
        stages.append(k7)
        error = h * sum((e * k for e, k in zip(_ERROR_WEIGHTS, stages, strict=True) if e), np.zeros_like(y))
        if not np.all(np.isfinite(y_new)):
            return y_new, k7, math.inf
        return y_new, k7, self._error_norm(error, y, y_new)

    def initial_step(self: Self, y: NDArray[np.complex128], k1: NDArray[np.complex128], span: float) -> float:
        d0 = float(np.linalg.norm(y))
        d1 = float(np.linalg.norm(k1))
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        return min(h, abs(span)) if span else h

    def evolve(
        self: Self,
        y: NDArray[np.complex128],
        t: float,
        t_end: float,
        h: float | None = None,
        k1: NDArray[np.complex128] | None = None,
    ) -> tuple[NDArray[np.complex128], float, float, NDArray[np.complex128]]:
        """
        Integrate from ``t`` to ``t_end`` (either direction).

        Returns:
            tuple: ``(y, t_end, h, k1)``; pass ``h`` and ``k1`` back in to continue.

        Raises:
            StepFailureError: The step size fell below the floor or the step cap was hit.
        """
        if k1 is None:
            k1 = self.derivative(y)
        direction = 1.0 if t_end >= t else -1.0
        if h is None:
            h = self.initial_step(y, k1, t_end - t)
        h = abs(h)
        just_rejected = False
        while direction * (t_end - t) > MIN_STEP * max(1.0, abs(t_end)):
            if self.accepted + self.rejected >= self.max_steps:
                raise StepFailureError(f"Step cap {self.max_steps} reached.", t=t)
            remaining = abs(t_end - t)
            last = h >= remaining
            step = direction * (remaining if last else h)
            y_new, k7, error = self.attempt(y, k1, step)
            if error <= 1.0:
                self.accepted += 1
                t = t_end if last else t + step
                y, k1 = y_new, k7
                if error == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * error ** (-BETA_1) * self._previous_error**BETA_2
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
                if just_rejected:
                    factor = min(factor, 1.0)
                self._previous_error = max(error, 1e-4)
                if not last or abs(step) >= 0.5 * h:
                    h *= factor
                just_rejected = False
            else:
                self.rejected += 1
                factor = MIN_FACTOR if not math.isfinite(error) else max(MIN_FACTOR, SAFETY * error ** (-0.2))
                h = abs(step) * factor
                just_rejected = True
                logger.debug("Rejected step at t=%.6g, error %.3g, next h=%.3g", t, error, h)
                if h < MIN_STEP * max(1.0, abs(t)):
                    raise StepFailureError(f"Step size {h:.3g} below the floor; tolerance unreachable.", t=t)
        return y, t_end, h, k1


def advance(
    u: FourierState,
    alpha: float,
    plan: GridPlan,
    dt: float,
    rel_tol: float = 1e-13,
    abs_tol: float = 1e-13,
) -> FourierState:
    """State after time ``dt``; negative ``dt`` integrates backwards."""
    if dt == 0.0:
        return u.resized(plan.N)
    stepper = DormandPrince54(alpha, plan, rel_tol, abs_tol)
    y, *_ = stepper.evolve(u.resized(plan.N).coeffs.copy(), 0.0, dt)
    return FourierState(coeffs=y)


def time_rescale(t: ArrayLike, alpha: float) -> NDArray[np.float64]:
    """
    Times of the normalized flow matching times ``t`` of the ``alpha`` flow.

    With ``v`` the normalized solution from ``rescale_alpha(u0, alpha)``,
    ``u(t) = sqrt(|alpha|) v(|alpha| t)``.
    """
    return abs(alpha) * np.asarray(t, dtype=np.float64)


def from_normalized(v: FourierState, alpha: float) -> FourierState:
    """``sqrt(|alpha|) v``, the inverse of the state part of ``rescale_alpha``."""
    return v * math.sqrt(abs(alpha))


class TrajectorySample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: float
    state: FourierState
    invariants: InvariantSet
    spectrum: SpectrumSummary | None = None
    resolved: bool = True

    def crossing_values(self: Self) -> list[float]:
        """``H`` values compared with ``sigma`` by the crossing detector."""
        if self.spectrum is None:
            return []
        return self.spectrum.h_singular if self.spectrum.frozen_labels else self.spectrum.h_dominant


class TrajectoryRecord(BaseModel):
    """
    Samples of one integration run.

    Attributes:
        config (SimulationConfig): Configuration the run used.
        samples (list[TrajectorySample]): Strictly increasing in ``t``.
        events (EventLog): Warnings, tail breaches and crossings seen during the run.
        crossings (list[CrossingReport]): One report per positive ``K`` value of the first sample.
        completed (bool): ``True`` when ``t_max`` was reached.
        accepted_steps (int): Accepted stepper steps.
        rejected_steps (int): Rejected stepper steps.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: SimulationConfig
    samples: list[TrajectorySample]
    events: EventLog = Field(default_factory=EventLog)
    crossings: list[CrossingReport] = Field(default_factory=list)
    completed: bool = True
    accepted_steps: int = 0
    rejected_steps: int = 0

    @model_validator(mode="after")
    def _check_times(self: Self) -> Self:
        times = [sample.t for sample in self.samples]
        if any(b <= a for a, b in zip(times, times[1:], strict=False)):
            raise ValueError("sample times must be strictly increasing")
        return self

    @property
    def times(self: Self) -> NDArray[np.float64]:
        return np.array([sample.t for sample in self.samples], dtype=np.float64)

    @property
    def final(self: Self) -> TrajectorySample:
        return self.samples[-1]

    @property
    def resolved_until(self: Self) -> float:
        """Last time up to which every sample is resolved."""
        last = self.samples[0].t
        for sample in self.samples:
            if not sample.resolved:
                break
            last = sample.t
        return last

    def sample_at(self: Self, t: float, tol: float = 1e-9) -> TrajectorySample | None:
        index = int(np.argmin(np.abs(self.times - t)))
        return self.samples[index] if abs(self.samples[index].t - t) <= tol else None

    def state_at(self: Self, t: float) -> FourierState:
        """
        State at time ``t`` inside the recorded window, advanced from the closest earlier sample.

        Raises:
            ValueError: ``t`` lies outside the recorded window.
        """
        times = self.times
        if not times[0] - 1e-12 <= t <= times[-1] + 1e-12:
            raise ValueError(f"t={t} outside the recorded window [{times[0]}, {times[-1]}].")
        index = max(int(np.searchsorted(times, t, side="right")) - 1, 0)
        sample = self.samples[index]
        return advance(sample.state, self.config.alpha, self.config.grid_plan(), t - sample.t)

    def series(self: Self, name: str) -> NDArray[np.float64]:
        """Time series of an invariant: ``energy``, ``mass``, ``momentum`` or ``L_n``."""
        if name.startswith("L_"):
            n = int(name[2:])
            return np.array([sample.invariants.hierarchy[n] for sample in self.samples], dtype=np.float64)
        return np.array([getattr(sample.invariants, name) for sample in self.samples], dtype=np.float64)

    def checkpoint(self: Self) -> Checkpoint:
        return Checkpoint.capture(self.final.t, self.final.state, self.config)


def _sample_times(t0: float, t_max: float, interval: float) -> list[float]:
    count = int(math.floor((t_max - t0) / interval + 1e-9))
    times = [t0 + interval * j for j in range(1, count + 1)]
    if not times or t_max - times[-1] > 1e-9 * max(1.0, t_max):
        times.append(t_max)
    return [t for t in times if t > t0]


def _take_sample(
    t: float,
    state: FourierState,
    config: SimulationConfig,
    plan: GridPlan,
    previous: SpectrumSummary | None,
    events: EventLog,
    n_max: int,
    with_spectrum: bool,
) -> TrajectorySample:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        spectrum, dec = (
            summarize_spectrum(state, config.m, config.cluster_tol, tail_tol=config.tail_guard, previous=previous)
            if with_spectrum
            else (None, None)
        )
        invariants = invariant_set(state, config.alpha, plan, n_max, config.m, dec)
    events.extend(EventRecord.from_warning(message, t) for message in caught)
    return TrajectorySample(
        t=t,
        state=state,
        invariants=invariants,
        spectrum=spectrum,
        resolved=state.is_resolved(config.tail_guard),
    )


def _crossing_reports(samples: list[TrajectorySample], events: EventLog) -> list[CrossingReport]:
    first = next((sample.spectrum for sample in samples if sample.spectrum is not None), None)
    if first is None or len(samples) < 3:
        return []
    times = [sample.t for sample in samples]
    traces = [sample.crossing_values() for sample in samples]
    reports = []
    for sigma in first.k_values:
        if sigma <= 0:
            continue
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = detect_crossings(times, traces, sigma)
        events.extend(EventRecord.from_warning(message) for message in caught)
        if not report.permanent:
            events.extend(
                EventRecord(
                    code=NearCrossingWarning.code(),
                    details=f"H value crosses sigma={sigma:.9g}.",
                    severity=EventSeverityEnum.INFO,
                    t=t,
                )
                for t in report.times
            )
        reports.append(report)
    return reports


def integrate(
    config: SimulationConfig,
    u0: FourierState,
    callbacks: Iterable[Callable[[TrajectorySample], None]] = (),
    *,
    strict: bool = False,
    resume: Checkpoint | None = None,
    n_max: int = 4,
    with_spectrum: bool = True,
) -> TrajectoryRecord:
    """
    Integrate ``u0`` up to ``config.t_max``, sampling every ``config.sample_interval``.

    Each sample carries the invariants and the spectrum summary. When a sample is no longer
    resolved at ``config.tail_guard`` the run stops there with a tail breach event; the record
    keeps everything up to and including that sample.

    Arguments:
        config (SimulationConfig): Run parameters.
        u0 (FourierState): Initial datum, resized to ``config.N`` modes.
        callbacks (Iterable[Callable]): Called with every new sample.
        strict (bool): Raise `TailBreachError` instead of stopping quietly.
        resume (Checkpoint | None): [Optional] Continue from a checkpoint; ``u0`` is ignored.
        n_max (int): Highest hierarchy index audited.
        with_spectrum (bool): Disable to skip the per sample eigen-analysis.

    Raises:
        UnresolvedStateError: ``u0`` is not resolved at ``config.N``.
        StepFailureError: The stepper cannot meet the tolerance.
        TailBreachError: Only with ``strict=True``.
    """
    plan = config.grid_plan()
    t0 = 0.0
    state = u0.resized(config.N)
    if resume is not None:
        t0 = resume.t
        state = resume.state.to_state().resized(config.N)
        logger.info("Resuming at t=%.6g", t0)
    if not state.is_resolved(config.tail_guard):
        raise UnresolvedStateError(
            f"Initial tail {state.tail_max():.3g} exceeds the guard {config.tail_guard:.3g}; increase N.", t=t0
        )

    events = EventLog()
    callbacks = list(callbacks)
    stepper = DormandPrince54(config.alpha, plan, config.rel_tol, config.abs_tol, config.max_steps)
    sample = _take_sample(t0, state, config, plan, None, events, n_max, with_spectrum)
    samples = [sample]
    for callback in callbacks:
        callback(sample)

    y = state.coeffs.copy()
    t, h, k1 = t0, None, None
    completed = True
    for target in _sample_times(t0, config.t_max, config.sample_interval):
        y, t, h, k1 = stepper.evolve(y, t, target, h, k1)
        sample = _take_sample(t, FourierState(coeffs=y), config, plan, sample.spectrum, events, n_max, with_spectrum)
        samples.append(sample)
        logger.debug("Sample t=%.6g energy=%.15g tail=%.3g", t, sample.invariants.energy, sample.state.tail_max())
        for callback in callbacks:
            callback(sample)
        if not sample.resolved:
            breach = TailBreachError(
                f"Tail {sample.state.tail_max():.3g} exceeds {config.tail_guard:.3g} at N={config.N}.", t=t
            )
            events.record(EventRecord.from_exception(breach, hint="Increase N (and M) to extend the window."))
            logger.warning("%s", breach)
            completed = False
            if strict:
                raise breach
            break

    logger.info(
        "Integrated to t=%.6g: %d accepted, %d rejected steps", t, stepper.accepted, stepper.rejected
    )
    crossings = _crossing_reports(samples, events) if with_spectrum else []
    return TrajectoryRecord(
        config=config,
        samples=samples,
        events=events,
        crossings=crossings,
        completed=completed,
        accepted_steps=stepper.accepted,
        rejected_steps=stepper.rejected,
    )
