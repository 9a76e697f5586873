"""JSON documents written next to every run: summary, event log, checkpoint and data files."""

__all__ = [
    "FOREIGN_WARNING_CODE",
    "CheckResult",
    "Checkpoint",
    "EventLog",
    "EventRecord",
    "RationalData",
    "RunSummary",
    "StateDocument",
    "load_initial_data",
    "read_document",
    "read_initial_data",
    "write_document",
]

import warnings
from collections import Counter
from collections.abc import Collection, Iterable
from datetime import UTC, datetime
from pathlib import Path
from typing import Self, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from szego_lab.config import SimulationConfig
from szego_lab.constants import SCHEMA_VERSION, EventSeverityEnum
from szego_lab.errors import SzegoLabError, SzegoLabWarning, UnresolvedStateError
from szego_lab.hardy import FourierState, RationalState, as_pairs, rational_to_fourier
from szego_lab.utils import event_is_ignored, parse_event_code

FOREIGN_WARNING_CODE = "LAB.FOREIGN0001"

DocumentT = TypeVar("DocumentT", bound=BaseModel)


class _Versioned(BaseModel):
    schema_version: int = SCHEMA_VERSION

    @field_validator("schema_version")
    @classmethod
    def _check_version(cls, value: int) -> int:
        if value > SCHEMA_VERSION:
            raise ValueError(f"schema_version {value} is newer than supported {SCHEMA_VERSION}")
        return value


class EventRecord(BaseModel):
    """
    One warning or error seen during a run.

    Attributes:
        code (str): Event code, e.g. ``INTEGRATOR.TAIL0001``.
        details (str): Message of the warning or error.
        severity (EventSeverityEnum): Severity carried by the event class.
        t (float | None): [Optional] Simulation time.
        hint (str | None): [Optional] What to change to avoid the event.
        count (int): Number of identical occurrences folded into this record.
    """

    model_config = ConfigDict(frozen=True)

    code: str
    details: str
    severity: EventSeverityEnum
    t: float | None = None
    hint: str | None = None
    count: int = Field(default=1, ge=1)

    @field_validator("code")
    @classmethod
    def _check_code(cls, value: str) -> str:
        parse_event_code(value)
        return value.upper()

    @classmethod
    def from_exception(
        cls,
        exc: SzegoLabError | SzegoLabWarning,
        t: float | None = None,
        hint: str | None = None,
    ) -> "EventRecord":
        return cls(
            code=exc.code(),
            details=exc.message,
            severity=exc.severity,
            t=exc.t if exc.t is not None else t,
            hint=hint,
        )

    @classmethod
    def from_warning(cls, message: warnings.WarningMessage, t: float | None = None) -> "EventRecord":
        """Record of a captured warning; warnings from outside the lab share one code."""
        if isinstance(message.message, SzegoLabWarning):
            return cls.from_exception(message.message, t)
        return cls(
            code=FOREIGN_WARNING_CODE,
            details=f"{message.category.__name__}: {message.message}",
            severity=EventSeverityEnum.WARNING,
            t=t,
        )


class EventLog(_Versioned):
    events: list[EventRecord] = Field(default_factory=list)

    def record(self: Self, event: EventRecord) -> None:
        """Append ``event``; an identical code and message at the same time only bumps the count."""
        for i, existing in enumerate(self.events):
            if (existing.code, existing.details, existing.t) == (event.code, event.details, event.t):
                self.events[i] = existing.model_copy(update={"count": existing.count + event.count})
                return
        self.events.append(event)

    def extend(self: Self, events: Iterable[EventRecord]) -> None:
        for event in events:
            self.record(event)

    def filtered(self: Self, ignored: Collection[str]) -> list[EventRecord]:
        return [event for event in self.events if not event_is_ignored(event.code, ignored)]

    def counts_by_code(self: Self) -> dict[str, int]:
        counter: Counter[str] = Counter()
        for event in self.events:
            counter[event.code] += event.count
        return dict(counter)

    def has_severity(self: Self, *severities: EventSeverityEnum, ignored: Collection[str] = ()) -> bool:
        return any(event.severity in severities for event in self.filtered(ignored))


class CheckResult(BaseModel):
    """
    Outcome of one acceptance check.

    ``passed`` is decided by the scenario; ``value`` and ``threshold`` let ``szego-lab check``
    re-evaluate it with ``comparison``. When ``source`` names a stored table column and a reducer
    (``invariant_audits.csv:E_alpha:drift``) the value itself is recomputed from the CSV file.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    value: float | None = None
    threshold: float | None = None
    comparison: str = "lt"
    details: str = ""
    source: str | None = None

    @field_validator("comparison")
    @classmethod
    def _check_comparison(cls, value: str) -> str:
        if value not in {"lt", "le", "gt", "ge", "bool"}:
            raise ValueError(f"unknown comparison '{value}'")
        return value

    def reevaluate(self: Self) -> bool:
        if self.comparison == "bool" or self.value is None or self.threshold is None:
            return self.passed
        match self.comparison:
            case "lt":
                return self.value < self.threshold
            case "le":
                return self.value <= self.threshold
            case "gt":
                return self.value > self.threshold
            case _:
                return self.value >= self.threshold


class RunSummary(_Versioned):
    scenario: str
    config: SimulationConfig
    checks: list[CheckResult] = Field(default_factory=list)
    values: dict[str, float | list[float]] = Field(default_factory=dict)
    created_at: datetime = Field(default_factory=lambda: datetime.now(UTC))
    seed: int | None = None
    ignored_events: list[str] = Field(default_factory=list)

    @property
    def failed(self: Self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    @property
    def passed(self: Self) -> bool:
        return not self.failed


class RationalData(_Versioned):
    """
    ``u = A / B`` as ascending ``[re, im]`` coefficient pairs; the ``--data`` input format.

    Example: ``{"A": [[1, 0]], "B": [[1, 0], [-0.5, 0]]}`` is ``1 / (1 - z / 2)``.
    """

    A: list[tuple[float, float]] = Field(min_length=1)
    B: list[tuple[float, float]] = Field(min_length=1)

    @classmethod
    def from_state(cls, state: RationalState) -> "RationalData":
        return cls(A=[(re, im) for re, im in as_pairs(state.A)], B=[(re, im) for re, im in as_pairs(state.B)])

    def to_state(self: Self) -> RationalState:
        return RationalState(A=[list(pair) for pair in self.A], B=[list(pair) for pair in self.B])


class StateDocument(_Versioned):
    """Truncated state ``{"N": n, "coeffs": [[re, im], ...]}``; missing high modes are zero."""

    N: int = Field(ge=1)
    coeffs: list[tuple[float, float]] = Field(min_length=1)
    t: float | None = None

    @model_validator(mode="after")
    def _check_length(self: Self) -> Self:
        if len(self.coeffs) > self.N:
            raise ValueError(f"{len(self.coeffs)} coefficients do not fit N={self.N} modes")
        return self

    @classmethod
    def from_state(cls, state: FourierState, t: float | None = None) -> "StateDocument":
        return cls(N=state.N, coeffs=[(re, im) for re, im in as_pairs(state.coeffs)], t=t)

    def to_state(self: Self) -> FourierState:
        return FourierState(coeffs=[list(pair) for pair in self.coeffs]).resized(self.N)


class Checkpoint(_Versioned):
    """Everything ``integrate`` needs to resume: time, state and configuration."""

    t: float = Field(ge=0.0)
    config: SimulationConfig
    state: StateDocument

    @classmethod
    def capture(cls, t: float, state: FourierState, config: SimulationConfig) -> "Checkpoint":
        return cls(t=t, config=config, state=StateDocument.from_state(state, t))


def write_document(document: BaseModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=2), encoding="utf-8")
    return path


def read_document(cls: type[DocumentT], path: Path) -> DocumentT:
    return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def read_initial_data(path: Path) -> RationalData | StateDocument:
    """
    Parse a ``--data`` file as rational data ``{"A", "B"}`` or as a state ``{"N", "coeffs"}``.

    Raises:
        ValueError: The file matches neither format.
    """
    text = Path(path).read_text(encoding="utf-8")
    errors = []
    for document in (RationalData, StateDocument):
        try:
            return document.model_validate_json(text)
        except ValidationError as exc:
            errors.append(f"{document.__name__}: {exc.error_count()} error(s), first: {exc.errors()[0]['msg']}")
    raise ValueError(f"{path} holds neither rational data nor a state ({'; '.join(errors)}).")


def load_initial_data(path: Path, N: int, tail_tol: float) -> FourierState:
    """
    Initial datum from a ``--data`` file, resized to ``N`` modes.

    Raises:
        ValueError: The file matches neither data format.
        PoleOnDiscError: Rational data with a pole in the closed disc.
        UnresolvedStateError: The datum is not resolved at ``N`` modes.
    """
    document = read_initial_data(path)
    if isinstance(document, RationalData):
        return rational_to_fourier(document.to_state(), N, tail_tol)
    state = document.to_state().resized(N)
    if not state.is_resolved(tail_tol):
        raise UnresolvedStateError(f"Datum tail {state.tail_max():.3g} exceeds {tail_tol:.3g} at N={N}.")
    return state
