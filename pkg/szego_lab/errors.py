"""
Exception and warning hierarchy of the lab.

Every class carries a dotted event code made of a prefix path and a four digit increment
(``HARDY.POLE0001``), plus a severity. Codes are what the event log stores and what
``szego-lab check --ignore`` filters on.
"""

__all__ = [
    "AliasingError",
    "AmbiguousClusterError",
    "AssemblyCheckError",
    "CrossingProximityError",
    "DegreeMismatchError",
    "EventCodeMixin",
    "FiniteDifferenceStepWarning",
    "GradientNoiseWarning",
    "InvalidStateError",
    "MatchingAmbiguityError",
    "ModulusRangeError",
    "NearCrossingWarning",
    "NearResonanceError",
    "NonSimpleLevelWarning",
    "PoleOnDiscError",
    "SpectralAmbiguityWarning",
    "StepFailureError",
    "SzegoLabError",
    "SzegoLabWarning",
    "TailBreachError",
    "ThresholdAmbiguityError",
    "TruncationInsufficientError",
    "UndersampledTraceWarning",
    "UnresolvedStateError",
    "UnresolvedStateWarning",
    "WindowUnresolvedError",
]

from typing import Any, ClassVar, Self

from szego_lab.constants import EventSeverityEnum


class EventCodeMixin:
    prefix: ClassVar[str] = "LAB"
    increment: ClassVar[int] = 0
    severity: ClassVar[EventSeverityEnum] = EventSeverityEnum.ERROR

    def __init_subclass__(
        cls,
        *,
        prefix: str | None = None,
        increment: int | None = None,
        severity: EventSeverityEnum | None = None,
        **kwargs: Any,
    ) -> None:
        super().__init_subclass__(**kwargs)
        if prefix is not None:
            cls.prefix = prefix
        if increment is not None:
            cls.increment = increment
        if severity is not None:
            cls.severity = severity

    @classmethod
    def code(cls) -> str:
        """Composed event code, e.g. ``INTEGRATOR.TAIL0001``."""
        return f"{cls.prefix}{cls.increment:0>4}"


class SzegoLabError(EventCodeMixin, Exception):
    """
    Base class of every error raised by the lab.

    Arguments:
        message (str): Human readable description.
        t (float | None): Simulation time the error refers to, when there is one.
    """

    def __init__(self: Self, message: str, *, t: float | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.t = t

    def __str__(self: Self) -> str:
        return f"[{self.code()}] {self.message}"


class SzegoLabWarning(EventCodeMixin, UserWarning, severity=EventSeverityEnum.WARNING):
    def __init__(self: Self, message: str, *, t: float | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.t = t

    def __str__(self: Self) -> str:
        return f"[{self.code()}] {self.message}"


# hardy
class PoleOnDiscError(SzegoLabError, prefix="HARDY.POLE", increment=1):
    pass


class InvalidStateError(SzegoLabError, prefix="HARDY.STATE", increment=1):
    pass


class UnresolvedStateError(SzegoLabError, prefix="HARDY.TAIL", increment=1):
    pass


class AliasingError(SzegoLabError, prefix="HARDY.ALIAS", increment=1):
    pass


class UnresolvedStateWarning(SzegoLabWarning, prefix="HARDY.TAIL", increment=2):
    pass


# spectral
class AmbiguousClusterError(SzegoLabError, prefix="SPECTRAL.CLUSTER", increment=1):
    pass


class SpectralAmbiguityWarning(SzegoLabWarning, prefix="SPECTRAL.CLUSTER", increment=2):
    pass


class DegreeMismatchError(SzegoLabError, prefix="SPECTRAL.BLASCHKE", increment=1):
    pass


class ThresholdAmbiguityError(SzegoLabError, prefix="SPECTRAL.RANK", increment=1):
    pass


class NearCrossingWarning(SzegoLabWarning, prefix="SPECTRAL.CROSS", increment=1):
    pass


class UndersampledTraceWarning(SzegoLabWarning, prefix="SPECTRAL.TRACE", increment=1):
    pass


# invariants
class NearResonanceError(SzegoLabError, prefix="INVARIANTS.RESOLVENT", increment=1):
    pass


class GradientNoiseWarning(SzegoLabWarning, prefix="INVARIANTS.GRADIENT", increment=1):
    pass


# integrator
class StepFailureError(SzegoLabError, prefix="INTEGRATOR.STEP", increment=1, severity=EventSeverityEnum.CRITICAL):
    pass


class TailBreachError(SzegoLabError, prefix="INTEGRATOR.TAIL", increment=1):
    pass


class CrossingProximityError(SzegoLabError, prefix="INTEGRATOR.CROSS", increment=1):
    pass


class MatchingAmbiguityError(SzegoLabError, prefix="INTEGRATOR.MATCH", increment=1):
    pass


class FiniteDifferenceStepWarning(SzegoLabWarning, prefix="INTEGRATOR.FD", increment=1):
    pass


class NonSimpleLevelWarning(SzegoLabWarning, prefix="INTEGRATOR.LEVEL", increment=1):
    pass


# special functions
class ModulusRangeError(SzegoLabError, prefix="SPECIAL.MODULUS", increment=1):
    pass


# experiments
class AssemblyCheckError(SzegoLabError, prefix="EXPERIMENTS.ASSEMBLY", increment=1):
    pass


class WindowUnresolvedError(SzegoLabError, prefix="EXPERIMENTS.WINDOW", increment=1):
    pass


class TruncationInsufficientError(SzegoLabError, prefix="EXPERIMENTS.TRUNCATION", increment=1):
    pass
