__all__ = [
    "GROWTH_DEFAULTS",
    "REGIME_DEFAULTS",
    "Settings",
    "SimulationConfig",
    "configure_logging",
    "get_settings",
    "load_config_file",
]

import json
import logging.config
import os
from collections.abc import Mapping
from functools import lru_cache
from pathlib import Path
from typing import Any, Self

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ModelWrapValidatorHandler,
    PrivateAttr,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from szego_lab.constants import DEFAULT_CLUSTER_TOL, DEFAULT_TAIL_GUARD
from szego_lab.hardy.grid import GridPlan

TOLERANCE_RANGE = (1e-14, 1e-6)


class SimulationConfig(BaseModel):
    """
    Parameters of a single simulation run.

    Attributes:
        alpha (float): Coupling of the linear term ``alpha (u|1)``.
        N (int): Number of kept Fourier modes, ``k = 0..N-1``.
        M (int): Grid size used for products. Power of two, at least ``3N``.
        rel_tol (float): Relative tolerance of the adaptive stepper.
        abs_tol (float): Absolute tolerance of the adaptive stepper.
        t_max (float): Final time.
        sample_interval (float): Spacing of recorded samples.
        tail_guard (float): Largest coefficient allowed in the top eighth of the modes.
        m (int | None): [Optional] Operator matrix size. Defaults to ``N``.
        fd_step (float): Finite-difference time step for the residual checks.
        cluster_tol (float): Eigenvalue clustering tolerance, relative to the largest eigenvalue.
        max_steps (int): Hard cap on accepted plus rejected steps.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = 1.0
    N: int = Field(default=64, ge=1)
    M: int = Field(default=256, ge=4)
    rel_tol: float = 1e-11
    abs_tol: float = 1e-11
    t_max: float = Field(default=10.0, gt=0.0)
    sample_interval: float = Field(default=0.1, gt=0.0)
    tail_guard: float = Field(default=DEFAULT_TAIL_GUARD, gt=0.0)
    m: int | None = Field(default=None, ge=1)
    fd_step: float = Field(default=1e-4, gt=0.0)
    cluster_tol: float = Field(default=DEFAULT_CLUSTER_TOL, gt=0.0)
    max_steps: int = Field(default=2_000_000, ge=1)

    @field_validator("rel_tol", "abs_tol")
    @classmethod
    def _check_tolerance(cls, value: float) -> float:
        low, high = TOLERANCE_RANGE
        if not low <= value <= high:
            raise ValueError(f"tolerance {value:g} outside [{low:g}, {high:g}]")
        return value

    @model_validator(mode="after")
    def _check_grid(self: Self) -> Self:
        if self.M < 3 * self.N:
            raise ValueError(f"grid size M={self.M} must be at least 3N={3 * self.N}")
        if self.M & (self.M - 1):
            raise ValueError(f"grid size M={self.M} must be a power of two")
        if self.m is not None and self.m > self.N:
            raise ValueError(f"matrix size m={self.m} exceeds the truncation N={self.N}")
        return self

    @property
    def matrix_size(self: Self) -> int:
        return self.m if self.m is not None else self.N

    def grid_plan(self: Self) -> GridPlan:
        return GridPlan(M=self.M, N=self.N, tail_guard=self.tail_guard)

    def with_overrides(self: Self, **updates: Any) -> "SimulationConfig":
        """Validated copy with ``updates`` applied; ``None`` values are skipped."""
        values = self.model_dump()
        values.update({key: value for key, value in updates.items() if value is not None})
        return SimulationConfig.model_validate(values)


GROWTH_DEFAULTS: dict[str, Any] = {"N": 256, "M": 1024, "t_max": 30.0, "tail_guard": 1e-6}
REGIME_DEFAULTS: dict[str, dict[str, Any]] = {"DEFAULT": {}, "GROWTH": GROWTH_DEFAULTS}


def _field_name(key: str) -> str:
    """``SimulationConfig`` field for a key read case-insensitively from the environment (``n`` is ``N``)."""
    if key in SimulationConfig.model_fields:
        return key
    matches = [name for name in SimulationConfig.model_fields if name.lower() == key.lower()]
    return matches[0] if len(matches) == 1 else key


class Settings(BaseSettings):
    """
    Process wide settings.

    Values come, in increasing priority, from the defaults below, a ``.env`` file, ``SZEGO_*``
    environment variables (nested with ``__``, e.g. ``SZEGO_DEFAULT__ALPHA``) and the JSON
    config file. A regime block given in any of these is laid over the regime defaults, and the
    fields it names are remembered so they can win over scenario defaults. Command line flags are
    applied on top by the CLI.
    """

    model_config = SettingsConfigDict(
        env_prefix="SZEGO_",
        env_file=Path(__file__).parent.parent / ".env",
        env_nested_delimiter="__",
        extra="ignore",
    )

    DEFAULT: SimulationConfig = SimulationConfig()
    GROWTH: SimulationConfig = SimulationConfig(**GROWTH_DEFAULTS)
    OUTPUT_ROOT: Path = Path("runs")
    LOG_LEVEL: str = "INFO"
    CONFIG_FILE: Path | None = None

    _explicit: dict[str, frozenset[str]] = PrivateAttr(default_factory=dict)

    @model_validator(mode="wrap")
    @classmethod
    def _layer_regime_defaults(cls, data: Any, handler: ModelWrapValidatorHandler[Self]) -> Self:
        explicit: dict[str, frozenset[str]] = {}
        if isinstance(data, Mapping):
            data = dict(data)
            for block, defaults in REGIME_DEFAULTS.items():
                value = data.get(block)
                if isinstance(value, Mapping):
                    value = {_field_name(str(key)): item for key, item in value.items()}
                    explicit[block] = frozenset(key for key in value if key in SimulationConfig.model_fields)
                    data[block] = {**defaults, **value}
                elif isinstance(value, SimulationConfig):
                    explicit[block] = frozenset(value.model_fields_set)
        settings = handler(data)
        settings._explicit = explicit
        return settings

    def regime(self: Self, name: str) -> tuple[SimulationConfig, dict[str, Any]]:
        """
        Configuration block of regime ``name`` and the values set for it in the file or environment.

        Raises:
            KeyError: ``name`` is not a regime.
        """
        block = name.upper()
        if block not in REGIME_DEFAULTS:
            raise KeyError(f"Unknown regime '{name}'.")
        config = getattr(self, block)
        return config, {field: getattr(config, field) for field in sorted(self._explicit.get(block, ()))}


def load_config_file(path: Path) -> dict[str, Any]:
    """Read a JSON config file; top level keys are matched case-insensitively to `Settings` fields."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a JSON object.")
    return {str(key).upper(): value for key, value in data.items()}


@lru_cache
def get_settings(config_file: Path | None = None) -> Settings:
    path = config_file or os.environ.get("SZEGO_CONFIG_FILE")
    overrides = load_config_file(Path(path)) if path else {}
    return Settings(**overrides)


def configure_logging(level: str = "INFO") -> None:
    """
    Root logger at WARNING on stderr, the ``szego_lab`` loggers at ``level``.
    """
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "generic": {
                    "format": "%(levelname)-5.5s [%(name)s] %(message)s",
                    "datefmt": "%H:%M:%S",
                },
            },
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "stream": "ext://sys.stderr",
                    "level": "NOTSET",
                    "formatter": "generic",
                },
            },
            "loggers": {
                "szego_lab": {"level": level.upper(), "handlers": [], "propagate": True},
            },
            "root": {"level": "WARNING", "handlers": ["console"]},
        }
    )
