__all__ = [
    "DEFAULT_CLUSTER_TOL",
    "DEFAULT_TAIL_GUARD",
    "ROOT_TOL",
    "SCHEMA_VERSION",
    "DominanceEnum",
    "EventSeverityEnum",
    "OperatorKindEnum",
    "ScenarioNameEnum",
]

from enum import StrEnum
from typing import Final

SCHEMA_VERSION: Final[int] = 1
"""Version stamped into every JSON document written by the lab."""

DEFAULT_TAIL_GUARD: Final[float] = 1e-12
DEFAULT_CLUSTER_TOL: Final[float] = 1e-9
ROOT_TOL: Final[float] = 1e-9


class EventSeverityEnum(StrEnum):
    CRITICAL = "critical"
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class OperatorKindEnum(StrEnum):
    HANKEL_H = "hankel_h"
    SHIFTED_HANKEL_K = "shifted_hankel_k"
    TOEPLITZ = "toeplitz"
    HANKEL_SQUARE = "hankel_square"
    K_SQUARE = "k_square"
    B_U = "b_u"
    C_U = "c_u"


class DominanceEnum(StrEnum):
    H_DOMINANT = "h_dominant"
    K_DOMINANT = "k_dominant"


class ScenarioNameEnum(StrEnum):
    CONSERVATION_AUDIT = "conservation_audit"
    INVOLUTION_AUDIT = "involution_audit"
    CROSSING_L1 = "crossing_L1"
    GROWTH = "growth"
    BOUNDED = "bounded"
    LIFTED_GROWTH = "lifted_growth"
    BLASCHKE_LOWER_BOUND = "blaschke_lower_bound"
    RANK_DROP_NECESSARY = "rank_drop_necessary"
