__all__ = [
    "SCENARIOS",
    "GrowthFit",
    "LowerBoundReport",
    "PoleApproachFit",
    "RankDropReport",
    "RegimeEnum",
    "Scenario",
    "ScenarioContext",
    "blaschke_lower_bound_check",
    "builtin_crossing_datum",
    "builtin_cubic_lift",
    "builtin_growth_datum",
    "builtin_lifted_datum",
    "check_run",
    "fit_growth",
    "fit_pole_approach",
    "get_scenario",
    "pole_radius",
    "rank_drop_audit",
    "run_scenario",
    "trajectory_tables",
]

from .audits import RankDropReport, rank_drop_audit
from .base import RegimeEnum, Scenario, ScenarioContext, check_run, run_scenario, trajectory_tables
from .data import builtin_crossing_datum, builtin_cubic_lift, builtin_growth_datum, builtin_lifted_datum
from .growth import (
    GrowthFit,
    LowerBoundReport,
    PoleApproachFit,
    blaschke_lower_bound_check,
    fit_growth,
    fit_pole_approach,
    pole_radius,
)
from .scenarios import SCENARIOS, get_scenario
