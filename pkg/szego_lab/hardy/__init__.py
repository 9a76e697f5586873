"""Truncated Hardy space representation: states, grids, rational data and Blaschke products."""

__all__ = [
    "BlaschkeProduct",
    "FourierState",
    "GridPlan",
    "RationalState",
    "as_pairs",
    "blaschke_eval",
    "compose_with_blaschke",
    "from_grid",
    "inner_product",
    "l4_norm_fourth",
    "project_grid",
    "random_rational_state",
    "rational_to_fourier",
    "rescale_alpha",
    "sobolev_norm",
    "szego_project",
    "to_grid",
]

from .blaschke import BlaschkeProduct, blaschke_eval, compose_with_blaschke
from .grid import GridPlan, from_grid, l4_norm_fourth, project_grid, to_grid
from .states import (
    FourierState,
    RationalState,
    as_pairs,
    inner_product,
    random_rational_state,
    rational_to_fourier,
    rescale_alpha,
    sobolev_norm,
    szego_project,
)
