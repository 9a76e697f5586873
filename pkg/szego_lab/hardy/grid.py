__all__ = [
    "GridPlan",
    "from_grid",
    "l4_norm_fourth",
    "project_grid",
    "to_grid",
]

import warnings
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft

from szego_lab.constants import DEFAULT_TAIL_GUARD
from szego_lab.errors import UnresolvedStateWarning
from szego_lab.hardy.states import FourierState, szego_project


class GridPlan(BaseModel):
    """
    Equispaced sampling of the circle, ``theta_m = 2 pi m / M``, used for every product.

    ``M >= 3N`` makes the cubic product of a degree ``N - 1`` polynomial alias free.
    scipy keeps its own thread safe cache of transform plans, so the plan stores no workspace.

    Attributes:
        M (int): Number of grid points, a power of two.
        N (int): Truncation of the states the plan serves.
        tail_guard (float): Tail threshold above which evaluations warn.
        workers (int): Worker threads handed to ``scipy.fft``.
    """

    model_config = ConfigDict(frozen=True)

    M: int = Field(ge=4)
    N: int = Field(ge=1)
    tail_guard: float = Field(default=DEFAULT_TAIL_GUARD, gt=0.0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_sizes(self: Self) -> Self:
        if self.M < 3 * self.N:
            raise ValueError(f"grid size M={self.M} must be at least 3N={3 * self.N}")
        if self.M & (self.M - 1):
            raise ValueError(f"grid size M={self.M} must be a power of two")
        return self

    @classmethod
    def for_truncation(cls, N: int, tail_guard: float = DEFAULT_TAIL_GUARD) -> "GridPlan":
        """Smallest admissible plan for ``N`` modes."""
        M = 4
        while M < 3 * N:
            M *= 2
        return cls(M=M, N=N, tail_guard=tail_guard)

    @property
    def theta(self: Self) -> NDArray[np.float64]:
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @property
    def points(self: Self) -> NDArray[np.complex128]:
        return np.exp(1j * self.theta)


def to_grid(u: FourierState | ArrayLike, plan: GridPlan) -> NDArray[np.complex128]:
    """Values ``u(e^{i theta_m})``; the coefficients are zero padded to ``M``."""
    coeffs = u.coeffs if isinstance(u, FourierState) else np.asarray(u, dtype=np.complex128)
    if coeffs.size > plan.M:
        raise ValueError(f"{coeffs.size} coefficients do not fit a grid of {plan.M} points.")
    padded = np.zeros(plan.M, dtype=np.complex128)
    padded[: coeffs.size] = coeffs
    return plan.M * fft.ifft(padded, workers=plan.workers)


def from_grid(values: ArrayLike, plan: GridPlan) -> NDArray[np.complex128]:
    """Two-sided coefficients of grid values, in discrete Fourier transform order."""
    return fft.fft(np.asarray(values, dtype=np.complex128), workers=plan.workers) / plan.M


def project_grid(values: ArrayLike, plan: GridPlan) -> FourierState:
    """Szegő projection of grid values, truncated to ``plan.N`` modes."""
    return szego_project(from_grid(values, plan), plan.N)


def l4_norm_fourth(u: FourierState, plan: GridPlan) -> float:
    """
    ``(1/2pi) int |u|^4 dtheta`` as a grid mean.

    ``|u|^4`` is a trigonometric polynomial of degree ``2N - 2``, so the mean is exact on any grid
    with ``M >= 2N - 1`` points; the plan invariant ``M >= 3N`` covers it.

    Warns:
        UnresolvedStateWarning: the state's tail exceeds ``plan.tail_guard``.
    """
    if not u.is_resolved(plan.tail_guard):
        warnings.warn(
            UnresolvedStateWarning(f"Quartic norm of a state with tail {u.tail_max():.3g}."),
            stacklevel=2,
        )
    values = to_grid(u, plan)
    return float(np.mean(np.abs(values) ** 4))
