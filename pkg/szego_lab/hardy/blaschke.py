__all__ = [
    "BlaschkeProduct",
    "blaschke_eval",
    "compose_with_blaschke",
]

from typing import Any, Self

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from szego_lab.errors import AliasingError, InvalidStateError
from szego_lab.hardy.grid import GridPlan, from_grid
from szego_lab.hardy.states import FourierState


class BlaschkeProduct(BaseModel):
    """
    Finite Blaschke product ``e^{-i angle} P(z) / D(z)``.

    ``P`` is the monic polynomial with the given zeros and ``D(z) = prod_j (1 - conj(p_j) z)`` its
    reflection, ``D(z) = z^d conj(P(1 / conj(z)))``.

    Attributes:
        angle (float): ``psi`` in radians, reduced mod ``2 pi``.
        zeros (np.ndarray): Zeros ``p_j`` in the open unit disc.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    angle: float = 0.0
    zeros: np.ndarray = Field(default_factory=lambda: np.zeros(0, dtype=np.complex128))

    @field_validator("angle")
    @classmethod
    def _reduce_angle(cls, value: float) -> float:
        return float(np.mod(value, 2.0 * np.pi))

    @field_validator("zeros", mode="before")
    @classmethod
    def _check_zeros(cls, value: Any) -> NDArray[np.complex128]:
        zeros = np.atleast_1d(np.array(value, dtype=np.complex128))
        if zeros.ndim != 1:
            raise ValueError("zeros must be a flat sequence")
        if zeros.size and np.max(np.abs(zeros)) >= 1.0:
            raise InvalidStateError(f"Blaschke zero of modulus {np.max(np.abs(zeros)):.6g} is not inside the disc.")
        zeros.setflags(write=False)
        return zeros

    @classmethod
    def factor(cls, p: complex, angle: float = 0.0) -> "BlaschkeProduct":
        return cls(angle=angle, zeros=[p])

    @property
    def degree(self: Self) -> int:
        return int(self.zeros.size)

    def numerator(self: Self) -> NDArray[np.complex128]:
        """Monic ``P`` in ascending coefficients."""
        return P.polyfromroots(self.zeros) if self.degree else np.ones(1, dtype=np.complex128)

    def denominator(self: Self) -> NDArray[np.complex128]:
        """``D`` in ascending coefficients, ``D(0) = 1``."""
        return np.conj(self.numerator()[::-1])

    def __call__(self: Self, z: ArrayLike) -> NDArray[np.complex128]:
        return blaschke_eval(self, z)

    def is_unimodular(self: Self, samples: int = 64, tol: float = 1e-12) -> bool:
        points = np.exp(2j * np.pi * np.arange(samples) / samples)
        return bool(np.max(np.abs(np.abs(self(points)) - 1.0)) <= tol)


def blaschke_eval(psi: BlaschkeProduct, z: ArrayLike) -> NDArray[np.complex128]:
    """Product form ``e^{-i psi} prod_j (z - p_j) / (1 - conj(p_j) z)`` on ``|z| <= 1``."""
    z = np.asarray(z, dtype=np.complex128)
    if z.size and np.max(np.abs(z)) > 1.0 + 1e-12:
        raise ValueError("Blaschke products are evaluated on the closed unit disc only.")
    value = np.full(z.shape, np.exp(-1j * psi.angle), dtype=np.complex128)
    for p in psi.zeros:
        value = value * (z - p) / (1.0 - np.conj(p) * z)
    return value


def compose_with_blaschke(
    u: FourierState,
    chi: BlaschkeProduct,
    plan: GridPlan,
    tol: float = 1e-10,
) -> FourierState:
    """
    Coefficients of ``u(z chi(z))``, truncated to ``plan.N`` modes.

    ``z chi`` is inner, so the substituted function has no negative frequencies; both the negative
    frequencies and the modes past ``plan.N`` left on the grid measure the aliasing error.

    Raises:
        AliasingError: ``plan.N`` is below ``(deg chi + 1)`` times the support of ``u``, or the
            content outside the kept modes exceeds ``tol`` relative to the result.
    """
    support = u.support()
    if (chi.degree + 1) * max(support, 1) > plan.N:
        raise AliasingError(
            f"Output truncation {plan.N} is below (deg chi + 1) * support = {(chi.degree + 1) * support}."
        )
    w = plan.points * blaschke_eval(chi, plan.points)
    values = np.zeros(plan.M, dtype=np.complex128)
    for coefficient in u.coeffs[:support][::-1]:
        values = values * w + coefficient
    coeffs = from_grid(values, plan)
    kept = coeffs[: plan.N]
    leak = float(np.max(np.abs(coeffs[plan.N :]))) if plan.M > plan.N else 0.0
    scale = max(1.0, float(np.max(np.abs(kept))))
    if leak > tol * scale:
        raise AliasingError(f"Composition leaks {leak:.3g} outside the {plan.N} kept modes on M={plan.M}.")
    return FourierState(coeffs=kept)

