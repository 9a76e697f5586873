__all__ = [
    "FourierState",
    "RationalState",
    "as_pairs",
    "inner_product",
    "random_rational_state",
    "rational_to_fourier",
    "rescale_alpha",
    "sobolev_norm",
    "szego_project",
]

import math
from collections.abc import Sequence
from typing import Any, Self

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.signal import lfilter

from szego_lab.constants import DEFAULT_TAIL_GUARD, ROOT_TOL
from szego_lab.errors import InvalidStateError, PoleOnDiscError, UnresolvedStateError


def _complex_vector(value: Any) -> NDArray[np.complex128]:
    array = np.array(value, dtype=np.complex128)
    if array.ndim == 2 and array.shape[1] == 2 and np.isrealobj(value):
        # [[re, im], ...] pairs as stored in JSON documents
        array = array[:, 0] + 1j * array[:, 1]
    array = np.atleast_1d(array)
    if array.ndim != 1:
        raise ValueError(f"expected a one dimensional coefficient sequence, got shape {array.shape}")
    array.setflags(write=False)
    return array


class FourierState(BaseModel):
    """
    Truncated element of the Hardy space, ``u(z) = sum_k coeffs[k] z^k`` for ``k < N``.

    Instances are immutable; the coefficient array is read only.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> NDArray[np.complex128]:
        array = _complex_vector(value)
        if array.size == 0:
            raise ValueError("a state needs at least one coefficient")
        if not np.all(np.isfinite(array)):
            raise ValueError("state coefficients must be finite")
        return array

    @classmethod
    def from_coeffs(cls, coeffs: ArrayLike, N: int | None = None) -> "FourierState":
        array = np.asarray(coeffs, dtype=np.complex128)
        if N is not None:
            array = _resize(array, N)
        return cls(coeffs=array)

    @classmethod
    def zeros(cls, N: int) -> "FourierState":
        return cls(coeffs=np.zeros(N, dtype=np.complex128))

    @classmethod
    def monomial(cls, k: int, N: int, c: complex = 1.0) -> "FourierState":
        coeffs = np.zeros(N, dtype=np.complex128)
        coeffs[k] = c
        return cls(coeffs=coeffs)

    @property
    def N(self: Self) -> int:
        return int(self.coeffs.size)

    @property
    def tail_start(self: Self) -> int:
        """First index of the top eighth of the modes."""
        return self.N - self.N // 8

    def tail_max(self: Self) -> float:
        tail = self.coeffs[self.tail_start :]
        return float(np.max(np.abs(tail))) if tail.size else 0.0

    def is_resolved(self: Self, tol: float = DEFAULT_TAIL_GUARD) -> bool:
        return self.tail_max() <= tol

    def support(self: Self, tol: float = 0.0) -> int:
        """One past the highest index with ``|coeff| > tol``; 0 for the zero state."""
        nonzero = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(nonzero[-1]) + 1 if nonzero.size else 0

    def resized(self: Self, N: int) -> "FourierState":
        """Zero-pad or truncate to ``N`` modes."""
        return FourierState(coeffs=_resize(self.coeffs, N))

    def norm(self: Self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __add__(self: Self, other: "FourierState") -> "FourierState":
        n = max(self.N, other.N)
        return FourierState(coeffs=_resize(self.coeffs, n) + _resize(other.coeffs, n))

    def __sub__(self: Self, other: "FourierState") -> "FourierState":
        n = max(self.N, other.N)
        return FourierState(coeffs=_resize(self.coeffs, n) - _resize(other.coeffs, n))

    def __mul__(self: Self, scalar: complex) -> "FourierState":
        return FourierState(coeffs=self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self: Self) -> str:
        head = ", ".join(f"{c:.4g}" for c in self.coeffs[:4])
        more = ", ..." if self.N > 4 else ""
        return f"{self.__class__.__name__}(N={self.N}, coeffs=[{head}{more}])"


def _resize(array: NDArray[np.complex128], N: int) -> NDArray[np.complex128]:
    out = np.zeros(N, dtype=np.complex128)
    n = min(N, array.size)
    out[:n] = array[:n]
    return out


def _strip_high_zeros(coeffs: NDArray[np.complex128], tol: float = 0.0) -> NDArray[np.complex128]:
    nonzero = np.flatnonzero(np.abs(coeffs) > tol)
    if nonzero.size == 0:
        return coeffs[:1]
    return coeffs[: nonzero[-1] + 1]


class RationalState(BaseModel):
    """
    ``u = A / B`` with coprime polynomials and no pole in the closed unit disc.

    Coefficients are in ascending order, ``A[k]`` multiplies ``z^k``.

    Attributes:
        A (NDArray[complex128]): Numerator coefficients.
        B (NDArray[complex128]): Denominator coefficients.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: np.ndarray
    B: np.ndarray

    @field_validator("A", "B", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> NDArray[np.complex128]:
        array = _strip_high_zeros(_complex_vector(value).copy())
        if not np.all(np.isfinite(array)):
            raise ValueError("polynomial coefficients must be finite")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_poles_and_coprimality(self: Self) -> Self:
        if not np.any(self.B):
            raise InvalidStateError("Denominator B is the zero polynomial.")
        poles = self.poles()
        if poles.size and np.min(np.abs(poles)) <= 1.0 + ROOT_TOL:
            raise PoleOnDiscError(f"B has a root of modulus {np.min(np.abs(poles)):.6g} inside the closed unit disc.")
        zeros = self.zeros()
        if poles.size and zeros.size:
            distance = np.min(np.abs(zeros[:, None] - poles[None, :]))
            if distance <= ROOT_TOL:
                raise InvalidStateError(f"A and B share a root (distance {distance:.3g}).")
        return self

    def poles(self: Self) -> NDArray[np.complex128]:
        return P.polyroots(self.B) if self.B.size > 1 else np.zeros(0, dtype=np.complex128)

    def zeros(self: Self) -> NDArray[np.complex128]:
        if self.A.size <= 1:
            return np.zeros(0, dtype=np.complex128)
        return P.polyroots(self.A)

    @property
    def rank(self: Self) -> int:
        """``N`` such that ``A / B`` lies in the rank ``N`` manifold."""
        return max(self.A.size, self.B.size) - 1

    def decay_rate(self: Self) -> float:
        """Geometric decay ratio of the Taylor coefficients, ``1 / min |pole|``."""
        poles = self.poles()
        return float(1.0 / np.min(np.abs(poles))) if poles.size else 0.0


def szego_project(two_sided: ArrayLike, N: int | None = None) -> FourierState:
    """
    Keep the non-negative frequencies of a two-sided coefficient sequence.

    Arguments:
        two_sided (ArrayLike): Coefficients in discrete Fourier transform order, index ``k`` for
            ``k >= 0`` and index ``L + k`` for ``k < 0``. A sequence of odd length ``2K + 1`` thus
            covers ``-K..K``. For even lengths the middle (Nyquist) entry counts as negative.
        N (int | None): [Optional] Truncation of the result. Defaults to the number of non-negative
            frequencies in the input.

    Returns:
        FourierState: The projected state.
    """
    coeffs = np.asarray(two_sided, dtype=np.complex128)
    positive = coeffs[: (coeffs.size - 1) // 2 + 1]
    return FourierState(coeffs=_resize(positive, N if N is not None else positive.size))


def inner_product(u: FourierState, v: FourierState) -> complex:
    """``(u|v) = sum_k u(k) conj(v(k))``, linear in ``u``; the shorter state is zero padded."""
    n = min(u.N, v.N)
    return complex(np.vdot(v.coeffs[:n], u.coeffs[:n]))


def sobolev_norm(u: FourierState, s: float) -> float:
    if s < 0:
        raise ValueError(f"Sobolev index must be non-negative, got {s}.")
    k = np.arange(u.N, dtype=np.float64)
    weights = (1.0 + k * k) ** s
    return float(np.sqrt(np.sum(weights * np.abs(u.coeffs) ** 2)))


def rational_to_fourier(r: RationalState, N: int, tail_tol: float = DEFAULT_TAIL_GUARD) -> FourierState:
    """
    Taylor coefficients of ``A / B`` up to ``z^(N-1)``.

    The coefficients come from the recurrence ``sum_j B[j] u(k - j) = A[k]``, run as an IIR
    filter on a unit impulse.

    Raises:
        PoleOnDiscError: ``B`` vanishes somewhere in the closed disc.
        UnresolvedStateError: The top eighth of the ``N`` coefficients exceeds ``tail_tol``.
    """
    impulse = np.zeros(N, dtype=np.complex128)
    impulse[0] = 1.0
    coeffs = lfilter(r.A, r.B, impulse)
    state = FourierState(coeffs=coeffs)
    if not state.is_resolved(tail_tol):
        raise UnresolvedStateError(
            f"Tail {state.tail_max():.3g} exceeds {tail_tol:.3g} at N={N}; pole radius "
            f"{r.decay_rate():.4f} needs more modes."
        )
    return state


def rescale_alpha(u: FourierState, alpha: float) -> tuple[FourierState, float]:
    """
    Map data of the ``alpha`` flow to data of the normalized flow.

    If ``v`` solves the flow with coupling ``sign(alpha)`` then ``sqrt(|alpha|) v(|alpha| t)``
    solves the flow with coupling ``alpha``.

    Returns:
        tuple[FourierState, float]: The normalized datum ``u / sqrt(|alpha|)`` and ``sign(alpha)``.
    """
    if alpha == 0:
        raise ValueError("alpha = 0 has no normalized counterpart.")
    return u * (1.0 / math.sqrt(abs(alpha))), math.copysign(1.0, alpha)


def random_rational_state(
    rng: np.random.Generator,
    rank: int,
    *,
    pole_modulus: tuple[float, float] = (2.0, 4.0),
    scale: float = 1.0,
) -> RationalState:
    """
    Generic element of the rank ``rank`` manifold: ``deg A = deg B = rank``.

    Poles are drawn uniformly in angle with modulus in ``pole_modulus``; ``B(0) = 1``.
    """
    for _ in range(16):
        radii = rng.uniform(*pole_modulus, size=rank)
        angles = rng.uniform(0.0, 2.0 * np.pi, size=rank)
        poles = radii * np.exp(1j * angles)
        B = P.polyfromroots(poles)
        B = B / B[0]
        A = scale * (rng.standard_normal(rank + 1) + 1j * rng.standard_normal(rank + 1)) / math.sqrt(2.0)
        try:
            return RationalState(A=A, B=B)
        except InvalidStateError:
            continue
    raise InvalidStateError(f"Could not draw a coprime rational state of rank {rank}.")


def as_pairs(values: Sequence[complex] | NDArray[np.complex128]) -> list[list[float]]:
    """``[[re, im], ...]`` rendering used by the JSON documents."""
    return [[float(np.real(v)), float(np.imag(v))] for v in values]
