"""
Hankel, shifted Hankel and Toeplitz operators as finite matrices in the basis ``e_k = z^k``.

``H_u`` and ``K_u`` are conjugate linear; their matrices carry ``conjugate_input=True`` and act as
``entries @ conj(h)``. Every composition (``H_u^2``, ``K_u^2``, ``B_u``, ``C_u``) is assembled as a
plain complex linear matrix so the standard Hermitian eigensolvers apply.

The truncated state is a polynomial of degree below ``N``, so the squares are formed with the full
sums over ``j < N``; with that convention ``K_u^2 = H_u^2 - (.|u)u`` holds exactly at every size.
"""

__all__ = [
    "OperatorMatrix",
    "antilinear_commutator",
    "bu_cu_matrices",
    "hankel_matrix",
    "hankel_one",
    "hankel_square",
    "k_square",
    "rank_one_residual",
    "shift_identity_residual",
    "shifted_hankel_matrix",
    "toeplitz_matrix",
]

import warnings
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict
from scipy import linalg

from szego_lab.constants import DEFAULT_TAIL_GUARD, OperatorKindEnum
from szego_lab.errors import UnresolvedStateWarning
from szego_lab.hardy import FourierState, GridPlan, from_grid, to_grid


class OperatorMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray
    kind: OperatorKindEnum
    conjugate_input: bool = False

    @property
    def size(self: Self) -> int:
        return int(self.entries.shape[0])

    def apply(self: Self, h: FourierState | ArrayLike) -> NDArray[np.complex128]:
        vector = h.coeffs if isinstance(h, FourierState) else np.asarray(h, dtype=np.complex128)
        vector = _fit(vector, self.entries.shape[1])
        if self.conjugate_input:
            return self.entries @ np.conj(vector)
        return self.entries @ vector

    def norm(self: Self) -> float:
        """Spectral norm."""
        return float(linalg.norm(self.entries, 2)) if self.entries.size else 0.0

    def is_hermitian(self: Self, tol: float = 1e-12) -> bool:
        scale = max(1.0, self.norm())
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol * scale)


def _fit(vector: NDArray[np.complex128], n: int) -> NDArray[np.complex128]:
    if vector.size == n:
        return vector
    out = np.zeros(n, dtype=np.complex128)
    out[: min(n, vector.size)] = vector[:n]
    return out


def _padded(u: FourierState, length: int) -> NDArray[np.complex128]:
    coeffs = np.zeros(max(length, u.N), dtype=np.complex128)
    coeffs[: u.N] = u.coeffs
    return coeffs


def _check_size(u: FourierState, m: int | None, tail_tol: float) -> int:
    size = u.N if m is None else m
    if not 1 <= size <= u.N:
        raise ValueError(f"Matrix size {size} must lie in [1, N={u.N}].")
    if not u.is_resolved(tail_tol):
        warnings.warn(
            UnresolvedStateWarning(f"Operator of a state with tail {u.tail_max():.3g}; truncated entries set to 0."),
            stacklevel=3,
        )
    return size


def _hankel_block(u: FourierState, rows: int, cols: int, offset: int) -> NDArray[np.complex128]:
    coeffs = _padded(u, rows + cols + offset)
    return linalg.hankel(coeffs[offset : offset + rows], coeffs[offset + rows - 1 : offset + rows - 1 + cols])


def hankel_matrix(u: FourierState, m: int | None = None, tail_tol: float = DEFAULT_TAIL_GUARD) -> OperatorMatrix:
    """Square ``m x m`` matrix with entries ``u(k + l)``."""
    size = _check_size(u, m, tail_tol)
    return OperatorMatrix(
        entries=_hankel_block(u, size, size, 0),
        kind=OperatorKindEnum.HANKEL_H,
        conjugate_input=True,
    )


def shifted_hankel_matrix(
    u: FourierState,
    m: int | None = None,
    tail_tol: float = DEFAULT_TAIL_GUARD,
) -> OperatorMatrix:
    """Square ``m x m`` matrix with entries ``u(k + l + 1)``."""
    size = _check_size(u, m, tail_tol)
    return OperatorMatrix(
        entries=_hankel_block(u, size, size, 1),
        kind=OperatorKindEnum.SHIFTED_HANKEL_K,
        conjugate_input=True,
    )


def hankel_one(m: int) -> OperatorMatrix:
    """Hankel matrix of the constant function 1, the projector onto ``e_0``."""
    entries = np.zeros((m, m), dtype=np.complex128)
    entries[0, 0] = 1.0
    return OperatorMatrix(entries=entries, kind=OperatorKindEnum.HANKEL_H, conjugate_input=True)


def toeplitz_matrix(b_grid: ArrayLike, m: int, plan: GridPlan) -> OperatorMatrix:
    """
    Matrix of ``T_b`` with entries ``b(k - l)`` from grid samples of the symbol.

    Arguments:
        b_grid (ArrayLike): Values of ``b`` on the plan's grid.
        m (int): Matrix size, at most ``M / 2``.
        plan (GridPlan): Grid the symbol was sampled on.
    """
    if 2 * m > plan.M:
        raise ValueError(f"Toeplitz size {m} exceeds half the grid M={plan.M}.")
    symbol = from_grid(b_grid, plan)
    column = symbol[:m]
    row = np.concatenate([symbol[:1], symbol[::-1][: m - 1]])
    return OperatorMatrix(entries=linalg.toeplitz(column, row), kind=OperatorKindEnum.TOEPLITZ)


def hankel_square(u: FourierState, m: int | None = None, tail_tol: float = DEFAULT_TAIL_GUARD) -> OperatorMatrix:
    """``(H_u^2)_{k,l} = sum_j u(k + j) conj(u(l + j))`` over all ``j < N``."""
    size = _check_size(u, m, tail_tol)
    block = _hankel_block(u, size, u.N, 0)
    return OperatorMatrix(entries=block @ block.conj().T, kind=OperatorKindEnum.HANKEL_SQUARE)


def k_square(u: FourierState, m: int | None = None, tail_tol: float = DEFAULT_TAIL_GUARD) -> OperatorMatrix:
    """``(K_u^2)_{k,l} = sum_j u(k + j + 1) conj(u(l + j + 1))``."""
    size = _check_size(u, m, tail_tol)
    block = _hankel_block(u, size, u.N, 1)
    return OperatorMatrix(entries=block @ block.conj().T, kind=OperatorKindEnum.K_SQUARE)


def rank_one_residual(u: FourierState, m: int | None = None) -> float:
    """``||K_u^2 - H_u^2 + (.|u)u|| / ||H_u^2||``; zero state gives 0."""
    h2 = hankel_square(u, m)
    k2 = k_square(u, m)
    head = u.coeffs[: h2.size]
    scale = h2.norm()
    if scale == 0.0:
        return 0.0
    return float(linalg.norm(k2.entries - h2.entries + np.outer(head, head.conj()), 2) / scale)


def shift_identity_residual(u: FourierState, m: int | None = None) -> float:
    """``||S* H_u - H_u S||`` on the common ``(m - 1) x (m - 1)`` block."""
    gamma = hankel_matrix(u, m).entries
    return float(np.max(np.abs(gamma[1:, :-1] - gamma[:-1, 1:]), initial=0.0))


def bu_cu_matrices(u: FourierState, plan: GridPlan, m: int | None = None) -> tuple[OperatorMatrix, OperatorMatrix]:
    """
    ``B_u = i/2 H_u^2 - i T_{|u|^2}`` and ``C_u = i/2 K_u^2 - i T_{|u|^2}``, both skew-Hermitian.
    """
    h2 = hankel_square(u, m, plan.tail_guard)
    k2 = k_square(u, m, plan.tail_guard)
    toeplitz = toeplitz_matrix(np.abs(to_grid(u, plan)) ** 2, h2.size, plan).entries
    b_u = 0.5j * h2.entries - 1j * toeplitz
    c_u = 0.5j * k2.entries - 1j * toeplitz
    return (
        OperatorMatrix(entries=b_u, kind=OperatorKindEnum.B_U),
        OperatorMatrix(entries=c_u, kind=OperatorKindEnum.C_U),
    )


def antilinear_commutator(linear: OperatorMatrix, antilinear: OperatorMatrix) -> OperatorMatrix:
    """
    Matrix of ``[A, G] = A G - G A`` for complex linear ``A`` and conjugate linear ``G``.

    ``A G h = A_mat G_mat conj(h)`` while ``G A h = G_mat conj(A_mat) conj(h)``; the result is
    again conjugate linear.
    """
    entries = linear.entries @ antilinear.entries - antilinear.entries @ np.conj(linear.entries)
    return OperatorMatrix(entries=entries, kind=antilinear.kind, conjugate_input=True)
