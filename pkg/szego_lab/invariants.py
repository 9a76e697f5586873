"""
Conserved quantities of the perturbed flow and the relations between them.

Pairings follow ``(f|g) = sum_k f(k) conj(g(k))``. Everything acting on matrices uses the operator
size ``m`` (the truncation by default).
"""

__all__ = [
    "BracketEstimate",
    "FunctionalId",
    "FunctionalKindEnum",
    "GeneratingValues",
    "IndependenceReport",
    "InvariantSet",
    "ell_k",
    "energy",
    "evaluate_functional",
    "generating_values",
    "hierarchy_L",
    "hierarchy_independence",
    "invariant_set",
    "j_product_formula",
    "l1_closed_form",
    "l_functional",
    "mass",
    "moment_residuals",
    "momentum",
    "poisson_bracket",
    "rank_one_growth_criterion",
    "real_gradient",
]

import logging
import math
import warnings
from collections.abc import Callable
from enum import StrEnum
from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict
from scipy import linalg

from szego_lab.constants import DEFAULT_CLUSTER_TOL
from szego_lab.errors import GradientNoiseWarning, NearResonanceError
from szego_lab.hardy import FourierState, GridPlan, l4_norm_fourth
from szego_lab.operators import hankel_square, k_square
from szego_lab.spectral import SpectralDecomposition

logger = logging.getLogger(__name__)

RELATION_TOL = 1e-10


class FunctionalKindEnum(StrEnum):
    L_X = "L_x"
    ENERGY = "energy"
    MASS = "mass"
    MOMENTUM = "momentum"


class FunctionalId(BaseModel):
    """A functional of the state; ``x`` is only read for ``L_x``."""

    model_config = ConfigDict(frozen=True)

    kind: FunctionalKindEnum
    x: float = 0.0

    def __str__(self: Self) -> str:
        return f"L_{self.x:g}" if self.kind is FunctionalKindEnum.L_X else self.kind.value


class InvariantSet(BaseModel):
    """
    Attributes:
        energy (float): ``E_alpha``.
        mass (float): ``Q``.
        momentum (float): ``M``.
        hierarchy (list[float]): ``L_0 .. L_n``.
        per_level (list[tuple[float, float]]): ``(sigma_k, l_k)`` for every positive ``K`` cluster.
        alpha (float): Coupling the values were computed with.
    """

    energy: float
    mass: float
    momentum: float
    hierarchy: list[float]
    per_level: list[tuple[float, float]] = []
    alpha: float


class GeneratingValues(BaseModel):
    """
    Resolvent pairings at ``x`` together with the residuals of the relations
    ``F = (J - 1) / (x J)`` and ``E = J - x |Z|^2 / J`` (relative, zero at ``x = 0``).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: float
    J: float
    E: float
    F: float
    Z: complex
    L: float
    relation_residuals: tuple[float, float]


class IndependenceReport(BaseModel):
    rank: int
    functionals: int
    singular_values: list[float]


class BracketEstimate(BaseModel):
    """``{F, G}`` and the gradient norms used to normalize it."""

    value: float
    grad_norm_f: float
    grad_norm_g: float

    @property
    def normalized(self: Self) -> float:
        scale = self.grad_norm_f * self.grad_norm_g
        return abs(self.value) / scale if scale > 0 else 0.0


def mass(u: FourierState) -> float:
    return float(np.sum(np.abs(u.coeffs) ** 2))


def momentum(u: FourierState) -> float:
    return float(np.sum(np.arange(u.N) * np.abs(u.coeffs) ** 2))


def energy(u: FourierState, alpha: float, plan: GridPlan) -> float:
    """``E_alpha = 1/4 int |u|^4 + alpha/2 |(u|1)|^2``."""
    return 0.25 * l4_norm_fourth(u, plan) + 0.5 * alpha * abs(u.coeffs[0]) ** 2


def _vectors(u: FourierState, size: int) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    u_vec = u.coeffs[:size].copy()
    one = np.zeros(size, dtype=np.complex128)
    one[0] = 1.0
    return u_vec, one


def hierarchy_L(u: FourierState, alpha: float, n_max: int, m: int | None = None) -> list[float]:
    """``L_n = (K^{2n} u | u) - alpha (K^{2n} 1 | 1)`` for ``n = 0 .. n_max``."""
    k2 = k_square(u, m).entries
    u_vec, one = _vectors(u, k2.shape[0])
    values = []
    pu, p1 = u_vec, one
    for _ in range(n_max + 1):
        values.append(float(np.vdot(u_vec, pu).real - alpha * p1[0].real))
        pu = k2 @ pu
        p1 = k2 @ p1
    return values


def l_functional(
    u: FourierState,
    alpha: float,
    f: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    m: int | None = None,
) -> float:
    """``L_f = (f(K^2) u | u) - alpha (f(K^2) 1 | 1)`` through the eigen-decomposition of ``K^2``."""
    values, vectors = linalg.eigh(k_square(u, m).entries)
    u_vec, _ = _vectors(u, vectors.shape[0])
    weights = f(np.clip(values, 0.0, None))
    u_weight = np.abs(vectors.conj().T @ u_vec) ** 2
    one_weight = np.abs(vectors[0, :]) ** 2
    return float(np.sum(weights * (u_weight - alpha * one_weight)))


def l1_closed_form(u: FourierState, alpha: float, plan: GridPlan) -> float:
    """``L_1 = 1/2 (||u||_{L^4}^4 - ||u||_{L^2}^4) - alpha (||u||^2 - |(u|1)|^2)``."""
    q = mass(u)
    return 0.5 * (l4_norm_fourth(u, plan) - q * q) - alpha * (q - abs(u.coeffs[0]) ** 2)


def rank_one_growth_criterion(u: FourierState, alpha: float, plan: GridPlan) -> float:
    """
    ``E_alpha - Q^2 / 4 - alpha Q / 2``.

    For ``alpha > 0`` and rank one data the norms grow exponentially exactly when this vanishes.
    """
    q = mass(u)
    return energy(u, alpha, plan) - 0.25 * q * q - 0.5 * alpha * q


def _check_resonance(matrix: NDArray[np.complex128], x: float, tol: float) -> None:
    eigenvalues = linalg.eigvalsh(matrix)
    distance = float(np.min(np.abs(1.0 / x - eigenvalues)))
    if distance < 10.0 * tol:
        raise NearResonanceError(f"1/x = {1.0 / x:.12g} is within {distance:.3g} of the spectrum.")


def generating_values(
    u: FourierState,
    alpha: float,
    x: float,
    m: int | None = None,
    tol: float = DEFAULT_CLUSTER_TOL,
) -> GeneratingValues:
    """
    ``J_x``, ``Z_x``, ``F_x``, ``E_x`` and ``L_x = F_x - alpha E_x`` from Hermitian resolvent solves.

    Raises:
        NearResonanceError: ``1/x`` is within ``10 tol`` (relative to the largest eigenvalue) of an
            eigenvalue of ``H_u^2`` or ``K_u^2``.
    """
    h2 = hankel_square(u, m).entries
    k2 = k_square(u, m).entries
    u_vec, one = _vectors(u, h2.shape[0])
    q = float(np.vdot(u_vec, u_vec).real)
    if x == 0.0:
        return GeneratingValues(
            x=0.0, J=1.0, E=1.0, F=q, Z=complex(np.conj(u_vec[0])), L=q - alpha, relation_residuals=(0.0, 0.0)
        )

    scale = max(1.0, float(np.max(np.abs(linalg.eigvalsh(h2)))))
    _check_resonance(h2, x, tol * scale)
    _check_resonance(k2, x, tol * scale)
    identity = np.eye(h2.shape[0], dtype=np.complex128)
    h_resolvent = linalg.solve(identity - x * h2, np.column_stack([one, u_vec]), assume_a="her")
    k_resolvent = linalg.solve(identity - x * k2, np.column_stack([one, u_vec]), assume_a="her")

    J = float(h_resolvent[0, 0].real)
    Z = complex(np.conj(h_resolvent[0, 1]))
    E = float(k_resolvent[0, 0].real)
    F = float(np.vdot(u_vec, k_resolvent[:, 1]).real)

    relation_f = abs(F - (J - 1.0) / (x * J)) / max(1.0, abs(F))
    relation_e = abs(E - (J - x * abs(Z) ** 2 / J)) / max(1.0, abs(E))
    if max(relation_f, relation_e) > RELATION_TOL:
        logger.warning("Resolvent relations off by (%.3g, %.3g) at x=%g.", relation_f, relation_e, x)
    return GeneratingValues(x=x, J=J, E=E, F=F, Z=Z, L=F - alpha * E, relation_residuals=(relation_f, relation_e))


def j_product_formula(dec: SpectralDecomposition, x: float) -> float:
    """``J_x = prod_k (1 - x sigma_k^2) / prod_j (1 - x rho_j^2)`` over the dominant levels."""
    numerator = np.prod([1.0 - x * level.value**2 for level in dec.k_levels])
    denominator = np.prod([1.0 - x * level.value**2 for level in dec.h_levels])
    return float(numerator / denominator)


def ell_k(dec: SpectralDecomposition, alpha: float) -> list[tuple[float, float]]:
    """
    ``(sigma_k, ||u'_k||^2 - alpha ||v'_k||^2)`` for every positive ``K`` cluster.

    Clusters ``u`` does not project on contribute ``-alpha ||v'_k||^2``; with them the moments
    ``sum_k sigma_k^{2n} l_k`` reproduce ``L_n`` for ``n >= 1``.
    """
    return [(level.value, level.u_norm_sq - alpha * level.one_norm_sq) for level in dec.k_clusters]


def moment_residuals(dec: SpectralDecomposition, hierarchy: list[float], alpha: float) -> list[float]:
    """``|sum_k sigma_k^{2n} l_k - L_n|`` for ``n = 1 .. len(hierarchy) - 1``."""
    levels = ell_k(dec, alpha)
    return [
        abs(sum(sigma ** (2 * n) * ell for sigma, ell in levels) - hierarchy[n]) for n in range(1, len(hierarchy))
    ]


def invariant_set(
    u: FourierState,
    alpha: float,
    plan: GridPlan,
    n_max: int = 4,
    m: int | None = None,
    dec: SpectralDecomposition | None = None,
) -> InvariantSet:
    return InvariantSet(
        energy=energy(u, alpha, plan),
        mass=mass(u),
        momentum=momentum(u),
        hierarchy=hierarchy_L(u, alpha, n_max, m),
        per_level=ell_k(dec, alpha) if dec is not None else [],
        alpha=alpha,
    )


def evaluate_functional(
    functional: FunctionalId,
    u: FourierState,
    alpha: float,
    plan: GridPlan,
    m: int | None = None,
) -> float:
    match functional.kind:
        case FunctionalKindEnum.L_X:
            return generating_values(u, alpha, functional.x, m).L
        case FunctionalKindEnum.ENERGY:
            return energy(u, alpha, plan)
        case FunctionalKindEnum.MASS:
            return mass(u)
        case FunctionalKindEnum.MOMENTUM:
            return momentum(u)
    raise ValueError(f"Unknown functional {functional}.")


def real_gradient(
    fn: Callable[[FourierState], float],
    u: FourierState,
    h: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Central differences of ``fn`` along ``Re u(k)`` and ``Im u(k)``."""
    grad_re = np.zeros(u.N)
    grad_im = np.zeros(u.N)
    for k in range(u.N):
        for direction, target in ((1.0, grad_re), (1j, grad_im)):
            step = np.zeros(u.N, dtype=np.complex128)
            step[k] = direction * h
            forward = fn(FourierState(coeffs=u.coeffs + step))
            backward = fn(FourierState(coeffs=u.coeffs - step))
            target[k] = (forward - backward) / (2.0 * h)
    return grad_re, grad_im


def poisson_bracket(
    F: FunctionalId,
    G: FunctionalId,
    u: FourierState,
    alpha: float,
    plan: GridPlan,
    h: float | None = None,
    m: int | None = None,
) -> BracketEstimate:
    """
    ``{F, G} = omega(X_F, X_G)`` for the symplectic form ``omega(u, v) = 4 Im (u|v)``.

    The Hamiltonian field is fixed by ``dF(u) . h = omega(h, X_F(u))``, which gives
    ``X_F = (g_im - i g_re) / 4`` for the real gradient ``(g_re, g_im)`` and
    ``{F, G} = (<gF_im, gG_re> - <gF_re, gG_im>) / 4``.

    Warns:
        GradientNoiseWarning: Gradients at steps ``h`` and ``2h`` differ by more than 10%.
    """
    step = h if h is not None else 1e-5 * (1.0 + u.norm())

    def gradient(functional: FunctionalId) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        def fn(state: FourierState) -> float:
            return evaluate_functional(functional, state, alpha, plan, m)

        fine = real_gradient(fn, u, step)
        coarse = real_gradient(fn, u, 2.0 * step)
        fine_vec = np.concatenate(fine)
        jitter = float(np.linalg.norm(fine_vec - np.concatenate(coarse)))
        if jitter > 0.1 * max(float(np.linalg.norm(fine_vec)), np.finfo(float).tiny):
            warnings.warn(
                GradientNoiseWarning(f"Gradient of {functional} changes by {jitter:.3g} when the step doubles."),
                stacklevel=3,
            )
        return fine

    f_re, f_im = gradient(F)
    g_re, g_im = gradient(G)
    value = 0.25 * (float(np.dot(f_im, g_re)) - float(np.dot(f_re, g_im)))
    return BracketEstimate(
        value=value,
        grad_norm_f=math.hypot(float(np.linalg.norm(f_re)), float(np.linalg.norm(f_im))),
        grad_norm_g=math.hypot(float(np.linalg.norm(g_re)), float(np.linalg.norm(g_im))),
    )


def hierarchy_independence(
    u: FourierState,
    alpha: float,
    n_max: int,
    m: int | None = None,
    h: float | None = None,
    rank_tol: float = 1e-7,
) -> IndependenceReport:
    """
    Numerical rank of the Jacobian of ``(L_0 .. L_n_max)`` in the real coordinates of ``u``.

    Rows are normalized before the singular values are taken, so the rank does not depend on the
    scale of the individual ``L_n``.
    """
    step = h if h is not None else 1e-5 * (1.0 + u.norm())
    rows = []
    for n in range(n_max + 1):
        grad_re, grad_im = real_gradient(lambda state, n=n: hierarchy_L(state, alpha, n, m)[n], u, step)
        row = np.concatenate([grad_re, grad_im])
        norm = float(np.linalg.norm(row))
        rows.append(row / norm if norm > 0 else row)
    singular = linalg.svdvals(np.array(rows))
    rank = int(np.count_nonzero(singular > rank_tol * max(float(singular[0]), np.finfo(float).tiny)))
    return IndependenceReport(rank=rank, functionals=n_max + 1, singular_values=singular.tolist())
