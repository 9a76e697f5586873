"""Built-in initial data of the scenarios, each checked against its preconditions before use."""

__all__ = [
    "builtin_crossing_datum",
    "builtin_cubic_lift",
    "builtin_growth_datum",
    "builtin_lifted_datum",
]

import logging
import math

import numpy as np

from szego_lab.constants import DEFAULT_TAIL_GUARD
from szego_lab.errors import AssemblyCheckError
from szego_lab.hardy import (
    BlaschkeProduct,
    FourierState,
    GridPlan,
    RationalState,
    compose_with_blaschke,
    rational_to_fourier,
)
from szego_lab.invariants import hierarchy_L
from szego_lab.spectral import decompose, ranks

logger = logging.getLogger(__name__)

L1_TOL = 1e-10


def _check_l1(u: FourierState, alpha: float, label: str) -> float:
    l1 = hierarchy_L(u, alpha, 1)[1]
    if abs(l1) > L1_TOL * max(1.0, u.norm() ** 4):
        raise AssemblyCheckError(f"{label}: L_1 = {l1:.3g} does not vanish.")
    return l1


def builtin_growth_datum(alpha: float, c: complex, N: int = 64) -> FourierState:
    """
    ``u0 = sqrt(alpha) + c z``, a rank one datum with ``L_1(u0) = |c|^2 (|b|^2 - alpha) = 0``.

    Raises:
        AssemblyCheckError: ``alpha <= 0``, ``c = 0``, ``L_1(u0) != 0`` or the ``K`` spectrum is not
            the single simple level ``|c|``.
    """
    if alpha <= 0:
        raise AssemblyCheckError(f"The growth datum needs alpha > 0, got {alpha}.")
    if c == 0:
        raise AssemblyCheckError("The growth datum needs c != 0; with c = 0 there is no K level.")
    if N < 2:
        raise AssemblyCheckError(f"The growth datum needs N >= 2, got {N}.")
    u0 = FourierState.from_coeffs([math.sqrt(alpha), c], N)
    _check_l1(u0, alpha, "growth datum")
    dec = decompose(u0, with_blaschke=False)
    positive = [level for level in dec.k_levels if level.value > 0]
    if len(positive) != 1 or positive[0].multiplicity != 1 or abs(positive[0].value - abs(c)) > 1e-10 * abs(c):
        raise AssemblyCheckError(
            f"growth datum: K spectrum {[(lvl.value, lvl.multiplicity) for lvl in positive]} is not {{|c|}}."
        )
    logger.debug("Growth datum sqrt(%g) + %s z", alpha, c)
    return u0


def builtin_lifted_datum(
    alpha: float,
    c: complex,
    chi: BlaschkeProduct,
    N: int = 64,
    plan: GridPlan | None = None,
) -> FourierState:
    """
    ``u0(z chi(z))`` for the growth datum ``u0``.

    The inner substitution keeps ``L_1 = 0`` and multiplies the rank of ``K`` by ``deg chi + 1``.

    Raises:
        AssemblyCheckError: One of the growth datum checks fails, ``L_1`` of the lifted datum does not
            vanish, or its ``K`` rank is not ``deg chi + 1``.
        AliasingError: ``N`` is too small to hold the substituted datum.
    """
    base = builtin_growth_datum(alpha, c, N)
    lifted = compose_with_blaschke(base, chi, plan if plan is not None else GridPlan.for_truncation(N))
    _check_l1(lifted, alpha, "lifted datum")
    expected = chi.degree + 1
    report = ranks(lifted)
    if report.rank_k != expected:
        raise AssemblyCheckError(f"lifted datum: rank of K is {report.rank_k}, expected {expected}.")
    return lifted


def builtin_cubic_lift(u: FourierState) -> FourierState:
    """
    ``z u(z^2)``, coefficient ``u(k)`` moved to ``2k + 1``.

    The result is orthogonal to ``1``, so a cubic flow solution lifts to a solution of the flow for
    every ``alpha``.
    """
    coeffs = np.zeros(2 * u.N, dtype=np.complex128)
    coeffs[1::2] = u.coeffs
    return FourierState(coeffs=coeffs)


def builtin_crossing_datum(p: complex, N: int = 64, tail_tol: float = DEFAULT_TAIL_GUARD) -> FourierState:
    """``(z - p) / (1 - conj(p) z)``, which starts on a crossing when ``alpha = 1``."""
    if not 0 < abs(p) < 1:
        raise AssemblyCheckError(f"The crossing datum needs 0 < |p| < 1, got {p!r}.")
    return rational_to_fourier(RationalState(A=[-p, 1.0], B=[1.0, -np.conj(p)]), N, tail_tol)
