"""
Growth diagnostics: Sobolev norm slopes, pole radius of the rational state and the lower bound of
``||1 / (1 - p Psi)||_{H^s}`` as ``|p|`` approaches 1.
"""

__all__ = [
    "GrowthFit",
    "LowerBoundReport",
    "PoleApproachFit",
    "blaschke_lower_bound_check",
    "default_p_sequence",
    "default_windows",
    "fit_growth",
    "fit_pole_approach",
    "pole_radius",
    "slope_ratio",
]

import logging
import math
from collections.abc import Sequence
from typing import Self

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict
from scipy import linalg
from scipy.signal import lfilter
from scipy.stats import linregress

from szego_lab.errors import TruncationInsufficientError, WindowUnresolvedError
from szego_lab.hardy import BlaschkeProduct, FourierState, sobolev_norm
from szego_lab.integrator import TrajectoryRecord

logger = logging.getLogger(__name__)

TRANSIENT = 2.0
NULL_TOL = 1e-8
SERIES_START = 2**12
SERIES_LIMIT = 2**20


class GrowthFit(BaseModel):
    """
    Least-squares line through ``log ||u(t)||_{H^s}`` on one window.

    Attributes:
        window (tuple[float, float]): Fitted time range.
        s (float): Sobolev index.
        slope (float): Fitted ``d log ||u||_{H^s} / dt``.
        intercept (float): Intercept of the line.
        r_squared (float): Coefficient of determination.
        c_alpha (float | None): ``slope / (2s - 1)``; undefined at ``s = 1/2``.
        samples (int): Number of samples in the window.
    """

    model_config = ConfigDict(frozen=True)

    window: tuple[float, float]
    s: float
    slope: float
    intercept: float
    r_squared: float
    c_alpha: float | None
    samples: int


class PoleApproachFit(BaseModel):
    """Line through ``log(1 - |p(t)|)``; the slope is ``-2 C_alpha`` in the growth regime."""

    model_config = ConfigDict(frozen=True)

    window: tuple[float, float]
    slope: float
    intercept: float
    r_squared: float
    radii: list[float]


def _decay_rate(coeffs: NDArray[np.complex128]) -> float:
    magnitudes = np.abs(coeffs)
    floor = 1e-13 * float(np.max(magnitudes, initial=0.0))
    k = np.flatnonzero(magnitudes > floor)
    k = k[k >= 1]
    if k.size < 3:
        return 0.0
    fit = linregress(k, np.log(magnitudes[k]))
    return float(min(1.0, max(0.0, math.exp(fit.slope))))


def _hankel_rank(coeffs: NDArray[np.complex128]) -> int:
    half = coeffs.size // 2
    singular = linalg.svdvals(linalg.hankel(coeffs[:half], coeffs[half - 1 : 2 * half - 1]))
    if singular[0] == 0.0:
        return 0
    return int(np.count_nonzero(singular > NULL_TOL * singular[0]))


def pole_radius(u: FourierState) -> float:
    """
    Largest modulus among the characteristic roots of the coefficient recurrence of ``u``.

    For ``u = A / B`` of Hankel rank ``r`` the coefficients satisfy ``sum_l v_l u(k + l) = 0`` for
    every ``k >= r``, where ``v`` is the reversed denominator, so the roots of ``sum_l v_l x^l`` are
    the inverse poles. The recurrence is read off the first Hankel block, rows from ``r`` on, that
    has a numerical null vector. A polynomial state returns 0. When the rank exceeds a quarter of the
    modes, or no clean recurrence exists, the geometric decay rate of the coefficients is returned
    instead.
    """
    coeffs = u.coeffs
    if u.N < 4 or not np.any(coeffs):
        return 0.0
    rank = _hankel_rank(coeffs)
    if rank <= u.N // 4:
        for order in range(0, rank + 1):
            rows = u.N - rank - order
            if rows < order + 2:
                break
            block = linalg.hankel(coeffs[rank : rank + rows], coeffs[rank + rows - 1 : rank + rows + order])
            if order == 0:
                if float(np.max(np.abs(block))) <= NULL_TOL * float(np.max(np.abs(coeffs))):
                    return 0.0
                continue
            _, singular, vh = linalg.svd(block, full_matrices=False)
            if singular[-1] > NULL_TOL * singular[0]:
                continue
            roots = P.polyroots(vh[-1].conj())
            radius = float(np.max(np.abs(roots)))
            if radius < 1.0:
                return radius
            break
    logger.debug("No clean recurrence for Hankel rank %d at N=%d; using the coefficient decay rate", rank, u.N)
    return _decay_rate(coeffs)


def _window_samples(
    traj: TrajectoryRecord,
    window: tuple[float, float],
) -> tuple[NDArray[np.float64], list[FourierState]]:
    lo, hi = window
    resolved_until = traj.resolved_until
    if hi > resolved_until + 1e-9:
        raise WindowUnresolvedError(f"Window [{lo}, {hi}] reaches past the resolved time {resolved_until:.6g}.")
    picked = [sample for sample in traj.samples if lo - 1e-9 <= sample.t <= hi + 1e-9]
    if len(picked) < 3:
        raise WindowUnresolvedError(f"Window [{lo}, {hi}] holds only {len(picked)} samples.")
    return np.array([sample.t for sample in picked]), [sample.state for sample in picked]


def default_windows(traj: TrajectoryRecord, transient: float = TRANSIENT) -> list[tuple[float, float]]:
    """``[transient, t_resolved]`` followed by its two halves."""
    end = traj.resolved_until
    if end <= transient:
        raise WindowUnresolvedError(f"Resolved window ends at {end:.6g}, before the transient {transient}.")
    middle = 0.5 * (transient + end)
    return [(transient, end), (transient, middle), (middle, end)]


def fit_growth(
    traj: TrajectoryRecord,
    s: float,
    windows: Sequence[tuple[float, float]] | None = None,
) -> list[GrowthFit]:
    """
    Fit ``log ||u(t)||_{H^s}`` linearly on each window.

    Arguments:
        traj (TrajectoryRecord): Integrated trajectory.
        s (float): Sobolev index.
        windows (Sequence[tuple[float, float]] | None): [Optional] Time windows; by default the
            resolved range after the transient and its two halves.

    Raises:
        WindowUnresolvedError: A window extends past the last resolved sample or holds fewer than
            three samples.
    """
    fits = []
    for window in windows if windows is not None else default_windows(traj):
        times, states = _window_samples(traj, window)
        log_norms = np.log([sobolev_norm(state, s) for state in states])
        line = linregress(times, log_norms)
        exponent = 2.0 * s - 1.0
        fits.append(
            GrowthFit(
                window=(float(window[0]), float(window[1])),
                s=s,
                slope=float(line.slope),
                intercept=float(line.intercept),
                r_squared=float(line.rvalue**2),
                c_alpha=float(line.slope / exponent) if abs(exponent) > 1e-12 else None,
                samples=len(states),
            )
        )
        logger.info("H^%g slope %.6g on [%g, %g], R^2=%.6f", s, line.slope, window[0], window[1], line.rvalue**2)
    return fits


def fit_pole_approach(traj: TrajectoryRecord, window: tuple[float, float] | None = None) -> PoleApproachFit:
    window = window if window is not None else default_windows(traj)[0]
    times, states = _window_samples(traj, window)
    radii = [pole_radius(state) for state in states]
    gaps = np.maximum(1.0 - np.array(radii), np.finfo(float).tiny)
    line = linregress(times, np.log(gaps))
    return PoleApproachFit(
        window=(float(window[0]), float(window[1])),
        slope=float(line.slope),
        intercept=float(line.intercept),
        r_squared=float(line.rvalue**2),
        radii=radii,
    )


def slope_ratio(numerator: GrowthFit, denominator: GrowthFit) -> float:
    if denominator.slope == 0:
        return math.inf
    return numerator.slope / denominator.slope


class LowerBoundReport(BaseModel):
    """
    ``||1 / (1 - p Psi)||_{H^s}`` along a sequence of ``p`` and the fitted log-log slope against
    ``1 - |p|``.
    """

    model_config = ConfigDict(frozen=True)

    degree: int
    s: float
    gaps: list[float]
    norms: list[float]
    terms: list[int]
    slope: float
    intercept: float
    r_squared: float
    closed_form_residual: float | None = None

    @property
    def bound(self: Self) -> float:
        return -(self.s + 0.5) + 0.05

    @property
    def passed(self: Self) -> bool:
        return self.slope <= self.bound


def default_p_sequence(count: int = 7) -> list[float]:
    """Real ``p`` with ``1 - p = 2^-6 .. 2^-12``."""
    return [1.0 - 2.0 ** (-exponent) for exponent in np.linspace(6, 12, count)]


def _series(psi: BlaschkeProduct, p: complex, s: float, tol: float) -> tuple[float, int]:
    numerator = np.exp(-1j * psi.angle) * psi.numerator()
    denominator = psi.denominator()
    size = max(numerator.size, denominator.size)
    lhs = np.zeros(size, dtype=np.complex128)
    lhs[: denominator.size] = denominator
    rhs = lhs.copy()
    rhs[: numerator.size] -= p * numerator
    length = SERIES_START
    while length <= SERIES_LIMIT:
        impulse = np.zeros(length, dtype=np.complex128)
        impulse[0] = 1.0
        coeffs = lfilter(lhs, rhs, impulse)
        k = np.arange(length, dtype=np.float64)
        weighted = (1.0 + k * k) ** s * np.abs(coeffs) ** 2
        total = float(np.sum(weighted))
        tail = float(np.sum(weighted[length - length // 8 :]))
        if tail <= tol * total:
            return math.sqrt(total), length
        length *= 2
    raise TruncationInsufficientError(
        f"Series of 1/(1 - p Psi) at |p|={abs(p):.9f} still carries a {tail / total:.3g} tail after "
        f"{SERIES_LIMIT} terms."
    )


def blaschke_lower_bound_check(
    psi: BlaschkeProduct,
    s: float,
    p_values: Sequence[complex] | None = None,
    tol: float = 1e-12,
) -> LowerBoundReport:
    """
    ``H^s`` norms of ``1 / (1 - p Psi)`` for ``|p| -> 1`` and their log-log slope against ``1 - |p|``.

    The Taylor coefficients come from the recurrence of the rational function
    ``D / (D - p e^{-i psi} P)``; the series is extended until the weighted energy of its last
    eighth is below ``tol``. For ``Psi = z`` and ``s = 0`` the squared norm is compared with the
    closed form ``1 / (1 - |p|^2)``.

    Raises:
        ValueError: ``s`` outside ``[0, 1)`` or ``|p| >= 1``.
        TruncationInsufficientError: More than ``2^20`` terms would be needed.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError(f"Sobolev index must lie in [0, 1), got {s}.")
    values = list(p_values) if p_values is not None else default_p_sequence()
    if any(abs(p) >= 1.0 for p in values):
        raise ValueError("Every p must lie in the open unit disc.")
    norms, terms = [], []
    for p in values:
        norm, length = _series(psi, p, s, tol)
        norms.append(norm)
        terms.append(length)
    gaps = [1.0 - abs(p) for p in values]
    line = linregress(np.log(gaps), np.log(norms))
    closed_form = None
    if s == 0.0 and psi.degree == 1 and abs(psi.zeros[0]) == 0.0 and psi.angle == 0.0:
        closed_form = max(abs(n * n * (1.0 - abs(p) ** 2) - 1.0) for n, p in zip(norms, values, strict=True))
    return LowerBoundReport(
        degree=psi.degree,
        s=s,
        gaps=gaps,
        norms=norms,
        terms=terms,
        slope=float(line.slope),
        intercept=float(line.intercept),
        r_squared=float(line.rvalue**2),
        closed_form_residual=closed_form,
    )
