"""
Finite-difference checks of the operator identities along a trajectory.

States at ``t +- dt`` are obtained by advancing the state at ``t`` with tight tolerances, so a
residual measures the identity plus an ``O(dt^2)`` difference error. Residuals are relative to the
size of the differentiated object.
"""

__all__ = [
    "BlaschkeOrbit",
    "BlaschkePhaseTrace",
    "blaschke_orbit_trace",
    "blaschke_phase_trace",
    "hu_evolution_residual",
    "lax_residual_K",
    "pk_system_residual",
    "projection_evolution_residual",
]

import logging
import math
import warnings
from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict
from scipy import linalg
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import linear_sum_assignment

from szego_lab.errors import (
    AmbiguousClusterError,
    CrossingProximityError,
    FiniteDifferenceStepWarning,
    MatchingAmbiguityError,
    NonSimpleLevelWarning,
)
from szego_lab.hardy import FourierState, to_grid
from szego_lab.integrator import TrajectoryRecord, advance
from szego_lab.operators import (
    antilinear_commutator,
    bu_cu_matrices,
    hankel_matrix,
    hankel_one,
    shifted_hankel_matrix,
    toeplitz_matrix,
)
from szego_lab.spectral import SpectralDecomposition, SpectralLevel, decompose

logger = logging.getLogger(__name__)

FD_STEP_RANGE = (1e-6, 1e-2)
CROSSING_GAP = 1e-3


def _fd_step(traj: TrajectoryRecord, dt: float | None) -> float:
    step = traj.config.fd_step if dt is None else dt
    low, high = FD_STEP_RANGE
    if not low <= step <= high:
        warnings.warn(
            FiniteDifferenceStepWarning(
                f"Finite-difference step {step:.3g} outside [{low:g}, {high:g}]; the residual is dominated by "
                f"{'truncation' if step > high else 'round-off'} error."
            ),
            stacklevel=3,
        )
    return step


def _neighbours(traj: TrajectoryRecord, t: float, dt: float) -> tuple[FourierState, FourierState, FourierState]:
    plan = traj.config.grid_plan()
    u = traj.state_at(t)
    return (
        advance(u, traj.config.alpha, plan, -dt),
        u,
        advance(u, traj.config.alpha, plan, dt),
    )


def _relative(difference: NDArray[np.complex128], scale: float) -> float:
    norm = float(linalg.norm(difference, 2)) if difference.size else 0.0
    return norm / scale if scale > 0 else norm


def lax_residual_K(traj: TrajectoryRecord, t: float, dt: float | None = None, m: int | None = None) -> float:
    """
    ``||dK_u/dt - [C_u, K_u]|| / ||K_u||`` at time ``t``.

    ``dK_u/dt`` is the central difference of the conjugate-linear matrices; the commutator keeps
    the conjugation (see `antilinear_commutator`).

    Warns:
        FiniteDifferenceStepWarning: ``dt`` outside ``[1e-6, 1e-2]``.
    """
    step = _fd_step(traj, dt)
    size = m if m is not None else traj.config.matrix_size
    minus, u, plus = _neighbours(traj, t, step)
    k_u = shifted_hankel_matrix(u, size)
    derivative = (shifted_hankel_matrix(plus, size).entries - shifted_hankel_matrix(minus, size).entries) / (2 * step)
    _, c_u = bu_cu_matrices(u, traj.config.grid_plan(), size)
    commutator = antilinear_commutator(c_u, k_u).entries
    return _relative(derivative - commutator, k_u.norm())


def hu_evolution_residual(
    traj: TrajectoryRecord,
    t: float,
    dt: float | None = None,
    m: int | None = None,
    include_source: bool = True,
) -> float:
    """
    ``||dH_u/dt - [B_u, H_u] + i alpha (u|1) H_1|| / ||H_u||`` at time ``t``.

    With ``include_source=False`` the ``H_1`` term is dropped, which leaves a residual of the
    order of ``|alpha (u|1)| / ||H_u||``.
    """
    step = _fd_step(traj, dt)
    size = m if m is not None else traj.config.matrix_size
    minus, u, plus = _neighbours(traj, t, step)
    h_u = hankel_matrix(u, size)
    derivative = (hankel_matrix(plus, size).entries - hankel_matrix(minus, size).entries) / (2 * step)
    b_u, _ = bu_cu_matrices(u, traj.config.grid_plan(), size)
    expected = antilinear_commutator(b_u, h_u).entries
    if include_source:
        expected = expected - 1j * traj.config.alpha * u.coeffs[0] * hankel_one(size).entries
    return _relative(derivative - expected, h_u.norm())


def _k_level(dec: SpectralDecomposition, sigma: float) -> SpectralLevel:
    if not dec.k_levels:
        raise ValueError("The state has no dominant K level.")
    level = min(dec.k_levels, key=lambda item: abs(item.value - sigma))
    if abs(level.value - sigma) > 1e-6 * max(1.0, sigma):
        raise ValueError(f"No dominant K level at sigma={sigma:.9g}; closest is {level.value:.9g}.")
    return level


def _isolated_level(u: FourierState, sigma: float, m: int, cluster_tol: float, t: float) -> SpectralLevel:
    try:
        dec = decompose(u, m, cluster_tol, with_blaschke=False)
    except AmbiguousClusterError as exc:
        raise CrossingProximityError(f"Clusters merge near sigma={sigma:.9g}: {exc.message}", t=t) from exc
    level = _k_level(dec, sigma)
    gap = min((abs(rho - sigma) for rho in dec.rho), default=math.inf)
    if gap < CROSSING_GAP * max(1.0, sigma):
        raise CrossingProximityError(f"rho is {gap:.3g} away from sigma={sigma:.9g}; the level is crossing.", t=t)
    return level


def _level_vectors(
    traj: TrajectoryRecord,
    sigma: float,
    t: float,
    dt: float,
    m: int,
) -> tuple[FourierState, list[SpectralLevel]]:
    minus, u, plus = _neighbours(traj, t, dt)
    tol = traj.config.cluster_tol
    levels = [_isolated_level(state, sigma, m, tol, t) for state in (minus, u, plus)]
    return u, levels


def projection_evolution_residual(
    traj: TrajectoryRecord,
    sigma: float,
    t: float,
    dt: float | None = None,
    m: int | None = None,
) -> float | None:
    """
    Relative residual of ``du'/dt = -i T_{|u|^2} u' - i alpha (u|1) v'`` for the ``K`` level ``sigma``.

    ``v'`` is the projection of ``1`` on the level, ``(1|u') / (u'|u') u'`` when the level is simple.
    A multiple level is skipped and ``None`` returned.

    Warns:
        NonSimpleLevelWarning: The level has multiplicity above one at one of the three states.

    Raises:
        CrossingProximityError: A dominant ``rho`` is within ``1e-3`` of ``sigma`` at one of the
            three states, or the clusters cannot be separated.
    """
    step = _fd_step(traj, dt)
    size = m if m is not None else traj.config.matrix_size
    u, (minus, level, plus) = _level_vectors(traj, sigma, t, step, size)
    multiplicity = max(item.multiplicity for item in (minus, level, plus))
    if multiplicity > 1:
        warnings.warn(
            NonSimpleLevelWarning(f"K level sigma={sigma:.9g} has multiplicity {multiplicity}; skipped.", t=t),
            stacklevel=2,
        )
        return None
    plan = traj.config.grid_plan()
    toeplitz = toeplitz_matrix(np.abs(to_grid(u, plan)) ** 2, size, plan).entries
    derivative = (plus.u_proj.coeffs - minus.u_proj.coeffs) / (2 * step)
    expected = -1j * (toeplitz @ level.u_proj.coeffs + traj.config.alpha * u.coeffs[0] * level.one_proj.coeffs)
    scale = float(np.linalg.norm(expected))
    residual = float(np.linalg.norm(derivative - expected))
    return residual / scale if scale > 0 else residual


def pk_system_residual(
    traj: TrajectoryRecord,
    sigma: float,
    t: float,
    dt: float | None = None,
    m: int | None = None,
) -> tuple[float, float]:
    """
    Residuals of the coupled evolution of ``(u', v')`` on the level ``sigma``,

    ``d/dt (u', v') = -i [[T, alpha (u|1)], [-(1|u), T - sigma^2]] (u', v')`` with
    ``T = T_{|u|^2}``.

    Returns:
        tuple[float, float]: Relative residuals of the ``u'`` and ``v'`` rows.
    """
    step = _fd_step(traj, dt)
    size = m if m is not None else traj.config.matrix_size
    u, (minus, level, plus) = _level_vectors(traj, sigma, t, step, size)
    plan = traj.config.grid_plan()
    toeplitz = toeplitz_matrix(np.abs(to_grid(u, plan)) ** 2, size, plan).entries
    u_hat0 = u.coeffs[0]
    u_p, v_p = level.u_proj.coeffs, level.one_proj.coeffs

    expected_u = -1j * (toeplitz @ u_p + traj.config.alpha * u_hat0 * v_p)
    expected_v = -1j * (-np.conj(u_hat0) * u_p + toeplitz @ v_p - sigma**2 * v_p)
    derivative_u = (plus.u_proj.coeffs - minus.u_proj.coeffs) / (2 * step)
    derivative_v = (plus.one_proj.coeffs - minus.one_proj.coeffs) / (2 * step)

    def relative(derivative: NDArray[np.complex128], expected: NDArray[np.complex128]) -> float:
        scale = float(np.linalg.norm(expected))
        residual = float(np.linalg.norm(derivative - expected))
        return residual / scale if scale > 0 else residual

    return relative(derivative_u, expected_u), relative(derivative_v, expected_v)


class BlaschkeOrbit(BaseModel):
    """
    Zeros of the inner function of one ``K`` level along a trajectory.

    ``zeros[i, j]`` is zero ``j`` at ``times[i]``, columns matched across samples.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma: float
    times: np.ndarray
    zeros: np.ndarray
    skipped: list[float] = []

    @property
    def degree(self: Self) -> int:
        return int(self.zeros.shape[1]) if self.zeros.ndim == 2 else 0

    @property
    def drift(self: Self) -> list[float]:
        """``max_t |p_j(t) - p_j(t_0)|`` per zero."""
        if not self.degree or not self.times.size:
            return []
        return [float(value) for value in np.max(np.abs(self.zeros - self.zeros[0]), axis=0)]

    @property
    def max_drift(self: Self) -> float:
        return max(self.drift, default=0.0)


def _check_separated(zeros: NDArray[np.complex128], tol: float, t: float) -> None:
    if zeros.size < 2:
        return
    distances = np.abs(zeros[:, None] - zeros[None, :]) + np.eye(zeros.size) * math.inf
    closest = float(np.min(distances))
    if closest < tol:
        raise MatchingAmbiguityError(f"Two Blaschke zeros are {closest:.3g} apart; matching is ambiguous.", t=t)


def blaschke_orbit_trace(traj: TrajectoryRecord, sigma: float, match_tol: float = 1e-4) -> BlaschkeOrbit:
    """
    Track the zeros of ``Psi`` for the ``K`` level ``sigma`` over the recorded samples.

    Zeros are matched between consecutive samples by minimum total distance. Samples whose labels
    were frozen, or where the level has no fitted inner function, are skipped.

    Raises:
        MatchingAmbiguityError: Two zeros of one sample are closer than ``match_tol``, or the
            degree changes between samples.
    """
    times: list[float] = []
    rows: list[NDArray[np.complex128]] = []
    skipped: list[float] = []
    for sample in traj.samples:
        spectrum = sample.spectrum
        if spectrum is None or spectrum.frozen_labels or not spectrum.k_dominant:
            skipped.append(sample.t)
            continue
        index = int(np.argmin([abs(value - sigma) for value in spectrum.k_dominant]))
        if abs(spectrum.k_dominant[index] - sigma) > 1e-6 * max(1.0, sigma) or index >= len(spectrum.k_zeros):
            skipped.append(sample.t)
            continue
        multiplicity = spectrum.k_multiplicities[index]
        zeros = np.array([complex(re, im) for re, im in spectrum.k_zeros[index]], dtype=np.complex128)
        if zeros.size != multiplicity - 1:
            skipped.append(sample.t)
            continue
        _check_separated(zeros, match_tol, sample.t)
        if rows:
            if zeros.size != rows[-1].size:
                raise MatchingAmbiguityError(
                    f"Degree changes from {rows[-1].size} to {zeros.size} at sigma={sigma:.9g}.", t=sample.t
                )
            cost = np.abs(rows[-1][:, None] - zeros[None, :])
            _, order = linear_sum_assignment(cost)
            zeros = zeros[order]
        times.append(sample.t)
        rows.append(zeros)

    if skipped:
        logger.info("Blaschke orbit at sigma=%.9g skipped %d samples", sigma, len(skipped))
    degree = rows[0].size if rows else 0
    return BlaschkeOrbit(
        sigma=sigma,
        times=np.array(times, dtype=np.float64),
        zeros=np.array(rows, dtype=np.complex128).reshape(len(rows), degree),
        skipped=skipped,
    )


class BlaschkePhaseTrace(BaseModel):
    """
    Measured angle of ``Psi`` for one ``K`` level and the integrated phase law.

    Both angles are wrapped to ``(-pi, pi]``; ``mismatch`` is their wrapped difference.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma: float
    times: np.ndarray
    angle: np.ndarray
    predicted: np.ndarray
    gamma: np.ndarray

    @property
    def mismatch(self: Self) -> NDArray[np.float64]:
        return np.angle(np.exp(1j * (self.angle - self.predicted)))


def _wrap(values: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.angle(np.exp(1j * values))


def blaschke_phase_trace(traj: TrajectoryRecord, sigma: float) -> BlaschkePhaseTrace:
    """
    Wrapped angle ``psi(t)`` of the inner function on the level ``sigma`` and the prediction
    ``psi(0) - sigma^2 t - gamma(t)`` with
    ``gamma(t) = 2 alpha int_0^t Re[(u|1)(1|u')] / ||u'||^2``.

    Samples where the level cannot be fitted are dropped.
    """
    m = traj.config.matrix_size
    times: list[float] = []
    angles: list[float] = []
    integrand: list[float] = []
    for sample in traj.samples:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                dec = decompose(sample.state, m, traj.config.cluster_tol, tail_tol=traj.config.tail_guard)
                level = _k_level(dec, sigma)
            except (AmbiguousClusterError, ValueError):
                continue
        if level.blaschke is None or level.u_norm_sq == 0:
            continue
        u_prime = level.u_proj.coeffs
        times.append(sample.t)
        angles.append(level.blaschke.angle)
        integrand.append(float(np.real(sample.state.coeffs[0] * np.conj(u_prime[0]))) / level.u_norm_sq)

    t = np.array(times, dtype=np.float64)
    if t.size == 0:
        empty = np.zeros(0, dtype=np.float64)
        return BlaschkePhaseTrace(sigma=sigma, times=empty, angle=empty, predicted=empty, gamma=empty)
    gamma = 2.0 * traj.config.alpha * cumulative_trapezoid(np.array(integrand), t, initial=0.0)
    angle = _wrap(np.array(angles, dtype=np.float64))
    predicted = _wrap(angle[0] - sigma**2 * (t - t[0]) - gamma)
    return BlaschkePhaseTrace(sigma=sigma, times=t, angle=angle, predicted=predicted, gamma=gamma)
