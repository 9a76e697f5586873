__all__ = [
    "ESCAPE_TOL",
    "RankDropReport",
    "rank_drop_audit",
]

import logging
from typing import Self

from pydantic import BaseModel, ConfigDict

from szego_lab.experiments.growth import pole_radius
from szego_lab.integrator import TrajectoryRecord
from szego_lab.invariants import ell_k
from szego_lab.spectral import decompose

logger = logging.getLogger(__name__)

ESCAPE_TOL = 1e-8
SIGMA_FLOOR_FRACTION = 0.5


class RankDropReport(BaseModel):
    """
    Per-level conserved quantities of the initial datum next to the observed ``K`` spectrum and pole
    radius along the trajectory.

    A rank drop in the weak limit needs some ``l_k(u0) = 0``; ``escape_condition_met`` records
    whether that necessary condition holds. For ``alpha < 0`` the trajectory stays in a compact set,
    which ``sigma_floor_ok`` and ``pole_ok`` check on the recorded window.

    Attributes:
        alpha (float): Coupling of the run.
        ell (list[tuple[float, float]]): ``(sigma_k, l_k(u0))`` per positive ``K`` cluster.
        min_abs_ell (float): ``min_k |l_k(u0)|``.
        escape_condition_met (bool): ``min_abs_ell`` below `ESCAPE_TOL`.
        times (list[float]): Sample times.
        smallest_sigma (list[float]): Smallest positive dominant ``K`` value per sample.
        pole_radius (list[float]): Pole radius estimate per sample.
        threshold (float): ``1 - 10 / N``.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float
    ell: list[tuple[float, float]]
    min_abs_ell: float
    escape_condition_met: bool
    times: list[float]
    smallest_sigma: list[float]
    pole_radius: list[float]
    threshold: float

    @property
    def max_pole_radius(self: Self) -> float:
        return max(self.pole_radius, default=0.0)

    @property
    def sigma_floor_ok(self: Self) -> bool:
        """No sustained decay: the smallest ``K`` value never falls below half its initial value."""
        if not self.smallest_sigma:
            return True
        return min(self.smallest_sigma) >= SIGMA_FLOOR_FRACTION * self.smallest_sigma[0]

    @property
    def pole_ok(self: Self) -> bool:
        return self.max_pole_radius < self.threshold

    @property
    def compact(self: Self) -> bool:
        """Meaningful for ``alpha < 0`` only; ``True`` otherwise."""
        return self.alpha >= 0 or (self.sigma_floor_ok and self.pole_ok)


def rank_drop_audit(traj: TrajectoryRecord, alpha: float) -> RankDropReport:
    """
    Compare ``min_k |l_k(u0)|`` with the observed smallest ``K`` value and pole radius.

    Samples without a spectrum summary contribute to the pole radius trace only.
    """
    config = traj.config
    u0 = traj.samples[0].state
    dec = decompose(u0, config.matrix_size, config.cluster_tol, tail_tol=config.tail_guard, with_blaschke=False)
    levels = [(sigma, ell) for sigma, ell in ell_k(dec, alpha) if sigma > 0]
    min_abs_ell = min((abs(ell) for _, ell in levels), default=0.0)

    times, sigmas, radii = [], [], []
    for sample in traj.samples:
        times.append(sample.t)
        radii.append(pole_radius(sample.state))
        if sample.spectrum is not None:
            positive = [value for value in sample.spectrum.k_dominant if value > 0]
            if positive:
                sigmas.append(min(positive))

    report = RankDropReport(
        alpha=alpha,
        ell=levels,
        min_abs_ell=min_abs_ell,
        escape_condition_met=min_abs_ell < ESCAPE_TOL,
        times=times,
        smallest_sigma=sigmas,
        pole_radius=radii,
        threshold=1.0 - 10.0 / config.N,
    )
    logger.info(
        "min |l_k(u0)| = %.3g, max pole radius %.6f (threshold %.6f)",
        min_abs_ell,
        report.max_pole_radius,
        report.threshold,
    )
    return report
