"""
Eigen-analysis of ``H_u^2`` and ``K_u^2``.

A level is a cluster of equal eigenvalues. It is dominant for ``H`` (resp. ``K``) when ``u`` has a
non-trivial projection on its eigenspace. Dominant ``H`` and ``K`` values interlace,
``rho_1 > sigma_1 > rho_2 > ...``. When ``u`` projects on the kernel of ``K_u^2``, the kernel is
reported as a ``K`` level with ``sigma = 0``.
"""

__all__ = [
    "CrossingReport",
    "ProjectionNormResiduals",
    "RankReport",
    "SpectralDecomposition",
    "SpectralLevel",
    "SpectrumSummary",
    "decompose",
    "detect_crossings",
    "eigenspace_coefficients",
    "level_blaschke",
    "ranks",
    "reconstruction_residuals",
    "sum_rule_residuals",
    "summarize_spectrum",
    "verify_projection_norms",
    "verify_v_norm",
]

import logging
import math
import warnings
from collections.abc import Sequence
from typing import Self

import numpy as np
from numpy.polynomial import polynomial as P
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from szego_lab.constants import DEFAULT_CLUSTER_TOL, DEFAULT_TAIL_GUARD, DominanceEnum
from szego_lab.errors import (
    AmbiguousClusterError,
    DegreeMismatchError,
    NearCrossingWarning,
    SpectralAmbiguityWarning,
    ThresholdAmbiguityError,
    UndersampledTraceWarning,
)
from szego_lab.hardy import BlaschkeProduct, FourierState, GridPlan, blaschke_eval, to_grid
from szego_lab.operators import hankel_matrix, hankel_square, k_square, shifted_hankel_matrix

logger = logging.getLogger(__name__)

NEAR_CROSSING_FACTOR = 1e3
BLASCHKE_FIT_TOL = 1e-8


class SpectralLevel(BaseModel):
    """
    One eigenvalue cluster of ``H_u^2`` or ``K_u^2``.

    Attributes:
        value (float): ``rho`` or ``sigma``, the square root of the eigenvalue.
        multiplicity (int): Dimension of the eigenspace.
        dominance (DominanceEnum | None): Set when ``u`` projects on the eigenspace.
        u_proj (FourierState): Projection of ``u``.
        one_proj (FourierState): Projection of the constant function 1.
        blaschke (BlaschkeProduct | None): Inner function of a dominant level, when fitted.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    value: float
    multiplicity: int
    dominance: DominanceEnum | None = None
    u_proj: FourierState
    one_proj: FourierState
    blaschke: BlaschkeProduct | None = None

    @property
    def u_norm_sq(self: Self) -> float:
        return float(np.vdot(self.u_proj.coeffs, self.u_proj.coeffs).real)

    @property
    def one_norm_sq(self: Self) -> float:
        return float(np.vdot(self.one_proj.coeffs, self.one_proj.coeffs).real)


class SpectralDecomposition(BaseModel):
    """
    Attributes:
        h_levels (list[SpectralLevel]): Dominant ``H`` levels, descending.
        k_levels (list[SpectralLevel]): Dominant ``K`` levels, descending, ``sigma = 0`` last if present.
        h_clusters (list[SpectralLevel]): Every positive ``H`` cluster.
        k_clusters (list[SpectralLevel]): Every positive ``K`` cluster.
        h_eigenvalues (np.ndarray): Raw eigenvalues of ``H_u^2``, descending.
        k_eigenvalues (np.ndarray): Raw eigenvalues of ``K_u^2``, descending.
        cluster_tol (float): Absolute clustering tolerance used.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    h_levels: list[SpectralLevel]
    k_levels: list[SpectralLevel]
    h_clusters: list[SpectralLevel]
    k_clusters: list[SpectralLevel]
    h_eigenvalues: np.ndarray
    k_eigenvalues: np.ndarray
    cluster_tol: float
    m: int

    @property
    def rho(self: Self) -> NDArray[np.float64]:
        return np.array([level.value for level in self.h_levels])

    @property
    def sigma(self: Self) -> NDArray[np.float64]:
        return np.array([level.value for level in self.k_levels])

    @property
    def rank_h(self: Self) -> int:
        return sum(level.multiplicity for level in self.h_clusters)

    @property
    def rank_k(self: Self) -> int:
        return sum(level.multiplicity for level in self.k_clusters)

    @property
    def dom_rank_h(self: Self) -> int:
        return sum(level.multiplicity for level in self.h_levels)

    @property
    def dom_rank_k(self: Self) -> int:
        return sum(level.multiplicity for level in self.k_levels if level.value > 0)

    def is_generic(self: Self) -> bool:
        """All dominant levels simple."""
        return all(level.multiplicity == 1 for level in (*self.h_levels, *self.k_levels) if level.value > 0)

    def interlacing_ok(self: Self) -> bool:
        merged = sorted(
            [(level.value, "H") for level in self.h_levels] + [(level.value, "K") for level in self.k_levels],
            key=lambda item: -item[0],
        )
        labels = [label for _, label in merged]
        values = [value for value, _ in merged]
        alternating = all(labels[i] == ("H" if i % 2 == 0 else "K") for i in range(len(labels)))
        slack = math.sqrt(self.cluster_tol)
        strict = all(values[i] - values[i + 1] > slack for i in range(len(values) - 1))
        return alternating and strict and len(self.h_levels) == len(self.k_levels)

    def summary(self: Self) -> "SpectrumSummary":
        return SpectrumSummary(
            h_values=[level.value for level in self.h_clusters],
            k_values=[level.value for level in self.k_clusters],
            h_dominant=[level.value for level in self.h_levels],
            k_dominant=[level.value for level in self.k_levels],
            h_multiplicities=[level.multiplicity for level in self.h_levels],
            k_multiplicities=[level.multiplicity for level in self.k_levels],
            h_singular=_singular_values(self.h_eigenvalues, self.cluster_tol),
            k_singular=_singular_values(self.k_eigenvalues, self.cluster_tol),
            k_zeros=[
                [(float(p.real), float(p.imag)) for p in level.blaschke.zeros] if level.blaschke is not None else []
                for level in self.k_levels
            ],
        )


class SpectrumSummary(BaseModel):
    """Per-sample spectral data kept in a trajectory."""

    h_values: list[float] = Field(default_factory=list)
    k_values: list[float] = Field(default_factory=list)
    h_dominant: list[float] = Field(default_factory=list)
    k_dominant: list[float] = Field(default_factory=list)
    h_multiplicities: list[int] = Field(default_factory=list)
    k_multiplicities: list[int] = Field(default_factory=list)
    h_singular: list[float] = Field(default_factory=list)
    k_singular: list[float] = Field(default_factory=list)
    k_zeros: list[list[tuple[float, float]]] = Field(default_factory=list)
    frozen_labels: bool = False


class ProjectionNormResiduals(BaseModel):
    """``None`` marks a level skipped because the spectrum is not generic there."""

    h: list[float | None]
    k: list[float | None]

    def max(self: Self) -> float:
        values = [value for value in (*self.h, *self.k) if value is not None]
        return max(values, default=0.0)


class RankReport(BaseModel):
    rank_h: int
    rank_k: int
    dom_rank_h: int
    dom_rank_k: int
    consistent: bool


class CrossingReport(BaseModel):
    """
    Attributes:
        sigma (float): The ``K`` value the ``H`` spectrum is compared with.
        times (list[float]): Refined crossing times.
        gap_trace (list[tuple[float, float]]): ``(t, min_j |rho_j(t) - sigma|)`` per sample.
        minima (list[tuple[float, float]]): Refined local minima ``(t*, gap*)`` of the gap.
        permanent (bool): Gap below tolerance at every sample.
    """

    sigma: float
    times: list[float]
    gap_trace: list[tuple[float, float]]
    minima: list[tuple[float, float]]
    permanent: bool


def _singular_values(eigenvalues: NDArray[np.float64], cluster_tol: float) -> list[float]:
    return [float(math.sqrt(value)) for value in eigenvalues if value > cluster_tol]


def _sorted_eigh(matrix: NDArray[np.complex128]) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    values, vectors = linalg.eigh(matrix)
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def _clusters(values: NDArray[np.float64], tol: float) -> list[list[int]]:
    """Chains of sorted eigenvalues closer than ``tol``; eigenvalues ``<= tol`` form the last group."""
    groups: list[list[int]] = []
    kernel = [i for i, value in enumerate(values) if value <= tol]
    positive = [i for i, value in enumerate(values) if value > tol]
    for i in positive:
        if groups and values[groups[-1][-1]] - values[i] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    means = [float(np.mean(values[group])) for group in groups]
    for upper, lower in zip(means, [*means[1:], 0.0], strict=True):
        if upper - lower < 10.0 * tol:
            raise AmbiguousClusterError(
                f"Eigenvalue clusters {upper:.12g} and {lower:.12g} are closer than 10x the tolerance {tol:.3g}."
            )
    if kernel:
        groups.append(kernel)
    return groups


def _build_levels(
    values: NDArray[np.float64],
    vectors: NDArray[np.complex128],
    u_vec: NDArray[np.complex128],
    tol: float,
    threshold: float,
    dominance: DominanceEnum,
) -> tuple[list[SpectralLevel], SpectralLevel | None]:
    """Positive clusters plus the kernel level when ``u`` projects on the kernel."""
    one_vec = np.zeros_like(u_vec)
    one_vec[0] = 1.0
    positive: list[SpectralLevel] = []
    kernel_level: SpectralLevel | None = None
    for group in _clusters(values, tol):
        basis = vectors[:, group]
        u_proj = basis @ (basis.conj().T @ u_vec)
        one_proj = basis @ (basis.conj().T @ one_vec)
        mean = float(np.mean(values[group]))
        is_dominant = float(np.linalg.norm(u_proj)) > threshold
        if mean <= tol:
            if is_dominant:
                kernel_level = SpectralLevel(
                    value=0.0,
                    multiplicity=len(group),
                    dominance=dominance,
                    u_proj=FourierState(coeffs=u_proj),
                    one_proj=FourierState(coeffs=one_proj),
                )
            continue
        positive.append(
            SpectralLevel(
                value=math.sqrt(mean),
                multiplicity=len(group),
                dominance=dominance if is_dominant else None,
                u_proj=FourierState(coeffs=u_proj),
                one_proj=FourierState(coeffs=one_proj),
            )
        )
    return positive, kernel_level


def decompose(
    u: FourierState,
    m: int | None = None,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    *,
    tail_tol: float = DEFAULT_TAIL_GUARD,
    with_blaschke: bool = True,
) -> SpectralDecomposition:
    """
    Hermitian eigen-decomposition of ``H_u^2`` and ``K_u^2`` grouped into levels.

    Arguments:
        u (FourierState): The state.
        m (int | None): [Optional] Matrix size, defaults to ``u.N``.
        cluster_tol (float): Clustering tolerance relative to the largest eigenvalue. A level is
            dominant when the projection of ``u`` exceeds ``sqrt(cluster_tol) * ||u||``.
        tail_tol (float): Tail threshold for the unresolved-state warning.
        with_blaschke (bool): Fit the inner function of every dominant level.

    Raises:
        AmbiguousClusterError: Two clusters are closer than ten times the tolerance.

    Warns:
        NearCrossingWarning: A dominant ``rho`` is within ``1e3`` tolerances of a ``sigma``.
        SpectralAmbiguityWarning: Interlacing fails, or a Blaschke fit was rejected.
    """
    h2 = hankel_square(u, m, tail_tol)
    k2 = k_square(u, m, tail_tol)
    size = h2.size
    h_values, h_vectors = _sorted_eigh(h2.entries)
    k_values, k_vectors = _sorted_eigh(k2.entries)
    scale = max(float(h_values[0]), float(k_values[0]), 0.0)
    u_vec = u.coeffs[:size].copy()
    if scale == 0.0:
        return SpectralDecomposition(
            h_levels=[],
            k_levels=[],
            h_clusters=[],
            k_clusters=[],
            h_eigenvalues=h_values,
            k_eigenvalues=k_values,
            cluster_tol=cluster_tol,
            m=size,
        )

    tol = cluster_tol * scale
    # relative to the norm of u, so u and c u get the same labels
    threshold = math.sqrt(cluster_tol) * float(np.linalg.norm(u_vec))
    h_clusters, _ = _build_levels(h_values, h_vectors, u_vec, tol, threshold, DominanceEnum.H_DOMINANT)
    k_clusters, k_kernel = _build_levels(k_values, k_vectors, u_vec, tol, threshold, DominanceEnum.K_DOMINANT)

    if with_blaschke:
        h_clusters = [_with_blaschke(u, level, size) for level in h_clusters]
        k_clusters = [_with_blaschke(u, level, size) for level in k_clusters]

    h_levels = [level for level in h_clusters if level.dominance is not None]
    k_levels = [level for level in k_clusters if level.dominance is not None]
    if k_kernel is not None:
        k_levels.append(k_kernel)

    decomposition = SpectralDecomposition(
        h_levels=h_levels,
        k_levels=k_levels,
        h_clusters=h_clusters,
        k_clusters=k_clusters,
        h_eigenvalues=h_values,
        k_eigenvalues=k_values,
        cluster_tol=tol,
        m=size,
    )
    _warn_near_crossing(decomposition, tol)
    if not decomposition.interlacing_ok():
        warnings.warn(
            SpectralAmbiguityWarning(
                f"Dominant values do not interlace: rho={decomposition.rho.round(12).tolist()}, "
                f"sigma={decomposition.sigma.round(12).tolist()}."
            ),
            stacklevel=2,
        )
    return decomposition


def _with_blaschke(u: FourierState, level: SpectralLevel, m: int) -> SpectralLevel:
    if level.dominance is None:
        return level
    try:
        psi = level_blaschke(u, level, m)
    except DegreeMismatchError as exc:
        warnings.warn(SpectralAmbiguityWarning(f"Blaschke fit rejected at {level.value:.12g}: {exc.message}"))
        return level
    return level.model_copy(update={"blaschke": psi})


def _warn_near_crossing(decomposition: SpectralDecomposition, tol: float) -> None:
    for rho in decomposition.rho:
        for sigma in decomposition.sigma:
            if sigma > 0 and abs(rho * rho - sigma * sigma) < NEAR_CROSSING_FACTOR * tol:
                warnings.warn(
                    NearCrossingWarning(f"rho={rho:.12g} straddles sigma={sigma:.12g} within tolerance."),
                    stacklevel=3,
                )


def level_blaschke(u: FourierState, level: SpectralLevel, m: int | None = None) -> BlaschkeProduct:
    """
    Inner function ``Psi`` of a dominant level.

    ``H`` levels satisfy ``rho u_rho = Psi H_u(u_rho)`` and ``K`` levels ``K_u(u'_s) = s Psi u'_s``.
    Writing ``Psi = f / g`` in each case, the numerator ``N = e^{-i psi} P`` and denominator ``D``
    (``D(0) = 1``, degree ``multiplicity - 1``) come from the linear least squares problem
    ``f D - g N = 0`` on circle samples; the zeros are the roots of ``N``.

    Raises:
        DegreeMismatchError: The fit does not reproduce the ratio, ``|e^{-i psi}| != 1``, or a
            zero lies outside the disc.
    """
    if level.dominance is None or level.value <= 0:
        raise DegreeMismatchError(f"No inner function for a non-dominant level at {level.value:.6g}.")
    size = m if m is not None else level.u_proj.N
    if level.dominance is DominanceEnum.H_DOMINANT:
        f_coeffs = level.value * level.u_proj.coeffs
        g_coeffs = hankel_matrix(u, size).apply(level.u_proj)
    else:
        f_coeffs = shifted_hankel_matrix(u, size).apply(level.u_proj)
        g_coeffs = level.value * level.u_proj.coeffs
    degree = level.multiplicity - 1
    plan = GridPlan.for_truncation(size + degree)
    z = plan.points
    f = to_grid(f_coeffs, plan)
    g = to_grid(g_coeffs, plan)
    powers = np.vander(z, degree + 1, increasing=True)
    system = np.hstack([f[:, None] * powers[:, 1:], -g[:, None] * powers])
    solution, *_ = linalg.lstsq(system, -f)
    numerator = solution[degree:]
    lead = numerator[-1]
    if abs(abs(lead) - 1.0) > 1e-6:
        raise DegreeMismatchError(f"Leading coefficient has modulus {abs(lead):.6g}, expected 1.")
    zeros = P.polyroots(numerator / lead) if degree else np.zeros(0, dtype=np.complex128)
    if zeros.size and np.max(np.abs(zeros)) >= 1.0:
        raise DegreeMismatchError(f"Fitted zero of modulus {np.max(np.abs(zeros)):.6g} outside the disc.")
    psi = BlaschkeProduct(angle=-float(np.angle(lead)), zeros=zeros)
    mismatch = float(np.max(np.abs(blaschke_eval(psi, z) * g - f)))
    scale = max(float(np.max(np.abs(f))), np.finfo(float).tiny)
    if mismatch > BLASCHKE_FIT_TOL * scale:
        raise DegreeMismatchError(
            f"Degree {degree} Blaschke product misses the ratio by {mismatch / scale:.3g} at {level.value:.6g}."
        )
    return psi


def _formula_levels(dec: SpectralDecomposition) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    rho2 = np.array([level.value**2 for level in dec.h_levels])
    sigma2 = np.array([level.value**2 for level in dec.k_levels])
    return rho2, sigma2


def _near_crossing(dec: SpectralDecomposition) -> bool:
    rho2, sigma2 = _formula_levels(dec)
    if not rho2.size or not sigma2.size:
        return False
    return bool(np.min(np.abs(rho2[:, None] - sigma2[None, :])) < 10.0 * dec.cluster_tol)


def verify_projection_norms(dec: SpectralDecomposition) -> ProjectionNormResiduals:
    """
    ``|measured - formula|`` for ``||u_j||^2`` and ``||u'_k||^2``.

    ``||u_j||^2 = prod_l (rho_j^2 - sigma_l^2) / prod_{l != j} (rho_j^2 - rho_l^2)`` and
    ``||u'_k||^2 = prod_l (rho_l^2 - sigma_k^2) / prod_{l != k} (sigma_l^2 - sigma_k^2)``. Levels
    are skipped (``None``) unless the spectrum is generic and away from crossings.
    """
    rho2, sigma2 = _formula_levels(dec)
    if not dec.is_generic() or _near_crossing(dec) or len(rho2) != len(sigma2):
        return ProjectionNormResiduals(h=[None] * len(rho2), k=[None] * len(sigma2))
    h_residuals: list[float | None] = []
    for j, level in enumerate(dec.h_levels):
        others = np.delete(rho2, j)
        formula = np.prod(rho2[j] - sigma2) / np.prod(rho2[j] - others)
        h_residuals.append(abs(level.u_norm_sq - float(formula)))
    k_residuals: list[float | None] = []
    for k, level in enumerate(dec.k_levels):
        others = np.delete(sigma2, k)
        formula = np.prod(rho2 - sigma2[k]) / np.prod(others - sigma2[k])
        k_residuals.append(abs(level.u_norm_sq - float(formula)))
    return ProjectionNormResiduals(h=h_residuals, k=k_residuals)


def verify_v_norm(dec: SpectralDecomposition) -> list[float]:
    """``| ||v_j||^2 - ||u_j||^2 / rho_j^2 |`` per dominant ``H`` level."""
    return [abs(level.one_norm_sq - level.u_norm_sq / level.value**2) for level in dec.h_levels]


def sum_rule_residuals(dec: SpectralDecomposition) -> list[float]:
    """``| sum_rho ||u_rho||^2 / (rho^2 - sigma_k^2) - 1 |`` for every dominant ``K`` level."""
    residuals = []
    for k_level in dec.k_levels:
        total = sum(h.u_norm_sq / (h.value**2 - k_level.value**2) for h in dec.h_levels)
        residuals.append(abs(total - 1.0))
    return residuals


def reconstruction_residuals(u: FourierState, dec: SpectralDecomposition) -> tuple[float, float]:
    """``||sum_j u_j - u||`` and ``||sum_k u'_k - u||``."""
    target = u.coeffs[: dec.m]
    h_sum = sum((level.u_proj.coeffs for level in dec.h_levels), np.zeros(dec.m, dtype=np.complex128))
    k_sum = sum((level.u_proj.coeffs for level in dec.k_levels), np.zeros(dec.m, dtype=np.complex128))
    return float(np.linalg.norm(h_sum - target)), float(np.linalg.norm(k_sum - target))


def eigenspace_coefficients(dec: SpectralDecomposition) -> tuple[list[float], list[float]]:
    """
    Residuals of the expansions of each projection in terms of the other family.

    ``u_rho = ||u_rho||^2 sum_s u'_s / (rho^2 - s^2)`` and
    ``u'_s = ||u'_s||^2 sum_rho u_rho / (rho^2 - s^2)``, both over dominant levels.
    """
    h_residuals = []
    for h in dec.h_levels:
        expansion = sum(k.u_proj.coeffs / (h.value**2 - k.value**2) for k in dec.k_levels)
        h_residuals.append(float(np.linalg.norm(h.u_norm_sq * expansion - h.u_proj.coeffs)))
    k_residuals = []
    for k in dec.k_levels:
        expansion = sum(h.u_proj.coeffs / (h.value**2 - k.value**2) for h in dec.h_levels)
        k_residuals.append(float(np.linalg.norm(k.u_norm_sq * expansion - k.u_proj.coeffs)))
    return h_residuals, k_residuals


def _numerical_rank(matrix: NDArray[np.complex128], tol: float) -> int:
    singular = linalg.svdvals(matrix)
    if not singular.size or singular[0] == 0.0:
        return 0
    relative = singular / singular[0]
    straddling = relative[(relative > tol / 10.0) & (relative < tol * 10.0)]
    if straddling.size:
        raise ThresholdAmbiguityError(
            f"Singular values {straddling.tolist()} (relative) straddle the rank threshold {tol:.3g}."
        )
    return int(np.count_nonzero(relative > tol))


def ranks(
    u: FourierState,
    tol: float = 1e-8,
    m: int | None = None,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> RankReport:
    """
    Numerical ranks of ``H_u`` and ``K_u`` (relative threshold ``tol``) next to the dominant ranks.

    The report is consistent when ``rk K = sum_j (l_j - 1) + sum_k m_k`` and
    ``rk H = sum_j l_j + sum_k (m_k - 1)``.
    """
    rank_h = _numerical_rank(hankel_matrix(u, m).entries, tol)
    rank_k = _numerical_rank(shifted_hankel_matrix(u, m).entries, tol)
    dec = decompose(u, m, cluster_tol, with_blaschke=False)
    positive_k = [level for level in dec.k_levels if level.value > 0]
    formula_k = sum(level.multiplicity - 1 for level in dec.h_levels) + sum(level.multiplicity for level in positive_k)
    formula_h = sum(level.multiplicity for level in dec.h_levels) + sum(
        level.multiplicity - 1 for level in positive_k
    )
    consistent = formula_k == rank_k and formula_h == rank_h
    if not consistent:
        logger.warning(
            "Rank formulas disagree: rk H=%d vs %d, rk K=%d vs %d.",
            rank_h,
            formula_h,
            rank_k,
            formula_k,
        )
    return RankReport(
        rank_h=rank_h,
        rank_k=rank_k,
        dom_rank_h=dec.dom_rank_h,
        dom_rank_k=dec.dom_rank_k,
        consistent=consistent,
    )


def summarize_spectrum(
    u: FourierState,
    m: int | None = None,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    *,
    tail_tol: float = DEFAULT_TAIL_GUARD,
    previous: SpectrumSummary | None = None,
) -> tuple[SpectrumSummary, SpectralDecomposition | None]:
    """
    Spectral summary of one trajectory sample.

    When the clusters are ambiguous the raw singular values are still reported and the level
    labels are frozen from ``previous``.
    """
    try:
        dec = decompose(u, m, cluster_tol, tail_tol=tail_tol)
    except AmbiguousClusterError as exc:
        warnings.warn(SpectralAmbiguityWarning(f"Labels frozen from the previous sample: {exc.message}"))
        h_values, _ = _sorted_eigh(hankel_square(u, m, tail_tol).entries)
        k_values, _ = _sorted_eigh(k_square(u, m, tail_tol).entries)
        floor = cluster_tol * max(float(h_values[0]), 0.0)
        base = previous if previous is not None else SpectrumSummary()
        return (
            base.model_copy(
                update={
                    "h_singular": _singular_values(h_values, floor),
                    "k_singular": _singular_values(k_values, floor),
                    "frozen_labels": True,
                }
            ),
            None,
        )
    return dec.summary(), dec


def _line_intersection(
    left: tuple[tuple[float, float], tuple[float, float]],
    right: tuple[tuple[float, float], tuple[float, float]],
) -> tuple[float, float] | None:
    (t0, g0), (t1, g1) = left
    (t2, g2), (t3, g3) = right
    slope_left = (g1 - g0) / (t1 - t0)
    slope_right = (g3 - g2) / (t3 - t2)
    if slope_left < slope_right:
        t = (g2 - g1 + slope_left * t1 - slope_right * t2) / (slope_left - slope_right)
        if t1 <= t <= t2:
            return t, g1 + slope_left * (t - t1)
    return None


def detect_crossings(
    times: ArrayLike,
    h_values: Sequence[ArrayLike],
    sigma: float,
    gap_tol: float = 1e-2,
) -> CrossingReport:
    """
    Times at which an ``H`` singular value meets ``sigma``.

    The gap ``g(t) = min_j |rho_j(t) - sigma|`` is V shaped around a crossing. Each interior local
    minimum is refined by intersecting the lines through the two samples on either side; the
    minimum is a crossing when the intersection lies below ``gap_tol``. A vanishing gap at an end
    sample counts directly.

    Arguments:
        times (ArrayLike): Strictly increasing sample times.
        h_values (Sequence[ArrayLike]): Positive ``H`` singular values per sample.
        sigma (float): The ``K`` value.
        gap_tol (float): Crossing threshold on the refined gap.

    Warns:
        UndersampledTraceWarning: The gap changes by more than 10x between two samples while both
            are above ``gap_tol``.
    """
    t = np.asarray(times, dtype=np.float64)
    gaps = np.array([_gap(values, sigma) for values in h_values])
    trace = [(float(ti), float(gi)) for ti, gi in zip(t, gaps, strict=True)]
    for i in range(len(gaps) - 1):
        low, high = sorted((gaps[i], gaps[i + 1]))
        if low > gap_tol and high > 10.0 * low:
            warnings.warn(
                UndersampledTraceWarning(f"Gap jumps from {gaps[i]:.3g} to {gaps[i + 1]:.3g}.", t=float(t[i + 1])),
                stacklevel=2,
            )

    crossings: list[float] = []
    minima: list[tuple[float, float]] = []
    n = len(gaps)
    for i in range(n):
        left_ok = i == 0 or gaps[i] <= gaps[i - 1]
        right_ok = i == n - 1 or gaps[i] <= gaps[i + 1]
        if not (left_ok and right_ok):
            continue
        refined: tuple[float, float] | None = None
        if 2 <= i <= n - 3:
            refined = _line_intersection(
                ((t[i - 2], gaps[i - 2]), (t[i - 1], gaps[i - 1])),
                ((t[i + 1], gaps[i + 1]), (t[i + 2], gaps[i + 2])),
            )
        if refined is None:
            refined = (float(t[i]), float(gaps[i]))
        minima.append((float(refined[0]), float(refined[1])))
        if refined[1] < gap_tol or gaps[i] < gap_tol:
            crossings.append(float(refined[0]))

    return CrossingReport(
        sigma=sigma,
        times=crossings,
        gap_trace=trace,
        minima=minima,
        permanent=bool(n and np.all(gaps < gap_tol)),
    )


def _gap(values: ArrayLike, sigma: float) -> float:
    array = np.asarray(values, dtype=np.float64)
    return float(np.min(np.abs(array - sigma))) if array.size else math.inf
