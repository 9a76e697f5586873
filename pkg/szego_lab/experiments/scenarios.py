"""
The registered scenarios. Each runner integrates its data, writes the report tables and records
its acceptance checks on the context.
"""

__all__ = [
    "SCENARIOS",
    "get_scenario",
    "run_blaschke_lower_bound",
    "run_bounded",
    "run_conservation_audit",
    "run_crossing_l1",
    "run_growth",
    "run_involution_audit",
    "run_lifted_growth",
    "run_rank_drop_necessary",
]

import logging
import math

import numpy as np
from numpy.typing import NDArray

from szego_lab.config import SimulationConfig
from szego_lab.constants import ScenarioNameEnum
from szego_lab.experiments.audits import rank_drop_audit
from szego_lab.experiments.base import RegimeEnum, Scenario, ScenarioContext, relative_drift
from szego_lab.experiments.data import (
    L1_TOL,
    builtin_crossing_datum,
    builtin_growth_datum,
    builtin_lifted_datum,
)
from szego_lab.experiments.growth import (
    GrowthFit,
    blaschke_lower_bound_check,
    default_windows,
    fit_growth,
    fit_pole_approach,
    slope_ratio,
)
from szego_lab.hardy import (
    BlaschkeProduct,
    FourierState,
    GridPlan,
    compose_with_blaschke,
    random_rational_state,
    rational_to_fourier,
    sobolev_norm,
)
from szego_lab.integrator import TrajectoryRecord, integrate
from szego_lab.invariants import (
    FunctionalId,
    FunctionalKindEnum,
    ell_k,
    generating_values,
    hierarchy_L,
    hierarchy_independence,
    j_product_formula,
    l1_closed_form,
    poisson_bracket,
    rank_one_growth_criterion,
)
from szego_lab.operators import rank_one_residual
from szego_lab.reports import INVARIANT_COLUMNS, GrowthWindow, InvariantAudit, SpectralTrace
from szego_lab.residuals import (
    blaschke_orbit_trace,
    blaschke_phase_trace,
    hu_evolution_residual,
    lax_residual_K,
    pk_system_residual,
    projection_evolution_residual,
)
from szego_lab.special import CrossingOracleParams, crossing_oracle_I, crossing_times, oracle_ode_residual
from szego_lab.spectral import (
    decompose,
    detect_crossings,
    ranks,
    reconstruction_residuals,
    sum_rule_residuals,
    verify_projection_norms,
)

logger = logging.getLogger(__name__)

HIERARCHY_N_MAX = 4
DRIFT_TOL = 1e-8
GROWTH_SOBOLEV = (0.5, 1.0, 2.0)
CROSSING_P = 0.5


def _one_plus_z(N: int) -> FourierState:
    return FourierState.from_coeffs([1.0, 1.0], N)


def _level_series(traj: TrajectoryRecord, family: str) -> list[NDArray[np.float64]]:
    """Dominant ``rho_j`` (``family="h"``) or ``sigma_k`` (``"k"``) per sample, ``nan`` where missing."""
    rows = [
        (sample.spectrum.h_dominant if family == "h" else sample.spectrum.k_dominant) if sample.spectrum else []
        for sample in traj.samples
    ]
    width = max((len(row) for row in rows), default=0)
    return [np.array([row[j] if j < len(row) else math.nan for row in rows]) for j in range(width)]


def _source(subdir: str | None, file_name: str, column: str, reducer: str) -> str:
    location = f"{subdir}/{file_name}" if subdir else file_name
    return f"{location}:{column}:{reducer}"


def _drift_checks(ctx: ScenarioContext, traj: TrajectoryRecord, subdir: str | None = None) -> None:
    prefix = f"{subdir}." if subdir else ""
    audit_file = InvariantAudit.file_name()
    hierarchy = {f"L_{n}": f"L_{n}" for n in range(HIERARCHY_N_MAX + 1)}
    for name, column in {**INVARIANT_COLUMNS, **hierarchy}.items():
        ctx.check(
            f"{prefix}{column}_drift",
            relative_drift(traj.series(name)),
            DRIFT_TOL,
            source=_source(subdir, audit_file, column, "drift"),
        )
    for k, series in enumerate(_level_series(traj, "k")):
        column = f"sigma_{k + 1}"
        ctx.check(
            f"{prefix}{column}_drift",
            relative_drift(series),
            DRIFT_TOL,
            source=_source(subdir, SpectralTrace.file_name(), column, "drift"),
        )


def _closed_form_error(config: SimulationConfig, u0: FourierState, frequency: float) -> float:
    """Largest ``L^2`` distance to ``u0 e^{-i frequency t}`` over the samples."""
    traj = integrate(config, u0, with_spectrum=False)
    start = u0.resized(config.N).coeffs
    return max(
        float(np.linalg.norm(sample.state.coeffs - start * np.exp(-1j * frequency * sample.t)))
        for sample in traj.samples
    )


def run_conservation_audit(ctx: ScenarioContext) -> None:
    """
    ``1 + z`` for ``alpha`` and ``-alpha``: drifts of the conserved quantities and the ``K``
    spectrum, motion of the ``H`` spectrum, exact phase orbits, and the operator identities by
    finite differences.
    """
    base = ctx.config
    u0 = ctx.initial_data(lambda: _one_plus_z(base.N))
    magnitude = abs(base.alpha) if base.alpha != 0 else 1.0
    for alpha in (magnitude, -magnitude):
        label = f"alpha_{alpha:+g}"
        config = base.with_overrides(alpha=alpha)
        traj = integrate(config, u0, n_max=HIERARCHY_N_MAX)
        ctx.write_trajectory(traj, label)
        ctx.flag(f"{label}.integrated", traj.completed)
        _drift_checks(ctx, traj, label)
        if alpha > 0:
            rho = _level_series(traj, "h")
            ctx.check(
                f"{label}.rho_1_motion",
                float(np.nanmax(rho[0]) - np.nanmin(rho[0])) if rho else 0.0,
                1e-3,
                "gt",
                source=_source(label, SpectralTrace.file_name(), "rho_1", "ptp"),
            )

        short = config.with_overrides(t_max=10.0)
        c = 0.8 + 0.3j
        ctx.check(
            f"{label}.constant_orbit",
            _closed_form_error(short, FourierState.from_coeffs([c], config.N), abs(c) ** 2 + alpha),
            1e-9,
        )
        ctx.check(f"{label}.monomial_orbit", _closed_form_error(short, FourierState.monomial(1, config.N), 1.0), 1e-9)

        ctx.check(f"{label}.lax_residual", lax_residual_K(traj, 1.0), 1e-6)
        coarse, fine = lax_residual_K(traj, 1.0, dt=1e-3), lax_residual_K(traj, 1.0, dt=5e-4)
        ctx.check(f"{label}.lax_halving_ratio", abs(coarse / fine / 4.0 - 1.0), 0.2)
        ctx.check(f"{label}.hu_residual", hu_evolution_residual(traj, 1.0), 1e-6)
        without_source = hu_evolution_residual(traj, 1.0, include_source=False)
        ctx.check(f"{label}.hu_residual_without_source", without_source, 1e-2, "gt")
        projection_residual = projection_evolution_residual(traj, 1.0, 0.5)
        if projection_residual is not None:
            ctx.check(f"{label}.projection_residual", projection_residual, 1e-5)
        ctx.record(f"{label}.pk_system_residual", pk_system_residual(traj, 1.0, 0.5))


def _random_states(
    rng: np.random.Generator,
    count: int,
    N: int,
    ranks_range: tuple[int, int],
    pole_modulus: tuple[float, float] = (2.0, 4.0),
) -> list[FourierState]:
    states = []
    for _ in range(count):
        rank = int(rng.integers(ranks_range[0], ranks_range[1] + 1))
        states.append(rational_to_fourier(random_rational_state(rng, rank, pole_modulus=pole_modulus), N))
    return states


def _resolvent_points(rng: np.random.Generator, u: FourierState, count: int) -> NDArray[np.float64]:
    """Points ``x`` with ``|x| < 1 / (2 rho_1^2)``, away from every resonance."""
    top = float(np.max(decompose(u, with_blaschke=False).rho, initial=1.0)) ** 2
    return rng.uniform(-0.5, 0.5, size=count) / max(top, 1.0)


def run_involution_audit(ctx: ScenarioContext) -> None:
    """Operator identity, involution, generating function relations and spectral structure on random data."""
    rng = ctx.rng
    alpha = ctx.config.alpha

    identity = max(rank_one_residual(u) for u in _random_states(rng, 100, 64, (1, 4)))
    ctx.check("rank_one_identity", identity, 1e-12)

    plan = GridPlan.for_truncation(32)
    brackets = []
    bracket_states = _random_states(rng, 5, 32, (2, 2), pole_modulus=(3.0, 5.0))
    for u in bracket_states:
        xs = _resolvent_points(rng, u, 20).reshape(10, 2)
        for x, y in xs:
            estimate = poisson_bracket(
                FunctionalId(kind=FunctionalKindEnum.L_X, x=float(x)),
                FunctionalId(kind=FunctionalKindEnum.L_X, x=float(y)),
                u,
                alpha,
                plan,
            )
            brackets.append(estimate.normalized)
    ctx.record("poisson_brackets", brackets)
    ctx.check("involution", max(brackets), 1e-6)

    independence = hierarchy_independence(bracket_states[0], alpha, 2)
    ctx.record("independence_singular_values", independence.singular_values)
    ctx.check("hierarchy_independence_rank", independence.rank, 3, "ge")

    relation, product, projection, sum_rule, reconstruction, l1_gap = [], [], [], [], [], []
    interlacing = True
    grid = GridPlan.for_truncation(64)
    for u in _random_states(rng, 20, 64, (1, 3)):
        dec = decompose(u, with_blaschke=False)
        interlacing = interlacing and dec.interlacing_ok()
        for x in _resolvent_points(rng, u, 10):
            values = generating_values(u, alpha, float(x))
            relation.append(max(values.relation_residuals))
            product.append(abs(values.J - j_product_formula(dec, float(x))) / max(1.0, abs(values.J)))
        projection.append(verify_projection_norms(dec).max())
        sum_rule.append(max(sum_rule_residuals(dec), default=0.0))
        reconstruction.append(max(reconstruction_residuals(u, dec)))
        l1 = hierarchy_L(u, alpha, 1)[1]
        l1_gap.append(abs(l1_closed_form(u, alpha, grid) - l1) / max(1.0, abs(l1)))
    ctx.check("generating_relations", max(relation), 1e-10)
    ctx.check("j_product_formula", max(product), 1e-10)
    ctx.flag("interlacing", interlacing)
    ctx.check("projection_norms", max(projection), 1e-8)
    ctx.check("sum_rule", max(sum_rule), 1e-8)
    ctx.check("reconstruction", max(reconstruction), 1e-10)
    ctx.check("l1_closed_form", max(l1_gap), 1e-10)

    growth_alpha = abs(alpha) if alpha != 0 else 1.0
    datum = builtin_growth_datum(growth_alpha, 1.0, 64)
    ctx.check("growth_criterion", abs(rank_one_growth_criterion(datum, growth_alpha, grid)), 1e-10)
    agree = True
    for u in _random_states(rng, 5, 64, (1, 1)):
        vanishes = abs(hierarchy_L(u, growth_alpha, 1)[1]) < L1_TOL
        agree = agree and vanishes == (abs(rank_one_growth_criterion(u, growth_alpha, grid)) < L1_TOL)
    ctx.flag("growth_criterion_matches_l1", agree)


def _top_two(values: list[float]) -> list[float]:
    return sorted(values, reverse=True)[:2]


def run_crossing_l1(ctx: ScenarioContext) -> None:
    """``(z - p) / (1 - conj(p) z)`` against the elliptic-function trajectory of ``(rho_1^2 - rho_2^2) / 2``."""
    config = ctx.config
    u0 = ctx.initial_data(lambda: builtin_crossing_datum(CROSSING_P, config.N, config.tail_guard))
    params = CrossingOracleParams.from_p(CROSSING_P)
    traj = integrate(config, u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(traj)
    ctx.flag("integrated", traj.completed)

    start = traj.samples[0].invariants
    ctx.check("energy", abs(start.energy - params.energy), 1e-10)
    ctx.check("L_1", abs(start.hierarchy[1] + (1.0 - abs(CROSSING_P) ** 2)), 1e-10)

    times = traj.times
    tops = [_top_two(sample.spectrum.h_singular) if sample.spectrum else [] for sample in traj.samples]
    simulated = np.array([0.5 * (top[0] ** 2 - top[1] ** 2) if len(top) == 2 else math.nan for top in tops])
    oracle = crossing_oracle_I(times, params)
    error = float(np.nanmax(np.abs(np.abs(simulated) - np.abs(oracle))))
    ctx.check("oracle_sup_error", error, 1e-6)
    ctx.record("oracle_ode_residual", float(np.max(np.abs(oracle_ode_residual(times, params)))))

    report = detect_crossings(times, tops, sigma=1.0)
    expected = crossing_times(params, float(times[-1]))
    ctx.record("crossing_times", report.times)
    ctx.record("oracle_crossing_times", expected)
    mismatch = max(
        (min((abs(t - found) for found in report.times), default=math.inf) for t in expected), default=math.inf
    )
    ctx.check("crossing_times", mismatch, 2e-2)


def _fit_all(
    ctx: ScenarioContext,
    traj: TrajectoryRecord,
    subdir: str | None = None,
) -> dict[float, list[GrowthFit]]:
    fits = {s: fit_growth(traj, s) for s in GROWTH_SOBOLEV}
    table = GrowthWindow()
    for s, per_window in fits.items():
        for fit in per_window:
            table.append(
                {
                    "s": s,
                    "t_lo": fit.window[0],
                    "t_hi": fit.window[1],
                    "slope": fit.slope,
                    "intercept": fit.intercept,
                    "r_squared": fit.r_squared,
                    "c_alpha": fit.c_alpha,
                    "samples": fit.samples,
                }
            )
    table.write(ctx.directory(subdir))
    return fits


def run_growth(ctx: ScenarioContext) -> None:
    """``sqrt(alpha) + z``: exponential growth of ``H^s`` norms with exponents proportional to ``2s - 1``."""
    config = ctx.config
    u0 = ctx.initial_data(lambda: builtin_growth_datum(config.alpha, 1.0, config.N))
    ctx.check("L_1", abs(hierarchy_L(u0, config.alpha, 1)[1]), L1_TOL)
    traj = integrate(config, u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(traj)
    ctx.record("resolved_until", traj.resolved_until)

    fits = _fit_all(ctx, traj)
    whole = {s: per_window[0] for s, per_window in fits.items()}
    ctx.check("H1_slope", whole[1.0].slope, 0.0, "gt")
    ctx.check("H1_r_squared", whole[1.0].r_squared, 0.99, "gt")
    ctx.check("slope_ratio_H2_H1", abs(slope_ratio(whole[2.0], whole[1.0]) / 3.0 - 1.0), 0.15)
    ctx.check("H_half_slope", abs(whole[0.5].slope), 0.01)
    early, late = fits[1.0][1], fits[1.0][2]
    ctx.check("H1_window_consistency", abs(slope_ratio(late, early) - 1.0), 0.15)
    if whole[1.0].c_alpha is not None:
        ctx.record("c_alpha", whole[1.0].c_alpha)

    pole = fit_pole_approach(traj)
    ctx.record("pole_approach_slope", pole.slope)
    ctx.record("pole_approach_c_alpha", -0.5 * pole.slope)

    audit = rank_drop_audit(traj, config.alpha)
    ctx.record("min_abs_ell", audit.min_abs_ell)
    ctx.flag("escape_condition_met", audit.escape_condition_met, f"min |l_k| = {audit.min_abs_ell:.3g}")


def run_lifted_growth(ctx: ScenarioContext) -> None:
    """``u0(z^2)`` grows with the same rate as ``u0``, and its trajectory is the substituted one."""
    config = ctx.config
    chi = BlaschkeProduct(zeros=[0.0])
    base_u0 = builtin_growth_datum(config.alpha, 1.0, config.N)
    base = integrate(config, base_u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(base, "base")

    lifted_config = config.with_overrides(N=2 * config.N, M=2 * config.M)
    plan = lifted_config.grid_plan()
    lifted_u0 = builtin_lifted_datum(config.alpha, 1.0, chi, lifted_config.N, plan)
    ctx.check("L_1", abs(hierarchy_L(lifted_u0, config.alpha, 1)[1]), L1_TOL)
    rank_k = ranks(lifted_u0).rank_k
    ctx.flag("rank_K", rank_k == chi.degree + 1, f"rk K = {rank_k}")
    lifted = integrate(lifted_config, lifted_u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(lifted)

    window = [(default_windows(base)[0][0], min(base.resolved_until, lifted.resolved_until))]
    base_fit = fit_growth(base, 1.0, window)[0]
    lifted_fit = fit_growth(lifted, 1.0, window)[0]
    ctx.record("c_alpha_base", base_fit.slope)
    ctx.record("c_alpha_lifted", lifted_fit.slope)
    ctx.check("c_alpha_agreement", abs(slope_ratio(lifted_fit, base_fit) - 1.0), 0.05)

    distance = 0.0
    for sample in lifted.samples:
        if sample.t > 5.0 + 1e-9:
            break
        reference = base.sample_at(sample.t)
        if reference is None:
            continue
        composed = compose_with_blaschke(reference.state, chi, plan)
        distance = max(distance, float(np.linalg.norm(sample.state.coeffs - composed.coeffs)))
    ctx.check("substitution_agreement", distance, 1e-6)


def run_bounded(ctx: ScenarioContext) -> None:
    """``1 + z`` with ``alpha < 0`` stays in a compact set."""
    config = ctx.config
    u0 = ctx.initial_data(lambda: _one_plus_z(config.N))
    traj = integrate(config, u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(traj)
    ctx.flag("integrated", traj.completed)

    times = traj.times
    norms = np.array([sobolev_norm(sample.state, 1.0) for sample in traj.samples])
    middle = 0.5 * (times[0] + times[-1])
    early = float(np.max(norms[times <= middle]))
    late = float(np.max(norms[times >= middle]))
    ctx.record("sup_H1", [early, late])
    ctx.check("sup_H1_growth", late / early - 1.0, 0.05)

    fit = fit_growth(traj, 1.0, [(2.0, traj.resolved_until)])[0]
    ctx.check("H1_slope", abs(fit.slope), 0.01)

    audit = rank_drop_audit(traj, config.alpha)
    ctx.flag("sigma_floor", audit.sigma_floor_ok)
    ctx.check("min_ell", min((ell for _, ell in audit.ell), default=0.0), 0.0, "gt")


def run_blaschke_lower_bound(ctx: ScenarioContext) -> None:
    """Norms of ``1 / (1 - p Psi)`` as ``|p| -> 1`` and constancy of the inner function zeros."""
    inner = {
        "z": BlaschkeProduct(zeros=[0.0]),
        "degree_2": BlaschkeProduct(zeros=[0.3, -0.4]),
    }
    for label, psi in inner.items():
        for s in (0.0, 0.25, 0.5):
            report = blaschke_lower_bound_check(psi, s)
            name = f"{label}.s_{s:g}"
            ctx.record(f"{name}.norms", report.norms)
            ctx.check(f"{name}.slope", report.slope, report.bound, "le")
            if report.closed_form_residual is not None:
                ctx.check(f"{name}.closed_form", report.closed_form_residual, 1e-9)

    config = ctx.config
    chi = BlaschkeProduct(zeros=[0.3])
    u0 = builtin_lifted_datum(config.alpha, 1.0, chi, config.N, config.grid_plan())
    traj = integrate(config, u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(traj)
    ctx.flag("integrated", traj.completed)
    orbit = blaschke_orbit_trace(traj, 1.0)
    ctx.check("orbit_degree", orbit.degree, 1, "ge")
    ctx.check("zero_drift", orbit.max_drift, 1e-6)
    phase = blaschke_phase_trace(traj, 1.0)
    if phase.times.size:
        ctx.record("phase_mismatch", float(np.max(np.abs(phase.mismatch))))


def run_rank_drop_necessary(ctx: ScenarioContext) -> None:
    """Per-level quantities of the initial data next to the observed compactness of the trajectory."""
    config = ctx.config
    u0 = ctx.initial_data(lambda: _one_plus_z(config.N))
    traj = integrate(config, u0, n_max=HIERARCHY_N_MAX)
    ctx.write_trajectory(traj, "bounded")
    audit = rank_drop_audit(traj, config.alpha)
    ctx.record("bounded.max_pole_radius", audit.max_pole_radius)
    ctx.check("bounded.min_ell", min((ell for _, ell in audit.ell), default=0.0), 0.0, "gt")
    ctx.flag("bounded.compact", audit.compact)

    growth_alpha = abs(config.alpha) if config.alpha != 0 else 1.0
    growth = builtin_growth_datum(growth_alpha, 1.0, config.N)
    levels = [ell for sigma, ell in ell_k(decompose(growth, with_blaschke=False), growth_alpha) if sigma > 0]
    ctx.check("growth.min_abs_ell", min((abs(ell) for ell in levels), default=math.inf), 1e-10)

    crossing_config = config.with_overrides(alpha=1.0, t_max=50.0)
    crossing = integrate(
        crossing_config, builtin_crossing_datum(CROSSING_P, config.N, config.tail_guard), n_max=HIERARCHY_N_MAX
    )
    ctx.write_trajectory(crossing, "crossing")
    crossing_audit = rank_drop_audit(crossing, 1.0)
    ell = min((ell for _, ell in crossing_audit.ell), default=math.nan)
    ctx.check("crossing.ell", abs(ell + (1.0 - abs(CROSSING_P) ** 2)), 1e-8)
    ctx.check("crossing.max_pole_radius", crossing_audit.max_pole_radius, crossing_audit.threshold)


SCENARIOS: dict[ScenarioNameEnum, Scenario] = {
    scenario.name: scenario
    for scenario in (
        Scenario(
            name=ScenarioNameEnum.CONSERVATION_AUDIT,
            runner=run_conservation_audit,
            overrides={"t_max": 50.0},
            description="Conserved quantities, exact orbits and Lax residuals for 1 + z.",
        ),
        Scenario(
            name=ScenarioNameEnum.INVOLUTION_AUDIT,
            runner=run_involution_audit,
            description="Operator identities, involution and spectral formulas on random rational data.",
        ),
        Scenario(
            name=ScenarioNameEnum.CROSSING_L1,
            runner=run_crossing_l1,
            overrides={"alpha": 1.0, "t_max": 10.0},
            description="Singular value crossings of a Blaschke factor against the elliptic oracle.",
        ),
        Scenario(
            name=ScenarioNameEnum.GROWTH,
            runner=run_growth,
            regime=RegimeEnum.GROWTH,
            overrides={"alpha": 1.0},
            ignored_events=("INTEGRATOR.TAIL",),
            description="Exponential Sobolev growth of sqrt(alpha) + z.",
        ),
        Scenario(
            name=ScenarioNameEnum.BOUNDED,
            runner=run_bounded,
            overrides={"alpha": -1.0, "t_max": 100.0},
            description="Bounded trajectory of 1 + z for negative alpha.",
        ),
        Scenario(
            name=ScenarioNameEnum.LIFTED_GROWTH,
            runner=run_lifted_growth,
            regime=RegimeEnum.GROWTH,
            overrides={"alpha": 1.0},
            ignored_events=("INTEGRATOR.TAIL",),
            description="Growth of 1 + z^2 and its agreement with the substituted base trajectory.",
        ),
        Scenario(
            name=ScenarioNameEnum.BLASCHKE_LOWER_BOUND,
            runner=run_blaschke_lower_bound,
            overrides={"alpha": 1.0, "t_max": 5.0, "N": 128, "M": 512, "tail_guard": 1e-6},
            description="Norm bound of 1 / (1 - p Psi) and constancy of inner function zeros.",
        ),
        Scenario(
            name=ScenarioNameEnum.RANK_DROP_NECESSARY,
            runner=run_rank_drop_necessary,
            overrides={"alpha": -1.0, "t_max": 100.0},
            description="Per-level conserved quantities against observed compactness.",
        ),
    )
}


def get_scenario(name: str) -> Scenario:
    """
    Raises:
        KeyError: ``name`` is not a registered scenario.
    """
    try:
        return SCENARIOS[ScenarioNameEnum(name)]
    except ValueError:
        raise KeyError(f"Unknown scenario '{name}'; choose from {', '.join(SCENARIOS)}.") from None
