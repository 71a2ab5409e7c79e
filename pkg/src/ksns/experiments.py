"""Experiment drivers: single runs, ensembles, refinement studies, twins.

Wires configuration sections into model objects, runs the integrator and
post-processes the scalar streams into envelope fits, convergence rates
and uniqueness reports.  All drivers are deterministic given the seeds in
the configuration.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .diagnostics import (
    gronwall_factor,
    uniqueness_functional,
    write_diagnostics_csv,
)
from .dynamics import MOD1, MOD2, State, assemble_tendency
from .integrator import BLOW_UP, COMPLETED, StepConfig, Trajectory, run
from .model import (
    DiagnosticSettings,
    GaussianBlob,
    InitialData,
    ModelParams,
    SensitivityModel,
    build_initial_state,
    check_b2,
    make_params,
    validate_assumptions,
)
from .noise import NoiseSpec, sample_path, sample_refinement_hierarchy
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    dealias,
    dealias_vector,
    mollify,
    mollify_vector,
    norm,
    scalar_from_spectral,
    scalar_from_values,
    truncate_jk,
    truncate_jk_vector,
)


class PreconditionError(ValueError):
    """An experiment hypothesis is violated by the configuration."""


# ---------------------------------------------------------------------------
# config wiring


def build_grid(cfg: ExperimentConfig) -> Grid:
    return Grid(n_points=cfg.grid.n_points, box_length=cfg.grid.box_length)


def build_sensitivity(cfg: ExperimentConfig, c0_max: float) -> SensitivityModel:
    mc = cfg.model
    if mc.sensitivity == "prototype_linear":
        return SensitivityModel(kind="prototype_linear", chi0=mc.chi0, c_max=c0_max)
    if mc.sensitivity == "tabulated":
        if not mc.table_path:
            raise PreconditionError("tabulated sensitivity requires model.table_path")
        rows = np.loadtxt(mc.table_path, delimiter=",", skiprows=1)
        return SensitivityModel(
            kind="tabulated",
            c_max=c0_max,
            c_nodes=rows[:, 0],
            chi_nodes=rows[:, 1],
            kappa_nodes=rows[:, 2],
        )
    raise PreconditionError(f"unknown sensitivity kind {mc.sensitivity!r}")


def build_initial_data(cfg: ExperimentConfig, seed: int | None = None) -> InitialData:
    ic = cfg.initial
    blobs = tuple(
        GaussianBlob(center=(b[0], b[1]), amplitude=b[2], width=b[3]) for b in ic.blobs
    )
    return InitialData(
        blobs=blobs,
        n0_floor=ic.n0_floor,
        c0_max=ic.c0_max,
        c0_width=ic.c0_width,
        c0_floor_frac=ic.c0_floor_frac,
        u0_energy=ic.u0_energy,
        u0_band=(ic.u0_band_lo, ic.u0_band_hi),
        u0_alpha=ic.u0_alpha,
        seed=ic.seed if seed is None else seed,
    )


def build_noise_spec(cfg: ExperimentConfig) -> NoiseSpec:
    nc = cfg.noise
    return NoiseSpec(
        kind=nc.kind,
        strength=nc.strength,
        sigmas=tuple(nc.sigmas),
        n_modes=nc.n_modes,
        seed=nc.seed,
    )


def prepare_initial_state(state: State, params: ModelParams, level: str) -> State:
    """Regularize initial data to match the assembly level.

    mod1 mollifies every component; mod2 additionally band-passes them
    onto the annulus, which removes the mean (mod2 therefore does not
    conserve mass; the production path is mod1/full).
    """
    if level not in (MOD1, MOD2):
        return state
    n = mollify(state.n, params.epsilon)
    c = mollify(state.c, params.epsilon)
    u = mollify_vector(state.u, params.epsilon)
    if level == MOD2:
        n = truncate_jk(n, params.trunc_k)
        c = truncate_jk(c, params.trunc_k)
        u = truncate_jk_vector(u, params.trunc_k)
    return State(n=n.to_real(), c=c.to_real(), u=u.to_real(), time=state.time)


@dataclass
class Problem:
    grid: Grid
    params: ModelParams
    initial: State
    noise_spec: NoiseSpec
    step_cfg: StepConfig


def build_problem(cfg: ExperimentConfig, *, noise_seed: int | None = None,
                  initial_seed: int | None = None) -> Problem:
    grid = build_grid(cfg)
    data = build_initial_data(cfg, seed=initial_seed)
    raw_state = build_initial_state(data, grid)
    c0_linf = norm(raw_state.c, "Linf")
    n0_l1 = norm(raw_state.n, "L1")
    sens = build_sensitivity(cfg, c0_max=c0_linf)
    params = make_params(
        grid,
        d1=cfg.model.d1, d2=cfg.model.d2, d3=cfg.model.d3,
        sensitivity=sens,
        phi_amplitude=cfg.model.phi_amplitude,
        epsilon=cfg.model.epsilon,
        cutoff_R=cfg.model.cutoff_R,
        trunc_k=cfg.model.trunc_k,
        diagnostics=DiagnosticSettings(
            c_c0=cfg.diagnostics.c_c0,
            lambda_gn=cfg.diagnostics.lambda_gn,
            c_floor_frac=cfg.diagnostics.c_floor_frac,
            c0_linf=c0_linf,
            n0_l1=n0_l1,
        ),
    )
    level = cfg.dynamics.level
    initial = prepare_initial_state(raw_state, params, level)
    n_steps = int(round(cfg.integrator.t_final / cfg.integrator.dt))
    step_cfg = StepConfig(
        dt=cfg.integrator.dt,
        max_steps=n_steps,
        scheme=cfg.integrator.scheme,
        checkpoint_stride=cfg.integrator.checkpoint_stride,
        cfl_override=cfg.integrator.cfl_override,
        blowup_threshold=cfg.dynamics.blowup_threshold,
        level=level,
    )
    spec = build_noise_spec(cfg)
    if noise_seed is not None:
        spec = NoiseSpec(kind=spec.kind, strength=spec.strength, sigmas=spec.sigmas,
                         n_modes=spec.n_modes, seed=noise_seed)
    return Problem(grid=grid, params=params, initial=initial, noise_spec=spec,
                   step_cfg=step_cfg)


def run_problem(problem: Problem) -> Trajectory:
    path = None
    if problem.noise_spec.active and problem.step_cfg.max_steps > 0:
        path = sample_path(problem.noise_spec, problem.step_cfg.max_steps,
                           problem.step_cfg.dt, problem.noise_spec.seed)
    return run(problem.initial, problem.params, problem.step_cfg, path,
               problem.noise_spec)


def simulate(cfg: ExperimentConfig) -> tuple[Problem, Trajectory]:
    problem = build_problem(cfg)
    return problem, run_problem(problem)


# ---------------------------------------------------------------------------
# envelope fits


@dataclass
class EnvelopeFit:
    """Least-squares exponential fit y ~ exp(a + c t) plus the hard envelope.

    residual_max is the largest relative deviation of the fit from the
    series; envelope_constant is the smallest C with
    y(t) <= (baseline) * exp(C t) at every sample (0 when the series never
    exceeds the baseline).
    """

    c_fit: float
    prefactor: float
    residual_max: float
    envelope_constant: float

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.c_fit) and np.isfinite(self.envelope_constant))


def fit_exponential_envelope(times: np.ndarray, values: np.ndarray,
                             baseline: float | None = None) -> EnvelopeFit:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        raise ValueError("envelope fit requires a positive series")
    logs = np.log(values)
    slope, intercept = np.polyfit(times, logs, 1)
    fit_vals = np.exp(intercept + slope * times)
    residual = float(np.max(np.abs(fit_vals - values) / values))
    base = values[0] if baseline is None else baseline
    positive = times > 0
    if np.any(positive):
        ratios = np.log(values[positive] / base) / times[positive]
        envelope_c = float(max(np.max(ratios), 0.0))
    else:
        envelope_c = 0.0
    return EnvelopeFit(c_fit=float(slope), prefactor=float(intercept),
                       residual_max=residual, envelope_constant=envelope_c)


def entropy_series(traj: Trajectory, which: str = "1") -> tuple[np.ndarray, np.ndarray]:
    """(t, F(t) + int_0^t G dr) from the per-step record stream."""
    times = traj.times()
    f_vals = np.asarray([
        rec.entropy_F1 if which == "1" else rec.entropy_F2 for rec in traj.records
    ])
    g_vals = np.asarray([
        rec.dissipation_G1 if which == "1" else rec.dissipation_G2 for rec in traj.records
    ])
    g_int = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (g_vals[1:] + g_vals[:-1]))])
    return times, f_vals + g_int


# ---------------------------------------------------------------------------
# ensembles


@dataclass
class EnsembleSummary:
    n_members: int
    completed_members: int
    blown_up_members: list[int]
    times: np.ndarray
    f1_mean: np.ndarray
    f1_median: np.ndarray
    f1_q90: np.ndarray
    u2_mean: np.ndarray
    g1_integral_mean: np.ndarray
    sup_f1_moments: dict[int, float]
    member_records: list = field(default_factory=list)


def run_ensemble(cfg: ExperimentConfig) -> EnsembleSummary:
    """Monte Carlo ensemble over independent noise seeds.

    Members share initial data and differ only in their Wiener path
    (seed_base + index, injective).  Statistics are computed over the
    members that completed; blow-ups are recorded and excluded.
    """
    ens = cfg.ensemble
    if ens.n_members < 1:
        raise PreconditionError("ensemble needs at least one member")
    trajectories: list[Trajectory] = []
    blown = []
    first_increments = []
    for member in range(ens.n_members):
        problem = build_problem(cfg, noise_seed=ens.seed_base + member)
        traj = run_problem(problem)
        trajectories.append(traj)
        if traj.noise_path is not None and traj.noise_path.n_steps > 0:
            first_increments.append(tuple(traj.noise_path.increments[0]))
        if traj.status == BLOW_UP:
            blown.append(member)
    if len(first_increments) > 1:
        if len(set(first_increments)) != len(first_increments):
            raise RuntimeError("ensemble seeds produced colliding noise paths")

    completers = [t for i, t in enumerate(trajectories) if i not in blown]
    if not completers:
        raise RuntimeError("every ensemble member blew up; nothing to summarize")
    times = completers[0].times()
    f1 = np.stack([[rec.entropy_F1 for rec in t.records] for t in completers])
    u2 = np.stack([[rec.l2_u**2 for rec in t.records] for t in completers])
    g1 = np.stack([[rec.dissipation_G1 for rec in t.records] for t in completers])
    dt = cfg.integrator.dt
    g1_int = np.cumsum(
        np.concatenate([np.zeros((g1.shape[0], 1)),
                        0.5 * dt * (g1[:, 1:] + g1[:, :-1])], axis=1), axis=1)
    sup_f1 = np.max(f1, axis=1)
    return EnsembleSummary(
        n_members=ens.n_members,
        completed_members=len(completers),
        blown_up_members=blown,
        times=times,
        f1_mean=np.mean(f1, axis=0),
        f1_median=np.median(f1, axis=0),
        f1_q90=np.quantile(f1, 0.9, axis=0),
        u2_mean=np.mean(u2, axis=0),
        g1_integral_mean=np.mean(g1_int, axis=0),
        sup_f1_moments={p: float(np.mean(sup_f1**p)) for p in (1, 2)},
        member_records=[t.records for t in trajectories],
    )


# ---------------------------------------------------------------------------
# convergence studies


@dataclass
class ConvergenceReport:
    axis: str
    levels: list[float]
    reference: float
    distances: dict[str, list[float]]  # per component + "total"
    fitted_rate: float
    expected_rate: float
    monotone: bool
    passed: bool

    def to_text(self) -> str:
        lines = [f"convergence study on axis '{self.axis}' (reference level {self.reference:g})"]
        for lvl, d in zip(self.levels, self.distances["total"]):
            lines.append(f"  level {lvl:g}: distance {d:.6e}")
        lines.append(f"  fitted rate {self.fitted_rate:.3f} (expected >= {self.expected_rate})")
        lines.append(f"  monotone decay: {self.monotone}; pass: {self.passed}")
        return "\n".join(lines)


def _restrict_to_grid(fld: ScalarField, coarse: Grid) -> ScalarField:
    """Spectral restriction onto a coarser grid's resolved modes."""
    fine = fld.grid
    if fine.n_points == coarse.n_points:
        return fld
    nc = coarse.n_points
    half = nc // 2
    src = fld.spectral()
    out = np.zeros((nc, nc), dtype=complex)
    idx = np.fft.fftfreq(nc, d=1.0 / nc).astype(int)
    out[np.ix_(range(nc), range(nc))] = src[np.ix_(idx % fine.n_points, idx % fine.n_points)]
    out *= (nc / fine.n_points) ** 2
    return scalar_from_spectral(coarse, out)


def _state_on_grid(state: State, grid: Grid) -> State:
    if state.grid.n_points == grid.n_points:
        return state
    return State(
        n=_restrict_to_grid(state.n, grid).to_real(),
        c=_restrict_to_grid(state.c, grid).to_real(),
        u=VectorField(
            _restrict_to_grid(state.u.u1, grid).to_real(),
            _restrict_to_grid(state.u.u2, grid).to_real(),
        ),
        time=state.time,
    )


def _component_distance(a: list[State], b: list[State], dt_between: float) -> dict[str, float]:
    """L2-in-time of spatial L2 distances, per solution component."""
    comps = {"n": [], "c": [], "u": []}
    grid = a[0].grid
    for sa, sb in zip(a, b):
        sb = _state_on_grid(sb, grid)
        comps["n"].append(norm(scalar_from_values(
            grid, sa.n.real_values() - sb.n.real_values()), "L2") ** 2)
        comps["c"].append(norm(scalar_from_values(
            grid, sa.c.real_values() - sb.c.real_values()), "L2") ** 2)
        a1, a2 = sa.u.real_values()
        b1, b2 = sb.u.real_values()
        comps["u"].append(
            norm(VectorField(
                scalar_from_values(grid, a1 - b1),
                scalar_from_values(grid, a2 - b2)), "L2") ** 2)
    out = {}
    for key, series in comps.items():
        out[key] = float(np.sqrt(np.trapezoid(series, dx=dt_between)))
    out["total"] = float(np.sqrt(sum(out[k] ** 2 for k in ("n", "c", "u"))))
    return out


EXPECTED_RATES = {
    ("dt", False): 0.85,
    ("dt", True): 0.4,
    ("epsilon", False): 1.8,
    ("epsilon", True): 1.8,
    ("k", False): 0.8,
    ("k", True): 0.8,
    ("grid", False): 0.0,
    ("grid", True): 0.0,
}


def _steps_for(t_final: float, dt: float) -> int:
    steps = t_final / dt
    if abs(steps - round(steps)) > 1e-9:
        raise PreconditionError(
            f"t_final={t_final} is not an integer number of steps at dt={dt}; "
            "pick a horizon divisible by every level")
    return int(round(steps))


def run_convergence(cfg: ExperimentConfig) -> ConvergenceReport:
    """Refinement study along dt, epsilon, k or grid.

    All levels are run against a single pinned finest/reference level and
    compared at exactly aligned checkpoint times; for the dt axis the
    Wiener path is shared across levels through the exact refinement
    hierarchy, so stochastic distances are pathwise.
    """
    axis = cfg.converge.axis
    levels = list(cfg.converge.levels)
    if len(levels) < 3:
        raise PreconditionError("convergence study needs at least 3 levels")
    spec = build_noise_spec(cfg)
    noisy = spec.active
    t_final = cfg.integrator.t_final
    n_compare = 8

    if axis == "dt":
        levels = sorted(levels, reverse=True)
        dt0 = levels[0]
        reference = levels[-1] / 4.0
        all_dts = levels + [reference]
        for lvl in all_dts[1:]:
            ratio = np.log2(dt0 / lvl)
            if abs(ratio - round(ratio)) > 1e-9:
                raise PreconditionError("dt levels must be dyadic refinements of the coarsest")
        n0 = _steps_for(t_final, dt0)
        stride0 = max(1, n0 // n_compare)
        compare_times = [j * stride0 * dt0 for j in range(n0 // stride0 + 1)]
        by_dt = {}
        if noisy:
            n_levels_pow = int(round(np.log2(dt0 / reference))) + 1
            hierarchy = sample_refinement_hierarchy(spec, n0, dt0, n_levels_pow, spec.seed)
            by_dt = {round(np.log2(dt0 / p.dt)): p for p in hierarchy}
        trajectories = {}
        for dt in all_dts:
            refinement = int(round(np.log2(dt0 / dt)))
            sub = _with_integrator(cfg, dt=dt, stride=stride0 * 2**refinement)
            problem = build_problem(sub)
            path = by_dt.get(refinement) if noisy else None
            trajectories[dt] = run(problem.initial, problem.params, problem.step_cfg,
                                   path, problem.noise_spec)
        level_keys = levels
        params_for_fit = levels
    elif axis in ("epsilon", "k", "grid"):
        n_steps = _steps_for(t_final, cfg.integrator.dt)
        stride = max(1, n_steps // n_compare)
        compare_times = [j * stride * cfg.integrator.dt for j in range(n_steps // stride + 1)]
        trajectories = {}
        if axis == "epsilon":
            levels = sorted(levels, reverse=True)
            reference = levels[-1] / 4.0
            variants = {eps: _with_dynamics(_with_model(cfg, epsilon=eps), level=MOD1)
                        for eps in levels + [reference]}
            params_for_fit = levels
        elif axis == "k":
            levels = sorted(levels)
            reference = levels[-1] * 4.0
            big_r = cfg.model.cutoff_R if np.isfinite(cfg.model.cutoff_R) else 1e9
            variants = {k: _with_dynamics(_with_model(cfg, trunc_k=float(k), cutoff_R=big_r),
                                          level=MOD2)
                        for k in levels + [reference]}
            params_for_fit = [1.0 / k for k in levels]
        else:
            levels = sorted(int(x) for x in levels)
            reference = levels[-1] * 2
            variants = {n_pts: _with_grid(cfg, n_points=int(n_pts))
                        for n_pts in levels + [reference]}
            params_for_fit = [1.0 / x for x in levels]
        for key, sub in variants.items():
            sub = _with_integrator(sub, stride=stride)
            problem = build_problem(sub)
            trajectories[key] = run_problem(problem)
        level_keys = levels
    else:
        raise PreconditionError(f"unknown convergence axis {axis!r}")

    _require_completed(trajectories)
    ref_traj = trajectories[reference]
    distances = {"n": [], "c": [], "u": [], "total": []}
    for key in level_keys:
        d = _checkpoint_distance(trajectories[key], ref_traj, compare_times)
        for comp in distances:
            distances[comp].append(d[comp])

    total = np.asarray(distances["total"])
    if np.all(total == 0):
        return ConvergenceReport(axis=axis, levels=levels, reference=reference,
                                 distances=distances, fitted_rate=float("nan"),
                                 expected_rate=EXPECTED_RATES[(axis, noisy)],
                                 monotone=True, passed=True)
    logs_p = np.log(np.asarray(params_for_fit, dtype=float))
    logs_d = np.log(np.maximum(total, 1e-300))
    rate = float(np.polyfit(logs_p, logs_d, 1)[0])
    order = np.argsort(params_for_fit)
    monotone = bool(np.all(np.diff(total[order]) >= 0))
    expected = EXPECTED_RATES[(axis, noisy)]
    passed = rate >= expected and (monotone or axis not in ("k",))
    return ConvergenceReport(axis=axis, levels=levels, reference=reference,
                             distances=distances, fitted_rate=rate,
                             expected_rate=expected, monotone=monotone, passed=passed)


def _require_completed(trajectories: dict) -> None:
    for lvl, traj in trajectories.items():
        if traj.status != COMPLETED:
            raise RuntimeError(
                f"level {lvl} terminated with status {traj.status}: {traj.message}")


def _checkpoint_distance(traj: Trajectory, ref: Trajectory,
                         compare_times: list[float]) -> dict[str, float]:
    a_states = [_state_at(traj, t) for t in compare_times]
    b_states = [_state_at(ref, t) for t in compare_times]
    return _component_distance(a_states, b_states, compare_times[1] - compare_times[0])


def _state_at(traj: Trajectory, t: float) -> State:
    times = np.asarray([st.time for st in traj.states])
    idx = int(np.argmin(np.abs(times - t)))
    if abs(times[idx] - t) > 1e-9 * max(abs(t), 1.0):
        raise RuntimeError(
            f"no checkpoint at comparison time {t} (closest {times[idx]}); "
            "checkpoint strides are misaligned")
    return traj.states[idx]


def _with_integrator(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    from dataclasses import replace

    mapping = {"dt": "dt", "stride": "checkpoint_stride"}
    updates = {mapping.get(k, k): v for k, v in kw.items()}
    return replace(cfg, integrator=replace(cfg.integrator, **updates))


def _with_model(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    from dataclasses import replace

    return replace(cfg, model=replace(cfg.model, **kw))


def _with_dynamics(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    from dataclasses import replace

    return replace(cfg, dynamics=replace(cfg.dynamics, **kw))


def _with_grid(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    from dataclasses import replace

    return replace(cfg, grid=replace(cfg.grid, **kw))


# ---------------------------------------------------------------------------
# uniqueness / determinism twins


@dataclass
class UniquenessReport:
    bit_identical: bool
    d_same_seed_max: float
    times: np.ndarray
    d_delta: np.ndarray
    d_half: np.ndarray
    d0_delta: float
    gronwall_integral: np.ndarray
    c_hat: float
    envelope_holds: bool
    ratio_at_end: float
    ratio_window: tuple[float, float]
    max_step_jump: float
    delta: float

    @property
    def ratio_in_window(self) -> bool:
        lo, hi = self.ratio_window
        return bool(lo <= self.ratio_at_end <= hi)

    def to_text(self) -> str:
        lines = [
            f"same-seed twins bit-identical: {self.bit_identical} "
            f"(max D = {self.d_same_seed_max:.3e})",
            f"perturbation delta = {self.delta:g}: D(0) = {self.d0_delta:.6e}, "
            f"D(T) = {self.d_delta[-1]:.6e}",
            f"fitted Gronwall constant C_hat = {self.c_hat:.4g}; "
            f"envelope D(t) <= D(0) exp(C_hat int F_hat) holds: {self.envelope_holds}",
            f"delta-halving ratio D_delta(T)/D_half(T) = {self.ratio_at_end:.3f} "
            f"(window {self.ratio_window})",
            f"max single-step jump factor: {self.max_step_jump:.3f}",
        ]
        return "\n".join(lines)


def _perturbed_problem(cfg: ExperimentConfig, delta: float) -> Problem:
    """Problem with the first blob amplitude shifted by +delta."""
    from dataclasses import replace

    blobs = list(cfg.initial.blobs)
    if not blobs:
        raise PreconditionError("uniqueness study needs at least one density blob to perturb")
    b0 = blobs[0]
    blobs[0] = (b0[0], b0[1], b0[2] + delta, b0[3])
    sub = replace(cfg, initial=replace(cfg.initial, blobs=tuple(blobs)))
    return build_problem(sub)


def run_uniqueness(cfg: ExperimentConfig) -> UniquenessReport:
    """Twin experiments probing pathwise uniqueness.

    (i) identical config run twice must produce bit-identical states, so
    the squared-difference functional D vanishes exactly.  (ii) runs with
    the leading blob amplitude perturbed by delta and delta/2 quantify the
    continuity: D stays under D(0) exp(C_hat int F_hat) for the fitted
    C_hat, and halving delta quarters D in the linear regime.  Requires
    the constant-sensitivity prototype model.
    """
    if cfg.model.sensitivity != "prototype_linear":
        raise PreconditionError(
            "pathwise uniqueness is only asserted for constant chemotactic sensitivity "
            "(prototype model); got " + cfg.model.sensitivity)
    base_a = build_problem(cfg)
    base_b = build_problem(cfg)
    traj_a = run_problem(base_a)
    traj_b = run_problem(base_b)
    d_same = [uniqueness_functional(sa, sb) for sa, sb in zip(traj_a.states, traj_b.states)]
    bit_identical = all(
        np.array_equal(sa.n.values, sb.n.values)
        and np.array_equal(sa.c.values, sb.c.values)
        and np.array_equal(sa.u.u1.values, sb.u.u1.values)
        and np.array_equal(sa.u.u2.values, sb.u.u2.values)
        for sa, sb in zip(traj_a.states, traj_b.states)
    )

    delta = cfg.converge.uniqueness_delta
    prob_delta = _perturbed_problem(cfg, delta)
    prob_half = _perturbed_problem(cfg, delta / 2.0)

    path = None
    if base_a.noise_spec.active and base_a.step_cfg.max_steps > 0:
        path = sample_path(base_a.noise_spec, base_a.step_cfg.max_steps,
                           base_a.step_cfg.dt, base_a.noise_spec.seed)

    times, d_delta, f_hat = _lockstep_distance(base_a, prob_delta, path)
    _, d_half, _ = _lockstep_distance(base_a, prob_half, path)

    dt = base_a.step_cfg.dt
    f_int = np.concatenate([[0.0], np.cumsum(0.5 * dt * (f_hat[1:] + f_hat[:-1]))])
    d0 = d_delta[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(
            (f_int > 0) & (d_delta > 0) & (d0 > 0),
            np.log(np.maximum(d_delta, 1e-300) / d0) / np.maximum(f_int, 1e-300),
            0.0,
        )
    c_hat = float(max(np.max(ratios), 0.0))
    envelope = d_delta <= d0 * np.exp(c_hat * f_int) * (1.0 + 1e-9) + 1e-300
    jumps = [
        d_delta[i + 1] / d_delta[i]
        for i in range(len(d_delta) - 1)
        if d_delta[i] > 0
    ]
    ratio_at_end = float(d_delta[-1] / d_half[-1]) if d_half[-1] > 0 else float("inf")
    return UniquenessReport(
        bit_identical=bit_identical,
        d_same_seed_max=float(np.max(d_same)) if d_same else 0.0,
        times=times,
        d_delta=d_delta,
        d_half=d_half,
        d0_delta=float(d0),
        gronwall_integral=f_int,
        c_hat=c_hat,
        envelope_holds=bool(np.all(envelope)),
        ratio_at_end=ratio_at_end,
        ratio_window=(3.0, 5.0),
        max_step_jump=float(max(jumps)) if jumps else 1.0,
        delta=delta,
    )


def _lockstep_distance(base: Problem, other: Problem, path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """March two states with one shared Wiener path, recording D and F_hat."""
    from .integrator import step

    state_a = base.initial
    state_b = other.initial
    cfg = base.step_cfg
    tend_a = lambda st: assemble_tendency(st, base.params, cfg.level)
    tend_b = lambda st: assemble_tendency(st, other.params, cfg.level)
    times = [0.0]
    dvals = [uniqueness_functional(state_a, state_b)]
    fvals = [gronwall_factor(state_a, state_b)]
    for i in range(cfg.max_steps):
        row = path.increments[i] if path is not None else None
        state_a = step(state_a, tend_a, row, cfg, base.params, base.noise_spec)
        state_b = step(state_b, tend_b, row, cfg, other.params, other.noise_spec)
        times.append(state_a.time)
        dvals.append(uniqueness_functional(state_a, state_b))
        fvals.append(gronwall_factor(state_a, state_b))
    return np.asarray(times), np.asarray(dvals), np.asarray(fvals)


# ---------------------------------------------------------------------------
# validation and the coefficient check


def run_validate(cfg: ExperimentConfig) -> list:
    problem = build_problem(cfg)
    raw = build_initial_state(build_initial_data(cfg), problem.grid)
    report_a = validate_assumptions(problem.params, raw, "A")
    report_b = validate_assumptions(problem.params, raw, "B")
    return [report_a, report_b]


def run_check_b2(cfg: ExperimentConfig) -> dict:
    problem = build_problem(cfg)
    result = check_b2(
        problem.params,
        n0_l1=problem.params.diagnostics.n0_l1,
        c0_inf=problem.params.diagnostics.c0_linf,
        lambda_gn=problem.params.diagnostics.lambda_gn,
    )
    result["lambda_gn"] = problem.params.diagnostics.lambda_gn
    result["n0_l1"] = problem.params.diagnostics.n0_l1
    result["c0_inf"] = problem.params.diagnostics.c0_linf
    return result
