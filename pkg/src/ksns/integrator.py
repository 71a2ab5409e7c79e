"""IMEX Euler-Maruyama time stepping with exact diffusion factors.

Per mode the update reads

    x_new = exp(-d_i |xi|^2 dt) * (x_old + dt * nonstiff + noise term),

i.e. the stiff diffusion is integrated exactly while the nonlinear drift
and the Ito noise increment (velocity only, evaluated at the old state)
enter explicitly before the factor.  An explicit Euler-Maruyama variant
without the integrating factor is kept for validation runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsRecord, forcing_power, grad_u_norm_sq, make_record
from .dynamics import FULL, BlowUpError, State, Tendency, assemble_tendency
from .model import ModelParams, box_distance_weight
from .noise import NoisePath, NoiseSpec, noise_increment
from .spectral import (
    ScalarField,
    VectorField,
    dealias,
    dealias_vector,
    leray_project,
    norm,
    scalar_from_spectral,
)

IMEX_EM = "imex_em"
EXPLICIT_EM = "explicit_em"

COMPLETED = "completed"
BLOW_UP = "blow-up"
ERROR = "error"


class CflViolation(RuntimeError):
    """Step size exceeds the stability suggestion and no override was set."""


@dataclass(frozen=True)
class StepConfig:
    dt: float
    max_steps: int
    scheme: str = IMEX_EM
    checkpoint_stride: int = 1
    cfl_override: bool = False
    blowup_threshold: float = 1e12
    level: str = FULL

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")
        if self.scheme not in (IMEX_EM, EXPLICIT_EM):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be >= 1")


@dataclass
class Trajectory:
    states: list[State] = field(default_factory=list)
    checkpoint_steps: list[int] = field(default_factory=list)
    records: list[DiagnosticsRecord] = field(default_factory=list)
    noise_path: NoisePath | None = None
    status: str = COMPLETED
    message: str = ""

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def times(self) -> np.ndarray:
        return np.asarray([rec.time for rec in self.records])


def cfl_suggest(state: State, params: ModelParams, dt_cap: float = 0.1) -> float:
    """Explicit-part step bound: 0.4 * min of the advective, chemotactic
    and reaction time scales, capped by dt_cap.

    Vanishing fields push their scale to infinity, so the all-zero state
    just returns the cap.
    """
    grid = state.grid
    dx = grid.spacing
    bounds = [dt_cap]
    u_inf = norm(state.u, "Linf")
    if u_inf > 0:
        bounds.append(0.4 * dx / u_inf)
    from .spectral import gradient

    gc1, gc2 = gradient(state.c).real_values()
    grad_c_inf = float(np.max(np.hypot(gc1, gc2)))
    m_chi = params.sensitivity.max_chi()
    if m_chi * grad_c_inf > 0:
        bounds.append(0.4 * dx / (m_chi * grad_c_inf))
    m_kappa = params.sensitivity.max_kappa()
    n_inf = norm(state.n, "Linf")
    if m_kappa * n_inf > 0:
        bounds.append(0.4 / (m_kappa * n_inf + 1e-300))
    return float(min(bounds))


def _integrating_factors(grid, params: ModelParams, dt: float):
    k2 = grid.k_squared
    return (
        np.exp(-params.d1 * k2 * dt),
        np.exp(-params.d2 * k2 * dt),
        np.exp(-params.d3 * k2 * dt),
    )


def step(
    state: State,
    tendency_provider,
    noise_row: np.ndarray | None,
    cfg: StepConfig,
    params: ModelParams,
    noise_spec: NoiseSpec | None = None,
) -> State:
    """Advance one step; noise_row carries this step's Wiener increments."""
    grid = state.grid
    dt = cfg.dt
    tend: Tendency = tendency_provider(state)

    nh = state.n.spectral() + dt * tend.dn_nonstiff.spectral()
    ch = state.c.spectral() + dt * tend.dc_nonstiff.spectral()
    uh1, uh2 = state.u.spectral()
    duh1, duh2 = tend.du_nonstiff.spectral()
    uh1 = uh1 + dt * duh1
    uh2 = uh2 + dt * duh2

    if noise_spec is not None and noise_spec.active:
        if noise_row is None:
            raise ValueError("noise is active but no increments were supplied for this step")
        kick = noise_increment(state.u, noise_spec, noise_row)
        kh1, kh2 = kick.spectral()
        uh1 = uh1 + kh1
        uh2 = uh2 + kh2

    if cfg.scheme == IMEX_EM:
        e1, e2, e3 = _integrating_factors(grid, params, dt)
        nh *= e1
        ch *= e2
        uh1 *= e3
        uh2 *= e3
    else:
        k2 = grid.k_squared
        nh += dt * (-params.d1 * k2) * state.n.spectral()
        ch += dt * (-params.d2 * k2) * state.c.spectral()
        su1, su2 = state.u.spectral()
        uh1 += dt * (-params.d3 * k2) * su1
        uh2 += dt * (-params.d3 * k2) * su2

    n_new = dealias(scalar_from_spectral(grid, nh))
    c_new = dealias(scalar_from_spectral(grid, ch))
    u_new = dealias_vector(leray_project(VectorField(
        scalar_from_spectral(grid, uh1),
        scalar_from_spectral(grid, uh2),
    )))
    return State(n=n_new.to_real(), c=c_new.to_real(), u=u_new.to_real(),
                 time=state.time + dt)


def run(
    initial: State,
    params: ModelParams,
    cfg: StepConfig,
    path: NoisePath | None = None,
    noise_spec: NoiseSpec | None = None,
    tendency_provider=None,
) -> Trajectory:
    """Iterate step up to the horizon, streaming diagnostics every step.

    Deterministic given (initial, params, cfg, path).  Blow-up (NaN or the
    density sup passing the threshold) truncates the trajectory and marks
    it instead of raising.
    """
    spec = noise_spec if noise_spec is not None else NoiseSpec()
    if spec.active and cfg.max_steps > 0:
        if path is None or path.n_steps < cfg.max_steps:
            raise ValueError("noise path shorter than the requested horizon")
        if abs(path.dt - cfg.dt) > 1e-12 * cfg.dt:
            raise ValueError(f"noise increments were drawn for dt={path.dt}, stepping at dt={cfg.dt}")
    if tendency_provider is None:
        tendency_provider = lambda st: assemble_tendency(st, params, cfg.level)

    weight = box_distance_weight(initial.grid)
    traj = Trajectory(noise_path=path)
    state = initial.dealiased()

    # running trapezoidal sums for the energy balance
    visc_prev = grad_u_norm_sq(state.u)
    work_prev = forcing_power(state, params, cfg.level)
    int_visc = 0.0
    int_work = 0.0
    e0 = 0.5 * norm(state.u, "L2") ** 2

    def defect_now(st: State) -> float:
        e_now = 0.5 * norm(st.u, "L2") ** 2
        return abs(e_now - e0 + params.d3 * int_visc - int_work)

    traj.states.append(state)
    traj.checkpoint_steps.append(0)
    traj.records.append(make_record(state, params, defect=0.0, weight=weight))

    for i in range(cfg.max_steps):
        if not cfg.cfl_override:
            bound = cfl_suggest(state, params, dt_cap=cfg.dt)
            if cfg.dt > bound * (1.0 + 1e-9):
                traj.status = ERROR
                traj.message = (
                    f"dt={cfg.dt:.3e} exceeds the stability suggestion {bound:.3e} "
                    f"at step {i}; set cfl_override to proceed"
                )
                return traj
        row = path.increments[i] if (spec.active and path is not None) else None
        try:
            state = step(state, tendency_provider, row, cfg, params, spec)
        except BlowUpError as exc:
            traj.status = BLOW_UP
            traj.message = str(exc)
            traj.records.append(make_record(state, params, defect=defect_now(state),
                                            weight=weight, blow_up=True))
            return traj
        except (FloatingPointError, ValueError) as exc:
            traj.status = ERROR
            traj.message = str(exc)
            return traj

        n_inf = norm(state.n, "Linf")
        if not np.isfinite(n_inf) or n_inf > cfg.blowup_threshold:
            traj.status = BLOW_UP
            traj.message = f"density sup {n_inf:.3e} passed the blow-up threshold at step {i + 1}"
            traj.records.append(make_record(state, params, defect=defect_now(state),
                                            weight=weight, blow_up=True))
            traj.states.append(state)
            traj.checkpoint_steps.append(i + 1)
            return traj

        visc_now = grad_u_norm_sq(state.u)
        work_now = forcing_power(state, params, cfg.level)
        int_visc += 0.5 * cfg.dt * (visc_prev + visc_now)
        int_work += 0.5 * cfg.dt * (work_prev + work_now)
        visc_prev, work_prev = visc_now, work_now

        traj.records.append(make_record(state, params, defect=defect_now(state), weight=weight))
        if (i + 1) % cfg.checkpoint_stride == 0 or (i + 1) == cfg.max_steps:
            traj.states.append(state)
            traj.checkpoint_steps.append(i + 1)

    traj.status = COMPLETED
    return traj
