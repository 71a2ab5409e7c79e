import time
from dataclasses import replace

import numpy as np

from ksns.config import (
    DynamicsSection,
    ExperimentConfig,
    GridSection,
    InitialSection,
    IntegratorSection,
    ModelSection,
    NoiseSection,
)
from ksns.dynamics import State, weak_residual
from ksns.experiments import build_problem
from ksns.integrator import run
from ksns.model import SensitivityModel, make_params
from ksns.spectral import constant_field, scalar_from_values, zero_vector
from ksns import Grid

# --- heat residual with overlapping test mode --------------------------------
g = Grid(32, 2 * np.pi)
x1, _ = g.x
params = make_params(g, d1=0.7, sensitivity=SensitivityModel(c_max=1.0), phi_amplitude=0.0)
phi_test = scalar_from_values(g, np.cos(3 * x1) + 0.5 * np.sin(x1))


def heat_states(dt, n):
    return [State(n=scalar_from_values(g, np.exp(-0.7 * 9 * i * dt) * np.cos(3 * x1)),
                  c=constant_field(g, 0.5), u=zero_vector(g), time=i * dt)
            for i in range(n + 1)]


res_by_dt = {}
for dt in (0.02, 0.01, 0.005):
    states = heat_states(dt, int(round(0.4 / dt)))
    res = weak_residual(states, dt, params, "n", test_scalar=phi_test)
    res_by_dt[dt] = np.max(np.abs(res))
    print(f"heat residual dt={dt}: {res_by_dt[dt]:.3e}")
print("ratios:", res_by_dt[0.02] / res_by_dt[0.01], res_by_dt[0.01] / res_by_dt[0.005])

# --- signed weak residual on fine nonlinear run -------------------------------
L8 = 8 * np.pi
wcfg = ExperimentConfig(
    grid=GridSection(n_points=32, box_length=L8),
    model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0, phi_amplitude=0.5, epsilon=0.1),
    initial=InitialSection(
        blobs=((0.45 * L8, 0.5 * L8, 1.2, 2.6),),
        n0_floor=1e-6, c0_max=1.0, c0_width=4.0, c0_floor_frac=0.2,
        u0_energy=0.25, u0_band_lo=1, u0_band_hi=3, seed=11),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=1e-4, t_final=0.512, checkpoint_stride=1,
                                 cfl_override=True),
    dynamics=DynamicsSection(level="mod1"),
)
t0 = time.time()
prob = build_problem(wcfg)
traj = run(prob.initial, prob.params, prob.step_cfg, None, prob.noise_spec)
print(f"fine run {time.time()-t0:.0f}s status {traj.status}, {len(traj.states)} states")
xx1, _ = prob.grid.x
phi_t = scalar_from_values(prob.grid, np.cos(2 * np.pi * 2 * xx1 / L8))
for stride in (1024, 512, 256, 128, 64, 16, 4, 1):
    sub = traj.states[::stride]
    dt_q = 1e-4 * stride
    res = weak_residual(sub, dt_q, prob.params, "n", test_scalar=phi_t, level="mod1")
    print(f"stride {stride:5d} dt_q={dt_q:.4f}: final signed residual {res[-1]: .5e}  max|.| {np.max(np.abs(res)):.5e}")
