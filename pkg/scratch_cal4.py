import time
from dataclasses import replace

import numpy as np

from ksns.config import (
    ConvergeSection,
    DynamicsSection,
    ExperimentConfig,
    GridSection,
    InitialSection,
    IntegratorSection,
    ModelSection,
    NoiseSection,
)
from ksns.dynamics import State, weak_residual
from ksns.experiments import (
    build_problem,
    entropy_series,
    fit_exponential_envelope,
    run_uniqueness,
)
from ksns.integrator import run
from ksns.model import SensitivityModel, make_params
from ksns.spectral import (
    VectorField,
    constant_field,
    norm,
    scalar_from_values,
    zero_vector,
)
from ksns import Grid

# --- weak residual on exact heat decay: O(dt^2) -----------------------------
g = Grid(32, 2 * np.pi)
x1, _ = g.x
params = make_params(g, d1=0.7, sensitivity=SensitivityModel(c_max=1.0), phi_amplitude=0.0)
phi_test = scalar_from_values(g, np.cos(2 * x1))


def heat_states(dt, n):
    # exact single-mode decay n(t) = e^{-d1 * 9 t} cos(3 x1)
    return [State(n=scalar_from_values(g, np.exp(-0.7 * 9 * i * dt) * np.cos(3 * x1)),
                  c=constant_field(g, 0.5), u=zero_vector(g), time=i * dt)
            for i in range(n + 1)]


for dt in (0.02, 0.01, 0.005):
    states = heat_states(dt, int(round(0.4 / dt)))
    res = weak_residual(states, dt, params, "n", test_scalar=phi_test)
    print(f"heat residual dt={dt}: {np.max(np.abs(res)):.3e}")

# --- weak residual, fixed nonlinear run, subsampled quadrature ---------------
L8 = 8 * np.pi
wcfg = ExperimentConfig(
    grid=GridSection(n_points=32, box_length=L8),
    model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0, phi_amplitude=0.5, epsilon=0.1),
    initial=InitialSection(
        blobs=((0.45 * L8, 0.5 * L8, 1.2, 2.6),),
        n0_floor=1e-6, c0_max=1.0, c0_width=4.0, c0_floor_frac=0.2,
        u0_energy=0.25, u0_band_lo=1, u0_band_hi=3, seed=11),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=2.5e-4, t_final=0.256, checkpoint_stride=1),
    dynamics=DynamicsSection(level="mod1"),
)
t0 = time.time()
prob = build_problem(wcfg)
traj = run(prob.initial, prob.params, prob.step_cfg, None, prob.noise_spec)
print(f"fine run {time.time()-t0:.0f}s status {traj.status}, {len(traj.states)} states")
xx1, _ = prob.grid.x
phi_t = scalar_from_values(prob.grid, np.cos(2 * np.pi * 2 * xx1 / L8))
for stride in (128, 64, 32):
    sub = traj.states[::stride]
    dt_q = 2.5e-4 * stride
    res = weak_residual(sub, dt_q, prob.params, "n", test_scalar=phi_t, level="mod1")
    print(f"stride {stride} dt_q={dt_q}: residual {np.max(np.abs(res)):.4e}")

# c residual as well
for stride in (128, 64):
    sub = traj.states[::stride]
    dt_q = 2.5e-4 * stride
    res = weak_residual(sub, dt_q, prob.params, "c", test_scalar=phi_t, level="mod1")
    print(f"c: stride {stride}: residual {np.max(np.abs(res)):.4e}")

# --- uniqueness twins --------------------------------------------------------
ucfg = replace(wcfg,
               integrator=IntegratorSection(dt=2e-3, t_final=0.256, checkpoint_stride=16),
               converge=ConvergeSection(axis="dt", levels=(1e-3,), uniqueness_delta=1e-3))
t0 = time.time()
rep = run_uniqueness(ucfg)
print(f"[{time.time()-t0:.0f}s] uniqueness: bit={rep.bit_identical} D0={rep.d0_delta:.3e} "
      f"DT={rep.d_delta[-1]:.3e} ratio={rep.ratio_at_end:.3f} C={rep.c_hat:.3f} "
      f"env={rep.envelope_holds} jump={rep.max_step_jump:.3f}")

# noisy twin
ncfg = replace(ucfg, noise=NoiseSection(kind="linear_multiplicative", strength=0.3, seed=4))
rep2 = run_uniqueness(ncfg)
print(f"noisy uniqueness: bit={rep2.bit_identical} ratio={rep2.ratio_at_end:.3f} env={rep2.envelope_holds}")

# --- entropy envelope fit on the 64^2 production run -------------------------
pcfg = ExperimentConfig(
    grid=GridSection(n_points=64, box_length=16 * np.pi),
    model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0, phi_amplitude=0.3, epsilon=0.1),
    initial=InitialSection(
        blobs=((0.45 * 16 * np.pi, 0.5 * 16 * np.pi, 1.2, 3.0),
               (0.62 * 16 * np.pi, 0.58 * 16 * np.pi, 0.8, 2.5)),
        n0_floor=1e-6, c0_max=1.0, c0_width=8.0, c0_floor_frac=0.2,
        u0_energy=0.5, u0_band_lo=1, u0_band_hi=3, seed=11),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=2e-3, t_final=1.0, checkpoint_stride=50),
    dynamics=DynamicsSection(level="mod1"),
)
t0 = time.time()
prob = build_problem(pcfg)
traj = run(prob.initial, prob.params, prob.step_cfg, None, prob.noise_spec)
times, series = entropy_series(traj, "1")
fit = fit_exponential_envelope(times, series, baseline=traj.records[0].entropy_F1 + 1.0)
print(f"[{time.time()-t0:.0f}s] F1 envelope: c_fit={fit.c_fit:.4f} resid={fit.residual_max:.4f} "
      f"env_c={fit.envelope_constant:.4f}")
g1 = np.asarray([r.dissipation_G1 for r in traj.records])
print("int G1 > 0:", np.trapezoid(g1, dx=2e-3))

# second entropy with d1=d2=10 (B2-passing)
p2cfg = replace(pcfg, model=replace(pcfg.model, d1=10.0, d2=10.0))
prob2 = build_problem(p2cfg)
traj2 = run(prob2.initial, prob2.params, prob2.step_cfg, None, prob2.noise_spec)
times2, series2 = entropy_series(traj2, "2")
print("F2 series range:", series2.min(), series2.max())
fit2 = fit_exponential_envelope(times2, series2, baseline=traj2.records[0].entropy_F2)
print(f"F2 envelope: c_fit={fit2.c_fit:.4f} resid={fit2.residual_max:.4f} env_c={fit2.envelope_constant:.4f}")
cert_ok = all(r.entropy_F2 >= r.f2_certificate for r in traj2.records)
print("certificate holds:", cert_ok)
from ksns.model import check_b2
print("b2:", check_b2(prob2.params, prob2.params.diagnostics.n0_l1,
                      prob2.params.diagnostics.c0_linf, 1.0))
