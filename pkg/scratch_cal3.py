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
from ksns.experiments import build_problem, run_convergence
from ksns.integrator import run
from ksns.noise import NoiseSpec, sample_refinement_hierarchy
from ksns.spectral import VectorField, norm, scalar_from_values

L2 = 2 * np.pi

# --- k axis with power-law-dominant velocity -------------------------------
kcfg = ExperimentConfig(
    grid=GridSection(n_points=64, box_length=L2),
    model=ModelSection(d1=0.02, d2=0.02, d3=0.02, chi0=0.5, phi_amplitude=0.1,
                       epsilon=0.05, cutoff_R=1e6, trunc_k=16.0),
    initial=InitialSection(
        blobs=((0.5 * L2, 0.5 * L2, 1.0, 1.0),),
        n0_floor=1e-4, c0_max=1.0, c0_width=1.2, c0_floor_frac=0.2,
        u0_energy=1.0, u0_band_lo=1, u0_band_hi=21, u0_alpha=2.0, seed=13,
    ),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=2e-3, t_final=0.256, checkpoint_stride=16,
                                 cfl_override=True),
    dynamics=DynamicsSection(level="mod2"),
)
t0 = time.time()
rep = run_convergence(replace(kcfg, converge=ConvergeSection(axis="k", levels=(4.0, 8.0, 16.0))))
print(f"[{time.time()-t0:.0f}s] k axis:", rep.fitted_rate, rep.distances["total"], rep.monotone)

# --- strong order: noise-dominated velocity problem -------------------------
base = ExperimentConfig(
    grid=GridSection(n_points=32, box_length=L2),
    model=ModelSection(d1=1.0, d2=1.0, d3=0.5, chi0=1.0, phi_amplitude=0.0, epsilon=0.1),
    initial=InitialSection(blobs=(), n0_floor=0.0, c0_max=1.0, c0_width=1.0,
                           c0_floor_frac=0.99, u0_energy=0.05,
                           u0_band_lo=1, u0_band_hi=3, seed=3),
    noise=NoiseSection(kind="linear_multiplicative", strength=1.5, seed=77),
    integrator=IntegratorSection(dt=4e-3, t_final=0.256, checkpoint_stride=64,
                                 cfl_override=True),
    dynamics=DynamicsSection(level="full"),
)
dts = [4e-3, 2e-3, 1e-3]
ref_dt = dts[-1] / 8.0
n0 = int(round(0.256 / dts[0]))
n_pow = int(round(np.log2(dts[0] / ref_dt))) + 1

errs = np.zeros(len(dts))
n_seeds = 6
t0 = time.time()
for s in range(n_seeds):
    spec = NoiseSpec(kind="linear_multiplicative", strength=1.5, n_modes=1, seed=100 + s)
    hier = sample_refinement_hierarchy(spec, n0, dts[0], n_pow, spec.seed)
    by_ref = {round(np.log2(dts[0] / p.dt)): p for p in hier}
    finals = {}
    for dt in dts + [ref_dt]:
        m = int(round(np.log2(dts[0] / dt)))
        sub = replace(base, integrator=replace(base.integrator, dt=dt,
                                               checkpoint_stride=n0 * 2**m))
        prob = build_problem(sub, noise_seed=spec.seed)
        traj = run(prob.initial, prob.params, prob.step_cfg, by_ref[m], prob.noise_spec)
        assert traj.status == "completed", traj.message
        finals[dt] = traj.final_state
    for i, dt in enumerate(dts):
        a, b = finals[dt], finals[ref_dt]
        a1, a2 = a.u.real_values()
        b1, b2 = b.u.real_values()
        errs[i] += norm(VectorField(
            scalar_from_values(a.grid, a1 - b1),
            scalar_from_values(a.grid, a2 - b2)), "L2")
errs /= n_seeds
slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
print(f"[{time.time()-t0:.0f}s] strong order slope:", slope, errs)

# --- energy balance defect halving ------------------------------------------
L8 = 8 * np.pi
ecfg = ExperimentConfig(
    grid=GridSection(n_points=32, box_length=L8),
    model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0, phi_amplitude=0.5, epsilon=0.1),
    initial=InitialSection(
        blobs=((0.45 * L8, 0.5 * L8, 1.2, 2.6),),
        n0_floor=1e-6, c0_max=1.0, c0_width=4.0, c0_floor_frac=0.2,
        u0_energy=0.25, u0_band_lo=1, u0_band_hi=3, seed=11),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=4e-3, t_final=0.512, checkpoint_stride=16),
    dynamics=DynamicsSection(level="mod1"),
)
defects = []
for dt in (4e-3, 2e-3, 1e-3):
    sub = replace(ecfg, integrator=replace(ecfg.integrator, dt=dt))
    prob = build_problem(sub)
    traj = run(prob.initial, prob.params, prob.step_cfg, None, prob.noise_spec)
    defects.append(traj.records[-1].energy_balance_defect)
print("defects:", defects, "ratios:", defects[0] / defects[1], defects[1] / defects[2])
