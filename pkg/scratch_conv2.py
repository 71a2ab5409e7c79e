import time

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
from ksns.experiments import run_convergence, simulate
from dataclasses import replace

L8 = 8 * np.pi

base = ExperimentConfig(
    grid=GridSection(n_points=32, box_length=L8),
    model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0, phi_amplitude=0.3, epsilon=0.1),
    initial=InitialSection(
        blobs=((0.45 * L8, 0.5 * L8, 1.2, 2.6), (0.62 * L8, 0.58 * L8, 0.8, 2.2)),
        n0_floor=1e-6, c0_max=1.0, c0_width=4.0, c0_floor_frac=0.2,
        u0_energy=0.25, u0_band_lo=1, u0_band_hi=3, seed=11,
    ),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=2e-3, t_final=0.512, checkpoint_stride=8),
    dynamics=DynamicsSection(level="mod1"),
)

t0 = time.time()
rep = run_convergence(replace(base, converge=ConvergeSection(axis="dt", levels=(8e-3, 4e-3, 2e-3))))
print(f"[{time.time()-t0:.0f}s] dt deterministic:", rep.fitted_rate, rep.distances["total"], rep.passed)

t0 = time.time()
noisy = replace(base, noise=NoiseSection(kind="linear_multiplicative", strength=0.3, seed=5))
rep = run_convergence(replace(noisy, converge=ConvergeSection(axis="dt", levels=(8e-3, 4e-3, 2e-3))))
print(f"[{time.time()-t0:.0f}s] dt stochastic:", rep.fitted_rate, rep.distances["total"], rep.passed)

t0 = time.time()
rep = run_convergence(replace(base, converge=ConvergeSection(axis="epsilon", levels=(0.4, 0.2, 0.1))))
print(f"[{time.time()-t0:.0f}s] epsilon:", rep.fitted_rate, rep.distances["total"], rep.passed)

# k axis: L = 2 pi box, power-law velocity spectrum
L2 = 2 * np.pi
kcfg = ExperimentConfig(
    grid=GridSection(n_points=64, box_length=L2),
    model=ModelSection(d1=0.02, d2=0.02, d3=0.02, chi0=0.5, phi_amplitude=0.1,
                       epsilon=0.05, cutoff_R=1e6, trunc_k=16.0),
    initial=InitialSection(
        blobs=((0.5 * L2, 0.5 * L2, 1.0, 0.5),),
        n0_floor=1e-4, c0_max=1.0, c0_width=0.8, c0_floor_frac=0.2,
        u0_energy=0.1, u0_band_lo=1, u0_band_hi=21, u0_alpha=2.0, seed=13,
    ),
    noise=NoiseSection(kind="off"),
    integrator=IntegratorSection(dt=2e-3, t_final=0.256, checkpoint_stride=16, cfl_override=True),
    dynamics=DynamicsSection(level="mod2"),
)
t0 = time.time()
rep = run_convergence(replace(kcfg, converge=ConvergeSection(axis="k", levels=(4.0, 8.0, 16.0))))
print(f"[{time.time()-t0:.0f}s] k axis:", rep.fitted_rate, rep.distances["total"], rep.monotone, rep.passed)
