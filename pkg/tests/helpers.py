"""Shared run configurations and small oracles used across test modules."""

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

L_PROD = 16 * np.pi
L_SMALL = 8 * np.pi
L_UNIT = 2 * np.pi


def production_config(**integrator_kw) -> ExperimentConfig:
    """Two-blob consumption run on the 64^2 production box."""
    integ = dict(dt=2e-3, t_final=1.0, checkpoint_stride=50)
    integ.update(integrator_kw)
    return ExperimentConfig(
        grid=GridSection(n_points=64, box_length=L_PROD),
        model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0,
                           phi_amplitude=0.3, epsilon=0.1),
        initial=InitialSection(
            blobs=((0.45 * L_PROD, 0.5 * L_PROD, 1.2, 3.0),
                   (0.62 * L_PROD, 0.58 * L_PROD, 0.8, 2.5)),
            n0_floor=1e-6, c0_max=1.0, c0_width=8.0, c0_floor_frac=0.2,
            u0_energy=0.5, u0_band_lo=1, u0_band_hi=3, seed=11),
        noise=NoiseSection(kind="off"),
        integrator=IntegratorSection(**integ),
        dynamics=DynamicsSection(level="mod1"),
    )


def small_config(**integrator_kw) -> ExperimentConfig:
    """Single-blob run on a 32^2 box; cheap enough for refinement studies."""
    integ = dict(dt=2e-3, t_final=0.512, checkpoint_stride=16)
    integ.update(integrator_kw)
    return ExperimentConfig(
        grid=GridSection(n_points=32, box_length=L_SMALL),
        model=ModelSection(d1=1.0, d2=1.0, d3=1.0, chi0=1.0,
                           phi_amplitude=0.5, epsilon=0.1),
        initial=InitialSection(
            blobs=((0.45 * L_SMALL, 0.5 * L_SMALL, 1.2, 2.6),),
            n0_floor=1e-6, c0_max=1.0, c0_width=4.0, c0_floor_frac=0.2,
            u0_energy=0.25, u0_band_lo=1, u0_band_hi=3, seed=11),
        noise=NoiseSection(kind="off"),
        integrator=IntegratorSection(**integ),
        dynamics=DynamicsSection(level="mod1"),
    )


def truncation_config() -> ExperimentConfig:
    """Annulus-truncation study: power-law velocity on the unit box."""
    return ExperimentConfig(
        grid=GridSection(n_points=64, box_length=L_UNIT),
        model=ModelSection(d1=0.02, d2=0.02, d3=0.02, chi0=0.5,
                           phi_amplitude=0.1, epsilon=0.05,
                           cutoff_R=1e6, trunc_k=16.0),
        initial=InitialSection(
            blobs=((0.5 * L_UNIT, 0.5 * L_UNIT, 1.0, 1.0),),
            n0_floor=1e-4, c0_max=1.0, c0_width=1.2, c0_floor_frac=0.2,
            u0_energy=1.0, u0_band_lo=1, u0_band_hi=21, u0_alpha=2.0, seed=13),
        noise=NoiseSection(kind="off"),
        integrator=IntegratorSection(dt=2e-3, t_final=0.256, checkpoint_stride=16,
                                     cfl_override=True),
        dynamics=DynamicsSection(level="mod2"),
        converge=ConvergeSection(axis="k", levels=(4.0, 8.0, 16.0)),
    )


def b2_passing_config(**integrator_kw) -> ExperimentConfig:
    """Large-diffusion run whose data satisfies the coefficient condition."""
    integ = dict(dt=2e-3, t_final=1.0, checkpoint_stride=50)
    integ.update(integrator_kw)
    return ExperimentConfig(
        grid=GridSection(n_points=64, box_length=L_PROD),
        model=ModelSection(d1=10.0, d2=10.0, d3=1.0, chi0=1.0,
                           phi_amplitude=0.3, epsilon=0.1),
        initial=InitialSection(
            blobs=((0.5 * L_PROD, 0.5 * L_PROD, 0.2, 2.5),),
            n0_floor=1e-6, c0_max=1.0, c0_width=8.0, c0_floor_frac=0.2,
            u0_energy=0.25, u0_band_lo=1, u0_band_hi=3, seed=11),
        noise=NoiseSection(kind="off"),
        integrator=IntegratorSection(**integ),
        dynamics=DynamicsSection(level="mod1"),
    )


def direct_dft(values: np.ndarray) -> np.ndarray:
    """O(N^4) discrete Fourier transform, the independent transform oracle."""
    n = values.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for p in range(n):
        for q in range(n):
            acc = 0.0 + 0.0j
            for a in range(n):
                for b in range(n):
                    acc += values[a, b] * np.exp(-2j * np.pi * (p * a + q * b) / n)
            out[p, q] = acc
    return out


def direct_convolution(ah: np.ndarray, bh: np.ndarray) -> np.ndarray:
    """Circular spectral convolution (a*b)_hat = (1/N^2) sum a(eta) b(xi-eta)."""
    n = ah.shape[0]
    out = np.zeros_like(ah)
    for p in range(n):
        for q in range(n):
            acc = 0.0 + 0.0j
            for a in range(n):
                for b in range(n):
                    acc += ah[a, b] * bh[(p - a) % n, (q - b) % n]
            out[p, q] = acc / n**2
    return out
