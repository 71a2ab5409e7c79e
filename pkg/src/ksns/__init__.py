"""Pseudo-spectral solver and verification harness for a stochastic
chemotaxis-fluid system (Keller-Segel dynamics of consumption type coupled
to stochastically forced incompressible Navier-Stokes flow) on a 2D torus.
"""

from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    dealias,
    differentiate,
    gradient,
    laplacian,
    leray_project,
    mollify,
    norm,
    transform,
    truncate_jk,
    vorticity_velocity,
)
from .model import (
    InitialData,
    ModelParams,
    SensitivityModel,
    build_initial_state,
    check_b2,
    estimate_gn_constant,
    eval_sensitivity,
    make_params,
    validate_assumptions,
)
from .noise import NoisePath, NoiseSpec, eval_noise_operator, hilbert_schmidt_norm, sample_path
from .dynamics import CutoffConfig, State, Tendency, assemble_tendency, theta_r, weak_residual
from .integrator import StepConfig, Trajectory, cfl_suggest, run, step
from .diagnostics import (
    DiagnosticsRecord,
    dissipation_g1,
    dissipation_g2,
    energy_balance_defect,
    entropy_f1,
    entropy_f2,
    uniqueness_functional,
)
from .config import ExperimentConfig, from_ini, load_config, to_ini

__version__ = "0.1.0"
