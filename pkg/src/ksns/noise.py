"""Truncated cylindrical Wiener increments and the stochastic forcing operator.

Increments are drawn from counter-based Philox streams keyed by
(seed, mode index), so regeneration is bit-identical and independent of
evaluation order, and ensembles can hand out disjoint seeds safely.
Refinement hierarchies generate the finest level first and build coarser
paths by pairwise summation, which makes the telescoping identity exact in
floating point and gives all refinement levels one common Brownian motion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    leray_project,
    norm,
    scalar_from_values,
)

LINEAR = "linear_multiplicative"
DIAGONAL = "diagonal"
OFF = "off"


@dataclass(frozen=True)
class NoiseSpec:
    """Description of the forcing f(t, u) dW on the velocity equation.

    linear_multiplicative: single-channel f(u) = strength * u.
    diagonal: f_j(u) = sigma_j * q_j(x) * u with trigonometric shapes q_j.
    off: every evaluation returns zero fields.
    """

    kind: str = OFF
    strength: float = 0.0
    sigmas: tuple[float, ...] = ()
    n_modes: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (LINEAR, DIAGONAL, OFF):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == DIAGONAL:
            if len(self.sigmas) != self.n_modes:
                raise ValueError("diagonal noise needs one sigma per mode")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")

    @property
    def active(self) -> bool:
        return self.kind != OFF and (self.kind != LINEAR or self.strength != 0.0)

    def sigma_sq_sum(self) -> float:
        """Truncated trace surrogate Sum_j sigma_j^2 (reported, must be finite)."""
        if self.kind == LINEAR:
            return float(self.strength**2)
        if self.kind == DIAGONAL:
            return float(np.sum(np.asarray(self.sigmas) ** 2))
        return 0.0


def shape_function(grid: Grid, j: int) -> np.ndarray:
    """Spatial shape q_j for diagonal noise: 1, then unit-amplitude trig modes.

    j = 0 is constant; odd/even j >= 1 alternate cos/sin over low wavenumbers
    cycling through the two axes.
    """
    if j == 0:
        return np.ones((grid.n_points, grid.n_points))
    x1, x2 = grid.x
    m = (j + 1) // 2
    axis = x1 if (m % 2 == 1) else x2
    wave = ((m + 1) // 2) * 2.0 * np.pi / grid.box_length
    if j % 2 == 1:
        return np.cos(wave * axis)
    return np.sin(wave * axis)


@dataclass(frozen=True)
class NoisePath:
    """Seeded table of Wiener increments, one row per step, one column per mode."""

    seed: int
    dt: float
    increments: np.ndarray  # shape (n_steps, n_modes)

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def n_modes(self) -> int:
        return self.increments.shape[1]

    def coarsen(self, factor: int) -> "NoisePath":
        """Exact pairwise-summed path at dt * factor (factor divides n_steps)."""
        if factor < 1 or self.n_steps % factor != 0:
            raise ValueError(f"coarsening factor {factor} does not divide {self.n_steps}")
        if factor == 1:
            return self
        grouped = self.increments.reshape(self.n_steps // factor, factor, self.n_modes)
        return NoisePath(self.seed, self.dt * factor, grouped.sum(axis=1))


def sample_path(spec: NoiseSpec, n_steps: int, dt: float, seed: int) -> NoisePath:
    """Draw Normal(0, dt) increments for every (step, mode) pair.

    Each mode gets an independent Philox substream keyed (seed, mode), so
    adding modes never perturbs existing ones.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not dt > 0:
        raise ValueError("dt must be positive")
    cols = []
    root = np.sqrt(dt)
    for j in range(spec.n_modes):
        rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(j)]))
        cols.append(root * rng.standard_normal(n_steps))
    return NoisePath(seed, dt, np.column_stack(cols))


def sample_refinement_hierarchy(
    spec: NoiseSpec, n_steps_coarse: int, dt_coarse: float, n_levels: int, seed: int
) -> list[NoisePath]:
    """Paths at dt, dt/2, ..., dt/2^(n_levels-1) sharing one Brownian motion.

    The finest level is sampled directly; every coarser increment is the
    exact floating-point sum of its 2^m children.  Returned coarsest first.
    """
    if n_levels < 1:
        raise ValueError("need at least one level")
    factor = 2 ** (n_levels - 1)
    levels = [sample_path(spec, n_steps_coarse * factor, dt_coarse / factor, seed)]
    for _ in range(n_levels - 1):
        levels.append(levels[-1].coarsen(2))
    return levels[::-1]


def eval_noise_operator(
    u: VectorField, spec: NoiseSpec, mode_j: int, project: bool = True
) -> VectorField:
    """Single diffusion channel f_j(u), Leray-projected by default.

    linear_multiplicative carries all its weight on channel 0; diagonal
    channels scale u pointwise by sigma_j q_j(x).
    """
    if mode_j < 0 or mode_j >= spec.n_modes:
        raise ValueError(f"mode {mode_j} out of range for {spec.n_modes} modes")
    grid = u.grid
    if spec.kind == OFF:
        return VectorField(
            scalar_from_values(grid, np.zeros((grid.n_points, grid.n_points))),
            scalar_from_values(grid, np.zeros((grid.n_points, grid.n_points))),
        )
    if spec.kind == LINEAR:
        factor = spec.strength if mode_j == 0 else 0.0
        v1, v2 = u.real_values()
        out = VectorField(
            scalar_from_values(grid, factor * v1),
            scalar_from_values(grid, factor * v2),
        )
    else:
        shape = spec.sigmas[mode_j] * shape_function(grid, mode_j)
        v1, v2 = u.real_values()
        out = VectorField(
            scalar_from_values(grid, shape * v1),
            scalar_from_values(grid, shape * v2),
        )
    if project:
        out = leray_project(out).to_real()
    return out


def noise_increment(u: VectorField, spec: NoiseSpec, increments_row: np.ndarray) -> VectorField:
    """Sum_j P f_j(u) dW_j for one step's increment row."""
    grid = u.grid
    if spec.kind == OFF:
        return VectorField(
            scalar_from_values(grid, np.zeros((grid.n_points, grid.n_points))),
            scalar_from_values(grid, np.zeros((grid.n_points, grid.n_points))),
        )
    if spec.kind == LINEAR:
        f = eval_noise_operator(u, spec, 0, project=True)
        dw = float(increments_row[0])
        return VectorField(
            scalar_from_values(grid, dw * f.u1.real_values()),
            scalar_from_values(grid, dw * f.u2.real_values()),
        )
    acc1 = np.zeros((grid.n_points, grid.n_points))
    acc2 = np.zeros((grid.n_points, grid.n_points))
    v1, v2 = u.real_values()
    for j in range(spec.n_modes):
        shape = spec.sigmas[j] * shape_function(grid, j) * float(increments_row[j])
        acc1 += shape * v1
        acc2 += shape * v2
    summed = VectorField(scalar_from_values(grid, acc1), scalar_from_values(grid, acc2))
    return leray_project(summed).to_real()


def hilbert_schmidt_norm(u: VectorField, spec: NoiseSpec, s: float) -> float:
    """Sum_j ||f_j(u)||_{H^s}^2 over the truncated channels.

    Evaluated on the raw (unprojected) operator, the quantity the
    linear-growth hypothesis constrains; the projection is an H^s
    contraction so the bound transfers.
    """
    if spec.kind == OFF:
        return 0.0
    total = 0.0
    for j in range(spec.n_modes):
        f = eval_noise_operator(u, spec, j, project=False)
        total += norm(f, "Hs", s=s) ** 2
    return float(total)
