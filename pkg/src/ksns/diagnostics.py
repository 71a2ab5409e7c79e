"""Scalar observables: masses, norms, entropy-energy pairs, balances.

Two Lyapunov pairs are tracked.  The first,

    F1 = ||(n+1) ln(n+1)||_L1 + 1/2 ||grad h(c)||_L2^2 + C_c0 ||u||_L2^2
    G1 = 2 ||grad sqrt(n+1)||^2 + 1/12 ||lap h(c)||^2
         + 1/24 ||sqrt(g(c)) |grad h(c)|||_L4^4 + C_c0 ||grad u||^2,

drives the unconditional existence estimate; the second,

    F2 = int n (ln n + 2 w) + 4 + ||grad c||^2
         + (4 L^4 ||c0||_inf^2 / (d3 d2)) (1 + ||u||^2)
    G2 = d1/2 ||grad sqrt n||^2 + d2/2 ||lap c||^2
         + (2 L^4 ||c0||_inf^2 / d2) ||grad u||^2,

carries the large-diffusion regime, with w the box-centered distance
weight standing in for <x> and L the Gagliardo-Nirenberg constant.
Logarithms use the continuous extension at 0 and never see negative
arguments; the flooring of c applied inside h', g is reported as the mass
fraction it touches.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields

import numpy as np

from .model import ModelParams, box_distance_weight
from .spectral import (
    ScalarField,
    VectorField,
    dealias,
    gradient,
    inner_l2,
    laplacian,
    norm,
    scalar_from_values,
)

_LOG_TINY = 1e-300


@dataclass
class DiagnosticsRecord:
    """One row of the per-step observable stream."""

    time: float
    mass_n: float
    min_n: float
    linf_c: float
    l2_u: float
    h1_u: float
    entropy_F1: float
    dissipation_G1: float
    entropy_F2: float
    dissipation_G2: float
    f2_certificate: float
    energy_balance_defect: float
    floored_fraction: float
    blow_up: bool = False


CSV_COLUMNS = [f.name for f in fields(DiagnosticsRecord)]


def write_diagnostics_csv(path, records: list[DiagnosticsRecord]) -> None:
    """Locale-independent CSV, one row per step, deterministic column order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([
                repr(getattr(rec, col)) if col != "blow_up" else int(rec.blow_up)
                for col in CSV_COLUMNS
            ])


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.asarray(rows) if rows else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


# ---------------------------------------------------------------------------
# helper fields


def _floored_c(c_vals: np.ndarray, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    floor = params.c_floor
    return np.maximum(c_vals, floor), c_vals < floor


def floored_mass_fraction(state, params: ModelParams) -> float:
    """Share of the cell mass sitting where c had to be floored."""
    n_vals = np.maximum(state.n.real_values(), 0.0)
    _, mask = _floored_c(state.c.real_values(), params)
    total = float(np.sum(n_vals))
    if total <= 0:
        return 0.0
    return float(np.sum(n_vals[mask]) / total)


def grad_h_of_c(state, params: ModelParams) -> VectorField:
    """grad h(c) = h'(c) grad c with the c-floor applied inside h'."""
    grid = state.grid
    c_vals, _ = _floored_c(state.c.real_values(), params)
    hp = params.sensitivity.h_prime(c_vals)
    g1, g2 = gradient(state.c).real_values()
    return VectorField(
        scalar_from_values(grid, hp * g1),
        scalar_from_values(grid, hp * g2),
    )


def laplacian_h_of_c(state, params: ModelParams) -> ScalarField:
    """lap h(c) = h'(c) lap c + h''(c) |grad c|^2, dealiased real-space products."""
    grid = state.grid
    c_vals, _ = _floored_c(state.c.real_values(), params)
    hp = params.sensitivity.h_prime(c_vals)
    hpp = params.sensitivity.h_second(c_vals)
    lap_c = laplacian(state.c).real_values()
    g1, g2 = gradient(state.c).real_values()
    return dealias(scalar_from_values(grid, hp * lap_c + hpp * (g1**2 + g2**2)))


# ---------------------------------------------------------------------------
# first entropy pair


def entropy_f1(state, params: ModelParams) -> float:
    n_vals = np.maximum(state.n.real_values(), 0.0)
    grid = state.grid
    ent = float(np.sum((n_vals + 1.0) * np.log(n_vals + 1.0)) * grid.cell_area)
    grad_h = grad_h_of_c(state, params)
    return (
        ent
        + 0.5 * norm(grad_h, "L2") ** 2
        + params.diagnostics.c_c0 * norm(state.u, "L2") ** 2
    )


def dissipation_g1(state, params: ModelParams) -> float:
    grid = state.grid
    n_vals = np.maximum(state.n.real_values(), 0.0)
    sqrt_np1 = scalar_from_values(grid, np.sqrt(n_vals + 1.0))
    term_n = 2.0 * norm(gradient(sqrt_np1), "L2") ** 2

    lap_h = laplacian_h_of_c(state, params)
    term_lap = norm(lap_h, "L2") ** 2 / 12.0

    c_vals, _ = _floored_c(state.c.real_values(), params)
    g_vals = params.sensitivity.g(c_vals)
    gh1, gh2 = grad_h_of_c(state, params).real_values()
    quartic = float(np.sum(g_vals**2 * (gh1**2 + gh2**2) ** 2) * grid.cell_area)
    term_quartic = quartic / 24.0

    gu1 = gradient(state.u.u1)
    gu2 = gradient(state.u.u2)
    term_u = params.diagnostics.c_c0 * (norm(gu1, "L2") ** 2 + norm(gu2, "L2") ** 2)
    return term_n + term_lap + term_quartic + term_u


# ---------------------------------------------------------------------------
# second entropy pair


def _n_log_terms(state, weight_vals: np.ndarray) -> tuple[float, float]:
    """(int n (ln n + 2 w), int n |ln n|) with n ln n := 0 at n <= 0."""
    grid = state.grid
    n_vals = np.maximum(state.n.real_values(), 0.0)
    logs = np.where(n_vals > 0, np.log(np.maximum(n_vals, _LOG_TINY)), 0.0)
    signed = float(np.sum(n_vals * (logs + 2.0 * weight_vals)) * grid.cell_area)
    absolute = float(np.sum(n_vals * np.abs(logs)) * grid.cell_area)
    return signed, absolute


def entropy_f2(state, params: ModelParams, lambda_gn: float | None = None,
               weight: ScalarField | None = None) -> tuple[float, float]:
    """Second entropy and its lower-bound certificate.

    Returns (value, certificate) where certificate = int n |ln n| dx; the
    decomposition argument guarantees certificate <= int n (ln n + 2w) + 4,
    i.e. the entropy dominates the certificate whenever the remaining
    nonnegative terms are added.
    """
    lam = params.diagnostics.lambda_gn if lambda_gn is None else lambda_gn
    w = weight if weight is not None else box_distance_weight(state.grid)
    signed, certificate = _n_log_terms(state, w.real_values())
    coeff = 4.0 * lam**4 * params.diagnostics.c0_linf**2 / (params.d3 * params.d2)
    value = (
        signed
        + 4.0
        + norm(gradient(state.c), "L2") ** 2
        + coeff * (1.0 + norm(state.u, "L2") ** 2)
    )
    return value, certificate


def dissipation_g2(state, params: ModelParams, lambda_gn: float | None = None) -> float:
    lam = params.diagnostics.lambda_gn if lambda_gn is None else lambda_gn
    grid = state.grid
    n_vals = np.maximum(state.n.real_values(), 0.0)
    sqrt_n = scalar_from_values(grid, np.sqrt(n_vals))
    term_n = 0.5 * params.d1 * norm(gradient(sqrt_n), "L2") ** 2
    term_c = 0.5 * params.d2 * norm(laplacian(state.c), "L2") ** 2
    coeff = 2.0 * lam**4 * params.diagnostics.c0_linf**2 / params.d2
    gu1 = gradient(state.u.u1)
    gu2 = gradient(state.u.u2)
    term_u = coeff * (norm(gu1, "L2") ** 2 + norm(gu2, "L2") ** 2)
    return term_n + term_c + term_u


# ---------------------------------------------------------------------------
# energy balance and uniqueness distance


def grad_u_norm_sq(u: VectorField) -> float:
    return norm(gradient(u.u1), "L2") ** 2 + norm(gradient(u.u2), "L2") ** 2


def forcing_power(state, params: ModelParams, level: str = "full") -> float:
    """(u, M[n grad phi])_L2, the work done by the gravitational forcing."""
    grid = state.grid
    n_vals = state.n.real_values()
    gp1, gp2 = params.grad_potential.real_values()
    force = VectorField(
        scalar_from_values(grid, n_vals * gp1),
        scalar_from_values(grid, n_vals * gp2),
    )
    if level in ("mod1", "mod2") and params.epsilon > 0:
        from .spectral import mollify_vector

        force = mollify_vector(force, params.epsilon)
    return inner_l2(state.u, force)


def energy_balance_defect(states: list, dt: float, params: ModelParams,
                          level: str = "full", noise_active: bool = False) -> float:
    """|1/2 ||u(t2)||^2 - 1/2 ||u(t1)||^2 + d3 int ||grad u||^2 - int (u, M[n grad phi])|.

    Noise-free deduction from the velocity equation; calling it on a noisy
    segment is an invalid context because the martingale term is missing.
    Time integrals are trapezoidal on the given states.
    """
    if noise_active:
        raise ValueError("energy balance defect is only defined on noise-free segments")
    if len(states) < 2:
        return 0.0
    visc = [grad_u_norm_sq(st.u) for st in states]
    work = [forcing_power(st, params, level) for st in states]
    int_visc = float(np.trapezoid(visc, dx=dt))
    int_work = float(np.trapezoid(work, dx=dt))
    e_start = 0.5 * norm(states[0].u, "L2") ** 2
    e_end = 0.5 * norm(states[-1].u, "L2") ** 2
    return abs(e_end - e_start + params.d3 * int_visc - int_work)


def uniqueness_functional(a, b) -> float:
    """D = ||n_a - n_b||^2 + ||c_a - c_b||^2 + ||grad(c_a - c_b)||^2 + ||u_a - u_b||^2."""
    if a.grid != b.grid:
        raise ValueError("states live on different grids")
    grid = a.grid
    dn = scalar_from_values(grid, a.n.real_values() - b.n.real_values())
    dc = scalar_from_values(grid, a.c.real_values() - b.c.real_values())
    a1, a2 = a.u.real_values()
    b1, b2 = b.u.real_values()
    du = VectorField(scalar_from_values(grid, a1 - b1), scalar_from_values(grid, a2 - b2))
    return (
        norm(dn, "L2") ** 2
        + norm(dc, "L2") ** 2
        + norm(gradient(dc), "L2") ** 2
        + norm(du, "L2") ** 2
    )


def gronwall_factor(a, b) -> float:
    """Norm products controlling the growth of the uniqueness distance.

    F_hat = ||n_b||^2 ||grad n_b||^2 + ||grad c_b||^2 ||c_b||_H2^2
          + ||n_a||^2 ||grad n_a||^2 + ||u_b||^2 ||grad u_b||^2
          + ||c_a||^2 ||grad c_a||^2 + ||u_a||^2 ||grad u_a||^2
          + ||n_a||^2 + 1.
    """
    na = norm(a.n, "L2")
    nb = norm(b.n, "L2")
    gna = norm(gradient(a.n), "L2")
    gnb = norm(gradient(b.n), "L2")
    ca = norm(a.c, "L2")
    gca = norm(gradient(a.c), "L2")
    gcb = norm(gradient(b.c), "L2")
    cb_h2 = norm(b.c, "Hs", s=2.0)
    ua = norm(a.u, "L2")
    ub = norm(b.u, "L2")
    gua = np.sqrt(grad_u_norm_sq(a.u))
    gub = np.sqrt(grad_u_norm_sq(b.u))
    return float(
        nb**2 * gnb**2 + gcb**2 * cb_h2**2 + na**2 * gna**2 + ub**2 * gub**2
        + ca**2 * gca**2 + ua**2 * gua**2 + na**2 + 1.0
    )


# ---------------------------------------------------------------------------
# per-step record assembly


def make_record(state, params: ModelParams, *, defect: float = 0.0,
                weight: ScalarField | None = None, blow_up: bool = False) -> DiagnosticsRecord:
    f2, certificate = entropy_f2(state, params, weight=weight)
    return DiagnosticsRecord(
        time=state.time,
        mass_n=norm(state.n, "L1"),
        min_n=float(np.min(state.n.real_values())),
        linf_c=norm(state.c, "Linf"),
        l2_u=norm(state.u, "L2"),
        h1_u=norm(state.u, "Hs", s=1.0),
        entropy_F1=entropy_f1(state, params),
        dissipation_G1=dissipation_g1(state, params),
        entropy_F2=f2,
        dissipation_G2=dissipation_g2(state, params),
        f2_certificate=certificate,
        energy_balance_defect=defect,
        floored_fraction=floored_mass_fraction(state, params),
        blow_up=blow_up,
    )
