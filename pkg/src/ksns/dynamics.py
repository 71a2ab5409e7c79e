"""Right-hand sides of the chemotaxis-fluid system and its regularizations.

Three assembly levels share one code path:

  full   du/dt terms of the raw coupled system,
  mod1   nonlinear fluxes smoothed by the Gaussian mollifier,
  mod2   additionally band-passed by the annulus projector J_k and gated
         by smooth cut-offs theta_R of W^{1,inf} norms.

The n-equation is kept in divergence form so its spatial mean is exactly
conserved (the zero mode of every term vanishes); the velocity tendency is
Leray-projected mode by mode.  Nonlinear products are formed in real space
and two-thirds dealiased.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .spectral import (
    Grid,
    ScalarField,
    VectorField,
    dealias,
    dealias_vector,
    divergence,
    gradient,
    inner_l2,
    laplacian,
    laplacian_vector,
    leray_project,
    mollify,
    mollify_vector,
    norm,
    scalar_from_spectral,
    scalar_from_values,
    truncate_jk,
    truncate_jk_vector,
    w1inf_norm,
    w1inf_pair,
)

FULL = "full"
MOD1 = "mod1"
MOD2 = "mod2"
LEVELS = (FULL, MOD1, MOD2)


class BlowUpError(RuntimeError):
    """Non-finite value detected while assembling a tendency term."""

    def __init__(self, term: str, message: str = ""):
        self.term = term
        super().__init__(message or f"non-finite values in term '{term}'")


@dataclass(frozen=True)
class State:
    """Solution triple (n, c, u) at one instant; all fields share one grid."""

    n: ScalarField
    c: ScalarField
    u: VectorField
    time: float = 0.0

    def __post_init__(self):
        g = self.n.grid
        if self.c.grid != g or self.u.grid != g:
            raise ValueError("state fields live on different grids")

    @property
    def grid(self) -> Grid:
        return self.n.grid

    def dealiased(self) -> "State":
        return State(dealias(self.n), dealias(self.c), dealias_vector(self.u), self.time)


@dataclass(frozen=True)
class Tendency:
    """Stiff (diffusion) and nonstiff (advection/coupling/forcing) parts.

    Stiff parts are exactly -d_i |xi|^2 multiplications of the state; the
    integrator replaces them by the matching integrating factor.  All
    fields are spectral.
    """

    dn_stiff: ScalarField
    dn_nonstiff: ScalarField
    dc_stiff: ScalarField
    dc_nonstiff: ScalarField
    du_stiff: VectorField
    du_nonstiff: VectorField

    @property
    def dn(self) -> ScalarField:
        return scalar_from_spectral(
            self.dn_stiff.grid, self.dn_stiff.spectral() + self.dn_nonstiff.spectral()
        )

    @property
    def dc(self) -> ScalarField:
        return scalar_from_spectral(
            self.dc_stiff.grid, self.dc_stiff.spectral() + self.dc_nonstiff.spectral()
        )

    @property
    def du(self) -> VectorField:
        a1, a2 = self.du_stiff.spectral()
        b1, b2 = self.du_nonstiff.spectral()
        g = self.du_stiff.grid
        return VectorField(scalar_from_spectral(g, a1 + b1), scalar_from_spectral(g, a2 + b2))


@dataclass(frozen=True)
class CutoffConfig:
    """Smooth gate theta_R: 1 on [0, R], 0 on [2R, inf), quintic in between."""

    R: float = np.inf

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("cutoff radius R must be positive")


def theta_r(x: float, cfg: CutoffConfig) -> float:
    """Evaluate the cut-off gate at x >= 0.

    The transition on (R, 2R) is the symmetric quintic smoothstep
    1 - (6 s^5 - 15 s^4 + 10 s^3), s = (x - R)/R, which is monotone,
    C^2 at both junctions and equals 1/2 at x = 1.5 R.
    """
    if x < 0:
        raise ValueError(f"theta_R argument must be nonnegative, got {x}")
    if np.isinf(cfg.R):
        return 1.0
    if x <= cfg.R:
        return 1.0
    if x >= 2.0 * cfg.R:
        return 0.0
    s = (x - cfg.R) / cfg.R
    return 1.0 - (6.0 * s**5 - 15.0 * s**4 + 10.0 * s**3)


def _scaled(fld: ScalarField, factor: float) -> ScalarField:
    return scalar_from_spectral(fld.grid, factor * fld.spectral())


def _scaled_vec(vec: VectorField, factor: float) -> VectorField:
    return VectorField(_scaled(vec.u1, factor), _scaled(vec.u2, factor))


def _vec_sum(*vecs: VectorField) -> VectorField:
    g = vecs[0].grid
    a1 = sum(v.u1.spectral() for v in vecs)
    a2 = sum(v.u2.spectral() for v in vecs)
    return VectorField(scalar_from_spectral(g, a1), scalar_from_spectral(g, a2))


def _check_finite(name: str, *arrays) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise BlowUpError(name)


def chemotactic_flux_direction(c: ScalarField, params: ModelParams) -> VectorField:
    """chi(c) grad c, using the exact gradient form for constant chi.

    With chi = chi0 the flux direction is the gradient of chi0 * c, which
    the spectral derivative evaluates exactly; tabulated laws fall back to
    the dealiased real-space product.
    """
    sens = params.sensitivity
    if sens.kind == "prototype_linear":
        return gradient(_scaled(c, sens.chi0))
    c_vals = c.real_values()
    chi_vals = sens.chi(np.clip(c_vals, 0.0, sens.c_max))
    gc1, gc2 = gradient(c).real_values()
    return dealias_vector(VectorField(
        scalar_from_values(c.grid, chi_vals * gc1),
        scalar_from_values(c.grid, chi_vals * gc2),
    ))


def assemble_tendency(state: State, params: ModelParams, level: str = FULL) -> Tendency:
    """Drift of the chosen system level at the given state.

    Preconditions: state fields dealiased; epsilon > 0 for mod1/mod2;
    finite trunc_k and cutoff_R for mod2.  Raises SensitivityRangeError if
    the concentration exceeds the validated ceiling and BlowUpError when a
    term goes non-finite.
    """
    if level not in LEVELS:
        raise ValueError(f"unknown assembly level {level!r}")
    if level in (MOD1, MOD2) and not params.epsilon > 0:
        raise ValueError(f"level {level} requires a positive mollifier scale")
    if level == MOD2 and not (np.isfinite(params.trunc_k) and np.isfinite(params.cutoff_R)):
        raise ValueError("mod2 requires finite trunc_k and cutoff_R")

    grid = state.grid
    sens = params.sensitivity
    n, c, u = state.n, state.c, state.u

    c_vals = c.real_values()
    sens.check_range(c_vals)
    _check_finite("state", n.real_values(), c_vals, *u.real_values())

    if level == MOD2:
        cfg = CutoffConfig(params.cutoff_R)
        k = params.trunc_k
        jn = truncate_jk(n, k)
        jc = truncate_jk(c, k)
        ju = truncate_jk_vector(u, k)
        gate_un = theta_r(w1inf_pair(u, n), cfg)
        gate_nc = theta_r(w1inf_pair(n, c), cfg)
        gate_uc = theta_r(w1inf_pair(u, c), cfg)
        gate_u = theta_r(w1inf_norm(u), cfg)
    else:
        jn, jc, ju = n, c, u
        gate_un = gate_nc = gate_uc = gate_u = 1.0

    def moll(fld):
        return mollify(fld, params.epsilon) if level in (MOD1, MOD2) else fld

    def moll_vec(vec):
        return mollify_vector(vec, params.epsilon) if level in (MOD1, MOD2) else vec

    def outer(fld):
        return truncate_jk(fld, params.trunc_k) if level == MOD2 else fld

    def outer_vec(vec):
        return truncate_jk_vector(vec, params.trunc_k) if level == MOD2 else vec

    # --- n equation: d1 lap n - div(u n) - div(n M[chi(c) grad c]) ----------
    dn_stiff = _scaled(laplacian(n), params.d1)

    jn_vals = jn.real_values()
    ju1, ju2 = ju.real_values()
    adv_n = dealias_vector(VectorField(
        scalar_from_values(grid, ju1 * jn_vals),
        scalar_from_values(grid, ju2 * jn_vals),
    ))
    _check_finite("u*n advection", *adv_n.real_values())

    flux_dir = moll_vec(chemotactic_flux_direction(jc, params))
    fd1, fd2 = flux_dir.real_values()
    chem_flux = dealias_vector(VectorField(
        scalar_from_values(grid, jn_vals * fd1),
        scalar_from_values(grid, jn_vals * fd2),
    ))
    _check_finite("n*chi(c)*grad c flux", *chem_flux.real_values())
    dn_nonstiff = outer(scalar_from_spectral(
        grid,
        -gate_un * divergence(adv_n).spectral() - gate_nc * divergence(chem_flux).spectral(),
    ))

    # --- c equation: d2 lap c - u . grad c - kappa(c) M[n] ------------------
    dc_stiff = _scaled(laplacian(c), params.d2)

    jc_vals = jc.real_values()
    gc1, gc2 = gradient(jc).real_values()
    adv_c = dealias(scalar_from_values(grid, ju1 * gc1 + ju2 * gc2))
    _check_finite("u.grad c advection", adv_c.real_values())

    kappa_vals = sens.kappa(np.clip(jc_vals, 0.0, sens.c_max))
    moll_n = moll(jn).real_values()
    consumption = dealias(scalar_from_values(grid, kappa_vals * moll_n))
    _check_finite("kappa(c)*n consumption", consumption.real_values())
    dc_nonstiff = outer(scalar_from_spectral(
        grid, -gate_uc * adv_c.spectral() - gate_nc * consumption.spectral()
    ))

    # --- u equation: d3 lap u - P(u.grad u) + P M[n grad phi] ---------------
    du_stiff = _scaled_vec(laplacian_vector(u), params.d3)

    gu11, gu12 = gradient(ju.u1).real_values()
    gu21, gu22 = gradient(ju.u2).real_values()
    adv_u = dealias_vector(VectorField(
        scalar_from_values(grid, ju1 * gu11 + ju2 * gu12),
        scalar_from_values(grid, ju1 * gu21 + ju2 * gu22),
    ))
    _check_finite("u.grad u advection", *adv_u.real_values())

    gp1, gp2 = params.grad_potential.real_values()
    forcing = moll_vec(dealias_vector(VectorField(
        scalar_from_values(grid, jn_vals * gp1),
        scalar_from_values(grid, jn_vals * gp2),
    )))
    _check_finite("n grad(phi) forcing", *forcing.real_values())
    du_nonstiff = outer_vec(leray_project(_vec_sum(
        _scaled_vec(adv_u, -gate_u), forcing
    )))

    return Tendency(
        dn_stiff=dn_stiff, dn_nonstiff=dn_nonstiff,
        dc_stiff=dc_stiff, dc_nonstiff=dc_nonstiff,
        du_stiff=du_stiff, du_nonstiff=du_nonstiff,
    )


# ---------------------------------------------------------------------------
# weak-formulation residuals


def weak_residual(
    states: list[State],
    dt: float,
    params: ModelParams,
    which: str,
    test_scalar: ScalarField | None = None,
    test_vector: VectorField | None = None,
    level: str = FULL,
    noise_spec=None,
    noise_increments: np.ndarray | None = None,
) -> np.ndarray:
    """Residual of the time-integrated weak form along a state sequence.

    For which = "n" this is

        <n(t), phi> - <n(0), phi> - int_0^t <u n - d1 grad n + n X(c), grad phi>

    with X(c) the (possibly mollified) chemotactic flux direction, and the
    c/u analogues otherwise; the u case adds the Ito sum of the noise
    integral reconstructed from the provided increments.  Time integrals
    use trapezoidal quadrature on the given states (spacing dt); the
    noise term uses left-point Ito sums.  Returns one residual per state.
    """
    if which not in ("n", "c", "u"):
        raise ValueError(f"unknown residual component {which!r}")
    if len(states) < 1:
        raise ValueError("need at least one state")
    grid = states[0].grid

    if which in ("n", "c"):
        if test_scalar is None:
            raise ValueError("scalar residuals require test_scalar")
        phi = test_scalar
        grad_phi = gradient(phi)
    else:
        if test_vector is None:
            raise ValueError("u residual requires test_vector")
        psi = test_vector
        div_psi = norm(divergence(psi), "L2")
        if div_psi > 1e-10 * max(norm(psi, "L2"), 1e-300):
            raise ValueError(f"test vector must be divergence-free; ||div psi|| = {div_psi:.3e}")

    def moll(fld):
        return mollify(fld, params.epsilon) if level in (MOD1, MOD2) else fld

    def moll_vec(vec):
        return mollify_vector(vec, params.epsilon) if level in (MOD1, MOD2) else vec

    def drift_integrand(st: State) -> float:
        n_vals = st.n.real_values()
        if which == "n":
            u1, u2 = st.u.real_values()
            gn = gradient(st.n)
            gn1, gn2 = gn.real_values()
            flux = moll_vec(chemotactic_flux_direction(st.c, params))
            f1, f2 = flux.real_values()
            vec1 = u1 * n_vals - params.d1 * gn1 + n_vals * f1
            vec2 = u2 * n_vals - params.d1 * gn2 + n_vals * f2
            gp1, gp2 = grad_phi.real_values()
            return float(np.sum(vec1 * gp1 + vec2 * gp2) * grid.cell_area)
        if which == "c":
            u1, u2 = st.u.real_values()
            c_vals = st.c.real_values()
            gc1, gc2 = gradient(st.c).real_values()
            gp1, gp2 = grad_phi.real_values()
            adv_diff = np.sum(
                (u1 * c_vals - params.d2 * gc1) * gp1 + (u2 * c_vals - params.d2 * gc2) * gp2
            )
            kappa_vals = params.sensitivity.kappa(
                np.clip(c_vals, 0.0, params.sensitivity.c_max))
            sink = np.sum(kappa_vals * moll(st.n).real_values() * phi.real_values())
            return float((adv_diff - sink) * grid.cell_area)
        u1, u2 = st.u.real_values()
        gpsi11, gpsi12 = gradient(psi.u1).real_values()
        gpsi21, gpsi22 = gradient(psi.u2).real_values()
        gu11, gu12 = gradient(st.u.u1).real_values()
        gu21, gu22 = gradient(st.u.u2).real_values()
        # (u x u - d3 grad u) : grad psi, with (grad u)_{ij} = d_i u_j
        tensor = (
            u1 * u1 * gpsi11 + u2 * u1 * gpsi12
            + u1 * u2 * gpsi21 + u2 * u2 * gpsi22
            - params.d3 * (gu11 * gpsi11 + gu12 * gpsi12 + gu21 * gpsi21 + gu22 * gpsi22)
        )
        gphi1, gphi2 = params.grad_potential.real_values()
        force = moll_vec(VectorField(
            scalar_from_values(grid, n_vals * gphi1),
            scalar_from_values(grid, n_vals * gphi2),
        ))
        fv1, fv2 = force.real_values()
        p1, p2 = psi.real_values()
        return float(np.sum(tensor + fv1 * p1 + fv2 * p2) * grid.cell_area)

    def pairing(st: State) -> float:
        if which == "n":
            return inner_l2(st.n, phi)
        if which == "c":
            return inner_l2(st.c, phi)
        return inner_l2(st.u, psi)

    base = pairing(states[0])
    integrands = [drift_integrand(st) for st in states]
    residuals = np.zeros(len(states))
    running = 0.0
    noise_running = 0.0
    from .noise import noise_increment

    for m, st in enumerate(states):
        if m > 0:
            running += 0.5 * dt * (integrands[m - 1] + integrands[m])
            if which == "u" and noise_spec is not None and noise_spec.active:
                if noise_increments is None:
                    raise ValueError("noise increments required to reconstruct the Ito integral")
                inc = noise_increment(states[m - 1].u, noise_spec, noise_increments[m - 1])
                noise_running += inner_l2(inc, psi)
        residuals[m] = pairing(st) - base - running - noise_running
    return residuals
