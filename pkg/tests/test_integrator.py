"""Time stepping: integrating factors, noise updates, runs, stability gate."""

import numpy as np
import pytest

from ksns import Grid
from ksns.dynamics import State, assemble_tendency
from ksns.integrator import (
    BLOW_UP,
    COMPLETED,
    ERROR,
    EXPLICIT_EM,
    StepConfig,
    cfl_suggest,
    run,
    step,
)
from ksns.model import SensitivityModel, make_params
from ksns.noise import NoiseSpec, sample_path
from ksns.spectral import (
    VectorField,
    constant_field,
    divergence,
    norm,
    scalar_from_values,
    zero_vector,
)
from .helpers import production_config


def provider(params, level="full"):
    return lambda st: assemble_tendency(st, params, level)


class TestStep:
    def test_pure_diffusion_is_exact(self, grid32):
        x1, _ = grid32.x
        params = make_params(grid32, d1=1.3, sensitivity=SensitivityModel(c_max=1.0))
        st = State(n=scalar_from_values(grid32, np.cos(3 * x1)),
                   c=constant_field(grid32, 0.0), u=zero_vector(grid32), time=0.0)
        cfg = StepConfig(dt=0.01, max_steps=1, cfl_override=True)
        new = step(st, provider(params), None, cfg, params)
        expected = np.exp(-1.3 * 9 * 0.01) * np.cos(3 * x1)
        assert np.max(np.abs(new.n.real_values() - expected)) < 1e-13

    def test_zero_state_fixed_point(self, grid16):
        params = make_params(grid16, sensitivity=SensitivityModel(c_max=1.0))
        st = State(n=constant_field(grid16, 0.0), c=constant_field(grid16, 0.0),
                   u=zero_vector(grid16), time=0.0)
        cfg = StepConfig(dt=0.01, max_steps=1, cfl_override=True)
        new = step(st, provider(params), None, cfg, params)
        assert norm(new.n, "L2") == 0.0
        assert norm(new.c, "L2") == 0.0
        assert norm(new.u, "L2") == 0.0

    def test_noise_only_geometric_update(self, grid32):
        _, x2 = grid32.x
        params = make_params(grid32, d3=1.0, sensitivity=SensitivityModel(c_max=1.0))
        u0 = VectorField(scalar_from_values(grid32, np.sin(x2)), constant_field(grid32, 0.0))
        st = State(n=constant_field(grid32, 0.0), c=constant_field(grid32, 0.0),
                   u=u0, time=0.0)
        spec = NoiseSpec(kind="linear_multiplicative", strength=0.7, seed=9)
        path = sample_path(spec, 1, 0.01, 9)
        cfg = StepConfig(dt=0.01, max_steps=1, cfl_override=True)
        new = step(st, provider(params), path.increments[0], cfg, params, spec)
        dw = path.increments[0, 0]
        predicted = np.exp(-0.01) * (1 + 0.7 * dw) * np.sin(x2)
        assert np.max(np.abs(new.u.u1.real_values() - predicted)) < 1e-13

    def test_divergence_free_after_step(self, grid32, rng):
        from ksns.model import random_divergence_free

        params = make_params(grid32, sensitivity=SensitivityModel(c_max=1.0),
                             phi_amplitude=0.4)
        u = random_divergence_free(grid32, (1, 3), 0.0, 4)
        st = State(n=constant_field(grid32, 0.5), c=constant_field(grid32, 0.5),
                   u=u, time=0.0)
        cfg = StepConfig(dt=0.005, max_steps=1, cfl_override=True)
        new = step(st, provider(params), None, cfg, params)
        assert norm(divergence(new.u), "L2") <= 1e-12 * max(norm(new.u, "L2"), 1e-30)


class TestCfl:
    def test_zero_state_returns_cap(self, grid16):
        params = make_params(grid16, sensitivity=SensitivityModel(c_max=1.0))
        st = State(n=constant_field(grid16, 0.0), c=constant_field(grid16, 0.0),
                   u=zero_vector(grid16), time=0.0)
        assert cfl_suggest(st, params, dt_cap=0.07) == 0.07

    def test_advective_bound(self):
        grid = Grid(64, 6.4)  # dx = 0.1
        params = make_params(grid, sensitivity=SensitivityModel(c_max=1.0))
        u = VectorField(constant_field(grid, 1.0), constant_field(grid, 0.0))
        st = State(n=constant_field(grid, 0.0), c=constant_field(grid, 0.0),
                   u=u, time=0.0)
        assert cfl_suggest(st, params, dt_cap=1.0) == pytest.approx(0.04, rel=1e-12)

    def test_doubling_velocity_halves_bound(self):
        grid = Grid(64, 6.4)
        params = make_params(grid, sensitivity=SensitivityModel(c_max=1.0))
        bounds = []
        for amp in (1.0, 2.0):
            u = VectorField(constant_field(grid, amp), constant_field(grid, 0.0))
            st = State(n=constant_field(grid, 0.0), c=constant_field(grid, 0.0),
                       u=u, time=0.0)
            bounds.append(cfl_suggest(st, params, dt_cap=1.0))
        assert bounds[0] == pytest.approx(2 * bounds[1], rel=1e-12)

    def test_unstable_dt_terminates_run(self):
        grid = Grid(32, 3.2)
        params = make_params(grid, sensitivity=SensitivityModel(c_max=1.0))
        u = VectorField(constant_field(grid, 50.0), constant_field(grid, 0.0))
        st = State(n=constant_field(grid, 0.0), c=constant_field(grid, 0.0),
                   u=u, time=0.0)
        cfg = StepConfig(dt=0.05, max_steps=3, cfl_override=False)
        traj = run(st, params, cfg)
        assert traj.status == ERROR
        assert "stability" in traj.message


class TestRun:
    def test_zero_horizon_keeps_initial_state(self, grid16):
        params = make_params(grid16, sensitivity=SensitivityModel(c_max=1.0))
        st = State(n=constant_field(grid16, 1.0), c=constant_field(grid16, 0.5),
                   u=zero_vector(grid16), time=0.0)
        traj = run(st, params, StepConfig(dt=0.01, max_steps=0))
        assert traj.status == COMPLETED
        assert len(traj.states) == 1
        assert len(traj.records) == 1

    def test_records_every_step_and_monotone_checkpoints(self):
        from ksns.experiments import build_problem

        cfg = production_config(t_final=0.05, dt=2e-3, checkpoint_stride=5)
        problem = build_problem(cfg)
        traj = run(problem.initial, problem.params, problem.step_cfg)
        assert traj.status == COMPLETED
        assert len(traj.records) == problem.step_cfg.max_steps + 1
        times = [st.time for st in traj.states]
        assert all(b > a for a, b in zip(times, times[1:]))

    def test_same_seed_twice_bit_identical(self):
        from ksns.experiments import build_problem

        cfg = production_config(t_final=0.05, dt=2e-3)
        problem = build_problem(cfg)
        spec = NoiseSpec(kind="linear_multiplicative", strength=0.2, seed=31)
        path = sample_path(spec, problem.step_cfg.max_steps, 2e-3, 31)
        a = run(problem.initial, problem.params, problem.step_cfg, path, spec)
        b = run(problem.initial, problem.params, problem.step_cfg, path, spec)
        for sa, sb in zip(a.states, b.states):
            assert np.array_equal(sa.n.values, sb.n.values)
            assert np.array_equal(sa.u.u1.values, sb.u.u1.values)

    def test_blow_up_truncates_with_marker(self):
        from ksns.experiments import build_problem

        cfg = production_config(t_final=0.05, dt=2e-3)
        problem = build_problem(cfg)
        bad_cfg = StepConfig(dt=2e-3, max_steps=25, checkpoint_stride=5,
                             blowup_threshold=0.5, level="mod1")
        traj = run(problem.initial, problem.params, bad_cfg)
        assert traj.status == BLOW_UP
        assert traj.records[-1].blow_up
        assert len(traj.records) < 26

    def test_path_dt_mismatch_rejected(self, grid16):
        params = make_params(grid16, sensitivity=SensitivityModel(c_max=1.0))
        st = State(n=constant_field(grid16, 0.1), c=constant_field(grid16, 0.5),
                   u=zero_vector(grid16), time=0.0)
        spec = NoiseSpec(kind="linear_multiplicative", strength=0.2, seed=1)
        path = sample_path(spec, 10, 0.02, 1)
        with pytest.raises(ValueError, match="dt"):
            run(st, params, StepConfig(dt=0.01, max_steps=5, cfl_override=True),
                path, spec)

    def test_explicit_scheme_converges_to_heat_decay(self, grid32):
        x1, _ = grid32.x
        params = make_params(grid32, d1=0.8, sensitivity=SensitivityModel(c_max=1.0))
        errs = []
        dts = [2e-3, 1e-3, 5e-4]
        for dt in dts:
            cfg = StepConfig(dt=dt, max_steps=int(round(0.5 / dt)),
                             scheme=EXPLICIT_EM, cfl_override=True)
            st = State(n=scalar_from_values(grid32, np.cos(2 * x1)),
                       c=constant_field(grid32, 0.0), u=zero_vector(grid32), time=0.0)
            traj = run(st, params, cfg)
            exact = np.exp(-0.8 * 4 * 0.5) * np.cos(2 * x1)
            errs.append(np.max(np.abs(traj.final_state.n.real_values() - exact)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert 0.85 <= slope <= 1.15
