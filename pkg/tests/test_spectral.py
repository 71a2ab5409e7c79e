"""Spectral core: transforms, operators, projectors, norms."""

import numpy as np
import pytest

from ksns import Grid
from ksns.spectral import (
    RepresentationError,
    ScalarField,
    VectorField,
    constant_field,
    dealias,
    dealiased_product,
    differentiate,
    divergence,
    gradient,
    inner_l2,
    laplacian,
    leray_project,
    mean_value,
    mollify,
    norm,
    norm_l2_quadrature,
    scalar_from_spectral,
    scalar_from_values,
    transform,
    truncate_jk,
    velocity_from_vorticity,
    vorticity,
    vorticity_velocity,
    w1inf_norm,
)
from .helpers import direct_dft


def random_field(grid, rng, band_limited=True):
    f = scalar_from_values(grid, rng.standard_normal((grid.n_points, grid.n_points)))
    return dealias(f).to_real() if band_limited else f


class TestGrid:
    def test_cell_areas_tile_the_box(self):
        g = Grid(16, 3.0)
        assert g.cell_area * g.n_points**2 == pytest.approx(9.0, rel=1e-14)

    def test_zero_mode_and_symmetry(self, grid32):
        k1, k2 = grid32.wavenumbers
        assert k1[0, 0] == 0.0 and k2[0, 0] == 0.0
        kmag = grid32.k_magnitude
        # |k| is symmetric under index negation
        assert np.allclose(kmag, np.roll(np.flip(kmag), (1, 1), axis=(0, 1)))

    def test_dealias_mask_two_thirds(self):
        g = Grid(64, 2 * np.pi)
        i1, i2 = g.mode_index
        expected = np.maximum(np.abs(i1), np.abs(i2)) <= 64 / 3
        assert np.array_equal(g.dealias_mask, expected)
        assert not g.dealias_mask[22, 0]
        assert g.dealias_mask[21, 21]

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            Grid(48, 1.0)
        with pytest.raises(ValueError):
            Grid(64, -1.0)


class TestTransform:
    def test_constant_field_concentrates_on_zero_mode(self, grid16):
        f = transform(constant_field(grid16, 3.0), "forward")
        coeffs = f.values.copy()
        assert coeffs[0, 0] == pytest.approx(3.0 * 16**2)
        coeffs[0, 0] = 0.0
        assert np.max(np.abs(coeffs)) < 1e-12

    def test_single_mode_two_conjugate_coefficients(self, grid16):
        x1, _ = grid16.x
        f = transform(scalar_from_values(grid16, np.cos(x1)), "forward")
        nonzero = np.argwhere(np.abs(f.values) > 1e-9)
        assert len(nonzero) == 2
        a, b = (tuple(idx) for idx in nonzero)
        assert f.values[a] == pytest.approx(np.conj(f.values[b]))

    def test_roundtrip_matches_direct_dft(self):
        grid = Grid(8, 2 * np.pi)
        rng = np.random.default_rng(1)
        vals = rng.standard_normal((8, 8))
        fwd = transform(scalar_from_values(grid, vals), "forward")
        assert np.max(np.abs(fwd.values - direct_dft(vals))) < 1e-12 * np.max(np.abs(vals)) * 64
        back = transform(fwd, "inverse")
        assert np.max(np.abs(back.values - vals)) <= 1e-12 * np.max(np.abs(vals))

    def test_parseval_over_random_fields(self, grid32, rng):
        for _ in range(100):
            f = random_field(grid32, rng, band_limited=False)
            l2_spec = norm(f, "L2")
            l2_quad = norm_l2_quadrature(f)
            assert l2_spec == pytest.approx(l2_quad, rel=1e-10)

    def test_representation_contract(self, grid16):
        f = constant_field(grid16, 1.0)
        with pytest.raises(RepresentationError):
            transform(f, "inverse")
        with pytest.raises(RepresentationError):
            transform(transform(f, "forward"), "forward")

    def test_conjugate_symmetry_of_real_fields(self, grid16, rng):
        fh = random_field(grid16, rng).spectral()
        mirrored = np.conj(np.roll(np.flip(fh), (1, 1), axis=(0, 1)))
        assert np.allclose(fh, mirrored, atol=1e-10)


class TestDerivatives:
    def test_laplacian_of_constant_vanishes(self, grid16):
        lap = differentiate(constant_field(grid16, 4.2), "laplacian")
        assert norm(lap, "L2") < 1e-12

    def test_gradient_of_single_mode(self):
        grid = Grid(32, 2.0)
        x1, _ = grid.x
        f = scalar_from_values(grid, np.sin(2 * np.pi * x1 / 2.0))
        grad = differentiate(f, "gradient")
        exact = (2 * np.pi / 2.0) * np.cos(2 * np.pi * x1 / 2.0)
        assert np.max(np.abs(grad.u1.real_values() - exact)) < 1e-12
        assert np.max(np.abs(grad.u2.real_values())) < 1e-12

    def test_divergence_of_gradient_is_laplacian(self, grid16, rng):
        f = random_field(grid16, rng)
        dg = differentiate(differentiate(f, "gradient"), "divergence")
        lp = differentiate(f, "laplacian")
        scale = max(norm(lp, "Linf"), 1.0)
        assert np.max(np.abs(dg.real_values() - lp.real_values())) < 1e-12 * scale


class TestProjectors:
    def test_annulus_truncation(self, grid32):
        x1, _ = grid32.x
        m5 = scalar_from_values(grid32, np.cos(5 * x1))
        m1 = scalar_from_values(grid32, np.cos(x1))
        assert norm(truncate_jk(m5, 4.0), "L2") < 1e-13
        kept = truncate_jk(m1, 4.0)
        assert np.max(np.abs(kept.real_values() - m1.values)) < 1e-12

    def test_truncation_idempotent_and_kills_mean(self, grid32, rng):
        f = random_field(grid32, rng)
        once = truncate_jk(f, 4.0)
        twice = truncate_jk(once, 4.0)
        assert np.array_equal(once.spectral(), twice.spectral())
        assert abs(mean_value(once)) < 1e-15

    def test_truncation_rejects_small_k(self, grid32):
        with pytest.raises(ValueError):
            truncate_jk(constant_field(grid32, 1.0), 0.5)

    def test_bernstein_band_equivalence(self, grid32, rng):
        # on the annulus 1/k <= |xi| <= k the gradient norm is pinched
        # between the L2 norm scaled by 1/k and k
        for k in (2.0, 4.0, 8.0):
            f = truncate_jk(random_field(grid32, rng), k)
            base = norm(f, "L2")
            grad = norm(gradient(f), "L2")
            assert base / k <= grad + 1e-12
            assert grad <= k * base * (1 + 1e-12)

    def test_leray_annihilates_gradients(self, grid32):
        x1, _ = grid32.x
        q = scalar_from_values(grid32, np.sin(x1))
        projected = leray_project(gradient(q))
        f1, f2 = projected.spectral()
        assert np.max(np.abs(f1)) < 1e-14 * grid32.n_points**2
        assert np.max(np.abs(f2)) < 1e-14 * grid32.n_points**2

    def test_leray_fixes_divergence_free_fields(self, grid32):
        x1, _ = grid32.x
        u = VectorField(constant_field(grid32, 0.0),
                        scalar_from_values(grid32, np.cos(x1)))
        pu = leray_project(u)
        assert np.max(np.abs(pu.u2.real_values() - u.u2.values)) < 1e-12

    def test_leray_idempotent_and_divergence_free(self, grid32, rng):
        # idempotence per mode at roundoff level (the multiplier is not
        # boolean, so bit-exact equality is out of reach)
        v = VectorField(random_field(grid32, rng), random_field(grid32, rng))
        once = leray_project(v)
        twice = leray_project(once)
        scale = max(np.max(np.abs(a)) for a in once.spectral())
        for a, b in zip(once.spectral(), twice.spectral()):
            assert np.max(np.abs(a - b)) <= 1e-14 * scale
        assert norm(divergence(once), "L2") <= 1e-12 * norm(once, "L2")

    def test_projector_algebra_commutes(self, grid32, rng):
        # J_k, Leray and the dealias mask are all Fourier multipliers,
        # so they commute coefficient-exactly
        v = VectorField(random_field(grid32, rng, band_limited=False),
                        random_field(grid32, rng, band_limited=False))
        a = leray_project(VectorField(truncate_jk(v.u1, 4.0), truncate_jk(v.u2, 4.0)))
        b_pre = leray_project(v)
        b = VectorField(truncate_jk(b_pre.u1, 4.0), truncate_jk(b_pre.u2, 4.0))
        for x, y in zip(a.spectral(), b.spectral()):
            assert np.allclose(x, y, atol=1e-12 * grid32.n_points**2)


class TestMollifier:
    def test_constant_preserved(self, grid16):
        f = mollify(constant_field(grid16, 2.5), 0.3)
        assert np.max(np.abs(f.real_values() - 2.5)) < 1e-13

    def test_single_mode_symbol_value(self, grid32):
        x1, _ = grid32.x
        f = scalar_from_values(grid32, np.cos(4 * x1))
        m = mollify(f, 0.5)
        ratio = norm(m, "L2") / norm(f, "L2")
        assert ratio == pytest.approx(np.exp(-2.0), rel=1e-12)

    def test_contraction_and_mean(self, grid32, rng):
        f = random_field(grid32, rng, band_limited=False)
        m = mollify(f, 0.7)
        assert norm(m, "L2") <= norm(f, "L2")
        assert mean_value(m) == pytest.approx(mean_value(f), rel=1e-13)

    def test_small_scale_limit_is_second_order(self, grid32, rng):
        # low-band field keeps eps*|xi| small so the symbol expansion
        # 1 - exp(-(eps |xi|)^2/2) ~ eps^2 |xi|^2 / 2 governs the distance
        f = random_field(grid32, rng)
        keep = np.hypot(*grid32.mode_index) <= 3
        f = scalar_from_spectral(grid32, np.where(keep, f.spectral(), 0.0)).to_real()
        eps_levels = [0.1, 0.05, 0.025]
        dists = [norm(scalar_from_spectral(
            grid32, mollify(f, e).spectral() - f.spectral()), "L2") for e in eps_levels]
        slope = np.polyfit(np.log(eps_levels), np.log(dists), 1)[0]
        assert slope > 1.9
        half_k2f = 0.5 * norm(laplacian(f), "L2")
        for e, d in zip(eps_levels, dists):
            assert d <= half_k2f * e**2

    def test_rejects_nonpositive_scale(self, grid16):
        with pytest.raises(ValueError):
            mollify(constant_field(grid16, 1.0), 0.0)


class TestVorticity:
    def test_single_mode_curl(self):
        grid = Grid(32, 2.0)
        _, x2 = grid.x
        u = VectorField(scalar_from_values(grid, np.sin(2 * np.pi * x2 / 2.0)),
                        constant_field(grid, 0.0))
        om = vorticity_velocity(u, "to_vorticity")
        exact = -(2 * np.pi / 2.0) * np.cos(2 * np.pi * x2 / 2.0)
        assert np.max(np.abs(om.real_values() - exact)) < 1e-12

    def test_roundtrip_on_mean_free_field(self):
        grid = Grid(32, 2.0)
        _, x2 = grid.x
        u = VectorField(scalar_from_values(grid, np.sin(2 * np.pi * x2 / 2.0)),
                        constant_field(grid, 0.0))
        back = vorticity_velocity(vorticity(u), "to_velocity")
        assert np.max(np.abs(back.u1.real_values() - u.u1.values)) < 1e-12
        assert np.max(np.abs(back.u2.real_values())) < 1e-12
        assert norm(divergence(back), "L2") < 1e-12

    def test_constant_velocity_has_zero_vorticity(self, grid16):
        u = VectorField(constant_field(grid16, 1.5), constant_field(grid16, -0.5))
        assert norm(vorticity(u), "L2") < 1e-13

    def test_nonzero_mean_vorticity_rejected(self, grid16):
        with pytest.raises(ValueError, match="mean"):
            velocity_from_vorticity(constant_field(grid16, 1.0))


class TestNorms:
    def test_constant_on_unit_box(self):
        grid = Grid(16, 1.0)
        f = constant_field(grid, 2.0)
        assert norm(f, "L1") == pytest.approx(2.0, rel=1e-13)
        assert norm(f, "L2") == pytest.approx(2.0, rel=1e-13)
        assert norm(f, "Linf") == pytest.approx(2.0)

    def test_sine_l2(self):
        grid = Grid(32, 1.0)
        x1, _ = grid.x
        f = scalar_from_values(grid, np.sin(2 * np.pi * x1))
        assert norm(f, "L2") == pytest.approx(1 / np.sqrt(2), rel=1e-12)

    def test_h0_equals_l2(self, grid32, rng):
        f = random_field(grid32, rng, band_limited=False)
        assert norm(f, "Hs", s=0.0) == pytest.approx(norm(f, "L2"), rel=1e-12)

    def test_invalid_orders_rejected(self, grid16):
        f = constant_field(grid16, 1.0)
        with pytest.raises(ValueError):
            norm(f, "Lp", p=0.5)
        with pytest.raises(ValueError):
            norm(f, "Hs", s=np.inf)

    def test_w1inf_uses_value_plus_gradient(self, grid32):
        x1, _ = grid32.x
        f = scalar_from_values(grid32, np.sin(x1))
        # max over x of |sin| + |cos| is sqrt(2)
        assert w1inf_norm(f) == pytest.approx(np.sqrt(2), abs=5e-3)


class TestProducts:
    def test_dealiased_product_matches_plain_product_in_band(self, grid32, rng):
        # inputs confined to |index| <= N/6 make the quadratic product
        # alias-free, so dealiasing must not change it
        f = random_field(grid32, rng)
        keep = np.hypot(*grid32.mode_index) <= grid32.n_points / 6
        f = scalar_from_spectral(grid32, np.where(keep, f.spectral(), 0.0)).to_real()
        prod = dealiased_product(f, f)
        direct = f.real_values() ** 2
        assert np.max(np.abs(prod.real_values() - direct)) < 1e-12

    def test_inner_product_mismatch_rejected(self, grid16):
        with pytest.raises(ValueError):
            inner_l2(constant_field(grid16, 1.0),
                     VectorField(constant_field(grid16, 1.0), constant_field(grid16, 1.0)))
