"""Torus geometry, FFT transforms and spectral operators.

Everything lives on a square periodic box [0, L)^2 discretized by an N x N
grid (N a power of two).  Fields carry either real-space values or full
complex FFT coefficients; the forward transform is unnormalized and the
inverse divides by the total point count (numpy convention).  All operators
below (gradient, Laplacian, Leray projection, band-pass truncation,
Gaussian mollification) are diagonal in Fourier space, hence idempotent
projectors commute exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

REAL = "real-space"
SPECTRAL = "spectral"


class RepresentationError(ValueError):
    """Field passed in the wrong real/spectral representation."""


@dataclass(frozen=True)
class Grid:
    """Uniform N x N discretization of the periodic box [0, L)^2.

    Parameters
    ----------
    n_points : int
        Points per axis; must be a power of two.
    box_length : float
        Side length L of the (square) torus.
    """

    n_points: int
    box_length: float

    def __post_init__(self):
        n = self.n_points
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 4, got {n}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @cached_property
    def spacing(self) -> float:
        return self.box_length / self.n_points

    @cached_property
    def cell_area(self) -> float:
        return self.spacing**2

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays (x1, x2), each of shape (N, N), 'ij' indexed."""
        lin = np.arange(self.n_points) * self.spacing
        return tuple(np.meshgrid(lin, lin, indexing="ij"))

    @cached_property
    def mode_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer FFT mode indices (i1, i2) in numpy fft ordering."""
        idx = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        i1, i2 = np.meshgrid(idx, idx, indexing="ij")
        return i1, i2

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Wavenumber arrays (k1, k2) with k = (2*pi/L) * index."""
        scale = 2.0 * np.pi / self.box_length
        i1, i2 = self.mode_index
        return scale * i1, scale * i2

    @cached_property
    def k_squared(self) -> np.ndarray:
        k1, k2 = self.wavenumbers
        return k1**2 + k2**2

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def inv_k_squared(self) -> np.ndarray:
        """1/|k|^2 with the zero mode mapped to 0."""
        k2 = self.k_squared.copy()
        k2[0, 0] = 1.0
        inv = 1.0 / k2
        inv[0, 0] = 0.0
        return inv

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with max(|i1|,|i2|) <= N/3."""
        i1, i2 = self.mode_index
        return np.maximum(np.abs(i1), np.abs(i2)) <= self.n_points / 3.0

    def zeros(self) -> np.ndarray:
        return np.zeros((self.n_points, self.n_points))


@dataclass(frozen=True)
class ScalarField:
    """Real scalar field on a Grid, in real or spectral representation.

    Real representation stores float64 point values; spectral stores the
    full complex128 FFT coefficient array (conjugate-symmetric for a real
    field).  Instances are treated as immutable: operators return new
    fields and never write into ``values``.
    """

    grid: Grid
    values: np.ndarray
    representation: str = REAL

    def __post_init__(self):
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ValueError(f"field shape {self.values.shape} does not match grid {n}x{n}")
        if self.representation not in (REAL, SPECTRAL):
            raise ValueError(f"unknown representation {self.representation!r}")

    @property
    def is_spectral(self) -> bool:
        return self.representation == SPECTRAL

    def spectral(self) -> np.ndarray:
        """Coefficient array, transforming on the fly if needed."""
        if self.is_spectral:
            return self.values
        return np.fft.fft2(self.values)

    def real_values(self) -> np.ndarray:
        """Point values, transforming on the fly if needed."""
        if self.is_spectral:
            return np.real(np.fft.ifft2(self.values))
        return self.values

    def to_spectral(self) -> "ScalarField":
        if self.is_spectral:
            return self
        return ScalarField(self.grid, np.fft.fft2(self.values), SPECTRAL)

    def to_real(self) -> "ScalarField":
        if not self.is_spectral:
            return self
        return ScalarField(self.grid, np.real(np.fft.ifft2(self.values)), REAL)


@dataclass(frozen=True)
class VectorField:
    """Two-component vector field; both components share one grid."""

    u1: ScalarField
    u2: ScalarField

    def __post_init__(self):
        if self.u1.grid is not self.u2.grid and self.u1.grid != self.u2.grid:
            raise ValueError("vector components live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    def spectral(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u1.spectral(), self.u2.spectral()

    def real_values(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u1.real_values(), self.u2.real_values()

    def to_spectral(self) -> "VectorField":
        return VectorField(self.u1.to_spectral(), self.u2.to_spectral())

    def to_real(self) -> "VectorField":
        return VectorField(self.u1.to_real(), self.u2.to_real())


def scalar_from_values(grid: Grid, values: np.ndarray) -> ScalarField:
    return ScalarField(grid, np.asarray(values, dtype=float), REAL)


def scalar_from_spectral(grid: Grid, coeffs: np.ndarray) -> ScalarField:
    return ScalarField(grid, np.asarray(coeffs, dtype=complex), SPECTRAL)


def constant_field(grid: Grid, value: float) -> ScalarField:
    return ScalarField(grid, np.full((grid.n_points, grid.n_points), float(value)), REAL)


def zero_vector(grid: Grid) -> VectorField:
    return VectorField(constant_field(grid, 0.0), constant_field(grid, 0.0))


# ---------------------------------------------------------------------------
# transforms


def transform(fld: ScalarField, direction: str) -> ScalarField:
    """Forward (real->spectral) or inverse (spectral->real) FFT.

    The source representation must match the direction; mixing them is a
    contract violation and raises RepresentationError.
    """
    if direction == "forward":
        if fld.is_spectral:
            raise RepresentationError("forward transform expects a real-space field")
        return ScalarField(fld.grid, np.fft.fft2(fld.values), SPECTRAL)
    if direction == "inverse":
        if not fld.is_spectral:
            raise RepresentationError("inverse transform expects a spectral field")
        return ScalarField(fld.grid, np.real(np.fft.ifft2(fld.values)), REAL)
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# differential operators (exact for band-limited fields)


def gradient(fld: ScalarField) -> VectorField:
    k1, k2 = fld.grid.wavenumbers
    fh = fld.spectral()
    return VectorField(
        scalar_from_spectral(fld.grid, 1j * k1 * fh),
        scalar_from_spectral(fld.grid, 1j * k2 * fh),
    )


def divergence(vec: VectorField) -> ScalarField:
    k1, k2 = vec.grid.wavenumbers
    f1, f2 = vec.spectral()
    return scalar_from_spectral(vec.grid, 1j * k1 * f1 + 1j * k2 * f2)


def laplacian(fld: ScalarField) -> ScalarField:
    return scalar_from_spectral(fld.grid, -fld.grid.k_squared * fld.spectral())


def laplacian_vector(vec: VectorField) -> VectorField:
    return VectorField(laplacian(vec.u1), laplacian(vec.u2))


def differentiate(fld, kind: str):
    """Dispatching façade: gradient | divergence | laplacian."""
    if kind == "gradient":
        return gradient(fld)
    if kind == "divergence":
        return divergence(fld)
    if kind == "laplacian":
        if isinstance(fld, VectorField):
            return laplacian_vector(fld)
        return laplacian(fld)
    raise ValueError(f"unknown derivative kind {kind!r}")


# ---------------------------------------------------------------------------
# spectral projectors and smoothers


def truncate_jk(fld: ScalarField, k: float) -> ScalarField:
    """Band-pass projector onto the annulus 1/k <= |xi| <= k.

    The zero mode always lies below the annulus, so the mean is removed.
    Idempotent by construction.  Pass k = inf to keep every nonzero mode
    while still killing the mean.
    """
    if not k >= 1.0:
        raise ValueError(f"truncation parameter k must be >= 1, got {k}")
    kmag = fld.grid.k_magnitude
    if np.isinf(k):
        keep = kmag > 0.0
    else:
        keep = (kmag >= 1.0 / k) & (kmag <= k)
    return scalar_from_spectral(fld.grid, np.where(keep, fld.spectral(), 0.0))


def truncate_jk_vector(vec: VectorField, k: float) -> VectorField:
    return VectorField(truncate_jk(vec.u1, k), truncate_jk(vec.u2, k))


def mollify(fld: ScalarField, epsilon: float) -> ScalarField:
    """Gaussian mollifier: multiply coefficients by exp(-eps^2 |xi|^2 / 2).

    The symbol equals 1 at xi = 0 (mean preserved) and is <= 1 everywhere
    (L^2 contraction).  A Gaussian stands in for a compactly supported
    Friedrichs bump: it is diagonal, smooth, positive and an approximate
    identity of order eps^2 on band-limited fields.
    """
    if not epsilon > 0:
        raise ValueError(f"mollifier scale must be positive, got {epsilon}")
    symbol = np.exp(-0.5 * (epsilon**2) * fld.grid.k_squared)
    return scalar_from_spectral(fld.grid, symbol * fld.spectral())


def mollify_vector(vec: VectorField, epsilon: float) -> VectorField:
    return VectorField(mollify(vec.u1, epsilon), mollify(vec.u2, epsilon))


def dealias(fld: ScalarField) -> ScalarField:
    return scalar_from_spectral(fld.grid, np.where(fld.grid.dealias_mask, fld.spectral(), 0.0))


def dealias_vector(vec: VectorField) -> VectorField:
    return VectorField(dealias(vec.u1), dealias(vec.u2))


def leray_project(vec: VectorField) -> VectorField:
    """Helmholtz/Leray projection onto divergence-free fields.

    Per mode: u_hat - xi (xi . u_hat) / |xi|^2, identity at xi = 0.
    """
    grid = vec.grid
    k1, k2 = grid.wavenumbers
    f1, f2 = vec.spectral()
    dot = (k1 * f1 + k2 * f2) * grid.inv_k_squared
    return VectorField(
        scalar_from_spectral(grid, f1 - k1 * dot),
        scalar_from_spectral(grid, f2 - k2 * dot),
    )


# ---------------------------------------------------------------------------
# vorticity / Biot-Savart


def vorticity(vec: VectorField) -> ScalarField:
    """omega = d1 u2 - d2 u1."""
    k1, k2 = vec.grid.wavenumbers
    f1, f2 = vec.spectral()
    return scalar_from_spectral(vec.grid, 1j * k1 * f2 - 1j * k2 * f1)


def velocity_from_vorticity(omega: ScalarField, mean_tol: float = 1e-10) -> VectorField:
    """Invert the curl on a mean-free vorticity field.

    Through the streamfunction psi = Laplacian^{-1} omega one gets
    u_hat = i (xi2, -xi1) omega_hat / |xi|^2, divergence-free by
    construction.  A nonzero-mean vorticity has no periodic velocity
    potential and is rejected.
    """
    grid = omega.grid
    oh = omega.spectral()
    mean = abs(oh[0, 0]) / grid.n_points**2
    scale = np.max(np.abs(oh)) / grid.n_points**2
    if mean > mean_tol * max(scale, 1.0):
        raise ValueError(f"vorticity must be mean-free to invert; mean = {mean:.3e}")
    k1, k2 = grid.wavenumbers
    inv = grid.inv_k_squared
    return VectorField(
        scalar_from_spectral(grid, 1j * k2 * oh * inv),
        scalar_from_spectral(grid, -1j * k1 * oh * inv),
    )


def vorticity_velocity(inp, direction: str):
    """Dispatching façade: to_vorticity (u -> omega) | to_velocity (omega -> u)."""
    if direction == "to_vorticity":
        return vorticity(inp)
    if direction == "to_velocity":
        return velocity_from_vorticity(inp)
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# norms


def _quadrature_lp(grid: Grid, absvals: np.ndarray, p: float) -> float:
    return float((np.sum(absvals**p) * grid.cell_area) ** (1.0 / p))


def norm(fld, kind: str, *, p: float | None = None, s: float | None = None) -> float:
    """Norm of a scalar or vector field.

    kind is one of "L1", "L2", "Linf", "Lp" (supply p >= 1) or "Hs"
    (supply finite s).  L1/Linf/Lp use grid quadrature of point values;
    L2 and Hs use Parseval on the coefficients.  For vector fields the
    pointwise Euclidean magnitude (Lp kinds) or the component sum of
    squares (L2/Hs) is used.
    """
    if isinstance(fld, VectorField):
        grid = fld.grid
        if kind in ("L1", "Linf", "Lp"):
            v1, v2 = fld.real_values()
            mag = np.hypot(v1, v2)
            return _real_norm(grid, mag, kind, p)
        if kind == "L2":
            return float(np.sqrt(norm(fld.u1, "L2") ** 2 + norm(fld.u2, "L2") ** 2))
        if kind == "Hs":
            return float(np.sqrt(norm(fld.u1, "Hs", s=s) ** 2 + norm(fld.u2, "Hs", s=s) ** 2))
        raise ValueError(f"unknown norm kind {kind!r}")

    grid = fld.grid
    if kind in ("L1", "Linf", "Lp"):
        return _real_norm(grid, np.abs(fld.real_values()), kind, p)
    if kind == "L2":
        coeffs = fld.spectral()
        return float(np.sqrt(np.sum(np.abs(coeffs) ** 2)) * grid.box_length / grid.n_points**2)
    if kind == "Hs":
        if s is None or not np.isfinite(s):
            raise ValueError("Hs norm requires a finite order s")
        coeffs = fld.spectral()
        weight = (1.0 + grid.k_squared) ** s
        total = np.sum(weight * np.abs(coeffs) ** 2)
        return float(np.sqrt(total) * grid.box_length / grid.n_points**2)
    raise ValueError(f"unknown norm kind {kind!r}")


def _real_norm(grid: Grid, absvals: np.ndarray, kind: str, p) -> float:
    if kind == "L1":
        return _quadrature_lp(grid, absvals, 1.0)
    if kind == "Linf":
        return float(np.max(absvals))
    if kind == "Lp":
        if p is None or p < 1:
            raise ValueError(f"Lp norm requires p >= 1, got {p}")
        return _quadrature_lp(grid, absvals, float(p))
    raise ValueError(f"unknown norm kind {kind!r}")


def norm_l2_quadrature(fld) -> float:
    """L2 norm evaluated by grid quadrature (cross-check against Parseval)."""
    if isinstance(fld, VectorField):
        v1, v2 = fld.real_values()
        sq = v1**2 + v2**2
        return float(np.sqrt(np.sum(sq) * fld.grid.cell_area))
    vals = fld.real_values()
    return float(np.sqrt(np.sum(vals**2) * fld.grid.cell_area))


def inner_l2(a, b) -> float:
    """L2 inner product by grid quadrature; accepts matching scalar or vector fields."""
    if isinstance(a, VectorField) != isinstance(b, VectorField):
        raise ValueError("cannot pair a scalar field with a vector field")
    if isinstance(a, VectorField):
        a1, a2 = a.real_values()
        b1, b2 = b.real_values()
        return float(np.sum(a1 * b1 + a2 * b2) * a.grid.cell_area)
    return float(np.sum(a.real_values() * b.real_values()) * a.grid.cell_area)


def mean_value(fld: ScalarField) -> float:
    """Average of the field over the box (zero-mode coefficient / N^2)."""
    if fld.is_spectral:
        return float(np.real(fld.values[0, 0])) / fld.grid.n_points**2
    return float(np.mean(fld.values))


def w1inf_norm(fld) -> float:
    """max over grid points of |f| + |grad f| (Frobenius for vectors).

    Discrete stand-in for the W^{1,infty} norm used by the cut-off gates.
    """
    if isinstance(fld, VectorField):
        v1, v2 = fld.real_values()
        g11, g12 = gradient(fld.u1).real_values()
        g21, g22 = gradient(fld.u2).real_values()
        mag = np.sqrt(v1**2 + v2**2)
        gmag = np.sqrt(g11**2 + g12**2 + g21**2 + g22**2)
        return float(np.max(mag + gmag))
    vals = np.abs(fld.real_values())
    g1, g2 = gradient(fld).real_values()
    return float(np.max(vals + np.hypot(g1, g2)))


def w1inf_pair(a, b) -> float:
    """||(f, g)||_{W^{1,infty}} = ||f|| + ||g|| (norm of a field pair)."""
    return w1inf_norm(a) + w1inf_norm(b)


def dealiased_product(a: ScalarField, b: ScalarField) -> ScalarField:
    """Pointwise product formed in real space, then two-thirds dealiased."""
    prod = scalar_from_values(a.grid, a.real_values() * b.real_values())
    return dealias(prod)
