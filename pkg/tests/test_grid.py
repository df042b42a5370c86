import math

import numpy as np
import pytest
import scipy.fft as sfft
from hypothesis import given, settings
from hypothesis import strategies as st

from planar_sps.grid import (
    Field,
    Grid2D,
    build_grid,
    dilate,
    dilate_report,
    dirichlet_energy,
    gaussian_field,
    laplacian,
    lp_norm,
    mass,
    normalize_mass,
    shift,
    star_norm_sq,
    x_norm_sq,
)


@pytest.mark.parametrize("n", [0, 7, 12, 100, 2.5])
def test_grid_rejects_bad_resolution(n):
    with pytest.raises(ValueError):
        Grid2D(12.0, n)


def test_grid_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        build_grid(0.0, 64)


def test_grid_geometry():
    g = build_grid(12, 256)
    assert g.h == pytest.approx(24 / 256)
    assert g.axis[0] == -12.0
    assert g.axis[128] == pytest.approx(0.0, abs=1e-15)
    X, Y = g.coords
    assert X[3, 0] == pytest.approx(-12 + 3 * g.h)
    assert Y[0, 5] == pytest.approx(-12 + 5 * g.h)


def test_field_is_read_only(small_grid):
    u = Field.zeros(small_grid)
    with pytest.raises(ValueError):
        u.values[0, 0] = 1.0


def test_field_rejects_nan_and_shape(small_grid):
    bad = np.zeros(small_grid.shape)
    bad[1, 1] = np.nan
    with pytest.raises(ValueError):
        Field(small_grid, bad)
    with pytest.raises(ValueError):
        Field(small_grid, np.zeros((3, 3)))


def test_field_arithmetic_checks_grid(small_grid):
    other = build_grid(6.0, 64)
    with pytest.raises(ValueError):
        Field.zeros(small_grid) + Field.zeros(other)


def test_gaussian_mass_and_kinetic_closed_form(grid256):
    # |phi|^2 = e^{-|x|^2}: mass pi, and A = pi as well
    phi = gaussian_field(grid256)
    assert mass(phi) == pytest.approx(math.pi, rel=1e-14)
    assert dirichlet_energy(phi) == pytest.approx(math.pi, rel=1e-12)


def test_star_norm_of_gaussian_matches_quadrature(grid256):
    from scipy import integrate

    phi = gaussian_field(grid256)
    ref, _ = integrate.quad(lambda r: math.log1p(r) * math.exp(-r * r) * 2 * math.pi * r, 0, 12)
    # ln(1 + |x|) has a kink at the origin, so the plain sum is only ~h^3 accurate
    assert star_norm_sq(phi) == pytest.approx(ref, rel=5e-4)


def test_laplacian_of_fourier_mode(small_grid):
    X, Y = small_grid.coords
    k = 2 * math.pi / (2 * small_grid.L)
    u = np.cos(3 * k * X) * np.sin(2 * k * Y)
    lap = laplacian(u, small_grid)
    np.testing.assert_allclose(lap, -13 * k * k * u, atol=1e-12)


def test_lp_norm_rejects_small_exponent(gauss64):
    with pytest.raises(ValueError):
        lp_norm(gauss64, 0.5)


def test_plancherel_and_roundtrip(gauss64):
    g = gauss64.grid
    uh = sfft.fft2(gauss64.values)
    assert mass(gauss64) == pytest.approx(np.sum(np.abs(uh) ** 2) * g.h**2 / g.n**2, rel=1e-12)
    back = sfft.ifft2(uh).real
    assert np.max(np.abs(back - gauss64.values)) < 1e-12 * np.max(np.abs(gauss64.values))


def test_normalize_mass(gauss64):
    assert mass(normalize_mass(gauss64, 0.125)) == pytest.approx(0.125, rel=1e-14)
    with pytest.raises(ValueError):
        normalize_mass(Field.zeros(gauss64.grid), 1.0)
    with pytest.raises(ValueError):
        normalize_mass(gauss64, 0.0)


@pytest.mark.parametrize("t", [0.9999, 0.99984, 1.0001])
def test_dilation_near_one_is_accurate(t):
    g = build_grid(12.0, 128)
    u = gaussian_field(g, width=1.5)
    X, Y = g.coords
    exact = t * np.exp(-t * t * (X**2 + Y**2) / (2 * 1.5**2))
    assert np.max(np.abs(dilate(u, t).values - exact)) < 1e-12


def test_dilate_identity_is_exact(gauss64):
    assert dilate(gauss64, 1.0) is gauss64


def test_dilate_rejects_nonpositive(gauss64):
    with pytest.raises(ValueError):
        dilate(gauss64, 0.0)


@pytest.mark.parametrize("t", [0.5, 0.8, 1.25, 2.0])
def test_dilation_scaling_laws(grid256, t):
    u = normalize_mass(gaussian_field(grid256, width=1.0), 0.2)
    ut, truncated, lost = dilate_report(u, t)
    assert not truncated
    assert mass(ut) == pytest.approx(mass(u), rel=1e-10)
    assert dirichlet_energy(ut) == pytest.approx(t * t * dirichlet_energy(u), rel=1e-10)
    for r in (3.0, 5.0):
        assert lp_norm(ut, r) ** r == pytest.approx(t ** (r - 2) * lp_norm(u, r) ** r, rel=1e-10)


def test_dilation_reports_truncation(grid256):
    wide = gaussian_field(grid256, width=4.0)
    _, truncated, lost = dilate_report(wide, 0.5)
    assert truncated
    assert 0 < lost < 1


def test_bilinear_dilation_is_available_but_coarser(grid256):
    u = gaussian_field(grid256, width=1.0)
    spectral = dilate(u, 0.8)
    bilinear = dilate(u, 0.8, method="bilinear")
    err_s = abs(mass(spectral) - mass(u)) / mass(u)
    err_b = abs(mass(bilinear) - mass(u)) / mass(u)
    assert err_s < 1e-10 < err_b < 1e-2
    with pytest.raises(ValueError):
        dilate(u, 0.8, method="cubic")


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0.7, 1.4), t=st.floats(0.7, 1.4))
def test_dilation_composes(s, t):
    g = build_grid(12.0, 128)
    u = gaussian_field(g, width=1.2)
    a = dilate(dilate(u, s), t).values
    b = dilate(u, s * t).values
    assert np.sqrt(np.sum((a - b) ** 2) / np.sum(b**2)) < 1e-6


@settings(max_examples=30, deadline=None)
@given(amp=st.floats(-3, 3), width=st.floats(0.6, 2.5))
def test_norms_nonnegative(amp, width):
    g = build_grid(12.0, 64)
    u = gaussian_field(g, amplitude=amp, width=width)
    assert mass(u) >= 0
    assert dirichlet_energy(u) >= 0
    assert star_norm_sq(u) >= 0
    assert x_norm_sq(u) >= 0


def test_shift_is_periodic_roll(gauss64):
    moved = shift(gauss64, 3, -5)
    np.testing.assert_array_equal(moved.values, np.roll(gauss64.values, (3, -5), axis=(0, 1)))
    assert mass(moved) == pytest.approx(mass(gauss64), rel=1e-14)
