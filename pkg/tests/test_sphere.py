"""Quadrature, transforms, and differential operators on the sphere."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizonlab.errors import GridMismatchError, PositivityError
from horizonlab.sphere import (SphereField, get_grid, gradient,
                               gradient_norm_sq, integrate, l2_norm,
                               laplace_beltrami)


def fd_laplacian(fn, theta, phi, h=1e-4):
    """Independent finite-difference Laplace-Beltrami oracle."""
    ftt = (fn(theta + h, phi) - 2 * fn(theta, phi) + fn(theta - h, phi)) \
        / h**2
    ft = (fn(theta + h, phi) - fn(theta - h, phi)) / (2 * h)
    fpp = (fn(theta, phi + h) - 2 * fn(theta, phi) + fn(theta, phi - h)) \
        / h**2
    return ftt + ft * np.cos(theta) / np.sin(theta) \
        + fpp / np.sin(theta)**2


def fd_gradsq(fn, theta, phi, h=1e-5):
    ft = (fn(theta + h, phi) - fn(theta - h, phi)) / (2 * h)
    fp = (fn(theta, phi + h) - fn(theta, phi - h)) / (2 * h)
    return ft**2 + (fp / np.sin(theta))**2


class TestGrid:
    def test_weights_sum_to_sphere_area(self):
        for nt, np_ in ((16, 32), (32, 64), (64, 128)):
            g = get_grid(nt, np_)
            assert abs(np.sum(g.weights) / (4 * np.pi) - 1) < 1e-12

    def test_poles_excluded(self, grid_small):
        assert np.all(grid_small.sin_theta > 0)
        assert np.all(np.abs(grid_small.x) < 1)

    def test_longitude_resolution_guard(self):
        with pytest.raises(ValueError):
            get_grid(16, 16)

    def test_roundtrip_band_limited(self, grid_small):
        rng = np.random.default_rng(0)
        g = grid_small
        coeff = np.zeros((g.lmax + 1, g.lmax + 1), dtype=complex)
        for m in range(g.lmax + 1):
            coeff[m:, m] = rng.standard_normal(g.lmax + 1 - m)
            if m:
                coeff[m:, m] = coeff[m:, m] * 1j + rng.standard_normal(
                    g.lmax + 1 - m)
        coeff[:, 0] = coeff[:, 0].real
        vals = g.synthesize(coeff)
        assert np.max(np.abs(g.analyze(vals) - coeff)) < 1e-12


class TestIntegrate:
    def test_constant_gives_area(self, grid_small):
        one = SphereField.constant(grid_small, 1.0)
        assert integrate(one, radius=3.0) == pytest.approx(36 * np.pi,
                                                           rel=1e-13)

    def test_odd_function_vanishes(self, grid_small):
        f = SphereField.from_function(grid_small,
                                      lambda th, ph: np.cos(th))
        assert abs(integrate(f, radius=2.0)) < 1e-12

    def test_cos_squared(self, grid_small):
        # Analytic value 4*pi/3; Gauss-Legendre reproduces it exactly.
        f = SphereField.from_function(grid_small,
                                      lambda th, ph: np.cos(th)**2)
        assert integrate(f) == pytest.approx(4 * np.pi / 3, rel=1e-13)

    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=6))
    @settings(max_examples=25, deadline=None)
    def test_polynomials_in_cos_theta_exact(self, coeffs):
        g = get_grid(16, 32)
        poly = np.polynomial.Polynomial(coeffs)
        f = SphereField.from_function(g, lambda th, ph: poly(np.cos(th)))
        exact = 2 * np.pi * (poly.integ()(1.0) - poly.integ()(-1.0))
        assert integrate(f) == pytest.approx(exact, abs=1e-10 + 1e-12
                                             * abs(exact))


class TestLaplacian:
    def test_constant_is_harmonic(self, grid_small):
        f = SphereField.constant(grid_small, 7.0)
        floor = 7.0 * grid_small.lmax**2 * np.finfo(float).eps
        assert np.max(np.abs(laplace_beltrami(f).values)) < 10 * floor

    def test_l1_eigenvalue(self, grid_small):
        f = SphereField.from_function(grid_small,
                                      lambda th, ph: np.cos(th))
        out = laplace_beltrami(f)
        assert np.max(np.abs(out.values + 2 * f.values)) < 1e-11

    def test_radius_scaling_against_fd_oracle(self, grid_small):
        R = 2.5
        f = SphereField.from_function(grid_small,
                                      lambda th, ph: np.cos(th))
        out = laplace_beltrami(f, radius=R)
        expected = -2 * f.values / R**2
        assert np.max(np.abs(out.values - expected)) < 1e-11
        oracle = fd_laplacian(lambda th, ph: np.cos(th),
                              grid_small.theta_2d, grid_small.phi_2d) / R**2
        assert np.max(np.abs(out.values - oracle)) < 1e-6

    def test_nontrivial_field_against_fd_oracle(self, grid_mid):
        def fn(th, ph):
            return np.sin(th)**2 * np.cos(2 * ph) + 0.5 * np.cos(th)**3

        f = SphereField.from_function(grid_mid, fn)
        out = laplace_beltrami(f)
        oracle = fd_laplacian(fn, grid_mid.theta_2d, grid_mid.phi_2d)
        assert np.max(np.abs(out.values - oracle)) < 1e-5

    def test_eigenvalues_at_roundoff_floor_both_grids(self):
        # Spectral design order: resolved harmonics are exact eigenmodes
        # at every resolution, not merely converging ones.
        for nt, nph in ((16, 32), (32, 64)):
            g = get_grid(nt, nph)
            rng = np.random.default_rng(5)
            for l in range(1, 9):
                coeff = np.zeros((g.lmax + 1, g.lmax + 1), dtype=complex)
                m = rng.integers(0, l + 1)
                coeff[l, m] = 1.0 if m == 0 else 1.0 + 0.5j
                vals = g.synthesize(coeff)
                lap = g.laplacian_values(vals)
                err = np.max(np.abs(lap + l * (l + 1) * vals))
                assert err < 1e-10 * max(1.0, np.max(np.abs(vals)))

    def test_self_adjoint_wrt_quadrature(self, grid_mid):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((grid_mid.n_theta, grid_mid.n_phi))
        b = rng.standard_normal((grid_mid.n_theta, grid_mid.n_phi))
        fa, fb = SphereField(grid_mid, a), SphereField(grid_mid, b)
        lhs = integrate(SphereField(grid_mid,
                                    a * laplace_beltrami(fb).values))
        rhs = integrate(SphereField(grid_mid,
                                    b * laplace_beltrami(fa).values))
        scale = l2_norm(fa) * l2_norm(fb) * grid_mid.lmax**2
        assert abs(lhs - rhs) <= 1e-10 * scale

    def test_divergence_theorem(self, grid_small):
        rng = np.random.default_rng(11)
        g = grid_small
        coeff = np.zeros((g.lmax + 1, g.lmax + 1), dtype=complex)
        coeff[1:6, 0] = rng.standard_normal(5)
        f = SphereField(g, g.synthesize(coeff))
        assert abs(integrate(laplace_beltrami(f))) < 1e-11


class TestGradient:
    def test_constant(self, grid_small):
        f = SphereField.constant(grid_small, 4.0)
        assert np.max(gradient_norm_sq(f).values) < 1e-20

    def test_cos_theta(self, grid_small):
        f = SphereField.from_function(grid_small,
                                      lambda th, ph: np.cos(th))
        out = gradient_norm_sq(f)
        assert np.max(np.abs(out.values - np.sin(grid_small.theta_2d)**2)) \
            < 1e-11

    def test_radius_scaling_and_fd(self, grid_mid):
        def fn(th, ph):
            return np.sin(th) * np.cos(ph) + 0.3 * np.cos(th)**2

        R = 1.7
        f = SphereField.from_function(grid_mid, fn)
        out = gradient_norm_sq(f, radius=R)
        oracle = fd_gradsq(fn, grid_mid.theta_2d, grid_mid.phi_2d) / R**2
        assert np.max(np.abs(out.values - oracle)) < 1e-7
        assert np.min(out.values) >= 0.0

    def test_frame_components(self, grid_small):
        f = SphereField.from_function(
            grid_small, lambda th, ph: np.sin(th) * np.sin(ph))
        gt, gp = gradient(f)
        assert np.max(np.abs(gt.values - np.cos(grid_small.theta_2d)
                             * np.sin(grid_small.phi_2d))) < 1e-11
        assert np.max(np.abs(gp.values - np.cos(grid_small.phi_2d))) < 1e-11


class TestExport:
    def test_field_to_csv(self, grid_small, tmp_path):
        from horizonlab.sphere import field_to_csv
        f = SphereField.from_function(grid_small,
                                      lambda th, ph: np.cos(th))
        path = tmp_path / "field.csv"
        field_to_csv(f, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "theta,phi,value"
        assert len(lines) == 1 + grid_small.n_theta * grid_small.n_phi
        th, ph, v = (float(x) for x in lines[1].split(","))
        assert v == pytest.approx(np.cos(th))


class TestFieldValidation:
    def test_nonfinite_rejected(self, grid_small):
        vals = np.zeros((grid_small.n_theta, grid_small.n_phi))
        vals[0, 0] = np.nan
        with pytest.raises(ValueError):
            SphereField(grid_small, vals)

    def test_shape_mismatch(self, grid_small):
        with pytest.raises(GridMismatchError):
            SphereField(grid_small, np.zeros((3, 4)))

    def test_radius_grid_mismatch(self, grid_small, grid_mid):
        f = SphereField.constant(grid_small, 1.0)
        r = SphereField.constant(grid_mid, 1.0)
        with pytest.raises(GridMismatchError):
            integrate(f, radius=r)

    def test_nonpositive_radius(self, grid_small):
        f = SphereField.constant(grid_small, 1.0)
        with pytest.raises(PositivityError):
            laplace_beltrami(f, radius=0.0)
