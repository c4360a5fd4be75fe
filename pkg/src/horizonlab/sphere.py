"""Discretized round spheres with quadrature and differential operators.

The grid is Gauss-Legendre in colatitude (so the poles are never sampled
and the quadrature is exact for band-limited integrands) crossed with a
uniform longitude grid.  Differential operators act through a spherical
harmonic collocation transform: analysis is the quadrature-orthogonal
projection onto harmonics of degree <= n_theta - 1, the Laplace-Beltrami
operator is diagonal in that basis, and gradients come from analytic
derivative recurrences of the normalized associated Legendre functions.

Consequences used throughout the package and its tests:

* Sum of quadrature weights is 4*pi to machine precision.
* The discrete Laplacian is exactly self-adjoint with respect to the
  quadrature inner product (analysis is a weighted orthogonal projector).
* Eigenvalues -l(l+1) are reproduced to roundoff for resolved degrees.

On a sphere of radius R (scalar or a positive field for graph spheres
u = 1 - R(omega)) the operators scale as Delta' = Delta_unit / R^2 and
|grad f|^2 = |grad_unit f|^2 / R^2, which is the round-sphere leading
order used by every elliptic estimate in this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, PositivityError


def _legendre_tables(x, lmax):
    """Normalized associated Legendre tables on nodes ``x``.

    Returns three ragged lists indexed by order m; each entry is an array
    of shape (lmax + 1 - m, len(x)) holding Pbar_{l,m}(x), d/dtheta
    Pbar_{l,m}, and Pbar_{l,m}/sin(theta).  Normalization is
    int_{-1}^{1} Pbar_{l,m}^2 dx = 1 (no Condon-Shortley phase).
    """
    x = np.asarray(x, dtype=float)
    sin_t = np.sqrt(1.0 - x * x)
    tables_p, tables_dp, tables_ps = [], [], []
    pmm = np.full_like(x, 1.0 / np.sqrt(2.0))
    for m in range(lmax + 1):
        nl = lmax + 1 - m
        p = np.empty((nl, x.size))
        p[0] = pmm
        if nl > 1:
            p[1] = np.sqrt(2.0 * m + 3.0) * x * pmm
        for k in range(2, nl):
            l = m + k
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[k] = a * (x * p[k - 1] - b * p[k - 2])
        dp = np.empty_like(p)
        for k in range(nl):
            l = m + k
            if k == 0:
                dp[k] = m * x * p[k] / sin_t
            else:
                s = np.sqrt((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0))
                dp[k] = (l * x * p[k] - s * p[k - 1]) / sin_t
        tables_p.append(p)
        tables_dp.append(dp)
        tables_ps.append(p / sin_t)
        if m < lmax:
            pmm = np.sqrt((2.0 * m + 3.0) / (2.0 * m + 2.0)) * sin_t * pmm
    return tables_p, tables_dp, tables_ps


@dataclass(eq=False)
class SphereGrid:
    """Gauss-Legendre x uniform-longitude collocation grid on S^2."""

    n_theta: int
    n_phi: int
    x: np.ndarray = field(repr=False)          # cos(theta), ascending
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    w_theta: np.ndarray = field(repr=False)    # Gauss-Legendre weights in x
    weights: np.ndarray = field(repr=False)    # (n_theta, n_phi), sums to 4 pi
    lmax: int = 0

    def __post_init__(self):
        self._p, self._dp, self._ps = _legendre_tables(self.x, self.lmax)
        self.sin_theta = np.sqrt(1.0 - self.x * self.x)
        # Broadcastable node coordinate arrays.
        self.theta_2d = np.broadcast_to(self.theta[:, None],
                                        (self.n_theta, self.n_phi))
        self.phi_2d = np.broadcast_to(self.phi[None, :],
                                      (self.n_theta, self.n_phi))

    # -- construction ---------------------------------------------------

    @staticmethod
    def create(n_theta, n_phi):
        if n_phi < 2 * n_theta:
            raise ValueError("n_phi must be at least 2*n_theta for an "
                             "alias-free harmonic transform")
        x, w = np.polynomial.legendre.leggauss(n_theta)
        theta = np.arccos(x)
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        weights = np.outer(w, np.full(n_phi, 2.0 * np.pi / n_phi))
        return SphereGrid(n_theta=n_theta, n_phi=n_phi, x=x, theta=theta,
                          phi=phi, w_theta=w, weights=weights,
                          lmax=n_theta - 1)

    # -- transforms -----------------------------------------------------

    def analyze(self, values):
        """Project grid values onto harmonic coefficients C[l, m]."""
        g = np.fft.rfft(values, axis=1) / self.n_phi
        coeff = np.zeros((self.lmax + 1, self.lmax + 1), dtype=complex)
        for m in range(self.lmax + 1):
            coeff[m:, m] = self._p[m] @ (self.w_theta * g[:, m])
        return coeff

    def _fold(self, h):
        f = np.zeros((self.n_theta, self.n_phi // 2 + 1), dtype=complex)
        f[:, : self.lmax + 1] = h * self.n_phi
        return np.fft.irfft(f, n=self.n_phi, axis=1)

    def synthesize(self, coeff, tables=None):
        tables = self._p if tables is None else tables
        h = np.empty((self.n_theta, self.lmax + 1), dtype=complex)
        for m in range(self.lmax + 1):
            h[:, m] = tables[m].T @ coeff[m:, m]
        return self._fold(h)

    def synthesize_dtheta(self, coeff):
        return self.synthesize(coeff, tables=self._dp)

    def synthesize_dphi_over_sin(self, coeff):
        h = np.empty((self.n_theta, self.lmax + 1), dtype=complex)
        for m in range(self.lmax + 1):
            h[:, m] = (1j * m) * (self._ps[m].T @ coeff[m:, m])
        return self._fold(h)

    def laplacian_values(self, values):
        coeff = self.analyze(values)
        l = np.arange(self.lmax + 1, dtype=float)
        return self.synthesize(coeff * (-l * (l + 1.0))[:, None])

    def gradient_values(self, values):
        """Unit-sphere orthonormal-frame gradient (e_theta, e_phi parts)."""
        coeff = self.analyze(values)
        return (self.synthesize_dtheta(coeff),
                self.synthesize_dphi_over_sin(coeff))

    def _hessian_tables(self):
        # Covariant-Hessian basis tables per order m.  Built so that the
        # trace identity H_tt + H_pp = -l(l+1) holds exactly per mode;
        # frame components of derivatives are not smooth scalars at the
        # poles, so they must be synthesized, never re-analyzed.
        if not hasattr(self, "_hess"):
            sin = self.sin_theta
            cot = self.x / sin
            tpp, ttt, ttp = [], [], []
            for m in range(self.lmax + 1):
                p, dp, ps = self._p[m], self._dp[m], self._ps[m]
                l = np.arange(m, self.lmax + 1, dtype=float)[:, None]
                pp = -(m * m) * ps / sin + cot * dp
                tpp.append(pp)
                ttt.append(-(l * (l + 1.0)) * p - pp)
                ttp.append((dp - self.x * ps) / sin)
            self._hess = (ttt, ttp, tpp)
        return self._hess

    def hessian_values(self, values):
        """Covariant Hessian components (H_tt, H_tp, H_pp) on the unit
        sphere, synthesized from exact per-mode derivative tables."""
        ttt, ttp, tpp = self._hessian_tables()
        coeff = self.analyze(values)
        h_tt = self.synthesize(coeff, tables=ttt)
        h_pp = self.synthesize(coeff, tables=tpp)
        h = np.empty((self.n_theta, self.lmax + 1), dtype=complex)
        for m in range(self.lmax + 1):
            h[:, m] = (1j * m) * (ttp[m].T @ coeff[m:, m])
        h_tp = self._fold(h)
        return h_tt, h_tp, h_pp


_GRID_CACHE = {}


def get_grid(n_theta, n_phi):
    """Shared immutable grid instance for the given resolution."""
    key = (int(n_theta), int(n_phi))
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = SphereGrid.create(*key)
    return _GRID_CACHE[key]


@dataclass
class SphereField:
    """One scalar per node; tensor fields are stored componentwise."""

    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_theta, self.grid.n_phi):
            raise GridMismatchError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n_theta}, {self.grid.n_phi})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("SphereField values must be finite everywhere")

    @staticmethod
    def from_function(grid, fn):
        return SphereField(grid, fn(grid.theta_2d, grid.phi_2d))

    @staticmethod
    def constant(grid, value):
        return SphereField(grid, np.full((grid.n_theta, grid.n_phi),
                                         float(value)))

    def copy(self):
        return SphereField(self.grid, self.values.copy())


def _same_grid(*fields):
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid is not grid and (f.grid.n_theta, f.grid.n_phi) != \
                (grid.n_theta, grid.n_phi):
            raise GridMismatchError("fields live on different grids")
    return grid


def _radius_values(grid, radius):
    if isinstance(radius, SphereField):
        if (radius.grid.n_theta, radius.grid.n_phi) != \
                (grid.n_theta, grid.n_phi):
            raise GridMismatchError("radius field lives on a different grid")
        vals = radius.values
    else:
        vals = float(radius)
    if np.any(np.asarray(vals) <= 0.0):
        raise PositivityError("sphere radius must be strictly positive")
    return vals


def laplace_beltrami(field, radius=1.0):
    """Laplace-Beltrami of ``field`` on the round sphere of given radius."""
    r = _radius_values(field.grid, radius)
    return SphereField(field.grid, field.grid.laplacian_values(field.values)
                       / np.square(r))


def gradient(field):
    """Unit-frame gradient components on the unit sphere."""
    gt, gp = field.grid.gradient_values(field.values)
    return SphereField(field.grid, gt), SphereField(field.grid, gp)


def gradient_norm_sq(field, radius=1.0):
    """|grad f|^2 in the round metric of the given radius."""
    r = _radius_values(field.grid, radius)
    gt, gp = field.grid.gradient_values(field.values)
    return SphereField(field.grid, (gt * gt + gp * gp) / np.square(r))


def integrate(field, radius=1.0):
    """Integral of ``field`` over the sphere of the given radius."""
    r = _radius_values(field.grid, radius)
    return float(np.sum(field.grid.weights * field.values * np.square(r)))


def mean(field):
    """Quadrature average over the unit sphere."""
    return integrate(field) / (4.0 * np.pi)


def l2_norm(field):
    """Quadrature L^2 norm on the unit sphere."""
    return float(np.sqrt(np.sum(field.grid.weights * field.values ** 2)))


def field_to_csv(field, path):
    """Write (theta, phi, value) rows for external plotting."""
    from pathlib import Path
    g = field.grid
    lines = ["theta,phi,value"]
    for i in range(g.n_theta):
        for j in range(g.n_phi):
            lines.append(f"{float(g.theta[i])!r},{float(g.phi[j])!r},"
                         f"{float(field.values[i, j])!r}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n")
