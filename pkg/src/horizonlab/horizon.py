"""Apparent-horizon assembly from per-slice MOTS solutions.

The horizon is the graph u = 1 - R(ubar, omega) over the solved slices.
This module differentiates the radius in ubar (second-order stencils on
the nonuniform slice ladder), estimates areas through the certified
determinant distortion band (1 +- 1/f0), and tests spacelike-ness of the
swept hypersurface through the quadratic form of the induced metric,
whose ubar-ubar entry is the slope scalar h available only under the
small-disc data hypothesis (off by default; without it the check
reports not-certified rather than guessing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError
from .regime import RegimeParameters
from .sphere import SphereField, integrate


def h_slope(params: RegimeParameters, zbar, dzbar_scaled):
    """Slope scalar 0.5*(zeta + ubar*zeta' - zeta')*sqrt(a)*b^mu.

    ``dzbar_scaled`` must carry both derivative occurrences already
    multiplied out, i.e. the pair (ubar*zeta', zeta'); the formula is the
    schematic disc-hypothesis estimate and is used only as the
    quadratic-form coefficient.
    """
    ubar_dz, dz = dzbar_scaled
    amp = math.sqrt(params.a) * params.b ** params.mu
    return 0.5 * (zbar + ubar_dz - dz) * amp


@dataclass
class HorizonAssembly:
    """Slices, their radius fields, and ubar-derivatives of the graph."""

    params: RegimeParameters
    ubars: np.ndarray
    solutions: list
    problems: list
    dR_dubar: list                     # SphereField or None at the ends
    h_values: list | None              # slope scalar per slice, or None
    disc_hypothesis: bool

    def index_of(self, ubar):
        k = int(np.argmin(np.abs(self.ubars - ubar)))
        if abs(self.ubars[k] - ubar) > 1e-9 * max(abs(ubar), self.ubars[-1]):
            raise KeyError(f"no solved slice at ubar={ubar!r}")
        return k


def assemble(params: RegimeParameters, profile, problems, solutions,
             disc_hypothesis=False) -> HorizonAssembly:
    """Join per-slice solutions into one horizon object.

    Slices must be strictly ordered in ubar and all converged; the
    ubar-derivative uses the second-order nonuniform centered stencil on
    interior slices.
    """
    ubars = np.array([s.ubar for s in solutions], dtype=float)
    if np.any(np.diff(ubars) <= 0.0):
        raise ValueError("slices must be strictly increasing in ubar")
    for s in solutions:
        if not s.converged:
            raise NonConvergenceError(
                f"slice at ubar={s.ubar!r} is not converged",
                s.newton_trace)
    grid = solutions[0].R.grid
    n = len(solutions)
    dR = [None] * n
    for i in range(1, n - 1):
        hl = ubars[i] - ubars[i - 1]
        hr = ubars[i + 1] - ubars[i]
        fm = solutions[i - 1].R.values
        f0 = solutions[i].R.values
        fp = solutions[i + 1].R.values
        vals = (fp * hl * hl - fm * hr * hr
                + f0 * (hr * hr - hl * hl)) / (hl * hr * (hl + hr))
        dR[i] = SphereField(grid, vals)
    h_values = None
    if disc_hypothesis:
        h_values = []
        for u in ubars:
            zb = profile.zbar_at(float(u))
            dz = profile.dzbar_at(float(u))
            h_values.append(h_slope(params, zb, (float(u) * dz, dz)))
    return HorizonAssembly(params=params, ubars=ubars, solutions=solutions,
                           problems=problems, dR_dubar=dR,
                           h_values=h_values,
                           disc_hypothesis=disc_hypothesis)


@dataclass(frozen=True)
class AreaEstimate:
    ubar: float
    area_lo: float
    area_mid: float
    area_hi: float
    radius_proxy_lo: float
    radius_proxy_mid: float
    radius_proxy_hi: float

    def as_dict(self):
        return {k: float(getattr(self, k)) for k in
                ("ubar", "area_lo", "area_mid", "area_hi",
                 "radius_proxy_lo", "radius_proxy_mid", "radius_proxy_hi")}


def area(assembly: HorizonAssembly, ubar) -> AreaEstimate:
    """Area interval of one MOTS under the determinant distortion band."""
    k = assembly.index_of(ubar)
    sol = assembly.solutions[k]
    grid = sol.R.grid
    a_mid = integrate(SphereField.constant(grid, 1.0), radius=sol.R)
    f0 = assembly.params.f0
    a_lo = (1.0 - 1.0 / f0) * a_mid
    a_hi = (1.0 + 1.0 / f0) * a_mid
    rp = [math.sqrt(a / (16.0 * math.pi)) for a in (a_lo, a_mid, a_hi)]
    return AreaEstimate(ubar=float(assembly.ubars[k]), area_lo=a_lo,
                        area_mid=a_mid, area_hi=a_hi,
                        radius_proxy_lo=rp[0], radius_proxy_mid=rp[1],
                        radius_proxy_hi=rp[2])


@dataclass(frozen=True)
class SpacelikeResult:
    status: str                       # "spacelike" | "not-certified"
    reason: str
    min_schur: float                  # adversarial-direction margin
    min_sampled: float

    def as_dict(self):
        return {"status": self.status, "reason": self.reason,
                "min_schur": float(self.min_schur),
                "min_sampled": float(self.min_sampled)}


def spacelike_check(assembly: HorizonAssembly, ubar, samples=32,
                    seed=0) -> SpacelikeResult:
    """Positivity test of the induced quadratic form at one slice.

    The form in the coordinate directions (theta1, theta2, ubar) is
    diag(R^2, R^2 sin^2) plus cross terms 4*lambda_i*lambda_3*dR/dtheta_i
    and h*(1+o1) in the ubar direction.  Positive-definiteness is decided
    by the exact adversarial direction (the Schur complement of the
    angular block); random directions are evaluated as well for the
    report.
    """
    if not assembly.disc_hypothesis or assembly.h_values is None:
        return SpacelikeResult("not-certified", "disc hypothesis disabled",
                               float("nan"), float("nan"))
    k = assembly.index_of(ubar)
    sol = assembly.solutions[k]
    grid = sol.R.grid
    Rv = sol.R.values
    gt, gp = grid.gradient_values(Rv)
    sin = grid.sin_theta[:, None]
    g11 = Rv * Rv
    g22 = Rv * Rv * sin * sin
    q13 = 2.0 * gt                      # coordinate derivative dR/dtheta1
    q23 = 2.0 * gp * sin                # dR/dtheta2 = sin * frame component
    q33 = assembly.h_values[k] * (1.0 + assembly.params.o1)
    schur = q33 - q13 * q13 / g11 - q23 * q23 / g22
    min_schur = float(np.min(schur))
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    vals = []
    for l1, l2, l3 in dirs:
        q = (l1 * l1 * g11 + l2 * l2 * g22 + 2.0 * l1 * l3 * q13
             + 2.0 * l2 * l3 * q23 + l3 * l3 * q33)
        vals.append(float(np.min(q)))
    min_sampled = min(vals)
    ok = (np.all(g11 > 0.0) and np.all(g22 > 0.0) and min_schur > 0.0)
    if ok:
        return SpacelikeResult("spacelike", "quadratic form positive at "
                               "all nodes", min_schur, min_sampled)
    return SpacelikeResult("not-certified",
                           "quadratic form not positive definite",
                           min_schur, min_sampled)
