"""MOTS location on a slice: the graph-radius elliptic equation.

A sphere drawn as u = 1 - R(omega) inside the slab has null expansion

    trchi' = trchi - 2 Omega D'R - 4 Omega eta.grad R
             - Omega^2 trchibar |grad R|^2 - 8 Omega^2 omegabar |grad R|^2

and inserting the certified interior model (lapse at one, trchibar at
-2/R, eta and omegabar inside their envelopes, trchi at its leading
value with the cumulative shear M0 = I(ubar, .)) turns trchi' = 0 into
the quasilinear equation solved here:

    H(R) = D'R - |grad R|^2/R - 1/R + M0/(2 R^2)
           + (ubar sqrt(a)) [c1.grad R + c2.grad R grad R + c3] / R^2 = 0,

with frozen coefficient fields bounded by b^(1/4) in the frame norm.
H is linear in (c1, c2, c3), so the method-of-continuity family G used
for the solve is exactly H with the coefficients scaled by the
continuation parameter; G(., 0) is the unperturbed equation whose
constant-coefficient case has the explicit solution R = M0/2, and
G(., 1) recovers the discretized trchi' = 0 equation.  Each Newton step
solves the exact linearization (including the metric-variation terms)
matrix-free with GMRES, preconditioned by a constant-coefficient
Helmholtz inverse applied in the harmonic basis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import NonConvergenceError, PositivityError
from .regime import RegimeParameters
from .sphere import SphereField, l2_norm


@dataclass(frozen=True)
class MotsProblem:
    """One ubar-slice of the MOTS equation.

    ``M0`` is the effective mass profile (the cumulative shear at the
    slice), the c-fields are the frozen perturbation coefficients in the
    unit-sphere orthonormal frame, and ``pert_scale`` is their common
    prefactor ubar * sqrt(a).
    """

    grid: object
    ubar: float
    M0: SphereField
    c1_theta: np.ndarray
    c1_phi: np.ndarray
    c2_tt: np.ndarray
    c2_tp: np.ndarray
    c2_pp: np.ndarray
    c3: np.ndarray
    pert_scale: float
    f_slice: np.ndarray
    zbar: float
    m0: float
    coeff_bound: float            # b^(1/4)

    def __post_init__(self):
        if np.any(self.M0.values <= 0.0):
            raise PositivityError("M0 must be strictly positive")
        c1n = np.max(np.hypot(self.c1_theta, self.c1_phi))
        c2n = np.max(np.sqrt(self.c2_tt ** 2 + 2.0 * self.c2_tp ** 2
                             + self.c2_pp ** 2))
        c3n = np.max(np.abs(self.c3))
        tol = 1.0 + 1e-12
        if max(c1n, c2n, c3n) > self.coeff_bound * tol:
            raise ValueError("perturbation coefficients exceed the b^(1/4) "
                             "frame-norm bound")


def sample_perturbations(grid, params: RegimeParameters, seed, beta):
    """Smooth low-degree coefficient fields with frame norm beta*b^(1/4).

    c2 is sampled isotropic (a multiple of the identity in the frame),
    which is the shape the background-field route can realize exactly.
    """
    rng = np.random.default_rng(seed)
    th, ph = grid.theta_2d, grid.phi_2d
    basis = [np.ones_like(th), np.cos(th), np.sin(th) * np.cos(ph),
             np.sin(th) * np.sin(ph), 0.5 * (3.0 * np.cos(th) ** 2 - 1.0),
             np.sin(th) ** 2 * np.cos(2.0 * ph),
             np.sin(th) * np.cos(th) * np.sin(ph)]

    def smooth():
        c = rng.standard_normal(len(basis))
        f = sum(ci * bi for ci, bi in zip(c, basis))
        return f / np.max(np.abs(f))

    target = beta * params.b ** 0.25
    raw_t, raw_p = smooth(), smooth()
    nrm = np.max(np.hypot(raw_t, raw_p))
    c2s = smooth() * (target / math.sqrt(2.0))
    return {
        "c1_theta": raw_t * (target / nrm),
        "c1_phi": raw_p * (target / nrm),
        "c2_tt": c2s, "c2_tp": np.zeros_like(c2s), "c2_pp": c2s,
        "c3": smooth() * target,
    }


def make_problem(profile, ubar, seed=0, beta=0.4) -> MotsProblem:
    """Assemble the slice equation from a built shear profile."""
    params = profile.params
    grid = profile.grid
    pert = sample_perturbations(grid, params, seed, beta)
    return MotsProblem(
        grid=grid, ubar=float(ubar),
        M0=SphereField(grid, profile.I_at(float(ubar))),
        pert_scale=float(ubar) * math.sqrt(params.a),
        f_slice=profile.f_at(float(ubar)),
        zbar=profile.zbar_at(float(ubar)),
        m0=profile.m0,
        coeff_bound=params.b ** 0.25,
        **pert)


# -- residual and exact linearization ---------------------------------------

def _eval_residual(problem, Rv, c_scale=1.0, M0_values=None):
    grid = problem.grid
    if np.any(Rv <= 0.0):
        raise PositivityError("graph radius R must stay strictly positive")
    M0 = problem.M0.values if M0_values is None else M0_values
    s = problem.pert_scale * c_scale
    lap = grid.laplacian_values(Rv)
    gt, gp = grid.gradient_values(Rv)
    gsq = gt * gt + gp * gp
    c1dot = problem.c1_theta * gt + problem.c1_phi * gp
    c2dot = (problem.c2_tt * gt * gt + 2.0 * problem.c2_tp * gt * gp
             + problem.c2_pp * gp * gp)
    R2 = Rv * Rv
    R3 = R2 * Rv
    res = (lap / R2 - gsq / R3 - 1.0 / Rv + M0 / (2.0 * R2)
           + s * (c1dot / R3 + c2dot / (R3 * Rv) + problem.c3 / R2))
    aux = (lap, gt, gp, gsq, c1dot, c2dot)
    return res, aux


def _jacobian_parts(problem, Rv, aux, c_scale=1.0, M0_values=None):
    lap, gt, gp, gsq, c1dot, c2dot = aux
    M0 = problem.M0.values if M0_values is None else M0_values
    s = problem.pert_scale * c_scale
    R2 = Rv * Rv
    R3 = R2 * Rv
    R4 = R3 * Rv
    R5 = R4 * Rv
    wt = (-2.0 * gt / R3 + s * problem.c1_theta / R3
          + 2.0 * s * (problem.c2_tt * gt + problem.c2_tp * gp) / R4)
    wp = (-2.0 * gp / R3 + s * problem.c1_phi / R3
          + 2.0 * s * (problem.c2_tp * gt + problem.c2_pp * gp) / R4)
    diag = (-2.0 * lap / R3 + 3.0 * gsq / R4 + 1.0 / R2 - M0 / R3
            - 3.0 * s * c1dot / R4 - 4.0 * s * c2dot / R5
            - 2.0 * s * problem.c3 / R3)
    return wt, wp, diag, R2


def residual_H(problem: MotsProblem, R: SphereField) -> SphereField:
    """Residual of the full slice equation H at the given radius field."""
    res, _ = _eval_residual(problem, R.values)
    return SphereField(problem.grid, res)


def residual_FG(problem: MotsProblem, R: SphereField, lam, which):
    """Continuity families F (mass-wobble ramp) and G (coefficient ramp).

    F(., lam) multiplies the mass coefficient by [1 + (f-1) lam] with the
    perturbations off; G(., lam) scales the perturbation coefficients by
    lam.  F(., 0) and G(., 0) agree pointwise, and G(., 1) is the
    discretized trchi' = 0 equation.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("continuation parameter must lie in [0, 1]")
    if which == "G":
        res, _ = _eval_residual(problem, R.values, c_scale=lam)
    elif which == "F":
        M0 = problem.M0.values * (1.0 + (problem.f_slice - 1.0) * lam)
        res, _ = _eval_residual(problem, R.values, c_scale=0.0, M0_values=M0)
    else:
        raise ValueError("which must be 'F' or 'G'")
    return SphereField(problem.grid, res)


def expansion_of_graph(problem: MotsProblem, R: SphereField) -> SphereField:
    """Null expansion trchi' of the graph sphere, via the background route.

    Reconstructs the interior fields realizing the slice coefficients
    (lapse 1, trchibar = -2/R, eta and omegabar from c1 and the isotropic
    part of c2, trchi from the leading model plus c3) and evaluates the
    frame-transformed expansion directly.  Up to the factor -2 this must
    reproduce residual_H; the two routes share no algebra beyond the
    operators.
    """
    grid = problem.grid
    Rv = R.values
    s = problem.pert_scale
    lap = grid.laplacian_values(Rv)
    gt, gp = grid.gradient_values(Rv)
    R2 = Rv * Rv
    eta_t = s * problem.c1_theta / (2.0 * R2)
    eta_p = s * problem.c1_phi / (2.0 * R2)
    omegabar = s * 0.5 * (problem.c2_tt + problem.c2_pp) / (4.0 * R2)
    trchibar = -2.0 / Rv
    trchi = (2.0 / Rv - problem.M0.values / R2
             - 2.0 * s * problem.c3 / R2)
    lap_prime = lap / R2
    gsq_prime = (gt * gt + gp * gp) / R2
    eta_dot = (eta_t * gt + eta_p * gp) / Rv
    out = (trchi - 2.0 * lap_prime - 4.0 * eta_dot
           - trchibar * gsq_prime - 8.0 * omegabar * gsq_prime)
    return SphereField(grid, out)


# -- Newton / continuation solver -------------------------------------------

@dataclass(frozen=True)
class SolveOptions:
    newton_tol: float = 1.0e-9       # relative to the slice 1/length scale
    max_iter: int = 50
    lin_tol: float = 1.0e-10
    dlam_init: float = 0.1
    dlam_floor: float = 1.0e-4
    max_backtracks: int = 6
    gmres_restart: int = 60
    gmres_maxiter: int = 4
    route: str = "continuation"      # or "newton" (direct on H)


@dataclass
class MotsSolution:
    R: SphereField
    ubar: float
    residual_norm: float
    newton_trace: list
    lambda_path: list
    diagnostics: dict
    converged: bool = True

    def save(self, stem, config_hash=""):
        """Persist as JSON metadata plus an npz array container."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        meta = {"kind": "horizonlab-mots-solution",
                "config_hash": config_hash, "ubar": self.ubar,
                "residual_norm": self.residual_norm,
                "lambda_path": [float(v) for v in self.lambda_path],
                "diagnostics": {k: (list(v) if isinstance(v, tuple) else v)
                                for k, v in self.diagnostics.items()},
                "converged": self.converged,
                "grid": {"n_theta": self.R.grid.n_theta,
                         "n_phi": self.R.grid.n_phi}}
        tmp = stem.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(meta, sort_keys=True, indent=1))
        tmp.replace(stem.with_suffix(".json"))
        np.savez_compressed(stem.with_suffix(".npz"), R=self.R.values)

    @staticmethod
    def load(stem):
        from .sphere import get_grid
        stem = Path(stem)
        meta = json.loads(stem.with_suffix(".json").read_text())
        grid = get_grid(meta["grid"]["n_theta"], meta["grid"]["n_phi"])
        arrays = np.load(stem.with_suffix(".npz"))
        return MotsSolution(R=SphereField(grid, arrays["R"]),
                            ubar=meta["ubar"],
                            residual_norm=meta["residual_norm"],
                            newton_trace=[],
                            lambda_path=meta["lambda_path"],
                            diagnostics=meta["diagnostics"],
                            converged=meta["converged"])


class _NewtonFail(Exception):
    pass


def _hessian_max(grid, values):
    """Max covariant-Hessian component on the unit sphere.

    The orthonormal-frame components with connection terms included stay
    bounded through the polar caps and their trace reproduces the
    Laplacian; they are synthesized from exact derivative tables.
    """
    h_tt, h_tp, h_pp = grid.hessian_values(values)
    return float(max(np.max(np.abs(h_tt)), np.max(np.abs(h_tp)),
                     np.max(np.abs(h_pp))))


def _quad_mean(grid, values):
    return float(np.sum(grid.weights * values)) / (4.0 * np.pi)


def _newton(problem, Rv, opts, tol_abs, c_scale, trace, stage):
    grid = problem.grid
    n = Rv.size
    l = np.arange(grid.lmax + 1, dtype=float)
    eig = -l * (l + 1.0)
    rec = {"stage": stage, "lambda": c_scale, "norms": [], "gmres_iters": []}
    trace.append(rec)
    res, aux = _eval_residual(problem, Rv, c_scale)
    norm = l2_norm(SphereField(grid, res))
    rec["norms"].append(norm)
    for _ in range(opts.max_iter):
        if norm <= tol_abs:
            rec["iterations"] = len(rec["norms"]) - 1
            return Rv, norm
        wt, wp, diag, R2 = _jacobian_parts(problem, Rv, aux, c_scale)
        # Solve the R^2-rescaled system: its principal part is exactly the
        # unit-sphere Laplacian and its diagonal sits near -1, so one
        # constant-coefficient Helmholtz inverse preconditions uniformly
        # well across the whole slice family.
        sdiag = R2 * diag
        swt, swp = R2 * wt, R2 * wp

        def matvec(v):
            vv = v.reshape(Rv.shape)
            lapv = grid.laplacian_values(vv)
            gtv, gpv = grid.gradient_values(vv)
            return (lapv + swt * gtv + swp * gpv + sdiag * vv).ravel()

        shift = min(_quad_mean(grid, sdiag), -0.25)
        diag_safe = np.minimum(sdiag, 0.01 * shift)

        def precond(v):
            # Helmholtz inverse on the resolved harmonic band; the grid
            # content beyond the band sees only the pointwise diagonal,
            # so divide it by that to keep the preconditioned operator
            # nonsingular on the whole discrete space.
            vv = v.reshape(Rv.shape)
            coeff = grid.analyze(vv)
            band = grid.synthesize(coeff / (eig[:, None] + shift))
            perp = vv - grid.synthesize(coeff)
            return (band + perp / diag_safe).ravel()

        A = LinearOperator((n, n), matvec=matvec)
        M = LinearOperator((n, n), matvec=precond)
        counter = {"n": 0}

        def cb(_):
            counter["n"] += 1

        dR, info = gmres(A, (-R2 * res).ravel(), rtol=opts.lin_tol,
                         atol=0.0, restart=opts.gmres_restart,
                         maxiter=opts.gmres_maxiter, M=M, callback=cb,
                         callback_type="pr_norm")
        rec["gmres_iters"].append(counter["n"])
        if info < 0 or not np.all(np.isfinite(dR)):
            raise _NewtonFail(f"linear solve broke down (info={info})")
        # info > 0 means the Krylov residual stalled at its roundoff
        # floor just above rtol; the step itself is still validated (and
        # rejected if actually bad) by the decrease test below.
        dR = dR.reshape(Rv.shape)
        alpha = 1.0
        for _ in range(opts.max_backtracks + 1):
            R_try = Rv + alpha * dR
            if np.min(R_try) > 0.0:
                res_try, aux_try = _eval_residual(problem, R_try, c_scale)
                norm_try = l2_norm(SphereField(grid, res_try))
                if norm_try <= tol_abs or norm_try < norm * (1.0 - 1e-4 * alpha):
                    Rv, res, aux, norm = R_try, res_try, aux_try, norm_try
                    break
            alpha *= 0.5
        else:
            raise _NewtonFail("backtracking stalled")
        rec["norms"].append(norm)
    if norm <= tol_abs:
        rec["iterations"] = len(rec["norms"]) - 1
        return Rv, norm
    raise _NewtonFail(f"no convergence in {opts.max_iter} iterations")


def solve_slice(problem: MotsProblem, options: SolveOptions | None = None,
                initial_guess: SphereField | None = None) -> MotsSolution:
    """Solve the slice equation; fails loudly rather than returning junk.

    The default route Newton-corrects the explicit constant-coefficient
    solution at continuation parameter 0, walks the coefficient ramp to 1
    with adaptive steps (halving on failure, doubling after two
    successes, hard floor), and finishes with Newton on the full H.  With
    ``initial_guess`` given (or route="newton") it runs damped Newton on
    H directly, which is the uniqueness-probe mode.
    """
    opts = options or SolveOptions()
    grid = problem.grid
    M0 = problem.M0.values
    tol_abs = (opts.newton_tol * math.sqrt(4.0 * math.pi)
               * 2.0 / _quad_mean(grid, M0))
    trace, lam_path = [], []
    direct = initial_guess is not None or opts.route == "newton"
    Rv = (initial_guess.values.copy() if initial_guess is not None
          else 0.5 * M0.copy())
    try:
        if direct:
            lam_path.append(1.0)
            Rv, norm = _newton(problem, Rv, opts, tol_abs, 1.0, trace,
                               "direct")
        else:
            lam = 0.0
            lam_path.append(lam)
            Rv, norm = _newton(problem, Rv, opts, tol_abs, lam, trace,
                               "base")
            dlam, streak = opts.dlam_init, 0
            while lam < 1.0:
                lam_try = min(1.0, lam + dlam)
                try:
                    R_new, norm = _newton(problem, Rv.copy(), opts, tol_abs,
                                          lam_try, trace, "continuation")
                except _NewtonFail:
                    trace.pop()
                    dlam *= 0.5
                    streak = 0
                    if dlam < opts.dlam_floor:
                        raise NonConvergenceError(
                            f"continuation step fell below the floor at "
                            f"lambda={lam:.4f}", trace)
                    continue
                Rv, lam = R_new, lam_try
                lam_path.append(lam)
                streak += 1
                if streak >= 2:
                    dlam = min(2.0 * dlam, 0.5)
                    streak = 0
            Rv, norm = _newton(problem, Rv, opts, tol_abs, 1.0, trace,
                               "final")
    except _NewtonFail as exc:
        raise NonConvergenceError(str(exc), trace) from exc

    gt, gp = grid.gradient_values(Rv)
    grad_max = float(np.max(np.hypot(gt, gp) / Rv))
    hess_max = _hessian_max(grid, Rv)
    return MotsSolution(
        R=SphereField(grid, Rv), ubar=problem.ubar, residual_norm=norm,
        newton_trace=trace, lambda_path=lam_path,
        diagnostics={"c0_band": (float(np.min(Rv)), float(np.max(Rv))),
                     "grad_max": grad_max, "hess_max": hess_max,
                     "tol_abs": tol_abs})


# -- a-priori bound verification --------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    name: str
    passed: bool
    value: float
    threshold: float
    ratio: float
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "passed": bool(self.passed),
                "value": float(self.value),
                "threshold": float(self.threshold),
                "ratio": float(self.ratio), "detail": self.detail}


@dataclass(frozen=True)
class BoundReport:
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {"passed": self.passed,
                "checks": [c.as_dict() for c in self.checks]}


DEFAULT_THRESHOLDS = {"c1": 0.1, "hess": 0.1, "w12": 0.1, "h": 1.5}


def verify_apriori(solution: MotsSolution, problem: MotsProblem,
                   params: RegimeParameters,
                   thresholds=None) -> BoundReport:
    """Check every a-priori bound the continuity argument relies on."""
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    grid = problem.grid
    Rv = solution.R.values
    M0 = problem.M0.values
    checks = []

    lo = ((1.0 - 1.0 / params.c1) * (1.0 - 1.0 / params.c2_zeta)
          * (0.5 - params.o1) * float(np.min(M0)))
    hi = ((1.0 + 1.0 / params.c1) * (1.0 + 1.0 / params.c2_zeta)
          * (0.5 + params.o1) * float(np.max(M0)))
    rmin, rmax = float(np.min(Rv)), float(np.max(Rv))
    viol = max(lo - rmin, rmax - hi) / (hi - lo)
    checks.append(BoundCheck(
        "c0_band", rmin >= lo and rmax <= hi, viol, 0.0,
        max(viol, 0.0), f"R in [{lo:.6e}, {hi:.6e}] pointwise"))

    mbar = (problem.ubar * params.b ** params.mu * math.sqrt(params.a)
            * problem.zbar + (1.0 - problem.zbar) * 4.0 * problem.m0)
    gt, gp = grid.gradient_values(Rv)
    w12 = float(np.sum(grid.weights * (gt * gt + gp * gp)))
    checks.append(BoundCheck(
        "w12", w12 <= th["w12"] * mbar, w12, th["w12"] * mbar,
        w12 / (th["w12"] * mbar), "int |grad R|^2 dA << mass scale"))

    grad_max = float(np.max(np.hypot(gt, gp) / Rv))
    checks.append(BoundCheck(
        "c1_gradient", grad_max <= th["c1"], grad_max, th["c1"],
        grad_max / th["c1"], "max |grad R| << 1"))

    hess = _hessian_max(grid, Rv)
    checks.append(BoundCheck(
        "c2_hessian", hess <= th["hess"] * mbar, hess, th["hess"] * mbar,
        hess / (th["hess"] * mbar), "max |second derivatives of R| << mass"))

    center = 0.5 * mbar
    hvals = 1.0 + 8.0 / (mbar * mbar) * (Rv - center) ** 2
    hmax = float(np.max(hvals))
    checks.append(BoundCheck(
        "h_weight", hmax <= th["h"] and float(np.min(hvals)) >= 1.0,
        hmax, th["h"], (hmax - 1.0) / (th["h"] - 1.0),
        "Bochner weight stays positive and order one"))
    return BoundReport(tuple(checks))
