"""Config-driven pipeline: gen-data, evolve, find-mots, horizon, penrose,
report.

Configuration is an INI file with sections [regime], [grid], [profile],
[solver], [bounds], [toggles], [sweep], [output]; every value has a
default except solver.seed, which is mandatory for reproducibility.
Each artifact embeds the hash of the numeric-relevant configuration, and
downstream subcommands refuse to run against artifacts produced from a
different configuration.  Reruns with identical config and seed emit
byte-identical numeric JSON; wall-clock metadata lives in run_meta.json
only.

Exit codes: 0 ok, 2 config or dependency error, 3 constraint failure,
4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import horizon as horizon_mod
from . import penrose as penrose_mod
from .errors import (ConfigError, ConstraintError, DependencyError,
                     HorizonLabError, MalformedParametersError,
                     NonConvergenceError)
from .mots import (MotsSolution, SolveOptions, make_problem, solve_slice,
                   verify_apriori)
from .regime import RegimeParameters, derive, validate
from .reporting import (config_hash, gnuplot_script, svg_class_map,
                        svg_line_chart, write_csv, write_dat, write_json)
from .shear import (NORM_BUDGET, ProfileSpec, ShearProfile, build_profile,
                    scale_critical_norm, verify_profile)
from .sphere import get_grid
from .transport import SlabModel, detect_trapped, integrate_data_cone

ENV_OUTDIR = "HORIZONLAB_OUT"

_SCHEMA = {
    "regime": {
        "a": ("float", 1.0e4), "kappa": ("float", 0.6),
        "y": ("float", 10.0), "t": ("float", 0.3), "mu": ("optfloat", None),
        "gamma": ("float", 0.05), "lambda_lo": ("float", 0.88),
        "lambda_hi": ("float", 0.91), "c1": ("float", 20.0),
        "c2_zeta": ("float", 20.0), "c2_unknown_bound": ("float", 1.0),
        "o1": ("float", 0.05), "d0": ("float", 20.0),
        "f0": ("float", 100.0), "C_eps": ("float", 1.0),
        "penrose_coupling": ("bool", True),
    },
    "grid": {
        "n_theta": ("int", 64), "n_phi": ("int", 128),
        "n_ubar": ("int", 257), "cone_steps": ("int", 2048),
    },
    "profile": {
        "wobble_frac": ("float", 0.5), "zeta_wobble_frac": ("float", 0.5),
        "cap_width": ("float", 3.0e-4), "park_frac": ("float", 0.25),
        "phi0": ("float", 0.7), "repay_lo": ("float", 0.30),
        "repay_hi": ("float", 0.70), "norm_budget": ("float", NORM_BUDGET),
    },
    "solver": {
        "seed": ("int", None), "newton_tol": ("float", 1.0e-9),
        "max_iter": ("int", 50), "lin_tol": ("float", 1.0e-10),
        "dlam_init": ("float", 0.1), "dlam_floor": ("float", 1.0e-4),
        "beta": ("float", 0.4), "n_window_slices": ("int", 16),
        "n_transition_slices": ("int", 4), "n_null_slices": ("int", 4),
    },
    "bounds": {
        "c1_threshold": ("float", 0.1), "hess_threshold": ("float", 0.1),
        "w12_threshold": ("float", 0.1), "h_threshold": ("float", 1.5),
    },
    "toggles": {
        "disc_hypothesis": ("bool", True),
        "envelope_multiplier": ("float", 1.0),
    },
    "sweep": {
        "kappa": ("floatlist", []), "y": ("floatlist", []),
        "t": ("floatlist", []), "ubar_frac": ("floatlist", [0.0]),
    },
    "output": {"directory": ("str", "runs/default")},
}


def _convert(kind, raw, where):
    try:
        if kind == "float":
            return float(raw)
        if kind == "optfloat":
            return None if raw.strip() == "" else float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "floatlist":
            return [float(v) for v in raw.replace(",", " ").split()]
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {where}: {raw!r}") from exc


@dataclass
class RunConfig:
    resolved: dict
    outdir: Path

    @property
    def hash(self):
        numeric = {k: v for k, v in self.resolved.items() if k != "output"}
        return config_hash(numeric)

    def __getitem__(self, section):
        return self.resolved[section]

    def params(self) -> RegimeParameters:
        r = dict(self.resolved["regime"])
        return RegimeParameters(**r)

    def profile_spec(self) -> ProfileSpec:
        p = dict(self.resolved["profile"])
        p.pop("norm_budget")
        return ProfileSpec(n_ubar=self.resolved["grid"]["n_ubar"], **p)

    def grid(self):
        g = self.resolved["grid"]
        return get_grid(g["n_theta"], g["n_phi"])

    def solve_options(self) -> SolveOptions:
        s = self.resolved["solver"]
        return SolveOptions(newton_tol=s["newton_tol"],
                            max_iter=s["max_iter"], lin_tol=s["lin_tol"],
                            dlam_init=s["dlam_init"],
                            dlam_floor=s["dlam_floor"])

    def thresholds(self):
        b = self.resolved["bounds"]
        return {"c1": b["c1_threshold"], "hess": b["hess_threshold"],
                "w12": b["w12_threshold"], "h": b["h_threshold"]}


def parse_config(path, overrides=(), outdir_flag=None) -> RunConfig:
    """Load, default-fill, and type-check the INI configuration."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    resolved = {}
    for section, keys in _SCHEMA.items():
        resolved[section] = {}
        for key, (kind, default) in keys.items():
            if cp.has_option(section, key):
                resolved[section][key] = _convert(
                    kind, cp.get(section, key), f"[{section}] {key}")
            else:
                resolved[section][key] = default
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, "
                              f"got {ov!r}")
        target, value = ov.split("=", 1)
        section, key = target.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown override target {target!r}")
        resolved[section][key] = _convert(_SCHEMA[section][key][0], value,
                                          target)
    if resolved["solver"]["seed"] is None:
        raise ConfigError("solver.seed is mandatory for reproducibility")
    outdir = (Path(outdir_flag) if outdir_flag
              else Path(os.environ.get(ENV_OUTDIR) or
                        resolved["output"]["directory"]))
    return RunConfig(resolved=resolved, outdir=outdir)


def default_config_text(seed=1234):
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (kind, default) in keys.items():
            if key == "seed":
                lines.append(f"seed = {seed}")
            elif default is None:
                lines.append(f"# {key} =")
            elif kind == "floatlist":
                lines.append(f"# {key} = " + " ".join(str(v)
                                                      for v in default)
                             if default else f"# {key} =")
            else:
                lines.append(f"{key} = {default}")
        lines.append("")
    return "\n".join(lines)


# -- artifact helpers -------------------------------------------------------

def _meta(cfg: RunConfig):
    # every JSON report header carries the derived regime scalars
    header = {"config_hash": cfg.hash, "tool": "horizonlab"}
    try:
        header["derived"] = derive(cfg.params()).as_dict()
    except HorizonLabError:
        pass
    return header


def _write_run_meta(cfg, outdir, subcommand):
    write_json(outdir / "run_meta.json",
               {"last_subcommand": subcommand,
                "wall_time_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                               time.gmtime()),
                "config_hash": cfg.hash})


def _require(cfg, outdir, name, producer):
    path = outdir / name
    if not path.exists():
        raise DependencyError(str(path), producer)
    payload = json.loads(path.read_text())
    found = payload.get("meta", payload).get("config_hash")
    if found != cfg.hash:
        raise DependencyError(
            f"{path} (config hash {found} != {cfg.hash})", producer)
    return payload


def _load_profile(cfg, outdir) -> ShearProfile:
    _require(cfg, outdir, "profile.json", "gen-data")
    return ShearProfile.load(outdir / "profile")


def _slice_ladder(cfg, d):
    s = cfg["solver"]
    window = np.geomspace(d.ubar_start, d.ubar_lambda,
                          s["n_window_slices"])
    trans = np.linspace(d.ubar_lambda, d.ubar_lambda_hi,
                        s["n_transition_slices"] + 2)[1:-1]
    tail = np.linspace(d.ubar_lambda_hi, d.ubar_end,
                       s["n_null_slices"] + 1)[1:]
    return np.concatenate([window, trans, tail])


# -- subcommands ------------------------------------------------------------

def cmd_gen_data(cfg: RunConfig):
    outdir = cfg.outdir
    params = cfg.params()
    grid = cfg.grid()
    profile = build_profile(params, cfg.profile_spec(), grid)
    profile.save(outdir / "profile", config_hash=cfg.hash)
    report = verify_profile(profile)
    norm = scale_critical_norm(profile,
                               budget=cfg["profile"]["norm_budget"])
    payload = {"meta": _meta(cfg), "constraints": report.as_dict(),
               "scale_critical_norm": norm,
               "derived": profile.derived.as_dict()}
    write_json(outdir / "constraint_report.json", payload)
    d = profile.derived
    rows = []
    for u in (d.ubar_start, 0.5 * d.ubar_lambda, d.ubar_lambda,
              d.ubar_lambda_hi, d.ubar_end):
        I = profile.I_at(float(u))
        for i in range(0, grid.n_theta, max(1, grid.n_theta // 16)):
            for j in range(0, grid.n_phi, max(1, grid.n_phi // 16)):
                rows.append((float(u), float(grid.theta[i]),
                             float(grid.phi[j]), float(I[i, j])))
    write_csv(outdir / "cumulative_shear.csv",
              ("ubar", "theta", "phi", "I"), rows, stamp=cfg.hash)
    _write_run_meta(cfg, outdir, "gen-data")
    if not report.passed or not norm["passed"]:
        failures = [c.as_dict() for c in report.checks if not c.passed]
        if not norm["passed"]:
            failures.append({"name": "scale_critical_norm", **norm})
        write_json(outdir / "failures.json",
                   {"meta": _meta(cfg), "failures": failures})
        raise ConstraintError("profile_verification",
                              f"{len(failures)} checks failed; see "
                              f"{outdir / 'failures.json'}")
    return payload


def cmd_evolve(cfg: RunConfig):
    outdir = cfg.outdir
    profile = _load_profile(cfg, outdir)
    d = profile.derived
    cone = integrate_data_cone(profile,
                               n_steps=cfg["grid"]["cone_steps"])
    grid = profile.grid
    rows = []
    ti = max(1, grid.n_theta // 8)
    pj = max(1, grid.n_phi // 8)
    for k, u in enumerate(cone.ubar_nodes):
        for i in range(0, grid.n_theta, ti):
            for j in range(0, grid.n_phi, pj):
                rows.append((float(u), float(grid.theta[i]),
                             float(grid.phi[j]),
                             float(cone.trchi[k, i, j])))
    write_csv(outdir / "cone_trchi.csv", ("ubar", "theta", "phi", "trchi"),
              rows, stamp=cfg.hash)

    slab = SlabModel(profile.params, profile,
                     cfg["toggles"]["envelope_multiplier"])
    u_lattice = np.geomspace(d.u_trapped, 1.0, 9)
    ubar_lattice = np.linspace(0.0, d.delta, 9)
    map_rows = []
    for u in u_lattice:
        for ub in ubar_lattice:
            v = detect_trapped(slab, float(u), float(ub))
            map_rows.append((float(u), float(ub), v.status,
                             v.min_leading, v.max_leading, v.envelope))
    write_csv(outdir / "trapped_map.csv",
              ("u", "ubar", "status", "min_leading", "max_leading",
               "envelope"), map_rows, stamp=cfg.hash)
    verdict = detect_trapped(slab, d.u_trapped, d.delta)
    payload = {"meta": _meta(cfg),
               "step_error": cone.step_error,
               "n_steps": cone.n_steps,
               "trchi_final_min": float(np.min(cone.trchi_final)),
               "trchi_final_max": float(np.max(cone.trchi_final)),
               "trapped_at_predicted_sphere": verdict.as_dict()}
    write_json(outdir / "evolve.json", payload)
    _write_run_meta(cfg, outdir, "evolve")
    return payload


def cmd_find_mots(cfg: RunConfig):
    outdir = cfg.outdir
    profile = _load_profile(cfg, outdir)
    params = profile.params
    d = profile.derived
    opts = cfg.solve_options()
    seed = cfg["solver"]["seed"]
    beta = cfg["solver"]["beta"]
    ladder = _slice_ladder(cfg, d)
    (outdir / "mots").mkdir(parents=True, exist_ok=True)
    slices = []
    history_rows = []
    for idx, ub in enumerate(ladder):
        problem = make_problem(profile, float(ub), seed=seed + idx,
                               beta=beta)
        solution = solve_slice(problem, opts)
        bounds = verify_apriori(solution, problem, params,
                                cfg.thresholds())
        solution.save(outdir / "mots" / f"slice_{idx:03d}",
                      config_hash=cfg.hash)
        for rec in solution.newton_trace:
            for it, nrm in enumerate(rec["norms"]):
                history_rows.append((idx, float(ub), rec["stage"],
                                     float(rec["lambda"]), it, float(nrm)))
        entry = {
            "index": idx, "ubar": float(ub),
            "residual_norm": solution.residual_norm,
            "lambda_path": [float(v) for v in solution.lambda_path],
            "newton_iterations": [r.get("iterations", len(r["norms"]) - 1)
                                  for r in solution.newton_trace],
            "diagnostics": {
                "c0_band": list(solution.diagnostics["c0_band"]),
                "grad_max": solution.diagnostics["grad_max"],
                "hess_max": solution.diagnostics["hess_max"],
                "tol_abs": solution.diagnostics["tol_abs"]},
            "M0_min": float(np.min(problem.M0.values)),
            "M0_max": float(np.max(problem.M0.values)),
            "zbar": problem.zbar,
            "bounds": bounds.as_dict(),
        }
        slices.append(entry)
    write_csv(outdir / "mots_residual_history.csv",
              ("slice", "ubar", "stage", "lambda", "iteration", "norm"),
              history_rows, stamp=cfg.hash)
    payload = {"meta": _meta(cfg), "n_slices": len(slices),
               "slices": slices}
    write_json(outdir / "mots_report.json", payload)
    _write_run_meta(cfg, outdir, "find-mots")
    if not all(s["bounds"]["passed"] for s in slices):
        raise ConstraintError("apriori_bounds",
                              "an a-priori bound failed on some slice; "
                              "see mots_report.json")
    return payload


def _load_solutions(cfg, outdir, profile):
    report = _require(cfg, outdir, "mots_report.json", "find-mots")
    problems, solutions = [], []
    seed = cfg["solver"]["seed"]
    beta = cfg["solver"]["beta"]
    for entry in report["slices"]:
        idx = entry["index"]
        solution = MotsSolution.load(outdir / "mots" / f"slice_{idx:03d}")
        problem = make_problem(profile, entry["ubar"], seed=seed + idx,
                               beta=beta)
        problems.append(problem)
        solutions.append(solution)
    return report, problems, solutions


def cmd_horizon(cfg: RunConfig):
    outdir = cfg.outdir
    profile = _load_profile(cfg, outdir)
    report, problems, solutions = _load_solutions(cfg, outdir, profile)
    assembly = horizon_mod.assemble(
        profile.params, profile, problems, solutions,
        disc_hypothesis=cfg["toggles"]["disc_hypothesis"])
    rows = []
    for k, ub in enumerate(assembly.ubars):
        est = horizon_mod.area(assembly, ub)
        sl = horizon_mod.spacelike_check(assembly, ub)
        dr = assembly.dR_dubar[k]
        rows.append({
            "ubar": float(ub),
            "R_min": float(np.min(solutions[k].R.values)),
            "R_max": float(np.max(solutions[k].R.values)),
            "area": est.as_dict(),
            "dR_dubar_min": (float(np.min(dr.values)) if dr else None),
            "dR_dubar_max": (float(np.max(dr.values)) if dr else None),
            "h_slope": (assembly.h_values[k]
                        if assembly.h_values else None),
            "spacelike": sl.as_dict(),
        })
    payload = {"meta": _meta(cfg), "slices": rows,
               "disc_hypothesis": assembly.disc_hypothesis}
    write_json(outdir / "horizon.json", payload)
    _write_run_meta(cfg, outdir, "horizon")
    return payload


def cmd_penrose(cfg: RunConfig):
    outdir = cfg.outdir
    params = cfg.params()
    hz = _require(cfg, outdir, "horizon.json", "horizon")
    d = derive(params)
    slices_out = []
    for row in hz["slices"]:
        rp = penrose_mod.Interval(row["area"]["radius_proxy_lo"],
                                  row["area"]["radius_proxy_hi"])
        mg = penrose_mod.margin(params, rp, row["ubar"])
        cls = penrose_mod.classify_regime(params, row["ubar"]) \
            if params.penrose_coupling else None
        slices_out.append({"ubar": row["ubar"],
                           "margin": mg.as_dict(),
                           "classification": (cls.as_dict() if cls
                                              else None)})
    forms = penrose_mod.margin_exponent_forms(params)
    payload = {"meta": _meta(cfg),
               "adm_mass": penrose_mod.adm_mass(params).as_dict(),
               "eps_glue": d.eps_glue,
               "exponents": penrose_mod.exponent_ledger(params),
               "margin_exponent_forms": forms,
               "slices": slices_out}
    write_json(outdir / "penrose_audit.json", payload)

    axes = {k: v for k, v in cfg["sweep"].items()
            if k in ("kappa", "y", "t") and v}
    rows = penrose_mod.sweep(params, axes,
                             ubar_fracs=cfg["sweep"]["ubar_frac"])
    write_csv(outdir / "sweep.csv",
              ("kappa", "mu", "y", "t", "ubar_frac", "status", "valid",
               "reason", "log_slack"),
              [(r["kappa"], r["mu"], r["y"], r["t"], r["ubar_frac"],
                r["status"], r["valid"], r["reason"], r["log_slack"])
               for r in rows], stamp=cfg.hash)
    _write_run_meta(cfg, outdir, "penrose")
    return payload


def cmd_report(cfg: RunConfig):
    outdir = cfg.outdir
    params = cfg.params()
    d = derive(params)
    constraint = _require(cfg, outdir, "constraint_report.json", "gen-data")
    evolve = _require(cfg, outdir, "evolve.json", "evolve")
    mots = _require(cfg, outdir, "mots_report.json", "find-mots")
    hz = _require(cfg, outdir, "horizon.json", "horizon")
    audit = _require(cfg, outdir, "penrose_audit.json", "penrose")

    ubars = [s["ubar"] for s in mots["slices"]]
    xs = [u / d.delta for u in ubars]
    m0 = d.m0
    rmin = [s["diagnostics"]["c0_band"][0] / m0 for s in mots["slices"]]
    rmax = [s["diagnostics"]["c0_band"][1] / m0 for s in mots["slices"]]
    lo, hi = [], []
    for s in mots["slices"]:
        lo.append((1 - 1 / params.c1) * (1 - 1 / params.c2_zeta)
                  * (0.5 - params.o1) * s["M0_min"] / m0)
        hi.append((1 + 1 / params.c1) * (1 + 1 / params.c2_zeta)
                  * (0.5 + params.o1) * s["M0_max"] / m0)
    svg_line_chart(outdir / "r_band.svg",
                   "MOTS radius against the C0 band", "ubar/delta", "R/m0",
                   [{"x": xs, "y": rmin, "label": "min R", "color": "#125"},
                    {"x": xs, "y": rmax, "label": "max R",
                     "color": "#921"}],
                   bands=[{"x": xs, "ylo": lo, "yhi": hi,
                           "color": "#bcd"}], stamp=cfg.hash)
    write_dat(outdir / "r_band.dat", ("ubar_over_delta", "rmin", "rmax",
                                      "band_lo", "band_hi"),
              list(zip(xs, rmin, rmax, lo, hi)), stamp=cfg.hash)
    gnuplot_script(outdir / "r_band.gp", "r_band.dat",
                   "MOTS radius against the C0 band", "ubar/delta", "R/m0",
                   ("rmin", "rmax", "band_lo", "band_hi"), stamp=cfg.hash)

    rows = [ln for ln in
            (outdir / "trapped_map.csv").read_text().splitlines()
            if ln and not ln.startswith(("#", "u,"))]
    cells = {}
    for line in rows:
        parts = line.split(",")
        cells.setdefault(float(parts[1]), {})[float(parts[0])] = parts[2]
    ub_vals = sorted(cells.keys())
    u_vals = sorted({u for m in cells.values() for u in m})
    labels = [[cells[ub][u] for u in u_vals] for ub in ub_vals]
    palette = {"certified-trapped": "#803",
               "nominally-trapped": "#c86",
               "untrapped": "#9c9", "indeterminate": "#999"}
    svg_class_map(outdir / "trapped_map.svg",
                  "Trapped classification over the (u, ubar) lattice",
                  "u (log-spaced index)", "ubar (index)",
                  list(range(len(u_vals))), list(range(len(ub_vals))),
                  labels, palette, stamp=cfg.hash)

    mxs = [s["ubar"] / d.delta for s in audit["slices"]]
    mlo = [s["margin"]["numeric"]["lo"] / m0 for s in audit["slices"]]
    mhi = [s["margin"]["numeric"]["hi"] / m0 for s in audit["slices"]]
    mal = [s["margin"]["analytic_lo"] / m0 for s in audit["slices"]]
    svg_line_chart(outdir / "margin.svg",
                   "Penrose margin per slice", "ubar/delta", "margin/m0",
                   [{"x": mxs, "y": mal, "label": "analytic lower",
                     "color": "#192"}],
                   bands=[{"x": mxs, "ylo": mlo, "yhi": mhi,
                           "color": "#cdf"}], stamp=cfg.hash)
    write_dat(outdir / "margin.dat",
              ("ubar_over_delta", "numeric_lo", "numeric_hi",
               "analytic_lo"),
              list(zip(mxs, mlo, mhi, mal)), stamp=cfg.hash)
    gnuplot_script(outdir / "margin.gp", "margin.dat",
                   "Penrose margin per slice", "ubar/delta", "margin/m0",
                   ("numeric_lo", "numeric_hi", "analytic_lo"),
                   stamp=cfg.hash)

    window = [s for s in mots["slices"]
              if s["ubar"] <= d.ubar_lambda * (1 + 1e-12)]
    amp = d.shear_amp
    in_area_band = []
    for s, a_row in zip(mots["slices"], hz["slices"]):
        rp = a_row["area"]["radius_proxy_mid"]
        band_lo = (0.25 - params.o1) * amp * s["ubar"]
        band_hi = (0.25 + params.o1) * amp * s["ubar"]
        if s["ubar"] <= d.ubar_lambda * (1 + 1e-12):
            in_area_band.append(band_lo <= rp <= band_hi)
    summary = {
        "meta": _meta(cfg),
        "regime": {"validation": validate(params).as_dict(),
                   "derived": d.as_dict()},
        "profile_checks_passed": constraint["constraints"]["passed"],
        "trapped_at_predicted_sphere":
            evolve["trapped_at_predicted_sphere"]["status"],
        "n_slices": mots["n_slices"],
        "all_bounds_passed": all(s["bounds"]["passed"]
                                 for s in mots["slices"]),
        "window_slices": len(window),
        "area_band_ok": all(in_area_band),
        "classification_at_window_start":
            audit["slices"][0]["classification"]["status"]
            if audit["slices"] and audit["slices"][0]["classification"]
            else "disabled",
        "plots": ["r_band.svg", "trapped_map.svg", "margin.svg"],
    }
    write_json(outdir / "summary.json", summary)
    _write_run_meta(cfg, outdir, "report")
    return summary


_SUBCOMMANDS = {
    "gen-data": cmd_gen_data,
    "evolve": cmd_evolve,
    "find-mots": cmd_find_mots,
    "horizon": cmd_horizon,
    "penrose": cmd_penrose,
    "report": cmd_report,
}


def run(subcommand, config_path, overrides=(), outdir=None):
    """Programmatic entry: run one pipeline stage, return its payload."""
    cfg = parse_config(config_path, overrides, outdir)
    if subcommand not in _SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    try:
        return _SUBCOMMANDS[subcommand](cfg)
    except ConstraintError as exc:
        failures = cfg.outdir / "failures.json"
        if not failures.exists():
            write_json(failures, {"meta": {"config_hash": cfg.hash},
                                  "failures": [{
                                      "name": exc.constraint,
                                      "message": str(exc)}]})
        raise


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="horizonlab",
        description="Characteristic shear data, null-cone focusing, MOTS "
                    "location, horizon assembly, and Penrose audits.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    init = sub.add_parser("init", help="write a default config file")
    init.add_argument("--config", required=True)
    init.add_argument("--seed", type=int, default=1234)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None,
                       help=f"output directory (or ${ENV_OUTDIR})")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="SECTION.KEY=VALUE")
    args = parser.parse_args(argv)
    if args.subcommand == "init":
        Path(args.config).parent.mkdir(parents=True, exist_ok=True)
        Path(args.config).write_text(default_config_text(args.seed))
        print(f"wrote default config to {args.config}")
        return 0
    try:
        run(args.subcommand, args.config, args.overrides, args.out)
        print(f"{args.subcommand}: ok")
        return 0
    except (ConfigError, DependencyError, MalformedParametersError) as exc:
        print(f"{args.subcommand}: {exc}", file=sys.stderr)
        return 2
    except ConstraintError as exc:
        print(f"{args.subcommand}: constraint failure: {exc}",
              file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        print(f"{args.subcommand}: solver failure: {exc}", file=sys.stderr)
        return 4
    except HorizonLabError as exc:
        print(f"{args.subcommand}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
