"""Named scenarios: config parsing, dispatch to the solvers, reports and outputs.

A scenario file is an INI-style config with sections ``[scenario]``,
``[solver]``, ``[checks]`` and ``[output]``.  Every check becomes a
certificate ``{name, value, tolerance, pass}`` in the report.
"""
from __future__ import annotations

import configparser
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catenoid as cat
from . import presets
from ._validation import check_box, check_positive
from .anisotropy import parse_norm
from .chord_solver import l1_distance, solve, solve_with_regularization
from .exceptions import ConfigError, LGSolveError
from .grid_oracle import build_problem, grid_energy, minimize_relaxed, verify_least_gradient
from .output import emit_levels_svg, grid_points, write_field_csv, write_json
from .unbounded import (TruncationSchedule, certify_strip_bv, slab_tv, solve_c0_unique, solve_unbounded,
                        boundary_along, steer_nonunique, verify_single_escape)

__all__ = ["Scenario", "load_scenario", "scenario_dir", "list_scenarios", "run_scenario", "report_exit_code"]

MODES = ("bounded", "unbounded", "c0", "steer", "oracle", "regularize", "catenoid")


def scenario_dir():
    """``docs/scenarios`` of the source checkout, or ``$LGSOLVE_SCENARIOS``."""
    env = os.environ.get("LGSOLVE_SCENARIOS")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "docs" / "scenarios"


@dataclass
class Scenario:
    name: str
    mode: str
    domain: str = "disc"
    data: str = "cos_theta"
    norm: str = "l2"
    solver: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"{self.name}: unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        for k, v in self.solver.items():
            if k in ("levels", "iters", "budget") and isinstance(v, (int, float)):
                check_positive(v, k)
            if k in ("mollify_eps", "stab_tol", "probe_depth", "h", "step") and isinstance(v, float):
                check_positive(v, k)


def _convert(v):
    v = v.strip()
    low = v.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def load_scenario(path):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    with open(path) as fh:
        cp.read_file(fh)
    if "scenario" not in cp:
        raise ConfigError(f"{path}: missing [scenario] section")
    sc = cp["scenario"]
    sec = lambda n: {k: _convert(v) for k, v in cp[n].items()} if n in cp else {}
    try:
        s = Scenario(
            name=sc.get("name", Path(path).stem),
            mode=sc.get("mode", "bounded"),
            domain=sc.get("domain", "disc"),
            data=sc.get("data", "cos_theta"),
            norm=sc.get("norm", "l2"),
            solver=sec("solver"),
            checks={k: v for k, v in cp["checks"].items()} if "checks" in cp else {},
            outputs={k: v for k, v in cp["output"].items()} if "output" in cp else {},
            description=sc.get("description", ""),
        )
    except KeyError as e:
        raise ConfigError(f"{path}: {e}") from None
    if s.mode != "catenoid":
        try:
            presets.make_data(s.data, presets.make_domain(s.domain))
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from None
    return s


def list_scenarios(directory=None):
    d = Path(directory) if directory else scenario_dir()
    return sorted(p.stem for p in d.glob("*.cfg"))


def _floats(text):
    return [float(x) for x in str(text).split(",")]


def _cert(name, value, ok, tolerance=None, **extra):
    out = {"name": name, "value": value, "tolerance": tolerance, "pass": bool(ok)}
    out.update(extra)
    return out


def _tie_summary(fams):
    return [{k: v for k, v in f.items() if k != "region"} for f in fams]


# -- per-mode runners -----------------------------------------------------------------

def _bounded_checks(s, fld, certs, report):
    chk = s.checks
    for key, val in chk.items():
        if key.startswith("value@"):
            x, y = _floats(key[6:])
            lo, hi = _floats(val)
            u = float(fld(np.array([[x, y]]))[0])
            certs.append(_cert(key, u, lo <= u <= hi, tolerance=[lo, hi]))
    if "tie_families" in chk:
        fams = report["tie_families"]
        want = int(chk["tie_families"])
        certs.append(_cert("tie_families", len(fams), len(fams) == want, tolerance=want))
        if "tie_area" in chk and fams:
            lo, hi = _floats(chk["tie_area"])
            a = fams[0]["area"]
            certs.append(_cert("tie_area", a, lo <= a <= hi, tolerance=[lo, hi]))
        if "tie_lambda" in chk and fams:
            lo, hi = _floats(chk["tie_lambda"])
            got = fams[0]["lambda_range"]
            ok = abs(got[0] - lo) <= 2 * fld.dt and abs(got[1] - hi) <= 2 * fld.dt
            certs.append(_cert("tie_lambda", list(got), ok, tolerance=[lo, hi, 2 * fld.dt]))
    if "trace_max" in chk:
        td = report["trace_deviation"]
        lim = float(chk["trace_max"])
        certs.append(_cert("trace_offset_mean", td["mean"], td["mean"] <= lim, tolerance=lim))
    if "verify" in chk:
        v = verify_least_gradient(fld, check_box(_floats(chk["verify"])), fld.norm,
                                  iters=int(s.solver.get("iters", 20000)))
        v.pop("oracle")
        report["verify"] = v
        certs.append(_cert("verify_least_gradient", v["gap"], v["pass"], tolerance=v["tolerance"]))


def _run_bounded(s, report, certs, out):
    dom = presets.make_domain(s.domain)
    f = presets.make_data(s.data, dom)
    norm = parse_norm(s.norm)
    sv = s.solver
    fld = solve(dom, f, norm, K=int(sv.get("levels", 200)), mollify_eps=float(sv.get("mollify_eps", 1e-3)),
                seed=int(sv.get("seed", 0)))
    report["energies"] = {"total_variation": fld.total_variation(), "boundary_mass": fld.boundary_mass(f),
                          "scale": fld.scale(f)}
    report["tie_families"] = _tie_summary(fld.tie_families())
    report["trace_deviation"] = fld.trace_deviation() if sv.get("trace", True) else None
    report["schedule_log"] = fld.schedule_log
    report["knobs"] = dict(fld.knobs)
    nest = fld.nesting
    certs.append(_cert("nesting", nest["max_excess_area"], nest["ok"], tolerance=nest["tol"]))
    _bounded_checks(s, fld, certs, report)
    out["field"] = fld
    out["grid_box"] = None


def _schedule(s, dom, base=None):
    sv = s.solver
    step = float(sv.get("step", 5.0))
    budget = int(sv.get("budget", 8))
    box = check_box(_floats(sv["probe_box"])) if "probe_box" in sv else None
    return TruncationSchedule.default(dom, base=base, step=step, budget=budget,
                                      probe_depth=float(sv.get("probe_depth", 5.0)),
                                      stab_tol=float(sv.get("stab_tol", 1e-4)), probe_box=box)


def _unbounded_report(res, report, certs, chk):
    report["increments"] = res.increments
    report["iterates"] = res.iterates
    report["history"] = res.history
    report["escape"] = res.escape.to_dict()
    report["knobs"] = dict(res.field.knobs)
    report["energies"] = {"total_variation_truncated": res.field.total_variation()}
    thr = res.schedule.stab_tol * res.probe.area
    if chk.get("stabilized", "true").lower() == "true":
        certs.append(_cert("stabilized", res.increments[-1] if res.increments else None, res.stabilized,
                           tolerance=thr))
    if chk.get("single_escape", "false").lower() == "true":
        v = verify_single_escape(res.escape)
        certs.append(_cert("single_escape", max(res.escape.counts, default=0), v["pass"], tolerance=1))


def _run_unbounded(s, report, certs, out):
    dom = presets.make_domain(s.domain)
    f = presets.make_data(s.data, dom)
    norm = parse_norm(s.norm)
    sched = _schedule(s, dom)
    kw = dict(norm=norm, sched=sched, K=int(s.solver.get("levels", 200)), seed=int(s.solver.get("seed", 0)),
              on_exhaust="return")
    if s.mode == "c0":
        res = solve_c0_unique(dom, f, **kw)
        c = res.certificate
        report["c0_certificate"] = {k: v for k, v in c.items() if k != "margins"}
        certs.append(_cert("c0_containment", c["min_margin"], c["pass"], tolerance=0.0))
    else:
        res = solve_unbounded(dom, f, **kw)
    _unbounded_report(res, report, certs, s.checks)
    chk = s.checks
    if "slab_tv" in chk:
        X = _floats(chk["slab_tv"])
        report["slab_tv"] = {f"{x:g}": slab_tv(res.field, x) for x in X}
    if chk.get("strip_bv", "false").lower() == "true":
        try:
            b = certify_strip_bv(dom, res.field, f)
            report["strip_bv"] = b
            certs.append(_cert("strip_bv", max(b["slab_bv"]), b["pass"], tolerance=b["bound"]))
        except LGSolveError as e:
            report["strip_bv"] = {"refused": e.reason, "message": str(e)}
    if "y_independent" in chk:
        lim = float(chk["y_independent"])
        P = res.probe.points
        top = boundary_along(dom, P, np.array([0.0, -1.0]))
        dev = float(np.max(np.abs(res(P) - f.at_points(top))))
        certs.append(_cert("y_independent", dev, dev <= lim, tolerance=lim))
    out["field"] = res.field
    out["grid_box"] = res.probe.region.bounds
    out["result"] = res


def _run_steer(s, report, certs, out):
    dom = presets.make_domain(s.domain)
    f = presets.make_data(s.data, dom)
    norm = parse_norm(s.norm)
    biases = [b.strip() for b in str(s.solver.get("biases", "axis-x,axis-y")).split(",") if b.strip()]
    window = check_box(_floats(s.checks.get("verify", "1,1,3,3")))
    iters = int(s.solver.get("iters", 20000))
    base = dom.curve(np.array(dom.param_near(np.zeros(2))))
    runs = {}
    report["runs"] = {}
    for b in biases:
        sched = _schedule(s, dom, base=base)
        res = steer_nonunique(dom, f, b, norm=norm, sched=sched, K=int(s.solver.get("levels", 200)),
                              on_exhaust="return")
        sub = {"bias": b}
        sub_certs = []
        _unbounded_report(res, sub, sub_certs, s.checks)
        v = verify_least_gradient(res.field, window, norm, iters=iters)
        v.pop("oracle")
        sub["verify"] = v
        sub_certs.append(_cert(f"verify[{b}]", v["gap"], v["pass"], tolerance=v["tolerance"]))
        for key, val in s.checks.items():
            if key.startswith(f"value[{b}]@"):
                x, y = _floats(key.split("@", 1)[1])
                lo, hi = _floats(val)
                u = float(res(np.array([[x, y]]))[0])
                sub_certs.append(_cert(key, u, lo <= u <= hi, tolerance=[lo, hi]))
        sub["certificates"] = sub_certs
        certs.extend(sub_certs)
        report["runs"][b] = sub
        runs[b] = res
    if "linf_gap_min" in s.checks and len(runs) >= 2:
        lim = float(s.checks["linf_gap_min"])
        P = grid_points(next(iter(runs.values())).field.domain, 60, window)
        vals = [r(P) for r in runs.values()]
        gap = float(np.nanmax(np.abs(vals[0] - vals[1])))
        certs.append(_cert("linf_gap", gap, gap >= lim, tolerance=lim))
    out["field"] = runs[biases[0]].field
    out["fields"] = {b: r.field for b, r in runs.items()}
    out["grid_box"] = window


def _run_oracle(s, report, certs, out):
    dom = presets.make_domain(s.domain)
    f = presets.make_data(s.data, dom)
    norm = parse_norm(s.norm)
    sv = s.solver
    fld = solve(dom, f, norm, K=int(sv.get("levels", 200)), mollify_eps=float(sv.get("mollify_eps", 1e-3)))
    prob = build_problem(dom, f, norm, sv.get("h"))
    ora = minimize_relaxed(prob, int(sv.get("iters", 20000)))
    e_chord = grid_energy(prob, fld)
    scale = fld.scale(f)
    l1 = l1_distance(fld, lambda p: np.nan_to_num(ora(p)), dom)
    report["energies"] = {"chord_grid_energy": e_chord, "oracle_energy": ora.energy,
                          "chord_total_variation": fld.total_variation(), "scale": scale}
    report["knobs"] = dict(fld.knobs, h=prob.h, iters=ora.iterations)
    lim = float(s.checks.get("l1_fraction", 0.02))
    certs.append(_cert("oracle_l1", l1 / dom.area, l1 <= lim * dom.area, tolerance=lim))
    etol = float(s.checks.get("energy_rel", 1e-3)) * scale
    certs.append(_cert("oracle_energy", e_chord - ora.energy, e_chord <= ora.energy + etol, tolerance=etol))
    nest = fld.nesting
    certs.append(_cert("nesting", nest["max_excess_area"], nest["ok"], tolerance=nest["tol"]))
    out["field"] = fld
    out["grid_box"] = None


def _run_regularize(s, report, certs, out):
    dom = presets.make_domain(s.domain)
    f = presets.make_data(s.data, dom)
    norm = parse_norm(s.norm)
    sv = s.solver
    last, log_ = solve_with_regularization(dom, f, norm, K=int(sv.get("levels", 200)),
                                           k_max=int(sv.get("k_max", 6)))
    report["regularization"] = log_
    report["knobs"] = dict(last.knobs, k_max=int(sv.get("k_max", 6)))
    certs.append(_cert("increments_decreasing", log_["increments"], log_["decreasing"]))
    if "verify" in s.checks:
        v = verify_least_gradient(last, check_box(_floats(s.checks["verify"])), norm,
                                  iters=int(sv.get("iters", 20000)))
        v.pop("oracle")
        report["verify"] = v
        certs.append(_cert("verify_least_gradient", v["gap"], v["pass"], tolerance=v["tolerance"]))
    out["field"] = last
    out["grid_box"] = None


def _run_catenoid(s, report, certs, out):
    lg = []
    a_star = cat.find_critical(log=lg)
    g = cat.area_gap(a_star)
    report["critical"] = {"a_star": round(a_star, 10), "gap": g, "bisection_steps": len(lg)}
    certs.append(_cert("critical_gap", abs(g), abs(g) <= 1e-10, tolerance=1e-10))
    delta = float(s.solver.get("delta", 0.05))
    left, right = cat.classify_regime(a_star - delta), cat.classify_regime(a_star + delta)
    report["regimes"] = {"below": left, "at": cat.classify_regime(a_star), "above": right}
    certs.append(_cert("regime_flip", [left.formula, right.formula],
                       {type(left).__name__, type(right).__name__} == {"DiscJump", "CatenoidRegion"}))
    if "a" in s.solver:
        a = float(s.solver["a"])
        report["instance"] = {"a": a, "disc_area": cat.disc_area(a), "catenoid": cat.catenoid_area(a),
                              "regime": cat.classify_regime(a)}
    out["field"] = None


RUNNERS = {"bounded": _run_bounded, "unbounded": _run_unbounded, "c0": _run_unbounded, "steer": _run_steer,
           "oracle": _run_oracle, "regularize": _run_regularize, "catenoid": _run_catenoid}


def _write_outputs(s, out, outdir):
    written = {}
    fld = out.get("field")
    if fld is None:
        return written
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    box = out.get("grid_box")
    fields = out.get("fields") or {"": fld}
    for tag, fl in fields.items():
        suffix = f"-{tag}" if tag else ""
        if "csv" in s.outputs:
            p = outdir / s.outputs["csv"].replace(".csv", f"{suffix}.csv")
            pts = grid_points(fl.domain, int(s.outputs.get("grid", 50)), box)
            write_field_csv(p, pts, fl(pts))
            written[f"csv{suffix}"] = str(p)
        if "svg" in s.outputs:
            p = outdir / s.outputs["svg"].replace(".svg", f"{suffix}.svg")
            emit_levels_svg(fl, p, view=box, every=int(s.outputs.get("svg_every", 4)), title=s.name)
            written[f"svg{suffix}"] = str(p)
    return written


def run_scenario(s, outdir=None):
    """Run a scenario and return its report (a plain dict)."""
    t0 = time.perf_counter()
    report = {"scenario": s.name, "mode": s.mode, "domain": s.domain, "data": s.data, "norm": s.norm,
              "solver": dict(s.solver), "description": s.description}
    certs = []
    out = {}
    RUNNERS[s.mode](s, report, certs, out)
    report["certificates"] = certs
    report["all_pass"] = all(c["pass"] for c in certs)
    if outdir is not None:
        Path(outdir).mkdir(parents=True, exist_ok=True)
        report["outputs"] = _write_outputs(s, out, outdir)
        if "json" in s.outputs:
            p = Path(outdir) / s.outputs["json"]
            report["outputs"]["json"] = str(p)
    report["wall_clock"] = time.perf_counter() - t0
    if outdir is not None and "json" in s.outputs:
        write_json(Path(outdir) / s.outputs["json"], report)
    return report


def report_exit_code(reports):
    """0 when every certificate of every report passes, 3 otherwise."""
    return 0 if all(r.get("all_pass", False) for r in reports) else 3
