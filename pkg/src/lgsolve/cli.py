"""Command line entry point ``lgsolve``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import catenoid as cat
from .exceptions import ConfigError, LGSolveError
from .output import to_jsonable
from .scenarios import Scenario, list_scenarios, load_scenario, report_exit_code, run_scenario, scenario_dir


def _outputs(args):
    out = {}
    for key in ("csv", "svg"):
        path = getattr(args, key, None)
        if path:
            out[key] = Path(path).name
    if getattr(args, "report", None):
        out["json"] = Path(args.report).name
    if getattr(args, "grid", None):
        out["grid"] = str(args.grid)
    return out


def _outdir(args):
    paths = [getattr(args, k, None) for k in ("csv", "svg", "report")]
    dirs = {str(Path(p).parent) for p in paths if p}
    if len(dirs) > 1:
        raise ConfigError("--csv, --svg and --report must share a directory")
    return dirs.pop() if dirs else None


def _print_report(rep, stream=None):
    stream = sys.stdout if stream is None else stream
    for c in rep.get("certificates", []):
        status = "PASS" if c["pass"] else "FAIL"
        print(f"[{status}] {rep['scenario']}: {c['name']} = {json.dumps(to_jsonable(c['value']))} "
              f"(tolerance {json.dumps(to_jsonable(c['tolerance']))})", file=stream)
    if not rep.get("certificates"):
        print(f"[PASS] {rep['scenario']}: no certificates requested", file=stream)


def _run(s, args):
    rep = run_scenario(s, _outdir(args))
    _print_report(rep)
    return report_exit_code([rep])


def cmd_solve(args):
    checks = {}
    if args.verify:
        checks["verify"] = args.verify
    s = Scenario(name="solve", mode="bounded", domain=args.domain, data=args.data, norm=args.norm,
                 solver={"levels": args.levels, "mollify_eps": args.eps, "seed": args.seed},
                 checks=checks, outputs=_outputs(args))
    return _run(s, args)


def _bias_mode(bias, c0):
    if bias and bias != "none":
        return "steer"
    return "c0" if c0 else "unbounded"


def cmd_solve_unbounded(args):
    mode = _bias_mode(args.bias, args.c0)
    solver = {"levels": args.levels, "probe_depth": args.probe_depth, "stab_tol": args.stab_tol,
              "step": args.step, "budget": args.budget}
    checks = {"stabilized": "true", "single_escape": "true"}
    if mode == "steer":
        solver["biases"] = args.bias
        checks["verify"] = args.window
    s = Scenario(name="solve-unbounded", mode=mode, domain=args.domain, data=args.data, norm=args.norm,
                 solver=solver, checks=checks, outputs=_outputs(args))
    return _run(s, args)


def cmd_oracle(args):
    solver = {"levels": args.levels, "iters": args.iters}
    if args.h:
        solver["h"] = args.h
    s = Scenario(name="oracle", mode="oracle", domain=args.domain, data=args.data, norm=args.norm,
                 solver=solver, outputs=_outputs(args))
    return _run(s, args)


def cmd_verify(args):
    if args.bias and args.bias != "none":
        s = Scenario(name="verify", mode="steer", domain=args.domain, data=args.data, norm=args.norm,
                     solver={"levels": args.levels, "biases": args.bias, "iters": args.iters},
                     checks={"verify": args.window, "stabilized": "false"}, outputs=_outputs(args))
    else:
        s = Scenario(name="verify", mode="bounded", domain=args.domain, data=args.data, norm=args.norm,
                     solver={"levels": args.levels, "iters": args.iters, "trace": False},
                     checks={"verify": args.window}, outputs=_outputs(args))
    return _run(s, args)


def cmd_catenoid(args):
    if args.critical:
        a = cat.find_critical()
        print(json.dumps({"a_star": round(a, 10), "gap": cat.area_gap(a)}))
        return 0
    if args.a is None:
        raise ConfigError("give --a or --critical")
    c = cat.catenoid_area(args.a)
    reg = cat.classify_regime(args.a)
    print(json.dumps(to_jsonable({"a": args.a, "disc_area": cat.disc_area(args.a), "catenoid": c,
                                  "regime": type(reg).__name__, "formula": reg.formula}), sort_keys=True))
    return 0


def _run_named(name, outdir):
    path = scenario_dir() / f"{name}.cfg"
    if not path.exists():
        raise ConfigError(f"unknown scenario {name!r}; see `lgsolve list-scenarios`")
    s = load_scenario(path)
    return run_scenario(s, Path(outdir) / name if outdir else None)


def cmd_reproduce(args):
    names = list_scenarios() if args.names == ["all"] else args.names
    if not names:
        return 0
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            reports = list(ex.map(_run_named, names, [args.out] * len(names)))
    else:
        reports = [_run_named(n, args.out) for n in names]
    for r in reports:
        _print_report(r)
    return report_exit_code(reports)


def cmd_list(args):
    for name in list_scenarios():
        s = load_scenario(scenario_dir() / f"{name}.cfg")
        print(f"{name:24s} {s.mode:10s} {s.description}")
    return 0


def _common(p, domain, data):
    p.add_argument("--domain", default=domain)
    p.add_argument("--data", default=data)
    p.add_argument("--norm", default="l2")
    p.add_argument("--levels", type=int, default=200)


def _files(p):
    p.add_argument("--csv", help="write x,y,u samples")
    p.add_argument("--svg", help="write level lines")
    p.add_argument("--report", help="write the JSON report")
    p.add_argument("--grid", type=int, default=50, help="CSV sampling grid size")


def build_parser():
    ap = argparse.ArgumentParser(prog="lgsolve", description="Least gradient problems in the plane.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="bounded convex domain")
    _common(p, "disc", "cos_theta")
    p.add_argument("--eps", type=float, default=1e-3, help="finest mollification radius")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verify", metavar="X0,Y0,X1,Y1", help="certify on a window with the grid oracle")
    _files(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("solve-unbounded", help="truncation loop on an unbounded domain")
    _common(p, "strip_exp", "bump_train")
    p.add_argument("--probe-depth", type=float, default=5.0)
    p.add_argument("--stab-tol", type=float, default=1e-4)
    p.add_argument("--step", type=float, default=5.0, help="truncation depth increment")
    p.add_argument("--budget", type=int, default=8, help="number of truncations")
    p.add_argument("--bias", default="none", help="none | axis-x | axis-y | mixed(x0)")
    p.add_argument("--c0", action="store_true", help="attach the containment certificate")
    p.add_argument("--window", default="1,1,3,3", help="verification window when steering")
    _files(p)
    p.set_defaults(func=cmd_solve_unbounded)

    p = sub.add_parser("oracle", help="grid oracle compared with the chord solver")
    _common(p, "disc", "cos_theta")
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--iters", type=int, default=20000)
    _files(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="certify a chord solution on a window")
    _common(p, "disc", "cos_theta")
    p.add_argument("--window", required=True, metavar="X0,Y0,X1,Y1")
    p.add_argument("--bias", default="none")
    p.add_argument("--iters", type=int, default=20000)
    _files(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("catenoid", help="disc versus catenoid comparison in the unit ball")
    p.add_argument("--a", type=float)
    p.add_argument("--critical", action="store_true")
    p.set_defaults(func=cmd_catenoid)

    p = sub.add_parser("reproduce", help="run named scenarios (or `all`)")
    p.add_argument("names", nargs="*")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("list-scenarios", help="list scenario files")
    p.set_defaults(func=cmd_list)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except LGSolveError as e:
        print(json.dumps({"error": e.reason, "exit_code": e.exit_code, "message": str(e)}), file=sys.stderr)
        return e.exit_code
    except (ValueError, OSError) as e:
        err = ConfigError(str(e))
        print(json.dumps({"error": err.reason, "exit_code": err.exit_code, "message": str(e)}), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
