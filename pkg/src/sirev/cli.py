"""Command-line entry point: ``sirev <command> [options]``.

Exit codes: 0 every selected check passed, 1 some check failed, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ConstraintViolated, NotSimple, SirevError

SCHEMA = "sirev.report/1"
DEFAULT_SEED = 42


# ---- report -------------------------------------------------------------------------------

class Report:
    """Ordered list of checks plus a verdict; JSON is deterministic except ``wall_time``."""

    def __init__(self, command: str, seed: int, params: dict | None = None):
        self.command = command
        self.seed = seed
        self.params = params or {}
        self.checks = []
        self.sections = {}

    def add(self, name, passed, residual=None, tolerance=None, samples=None, wall_time=0.0,
            status=None, note=None):
        self.checks.append({
            "name": name,
            "status": status or ("pass" if passed else "fail"),
            "residual": _num(residual),
            "tolerance": tolerance,
            "samples": samples,
            "wall_time": round(float(wall_time), 6),
            **({"note": note} if note else {}),
        })

    def skip(self, name, reason):
        self.add(name, True, status="skipped", note=reason)

    @property
    def passed(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "checks": self.checks,
            "sections": self.sections,
            "verdict": "pass" if self.passed else "fail",
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.as_dict()), indent=2, sort_keys=True)

    def to_text(self) -> str:
        width = max([len(c["name"]) for c in self.checks] + [10])
        lines = [f"{self.command}  (seed {self.seed})"]
        for c in self.checks:
            res = "" if c["residual"] is None else f"{c['residual']:.3e}"
            tol = "" if c["tolerance"] is None else f"{c['tolerance']:.1e}"
            lines.append(f"  {c['name']:<{width}}  {c['status']:<7}  {res:>10}  {tol:>8}"
                         + (f"  {c['note']}" if c.get("note") else ""))
        lines.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _num(v):
    if v is None:
        return None
    return float(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


# ---- commands -----------------------------------------------------------------------------

def cmd_verify_identities(n_max: int = 8, sets: int = 50, seed: int = DEFAULT_SEED) -> Report:
    from .symfun import build_table, check_identities

    if n_max < 1:
        raise ConfigError("n_max must be >= 1", "--n-max")
    rng = np.random.default_rng(seed)
    rep = Report("verify-identities", seed, {"n_max": n_max, "sets": sets})
    for n in range(1, n_max + 1):
        t0 = time.perf_counter()
        fails = {}
        for _ in range(sets):
            roots = _random_roots(rng, n)
            for key, ok in check_identities(build_table(roots)).items():
                if not ok:
                    fails[key] = fails.get(key, 0) + 1
        note = None if not fails else f"failing identities: {fails}"
        rep.add(f"identities n={n}", not fails, residual=0 if not fails else None, tolerance=0,
                samples=sets, wall_time=time.perf_counter() - t0, note=note)
    return rep


def _random_roots(rng, n):
    out = set()
    while len(out) < n:
        out.add(Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 13))))
    return sorted(out)


def cmd_verify_model(cfg, n_points: int = 100) -> Report:
    from .dynamics import integrate_geodesic
    from .integrals import (algebraic_relation_residual, build_system, check_defining_systems,
                            conservation_residuals)
    from .model import random_phase_point, sample_a
    from .phase import PhasePoint
    from .profile import ode_terms

    model = cfg.build_model()
    tol = cfg.tolerances
    rep = Report("verify-model", cfg.seed, cfg.as_dict())
    rng = np.random.default_rng(cfg.seed)
    # draw every random input up front so results do not depend on scheduling
    a_pts = [float(a) for a in sample_a(model, rng, n_points)]
    ph_pts = [random_phase_point(model, rng) for _ in range(n_points)]
    start = PhasePoint(*cfg.start) if cfg.start else random_phase_point(model, rng)
    try:
        system = build_system(model)
    except NotSimple as exc:
        system = None
        simple_reason = str(exc)

    def ode():
        rows = [ode_terms(model, a) for a in a_pts]
        sums = np.array([r.sum() for r in rows])
        scale = max(float(np.max(np.abs(r))) for r in rows)
        if model.parity == "even":
            return float(np.max(np.abs(sums)) / scale)
        return float(np.ptp(sums) / scale)

    def defining():
        res = check_defining_systems(system, points=a_pts[:50])
        return max(res.values()), res

    def brackets():
        worst = {}
        for p in ph_pts:
            for k, v in conservation_residuals(system, p).items():
                worst[k] = max(worst.get(k, 0.0), v)
        return max(worst.values()), worst

    def algebraic():
        worst = 0.0
        for p in ph_pts:
            r, s = algebraic_relation_residual(system, p, with_scale=True)
            worst = max(worst, abs(r) / s)
        return worst

    def drift():
        _, report = integrate_geodesic(model, start, cfg.T, cfg.integrate_tol, system=system)
        return max(report.max_rel_drift.values()), report.as_dict()

    jobs = {}
    with ThreadPoolExecutor(max_workers=4) as pool:
        if cfg.suites["ode"]:
            jobs["ode"] = pool.submit(_timed, ode)
        if system is not None:
            if cfg.suites["defining"]:
                jobs["defining"] = pool.submit(_timed, defining)
            if cfg.suites["brackets"]:
                jobs["brackets"] = pool.submit(_timed, brackets)
            if cfg.suites["algebraic"]:
                jobs["algebraic"] = pool.submit(_timed, algebraic)
        if cfg.suites["drift"]:
            jobs["drift"] = pool.submit(_timed, drift)
        results = {k: f.result() for k, f in jobs.items()}

    if "ode" in results:
        r, dt = results["ode"]
        rep.add("linearizing ODE", r < tol["ode"], r, tol["ode"], n_points, dt)
    for name in ("defining", "brackets", "algebraic"):
        if not cfg.suites[name]:
            continue
        if system is None:
            rep.skip(name, f"NotSimple: {simple_reason}")
            continue
        (val, dt) = results[name]
        if name == "algebraic":
            rep.add("algebraic relation", val < tol["algebraic"], val, tol["algebraic"], n_points, dt)
        elif name == "defining":
            r, detail = val
            rep.add("defining systems", r < tol["defining"], r, tol["defining"], 50, dt)
            rep.sections["defining"] = detail
        else:
            r, detail = val
            rep.add("brackets", r < tol["conservation"], r, tol["conservation"], n_points, dt)
            rep.sections["brackets"] = detail
    if "drift" in results:
        (r, detail), dt = results["drift"]
        rep.add("invariant drift", r < tol["drift"], r, tol["drift"], detail["steps"]["n_steps"], dt)
        rep.sections["drift"] = detail
    return rep


def cmd_catalog_list() -> Report:
    from .catalog import CATALOG

    rep = Report("catalog list", DEFAULT_SEED)
    rep.sections["catalog"] = [{"id": k, "manifold": ex.manifold, "description": ex.title,
                                "defaults": ex.defaults} for k, ex in CATALOG.items()]
    return rep


def cmd_catalog_build(ex_id: str, params: dict | None = None, out: Path | None = None,
                      seed: int = DEFAULT_SEED) -> Report:
    from .catalog import CATALOG, build_catalog
    from .geometry import curvature_scan
    from .model import sampling_interval

    if ex_id not in CATALOG:
        raise ConfigError(f"unknown catalog id {ex_id!r}", "catalog build")
    (model, chart, report), dt = _timed(build_catalog, ex_id, params)
    rep = Report(f"catalog build {ex_id}", seed, report.pop("params"))
    if ex_id == "NOGO":
        b = report["curvature_blowup"]
        rep.add("curvature blow-up", b["doubles"], residual=min(b["ratios"]), tolerance=2.0,
                samples=len(b["max_abs_R"]), wall_time=dt)
    else:
        rep.add("monotone coordinate change", report["monotone_coordinate_change"],
                samples=report["grid_points"], wall_time=dt)
        rep.add("conformal factor nonvanishing", report["conformal_factor_nonvanishing"],
                residual=report["min_abs_conformal_factor"], tolerance=1e-6)
        rep.add("curvature bounded", report["curvature_bounded"], residual=report["max_abs_R_boundary"])
        rep.add("curvature nonconstant", report["R_spread"] > 1e-6, residual=report["R_spread"],
                tolerance=1e-6)
        rep.add("coefficients bounded at t=0", report["coefficients_bounded_at_t0"],
                residual=report["max_abs_coefficient_near_t0"])
    rep.sections["validity"] = report
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if ex_id == "NOGO":
            th = np.linspace(0.8, np.pi / 2 - 1e-3, 400)
            grid = np.tan(th)
        else:
            grid = np.linspace(*sampling_interval(model.domain, inner=0.98), 400)
        scan = curvature_scan(model, grid)
        with open(out / f"{ex_id}_curvature.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "R"])
            w.writerows([[repr(float(a)), repr(float(r))] for a, r in scan])
    return rep


def cmd_cascade(n: int, eps=None, seed: int = DEFAULT_SEED) -> Report:
    from .cascade import DEFAULT_EPS, cascade_check, exact_cascade, lower_model, runaway_example
    from .phase import PhasePoint

    eps = tuple(eps) if eps else DEFAULT_EPS
    rep = Report("cascade", seed, {"n": n, "eps": list(eps)})
    ex, dt = _timed(exact_cascade, n)
    rep.add(f"exact path n={n}->{n - 1}", ex["passed"], residual=0 if ex["passed"] else None,
            tolerance=0, samples=ex["coefficient_rows"] + ex["sigma_relations"], wall_time=dt)
    rng = np.random.default_rng(seed)
    lower = lower_model(n)
    pt = PhasePoint(float(rng.uniform(0.2, 2.0)), float(rng.normal()),
                    float(rng.normal()), float(rng.uniform(0.3, 1.5)))
    num, dt = _timed(cascade_check, lower, pt, eps)
    rep.add(f"numeric path n={n}->{n - 1}", num["passed"],
            residual=max(num["rows"][-1]["Q1_relative"], num["rows"][-1]["Q2_relative"]), samples=len(eps), wall_time=dt,
            note=f"orders Q1 {['%.3f' % o for o in num['Q1_order']]}, "
                 f"Q2 {['%.3f' % o for o in num['Q2_order']]}")
    rw, dt = _timed(runaway_example)
    rep.add("runaway root eps*r -> -1", rw["passed"], residual=abs(rw["limit_estimate"] + 1),
            tolerance=1e-6, samples=len(rw["eps"]), wall_time=dt)
    rep.sections["exact"] = ex
    rep.sections["numeric"] = num
    rep.sections["runaway"] = rw
    return rep


def cascade_table(rep: Report) -> list:
    cols = ["eps", "runaway_root", "Q1_residual", "Q2_residual", "Q1_relative", "Q2_relative",
            "b1", "c1"]
    return [cols] + [[repr(float(r[k])) for k in cols] for r in rep.sections["numeric"]["rows"]]


def cmd_integrate(cfg, T=None, tol=None, out: Path | None = None) -> Report:
    from .dynamics import integrate_geodesic, write_trajectory_csv
    from .model import random_phase_point
    from .phase import PhasePoint

    model = cfg.build_model()
    T = cfg.T if T is None else T
    tol = cfg.integrate_tol if tol is None else tol
    rng = np.random.default_rng(cfg.seed)
    start = PhasePoint(*cfg.start) if cfg.start else random_phase_point(model, rng)
    (traj, report), dt = _timed(integrate_geodesic, model, start, T, tol)
    rep = Report("integrate", cfg.seed, {**cfg.as_dict(), "T": T, "tol": tol})
    worst = max(report.max_rel_drift.values())
    rep.add("invariant drift", worst < cfg.tolerances["drift"], worst, cfg.tolerances["drift"],
            report.n_steps, dt, note=report.exit_reason or None)
    rep.sections["drift"] = report.as_dict()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(traj, out / "trajectory.csv")
    return rep


# ---- argument handling --------------------------------------------------------------------

def _parse_params(items):
    params = {}
    for it in items or []:
        if "=" not in it:
            raise ConfigError(f"expected key=value, got {it!r}", "--param")
        k, v = it.split("=", 1)
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    return params


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 42 or the config's)")
    common.add_argument("--tol", type=float, default=None, help="override the main tolerance")
    common.add_argument("--out", type=Path, default=None, help="directory for report and CSV artifacts")
    common.add_argument("--format", choices=("json", "text"), default="text")

    p = argparse.ArgumentParser(prog="sirev", description="Superintegrable surfaces of revolution workbench")
    p.add_argument("--version", action="version", version=f"sirev {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-identities", parents=[common], help="exact symmetric-function identities")
    s.add_argument("--n-max", type=int, default=8)
    s.add_argument("--sets", type=int, default=50)

    s = sub.add_parser("verify-model", parents=[common], help="run the model suites for one config")
    s.add_argument("config")
    s.add_argument("--points", type=int, default=100)

    s = sub.add_parser("catalog", parents=[common], help="global examples")
    s.add_argument("action", choices=("list", "build"))
    s.add_argument("id", nargs="?")
    s.add_argument("--param", action="append", help="override one parameter, e.g. a1=\"1/2\"")

    s = sub.add_parser("cascade", parents=[common], help="degree-reduction limit")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--eps", type=float, nargs="+", default=None)

    s = sub.add_parser("integrate", parents=[common], help="integrate one geodesic")
    s.add_argument("config")
    s.add_argument("--T", type=float, default=None)
    return p


def _emit(rep: Report, args, extra_csv=None):
    text = rep.to_json() if args.format == "json" else rep.to_text()
    print(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        name = rep.command.replace(" ", "_")
        (args.out / f"{name}.json").write_text(rep.to_json() + "\n")
        if extra_csv:
            fname, rows = extra_csv
            with open(args.out / fname, "w", newline="") as fh:
                csv.writer(fh).writerows(rows)


def _load(args, tol_overrides_checks=True):
    from .config import load_config

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if tol_overrides_checks and args.tol is not None:
        for k in cfg.tolerances:
            cfg.tolerances[k] = args.tol
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    extra = None
    try:
        if args.command == "verify-identities":
            rep = cmd_verify_identities(args.n_max, args.sets, seed)
        elif args.command == "verify-model":
            rep = cmd_verify_model(_load(args), args.points)
        elif args.command == "catalog":
            if args.action == "list":
                rep = cmd_catalog_list()
                if args.format == "text":
                    for row in rep.sections["catalog"]:
                        print(f"{row['id']:<10} {row['manifold']:<4} {row['description']}")
                    return 0
            else:
                if not args.id:
                    raise ConfigError("catalog build needs an id", "catalog build")
                rep = cmd_catalog_build(args.id, _parse_params(args.param), args.out, seed)
        elif args.command == "cascade":
            if args.n < 2:
                raise ConfigError("cascading needs n >= 2", "--n")
            rep = cmd_cascade(args.n, args.eps, seed)
            extra = (f"cascade_n{args.n}.csv", cascade_table(rep))
        else:
            cfg = _load(args, tol_overrides_checks=False)
            rep = cmd_integrate(cfg, args.T, args.tol, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConstraintViolated as exc:
        print(f"constraint violated: {exc.inequality} ({exc.example_id})", file=sys.stderr)
        return 2
    except SirevError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(rep, args, extra)
    return 0 if rep.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
