"""Command-line entry point.

Exit codes: 0 all checks passed, 1 a check failed or a computation escaped,
2 usage or configuration error.  JSON reports carry ``"schema": "1"`` and all
floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline

from . import geodesics_dens as gd
from . import geodesics_prob as gp
from . import invariants as inv
from . import metrics as mt
from . import parametric as pm
from . import pj
from .errors import AlphaFRError, ConfigurationError, GeodesicEscape
from .grid import DECAY_TOL, grid_from_config, make_line
from .sampling import random_density, random_prob_pair, random_tangent

SCHEMA = "1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_ALPHAS = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0]


def fmt(v) -> str:
    """17-significant-digit rendering; ``inf``/``nan`` spelled out."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits (non-finite as strings)."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, np.floating, np.integer)) and not isinstance(x, bool)
               for x in obj):
            return "[" + ", ".join(to_json(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt(obj)
        return s if math.isfinite(float(obj)) else json.dumps(s)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


# --- configuration -----------------------------------------------------------

@dataclass
class RunConfig:
    alphas: List[float] = field(default_factory=lambda: list(DEFAULT_ALPHAS))
    seed: int = 0
    grid: Dict = field(default_factory=lambda: {"kind": "periodic", "n": 128})
    line: Dict = field(default_factory=lambda: {"kind": "line", "n": 1024, "L": 10.0, "support": 4.0})
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float = 10.0
    report: Optional[str] = None
    out: Optional[str] = None
    out_dir: Optional[str] = None
    suites: List[str] = field(default_factory=lambda: list(inv.SUITES))
    instances: int = 20
    bvp_pairs: int = 30
    mc_samples: int = 1_000_000

    def validate(self) -> "RunConfig":
        if not self.alphas:
            raise ConfigurationError("alpha list is empty")
        self.alphas = [float(a) for a in self.alphas]
        if not all(math.isfinite(a) for a in self.alphas):
            raise ConfigurationError("alphas must be finite")
        for name in ("rel_tol", "abs_tol", "max_time"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigurationError(f"{name} must be positive, got {v!r}")
        unknown = set(self.suites) - set(inv.SUITES)
        if unknown:
            raise ConfigurationError(f"unknown suites {sorted(unknown)}")
        for name in ("instances", "bvp_pairs", "mc_samples"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        grid_from_config(self.grid)
        line = dict(self.line, kind="line")
        grid_from_config(line)
        self.line = line
        return self

    def settings(self) -> inv.SuiteSettings:
        return inv.SuiteSettings(
            alphas=self.alphas, seed=self.seed, n_periodic=int(self.grid["n"]),
            n_line=int(self.line["n"]), line_L=float(self.line.get("L", 10.0)),
            line_support=float(self.line.get("support", 4.0)), rel_tol=self.rel_tol,
            abs_tol=self.abs_tol, max_time=self.max_time, instances=int(self.instances),
            bvp_pairs=int(self.bvp_pairs), mc_samples=int(self.mc_samples))


CONFIG_KEYS = set(RunConfig.__dataclass_fields__)


def load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
    cfg = RunConfig(**data)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "n", None) is not None:
        cfg.grid = dict(cfg.grid, n=args.n)
    if getattr(args, "n_line", None) is not None:
        cfg.line = dict(cfg.line, n=args.n_line)
    return cfg.validate()


@dataclass
class Report:
    command: str
    checks: List[inv.Check] = field(default_factory=list)
    data: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> Dict:
        return {"schema": SCHEMA, "command": self.command,
                "status": "pass" if self.passed else "fail",
                "checks": [c.as_dict() for c in self.checks], **self.data}

    def write(self, path: Optional[str]):
        text = to_json(self.as_dict()) + "\n"
        if path is None:
            return
        if path == "-":
            sys.stdout.write(text)
            return
        with open(path, "w") as fh:
            fh.write(text)


def _write_csv(path: Optional[str], header: Sequence[str], rows):
    if path is None:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def threads() -> int:
    raw = os.environ.get("ALPHA_FR_THREADS")
    if raw is None:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"ALPHA_FR_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigurationError("ALPHA_FR_THREADS must be positive")
    return n


# --- subcommands ---------------------------------------------------------------

def run_invariants(cfg: RunConfig) -> Report:
    s = cfg.settings()
    rep = Report("invariants")
    timings = {}
    for name in cfg.suites:
        t0 = time.perf_counter()
        rep.checks.extend(inv.SUITES[name](s))
        timings[name] = time.perf_counter() - t0
    rep.data["alphas"] = cfg.alphas
    rep.data["seed"] = cfg.seed
    rep.data["suite_wall_time"] = timings
    return rep


def cmd_invariants(args) -> int:
    cfg = load_config(args)
    rep = run_invariants(cfg)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {fmt(c.value)} {c.relation} {fmt(c.tol)}")
    rep.write(cfg.report)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_geodesic_dens(args) -> int:
    cfg = load_config(args)
    alpha = args.alpha
    g = grid_from_config(cfg.grid)
    rng = np.random.default_rng(cfg.seed)
    mu0 = random_density(g, rng, prob=False)
    a = random_tangent(g, rng, args.amplitude)
    T = gd.blowup_time(alpha, mu0, a)
    ts = np.linspace(0.0, args.t, args.steps + 1)
    rep = Report("geodesic-dens", data={"alpha": alpha, "blowup_time": T, "t_end": args.t})
    rows = []
    live = ts[ts < T]
    for t in live:
        h = gd.geodesic_dens(alpha, mu0, a, t).h
        rows.extend((t, x, v) for x, v in zip(g.nodes, h))
    _write_csv(cfg.out, ["t", "x", "h"], rows)
    t0 = time.perf_counter()
    rep.checks.append(inv.Check("reached_t_end", bool(live.size == ts.size),
                                float(live[-1]) if live.size else 0.0, args.t, 0.0, ">="))
    if live.size >= 3:
        inner = live[1:-1]
        inner = inner[inner + 2e-3 < T]
        if inner.size:
            rep.checks.append(inv._below("equation_residual",
                                         gd.geodesic_residual(alpha, mu0, a, inner), 1e-5, t0))
        rep.checks.append(inv._below("chart_affinity",
                                     gd.chart_affinity_deviation(alpha, mu0, a, live), 1e-9, t0))
        geo = gd.DensGeodesic(alpha, mu0, a)
        rep.checks.append(inv._below("energy_drift",
                                     mt.energy_drift(mt.path_energy(alpha, geo.sample(live))), 1e-6, t0))
    rep.write(cfg.report)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_geodesic_prob(args) -> int:
    cfg = load_config(args)
    alpha = args.alpha
    g = grid_from_config(cfg.grid)
    rng = np.random.default_rng(cfg.seed)
    rep = Report("geodesic-prob", data={"alpha": alpha, "mode": "bvp" if args.bvp else "ivp"})
    ctl = gp.TauControls(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_time=cfg.max_time)
    rows = []
    t0 = time.perf_counter()
    if args.bvp:
        if g.kind.value != "periodic":
            raise ConfigurationError("boundary-value solves need a periodic grid")
        m0, m1 = random_prob_pair(g, rng)
        if alpha == 1:
            T = 1.0
            ts = np.linspace(0.0, 1.0, args.steps + 1)
            path = [gp.geodesic_prob_alpha1(m0, m1, t) for t in ts]
            taus, dots = ts, np.ones_like(ts)
            terminal = gp.Terminal.REACHED_TAU_TARGET.value
        else:
            path, T = gp.geodesic_prob_bvp(alpha, m0, m1, samples=args.steps + 1, controls=ctl)
            ts = np.linspace(0.0, T, args.steps + 1)
            p = gp.to_surface(alpha, m0)
            xi = gp.to_surface(alpha, m1).f - p.f
            taus = np.array([0.0])
            dots = np.array([1.0])
            if T > 0:
                sol = gp.tau_ivp(alpha, p, xi, gp.TauControls(
                    tau_target=1.0, max_time=max(cfg.max_time, 1e3), rel_tol=cfg.rel_tol,
                    abs_tol=cfg.abs_tol))
                taus, dots = sol.evaluate(ts)
                rep.data["travel_time_quadrature"] = gp.travel_time_quadrature(alpha, p, xi)
            terminal = gp.Terminal.REACHED_TAU_TARGET.value
        rep.data.update(T=T, terminal=terminal)
        rep.checks.append(inv._below("endpoint_error", np.max(np.abs(path[-1].h - m1.h)), 1e-7, t0))
    else:
        mu0 = random_density(g, rng)
        a = random_tangent(g, rng, args.amplitude, prob=True)
        ts = np.linspace(0.0, args.t, args.steps + 1)
        if alpha == 1:
            path = [gp.geodesic_prob_alpha1_ivp(mu0, a, t) for t in ts]
            taus, dots = ts, np.ones_like(ts)
            rep.data.update(terminal=gp.Terminal.MAX_TIME.value, t_end=args.t)
            fn = lambda t: gp.geodesic_prob_alpha1_ivp(mu0, a, t)
        else:
            geo = gp.solve_prob_geodesic(alpha, mu0, a, gp.TauControls(
                rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_time=args.t))
            sol = geo.solution
            rep.data.update(terminal=sol.terminal.value, t_end=sol.t_end, solver_wall_time=sol.wall_time)
            ts = ts[ts <= sol.t_end]
            taus, dots = sol.evaluate(ts)
            path = [geo.at(t) for t in ts]
            fn = geo.at
        inner = ts[(ts > 2e-3) & (ts < ts[-1] - 2e-3)]
        if inner.size:
            rep.checks.append(inv._below("equation_residual",
                                         gp.prob_geodesic_residual(alpha, fn, inner[:: max(1, inner.size // 8)]),
                                         1e-4, t0))
        rep.checks.append(inv.Check("reached_t_end", bool(np.isclose(ts[-1], args.t)), float(ts[-1]),
                                    args.t, 0.0, ">="))
    for t, tau, dot, mu in zip(ts, np.atleast_1d(taus), np.atleast_1d(dots), path):
        rows.extend((t, tau, dot, x, v) for x, v in zip(g.nodes, mu.h))
    _write_csv(cfg.out, ["t", "tau", "tau_dot", "x", "h"], rows)
    rep.write(cfg.report)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _read_u0(path: str, grid) -> pj.VelocityField:
    try:
        raw = np.genfromtxt(path, delimiter=",", names=True)
        x, u = np.asarray(raw["x"], dtype=float), np.asarray(raw["u"], dtype=float)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read u0 from {path}: need columns x,u ({exc})") from exc
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise ConfigurationError(f"u0 file {path} holds non-numeric or non-finite values")
    order = np.argsort(x)
    x, u = x[order], u[order]
    if x.size < 2 or np.any(np.diff(x) <= 0):
        raise ConfigurationError(f"u0 file {path} needs at least two distinct x values")
    # smooth interpolant: the flow needs three derivatives of u0
    spline = make_interp_spline(x, u, k=min(5, x.size - 1))
    nodes = grid.nodes
    inside = (nodes >= x[0]) & (nodes <= x[-1])
    vals = np.zeros(grid.n)
    vals[inside] = spline(nodes[inside])
    # the flow map must be the identity off the window, so u0 has to vanish there
    tol = DECAY_TOL * max(1.0, float(np.max(np.abs(u))))
    if max(abs(u[0]), abs(u[-1])) > tol or np.max(np.abs(vals[~grid.window]), initial=0.0) > tol:
        raise ConfigurationError(
            f"u0 from {path} must vanish at its end points and outside |x| <= {grid.support:g}")
    return pj.VelocityField(grid, vals)


def cmd_gpj(args) -> int:
    cfg = load_config(args)
    line = dict(cfg.line)
    g = make_line(int(line["n"]), float(line.get("L", 10.0)), float(line.get("support", 4.0)))
    u0 = _read_u0(args.u0, g) if args.u0 else inv.default_u0(g, args.amplitude)
    if args.blowup_table:
        rows = [(a, T) for a, T in pj.blowup_table(cfg.alphas, u0)]
        _write_csv(cfg.out, ["alpha", "T_blowup"], rows)
        Report("gpj", data={"blowup_table": [{"alpha": a, "T_blowup": T} for a, T in rows]}).write(cfg.report)
        return EXIT_OK
    alpha = args.alpha
    ts = np.arange(0.0, args.t + args.dt / 2, args.dt)
    rep = Report("gpj", data={"alpha": alpha, "blowup_time": pj.gpj_blowup_time(alpha, u0),
                              "dt": args.dt, "n": g.n})
    t0 = time.perf_counter()
    try:
        traj = pj.gpj_solve(alpha, u0, ts)
    except GeodesicEscape as exc:
        rep.data.update(escape_time=exc.escape_time, message=str(exc))
        rep.checks.append(inv.Check("no_escape", False, float(exc.escape_time), args.t, 0.0, ">="))
        rep.write(cfg.report)
        return EXIT_FAIL
    if len(traj) >= 3:
        rep.checks.append(inv._below("gpj_residual", pj.gpj_residual(alpha, traj, ts), 1e-3, t0))
    rows = []
    for k in range(0, len(traj), args.stride):
        f = traj[k]
        rows.extend((f.t, x, v) for x, v in zip(g.nodes, f.u))
    _write_csv(cfg.out, ["t", "x", "u"], rows)
    rep.write(cfg.report)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _load_family(args):
    if args.table:
        try:
            with open(args.table) as fh:
                return pm.ExpFamily.from_table(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read table {args.table}: {exc}") from exc
    kw = {}
    if args.family == "gaussian-translation":
        kw = {"n": args.mc_samples or 1_000_000, "seed": args.seed or 0}
    return pm.get_family(args.family, **kw)


def cmd_parametric(args) -> int:
    cfg = load_config(args)
    fam = _load_family(args)
    theta = np.asarray(args.theta if args.theta else np.zeros(fam.d), dtype=float)
    if fam.name == "gaussian" and not args.theta:
        theta = np.array([0.0, -0.5])
    alpha = args.alpha
    rep = Report("parametric", data={"family": fam.name, "alpha": alpha, "theta": theta})
    t0 = time.perf_counter()
    G, gam, R = pm.expfam_geometry(fam, alpha, theta)
    rep.data.update(G=G, Gamma=gam, R=R)
    if fam.model is not None:
        Ge, se_g = pm.fisher_info(fam.model, theta, with_error=True)
        Ce, se_c = pm.alpha_christoffel(fam.model, alpha, theta, with_error=True)
        rep.data.update(G_expectation=Ge, Gamma_expectation=Ce)
        rep.checks.append(inv._below("fisher_vs_hessian", np.max(np.abs(Ge - G)),
                                     1e-4 + pm.mc_tolerance(se_g), t0))
        rep.checks.append(inv._below("christoffel_vs_third", np.max(np.abs(Ce - gam)),
                                     1e-4 + pm.mc_tolerance(se_c), t0))
    if fam.d == 2:
        probes = [theta] + [theta + np.asarray(p) for p in ([0.3, -0.1], [-0.2, 0.15], [0.1, 0.25])]
        if fam.name == "gaussian":
            probes = [p for p in probes if p[1] < 0]
        v = pm.metricity_check(fam, alpha, probes)
        rep.data.update(verdict=v.verdict.value, nullspace_dim=v.nullspace_dim,
                        nullspace_basis=v.nullspace_basis, conformal_consistent=v.conformal_consistent,
                        curvature_entries=[list(e) for e in v.curvature_entries])
        metric = pm.verdict_metric(fam, v.verdict)
        if metric is not None and v.verdict is not pm.Verdict.FLAT_ALL_ALPHA:
            res = max(pm.compatibility_residual(fam, alpha, metric, p) for p in probes)
            rep.checks.append(inv._below("compatibility_residual", res, 1e-4, t0))
        if v.verdict is pm.Verdict.METRIC_DUAL:
            rep.data["dual_metric"] = pm.dual_metric(fam, theta)
    rep.write(cfg.report if cfg.report else "-")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _sweep_task(kind: str, alpha: float, case: int, cfg: RunConfig):
    g = grid_from_config(cfg.grid)
    rng = np.random.default_rng([cfg.seed, int(round(alpha * 1000)) + 10**6, case,
                                 {"blowup": 0, "bvp": 1, "energy": 2}[kind]])
    if kind == "blowup":
        mu0 = random_density(g, rng, prob=False)
        a = random_tangent(g, rng)
        return (alpha, case, gd.blowup_time(alpha, mu0, a))
    if kind == "energy":
        mu0 = random_density(g, rng, prob=False)
        a = random_tangent(g, rng, 0.5)
        T = min(gd.blowup_time(alpha, mu0, a), 2.0)
        ts = np.linspace(0.0, 0.5 * T, 17)
        geo = gd.DensGeodesic(alpha, mu0, a)
        return (alpha, case, mt.energy_drift(mt.path_energy(alpha, geo.sample(ts))))
    m0, m1 = random_prob_pair(g, rng)
    if alpha == 1:
        return (alpha, case, 1.0, gp.Terminal.REACHED_TAU_TARGET.value)
    ctl = gp.TauControls(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_time=cfg.max_time)
    try:
        _, T = gp.geodesic_prob_bvp(alpha, m0, m1, samples=2, controls=ctl)
        return (alpha, case, T, gp.Terminal.REACHED_TAU_TARGET.value)
    except AlphaFRError as exc:
        return (alpha, case, math.nan, type(exc).__name__)


def run_sweep(cfg: RunConfig, cases: int = 10) -> Report:
    if not cfg.out_dir:
        raise ConfigurationError("sweep needs --out-dir")
    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
        probe = os.path.join(cfg.out_dir, ".write-test")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise ConfigurationError(f"output directory not writable: {exc}") from exc
    tasks = [(kind, a, c) for kind in ("blowup", "bvp", "energy") for a in cfg.alphas for c in range(cases)]
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = list(pool.map(lambda t: _sweep_task(*t, cfg), tasks))
    by_kind: Dict[str, list] = {"blowup": [], "bvp": [], "energy": []}
    for (kind, _, _), res in zip(tasks, results):
        by_kind[kind].append(res)
    _write_csv(os.path.join(cfg.out_dir, "blowup.csv"), ["alpha", "case", "T_blowup"], by_kind["blowup"])
    _write_csv(os.path.join(cfg.out_dir, "bvp_travel_time.csv"), ["alpha", "pair", "T", "terminal"],
               by_kind["bvp"])
    _write_csv(os.path.join(cfg.out_dir, "energy_drift.csv"), ["alpha", "case", "drift"], by_kind["energy"])
    rep = Report("sweep", data={"tasks": len(tasks), "threads": threads(),
                                "wall_time": time.perf_counter() - t0})
    rep.checks.append(inv._equal("alpha1_never_blows_up",
                                 all(math.isinf(r[2]) for r in by_kind["blowup"] if r[0] == 1), t0))
    rep.checks.append(inv._equal("bvp_all_reached",
                                 all(r[3] == gp.Terminal.REACHED_TAU_TARGET.value for r in by_kind["bvp"]), t0))
    rep.checks.append(inv._below("max_energy_drift", max(r[2] for r in by_kind["energy"]), 1e-6, t0))
    return rep


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    rep = run_sweep(cfg, args.cases)
    rep.write(cfg.report)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {fmt(c.value)}")
    return EXIT_OK if rep.passed else EXIT_FAIL


# --- argument parsing --------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--abs-tol", dest="abs_tol", type=float)
    p.add_argument("--max-time", dest="max_time", type=float)
    p.add_argument("--report", help="JSON report path ('-' for stdout)")
    p.add_argument("--out", help="CSV output path ('-' for stdout)")
    p.add_argument("--n", type=int, help="periodic grid size")
    p.add_argument("--n-line", dest="n_line", type=int, help="line grid size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphafr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", help="run the property batteries")
    _common(p)
    p.add_argument("--alphas", type=float, nargs="*")
    p.add_argument("--suites", nargs="+", choices=sorted(inv.SUITES))
    p.add_argument("--instances", type=int)
    p.add_argument("--bvp-pairs", dest="bvp_pairs", type=int)
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("geodesic-dens", help="closed-form density geodesic; CSV columns t,x,h")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.set_defaults(func=cmd_geodesic_dens)

    p = sub.add_parser("geodesic-prob", help="probability geodesic; CSV columns t,tau,tau_dot,x,h")
    _common(p)
    p.add_argument("--alpha", type=float, required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--ivp", action="store_true")
    mode.add_argument("--bvp", action="store_true")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--amplitude", type=float, default=0.3)
    p.set_defaults(func=cmd_geodesic_prob)

    p = sub.add_parser("gpj", help="gPJ flow (CSV t,x,u) or blowup table (CSV alpha,T_blowup)")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--alphas", type=float, nargs="*")
    p.add_argument("--u0", help="CSV with columns x,u; default is a smooth bump")
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--stride", type=int, default=1, help="write every k-th time sample")
    p.add_argument("--blowup-table", dest="blowup_table", action="store_true")
    p.set_defaults(func=cmd_gpj)

    p = sub.add_parser("parametric", help="exponential-family geometry report (JSON)")
    _common(p)
    p.add_argument("--family", default="categorical3", choices=sorted(pm.FAMILIES))
    p.add_argument("--table", help="JSON coefficient table for a custom log-partition function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--theta", type=float, nargs="+")
    p.add_argument("--mc-samples", dest="mc_samples", type=int)
    p.set_defaults(func=cmd_parametric)

    p = sub.add_parser("sweep", help="deterministic sweep over alphas and random data")
    _common(p)
    p.add_argument("--alphas", type=float, nargs="*")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--cases", type=int, default=10)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gpj" and not args.blowup_table and args.alpha is None:
        parser.error("gpj needs --alpha unless --blowup-table is given")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeodesicEscape, AlphaFRError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
