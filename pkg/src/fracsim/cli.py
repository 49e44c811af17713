"""Command-line front end: JSON scenario configs, preset library, CSV and
text-report emission.

Exit codes: 0 success, 2 config/validation error, 3 numerical failure
(solver divergence or series non-convergence).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import analytic, control, fitting
from .analytic import SeriesBudget, SeriesDivergence
from .fode import Fode, Grid, solve_step, unit_step
from .glops import MemoryPolicy

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def load_preset(name: str) -> dict:
    ref = resources.files("fracsim") / "presets" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"unknown preset {name!r}")
    cfg = json.loads(ref.read_text())
    cfg.setdefault("preset", name)
    return cfg


def load_config(args) -> dict:
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        p = Path(args.config)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        cfg = json.loads(p.read_text())
    else:
        raise ConfigError("provide a config file or --preset")
    # flag overrides
    grid = cfg.setdefault("grid", {})
    if args.h is not None:
        grid["h"] = args.h
    if args.t_end is not None:
        grid["t_end"] = args.t_end
    if args.memory_L is not None:
        grid["memory"] = {"mode": "fixed_length", "L": args.memory_L}
    if args.delta0 is not None:
        grid["memory"] = {"mode": "error_bound", "delta0": args.delta0}
    if args.init_mode is not None:
        grid["init_mode"] = args.init_mode
    if args.terms is not None or args.precision is not None:
        an = cfg.setdefault("analytic", {}) or {}
        if args.terms is not None:
            an["outer_terms"] = args.terms
        if args.precision is not None:
            an["precision"] = args.precision
        cfg["analytic"] = an
    if args.out is not None:
        cfg["out"] = args.out
    return cfg


def _policy(spec) -> MemoryPolicy:
    if spec in (None, "full"):
        return MemoryPolicy.full()
    if isinstance(spec, dict):
        mode = spec.get("mode")
        if mode == "fixed_length":
            return MemoryPolicy.fixed(float(spec["L"]))
        if mode == "error_bound":
            return MemoryPolicy.error_bound(float(spec["delta0"]))
        if mode == "full":
            return MemoryPolicy.full()
    raise ConfigError(f"bad memory policy {spec!r}")


def build_grid(cfg) -> Grid:
    g = cfg.get("grid") or {}
    try:
        return Grid(
            h=float(g.get("h", 0.05)),
            t_end=float(g.get("t_end", 10.0)),
            policy=_policy(g.get("memory")),
            init_mode=g.get("init_mode", "direct"),
        )
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"invalid grid: {e}") from e


def build_plant(cfg) -> Fode:
    terms = cfg.get("plant")
    if not terms:
        raise ConfigError("config lacks a plant")
    try:
        return Fode(lhs=[(float(c), float(o)) for c, o in terms], rhs=[(1.0, 0.0)])
    except (ValueError, TypeError) as e:
        raise ConfigError(f"invalid plant: {e}") from e


def build_model(cfg) -> Fode:
    plant = build_plant(cfg)
    ctl = cfg.get("controller")
    if not ctl:
        return plant
    try:
        c = control.PdController(
            K=float(ctl["K"]), Td=float(ctl["Td"]), delta=float(ctl.get("delta", 1.0))
        )
        return control.close_loop(plant, c)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"invalid controller: {e}") from e


def build_budget(cfg) -> SeriesBudget:
    an = cfg.get("analytic") or {}
    precision = an.get("precision", "working")
    if precision == "dd":
        precision = "double_double"
    try:
        return SeriesBudget(
            outer_terms=int(an.get("outer_terms", 120)),
            tol=float(an.get("tol", 1e-12)),
            precision_mode=precision,
        )
    except ValueError as e:
        raise ConfigError(f"invalid analytic budget: {e}") from e


def _plant_params(cfg):
    plant = build_plant(cfg)
    terms = sorted(plant.lhs, key=lambda t: -t.order)
    if len(terms) != 3 or terms[-1].order != 0:
        raise ConfigError("analytic series needs a three-term plant with a zero-order term")
    (a2, alpha), (a1, beta), (a0, _) = [(t.coeff, t.order) for t in terms]
    return a2, a1, a0, alpha, beta


def analytic_value(cfg, budget, t: float) -> float:
    a2, a1, a0, alpha, beta = _plant_params(cfg)
    ctl = cfg.get("controller")
    if not ctl:
        return analytic.step_open(a2, a1, a0, alpha, beta, t, budget)
    K, Td = float(ctl["K"]), float(ctl["Td"])
    delta = float(ctl.get("delta", 1.0))
    if delta == 1.0:
        return analytic.step_closed_ipd(a2, a1, a0, alpha, beta, K, Td, t, budget)
    return analytic.step_closed_fpd(a2, a1, a0, alpha, beta, K, Td, delta, t, budget)


def config_hash(cfg) -> str:
    # the output path is delivery detail, not scenario content
    scen = {k: v for k, v in cfg.items() if k != "out"}
    return hashlib.sha256(json.dumps(scen, sort_keys=True).encode()).hexdigest()[:16]


def write_csv(path, cfg, header, rows, extra_comments=()):
    lines = [f"# preset: {cfg.get('preset', '-')}", f"# config-sha256: {config_hash(cfg)}"]
    lines += list(extra_comments)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg) -> int:
    grid = build_grid(cfg)
    model = build_model(cfg)
    y = solve_step(model, grid)
    want_analytic = cfg.get("analytic") is not None
    header = ["t", "y"]
    cols = [y.times, y.samples]
    comments = []
    if want_analytic:
        budget = build_budget(cfg)
        ya = []
        for t in y.times:
            try:
                ya.append(analytic_value(cfg, budget, float(t)))
            except SeriesDivergence:
                ya.append(float("nan"))
        header.append("y_analytic")
        cols.append(np.array(ya))
    if y.diverged_at is not None:
        comments.append(f"# diverged at sample {y.diverged_at} (t = {y.diverged_at * y.h!r})")
    write_csv(cfg.get("out"), cfg, header, zip(*cols), comments)
    return EXIT_NUMERIC if y.diverged_at is not None else 0


def cmd_analytic(cfg) -> int:
    grid = build_grid(cfg)
    budget = build_budget(cfg)
    ts = np.arange(grid.n_samples) * grid.h
    rows = []
    diverged = False
    for t in ts:
        try:
            rows.append((t, analytic_value(cfg, budget, float(t))))
        except SeriesDivergence:
            diverged = True
            break
    comments = ["# series stopped converging; remaining times omitted"] if diverged else []
    write_csv(cfg.get("out"), cfg, ["t", "y_analytic"], rows, comments)
    return EXIT_NUMERIC if diverged else 0


def cmd_fit(cfg) -> int:
    grid = build_grid(cfg)
    f = cfg.get("fit") or {}
    target_spec = f.get("target", "plant")
    if target_spec == "plant":
        target = solve_step(build_plant(cfg), grid)
    elif isinstance(target_spec, list) and len(target_spec) == 3:
        target = fitting.simulate_candidate(*map(float, target_spec), grid)
    elif isinstance(target_spec, str) and target_spec not in ("plant",):
        p = Path(target_spec)
        if not p.is_file():
            raise ConfigError(f"target file not found: {p}")
        data = np.loadtxt(p, delimiter=",", comments="#", skiprows=0)
        from .fode import TimeSeries

        target = TimeSeries(h=grid.h, t0=0.0, samples=data[:, 1])
    else:
        raise ConfigError(f"bad fit target {target_spec!r}")
    spec = fitting.FitSpec(
        target=target,
        grid=grid,
        free_params=frozenset(f.get("free", ["a2", "a1"])),
        init=tuple(f.get("init", [1.0, 1.0, 1.0])),
        max_iters=int(f.get("max_iters", 2000)),
        ftol=float(f.get("ftol", 1e-12)),
    )
    r = fitting.fit_integer_second_order(spec)
    report = (
        f"fit: a2 = {r.a2:.6g}  a1 = {r.a1:.6g}  a0 = {r.a0:.6g}\n"
        f"objective = {r.objective:.6e}\n"
        f"iterations = {r.iterations}\n"
        f"converged = {r.converged}\n"
    )
    _emit(cfg, report)
    return 0 if r.converged else EXIT_NUMERIC


def cmd_design(cfg) -> int:
    d = cfg.get("design") or {}
    try:
        a2, a1, a0 = float(d["a2"]), float(d["a1"]), float(d["a0"])
        targets = control.DesignTargets(St=float(d["St"]), Tl=float(d["Tl"]))
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid design block: {e}") from e
    c = control.design_pd(a2, a1, a0, targets)
    disc = (a1 + c.Td) ** 2 - 4 * a2 * (a0 + c.K)
    if disc < 0:
        re = -(a1 + c.Td) / (2 * a2)
        im = (-disc) ** 0.5 / (2 * a2)
        poles = f"{re:.6g} +- {im:.6g}j"
    else:
        r1 = (-(a1 + c.Td) + disc**0.5) / (2 * a2)
        r2 = (-(a1 + c.Td) - disc**0.5) / (2 * a2)
        poles = f"{r1:.6g}, {r2:.6g}"
    _emit(cfg, f"K = {c.K:.6g}\nTd = {c.Td:.6g}\npoles = {poles}\n")
    return 0


def cmd_metrics(cfg) -> int:
    grid = build_grid(cfg)
    model = build_model(cfg)
    horizon = float((cfg.get("metrics") or {}).get("horizon", min(10.0, grid.t_end)))
    y = solve_step(model, grid)
    if y.diverged_at is not None:
        _emit(cfg, f"diverged at t = {y.diverged_at * y.h!r}\nclassification = unstable\n")
        return EXIT_NUMERIC
    m = control.response_metrics(y, unit_step(grid), horizon)
    cls = control.stability_probe(model, grid)
    _emit(
        cfg,
        f"regulation_area = {m.regulation_area:.6g}\n"
        f"permanent_deviation_pct = {m.permanent_deviation:.6g}\n"
        f"overshoot = {m.overshoot:.6g}\n"
        f"classification = {cls}\n",
    )
    return 0


def cmd_probe(cfg) -> int:
    grid = build_grid(cfg)
    model = build_model(cfg)
    cls = control.stability_probe(model, grid)
    _emit(cfg, f"classification = {cls}\n")
    return 0


_ACTIONS = {
    "simulate": cmd_simulate,
    "analytic": cmd_analytic,
    "fit": cmd_fit,
    "design": cmd_design,
    "metrics": cmd_metrics,
    "probe": cmd_probe,
}


def cmd_sweep(cfgs) -> int:
    worst = 0
    for cfg in cfgs:
        action = cfg.get("action", "simulate")
        if action not in _ACTIONS:
            raise ConfigError(f"unknown action {action!r} in sweep config")
        rc = _ACTIONS[action](cfg)
        worst = max(worst, rc)
    return worst


def _emit(cfg, text: str) -> None:
    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracsim",
                                description="Fractional-order control system simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("simulate", "analytic", "fit", "design", "metrics", "probe"):
        sp = sub.add_parser(name)
        _common_flags(sp)
    sw = sub.add_parser("sweep")
    sw.add_argument("configs", nargs="+", help="config files to run in sequence")
    return p


def _common_flags(sp):
    sp.add_argument("config", nargs="?", help="JSON config file")
    sp.add_argument("--preset", help="named built-in scenario")
    sp.add_argument("--h", type=float, dest="h")
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--memory-L", type=float, dest="memory_L")
    sp.add_argument("--delta0", type=float)
    sp.add_argument("--init-mode", choices=["direct", "legacy"], dest="init_mode")
    sp.add_argument("--terms", type=int)
    sp.add_argument("--precision", choices=["working", "dd"])
    sp.add_argument("--out", help="output path (default: stdout)")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            cfgs = []
            for path in args.configs:
                p = Path(path)
                if not p.is_file():
                    raise ConfigError(f"config file not found: {p}")
                cfgs.append(json.loads(p.read_text()))
            return cmd_sweep(cfgs)
        cfg = load_config(args)
        return _ACTIONS[args.command](cfg)
    except (ConfigError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, OverflowError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
