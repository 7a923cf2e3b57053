"""Command-line entry point.

Every command reads a system description (``--config``) or builds one of the
stock families, writes its artifacts under ``--out`` together with a
``manifest.json``, and echoes the main table to stdout.  Exit codes: 0 on
success, 1 on input errors, 2 on analysis failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys as _sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bifurcate import StepPolicy, continue_cycle, staircase_construct, staircase_place
from .config import SystemDescription, load_description, print_description
from .cubic import big_cycle_search, perturbed_double_hopf, sweep_distributions
from .cycles import find_cycles
from .errors import BudgetExhausted, ConfigError, InputError, LienardError, NotBracketed
from .integrate import IntegratorConfig, integrate, make_section, trajectory_csv
from .polysys import ParameterAssignment, PlanarSystem, classify_infinity, find_equilibria
from .portrait import PortraitSpec, render_portrait
from .rotation import rotation_report

CYCLE_FIELDS = ["s", "period", "multiplier", "multiplier_fd", "stability", "multiplicity", "signature"]


class Run:
    """Per-invocation artifact sink."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out) if args.out else None
        self.files: list[str] = []
        self.record: dict = {}
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str, echo: bool = True):
        if self.out:
            (self.out / name).write_text(text)
            self.files.append(name)
        if echo and not self.args.json:
            _sys.stdout.write(text)

    def finish(self, config: IntegratorConfig | None, desc: SystemDescription | None):
        if self.args.json:
            print(json.dumps(self.record, indent=2, sort_keys=True, default=_jsonable))
        if not self.out:
            return
        manifest = {
            "tool": "lienard",
            "version": __version__,
            "command": self.args.command,
            "arguments": {k: v for k, v in sorted(vars(self.args).items()) if k != "func"},
            "config_file": self.args.config,
            "tolerances": None if config is None else {
                "rtol": config.rtol,
                "atol": config.atol,
                "max_step": config.max_step,
                "escape_radius": config.escape_radius,
                "max_time": config.max_time,
            },
            "parameters": None if desc is None or desc.assignment is None else dict(desc.assignment),
            "system": None if desc is None else print_description(desc),
            "artifacts": self.files,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (tuple, set)):
        return list(v)
    return str(v)


def _csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r[k]) for k in fields})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def _signature_text(sig) -> str:
    return " ".join(f"({x:.6g},{y:.6g})" for x, y in sig) or "-"


def _cycle_row(c) -> dict:
    return {
        "s": c.s,
        "period": c.period,
        "multiplier": c.multiplier,
        "multiplier_fd": c.multiplier_fd,
        "stability": c.stability,
        "multiplicity": c.multiplicity,
        "signature": _signature_text(c.signature),
    }


def _integrator(args) -> IntegratorConfig:
    kw = {}
    if args.rtol is not None:
        kw["rtol"] = args.rtol
    if args.atol is not None:
        kw["atol"] = args.atol
    return IntegratorConfig(**kw)


def _description(args) -> SystemDescription:
    if not args.config:
        raise InputError("--config FILE is required for this command")
    desc = load_description(args.config)
    if args.set:
        values = dict(desc.assignment or {})
        for item in args.set:
            name, eq, value = item.partition("=")
            if not eq:
                raise InputError(f"--set expects name=value, got {item!r}")
            try:
                values[name.strip()] = float(value)
            except ValueError:
                raise InputError(f"--set {name}: not a number: {value!r}") from None
        desc = SystemDescription(desc.system, ParameterAssignment(values))
    return desc


def _assignment(desc: SystemDescription) -> ParameterAssignment:
    a = desc.assignment or ParameterAssignment({})
    missing = [n for n in desc.system.parameters if n not in a]
    if missing:
        raise InputError(f"no value for parameter(s) {', '.join(missing)}; add an [assignment] block or --set")
    return a


def _default_section(sys: PlanarSystem, a, limit: float = 10.0) -> tuple[float, float]:
    """From the leftmost anti-saddle on the x-axis to the next equilibrium (or ``limit``)."""
    eqs = sorted(find_equilibria(sys, a, (-limit, limit, -1.0, 1.0)), key=lambda e: e.x)
    on_axis = [e for e in eqs if abs(e.location[1]) < 1e-12]
    for i, e in enumerate(on_axis):
        if e.is_antisaddle:
            nxt = on_axis[i + 1].x if i + 1 < len(on_axis) else e.x + limit
            return e.x, nxt
    raise InputError("no anti-saddle on the x-axis; pass --section LO HI")


def _section(args, sys, a):
    return tuple(args.section) if args.section else _default_section(sys, a)


def _grid(args, default: int = 64):
    return (args.seed_grid or default, "geometric")


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args, run: Run):
    desc = _description(args)
    a = _assignment(desc)
    sys = desc.system
    region = tuple(args.region)
    eqs = find_equilibria(sys, a, region)
    rows = [
        {"x": e.location[0], "y": e.location[1], "trace": e.trace, "determinant": e.determinant, "type": e.classification}
        for e in eqs
    ]
    run.write("equilibria.csv", _csv(rows, ["x", "y", "trace", "determinant", "type"]))
    inf = classify_infinity(sys, a)
    irows = [
        {"dx": s.direction[0], "dy": s.direction[1], "type": s.type, "hyperbolic": s.hyperbolic, "chart": s.chart}
        for s in inf
    ]
    run.write("infinity.csv", _csv(irows, ["dx", "dy", "type", "hyperbolic", "chart"]))
    run.record.update(equilibria=rows, infinity=irows)
    if args.trajectory:
        cfg = _integrator(args)
        tr = integrate(sys, a, tuple(args.trajectory), cfg, t_max=args.t_max)
        run.write("trajectory.csv", trajectory_csv(tr), echo=False)
        run.record["trajectory"] = {"termination": tr.termination.reason, "time": tr.termination.time, "steps": tr.steps}
    return None, desc


def cmd_verify_rotation(args, run: Run):
    desc = _description(args)
    lines = []
    entries = []
    for e in rotation_report(desc.system):
        lines.append(f"[{e.parameter}]\ndelta = {e.determinant.to_text()}\nverdict = {e.verdict.verdict}")
        if e.verdict.witness is not None:
            (px, py), (nx, ny) = e.verdict.witness
            lines.append(f"witness = ({px}, {py}) positive, ({nx}, {ny}) negative")
        entries.append({"parameter": e.parameter, "delta": e.determinant.to_text(), "verdict": e.verdict.verdict})
    run.write("rotation.txt", "\n".join(lines) + "\n")
    run.record["rotation"] = entries
    return None, desc


def cmd_cycles(args, run: Run):
    desc = _description(args)
    a = _assignment(desc)
    cfg = _integrator(args)
    sec = make_section(desc.system, a, _section(args, desc.system, a))
    rep = find_cycles(desc.system, a, sec, _grid(args), cfg)
    rows = [_cycle_row(c) for c in rep.cycles]
    run.write("cycles.csv", _csv(rows, CYCLE_FIELDS))
    diag = {
        "section": [sec.a, sec.b],
        "center_candidate": rep.center_candidate,
        "semistable_candidates": [_cycle_row(c) for c in rep.semistable],
        "truncated": None if rep.truncated is None else rep.truncated.outcome,
        "noisy_brackets": rep.noisy_brackets,
    }
    run.write("cycles_diagnostics.json", json.dumps(diag, indent=2, sort_keys=True, default=_jsonable) + "\n", echo=False)
    run.record.update(cycles=rows, diagnostics=diag)
    return cfg, desc


def cmd_continue(args, run: Run):
    desc = _description(args)
    a = _assignment(desc)
    cfg = _integrator(args)
    sec = make_section(desc.system, a, _section(args, desc.system, a))
    rep = find_cycles(desc.system, a, sec, _grid(args), cfg)
    if not rep.cycles:
        raise InputError("no cycle at the starting assignment to continue")
    if not 0 <= args.seed_index < len(rep.cycles):
        raise InputError(f"--seed-index {args.seed_index} out of range (found {len(rep.cycles)} cycles)")
    policy = StepPolicy(initial=args.step, max_step=max(args.step, args.max_step))
    br = continue_cycle(desc.system, a, args.param, args.target, rep.cycles[args.seed_index], policy, cfg)
    rows = [{"value": p, "s": c.s, "period": c.period, "multiplier": c.multiplier} for p, c in br.samples]
    run.write("branch.csv", _csv(rows, ["value", "s", "period", "multiplier"]))
    event = {"event": br.event, "note": br.note}
    if br.fold is not None:
        f = br.fold
        event["fold"] = {"value": f.value, "s": f.s, "multiplier": f.multiplier, "side_counts": list(f.side_counts)}
    if br.hopf is not None:
        event["hopf"] = {"value": br.hopf.value, "location": list(br.hopf.location)}
    text = "\n".join(f"{k} = {json.dumps(v, default=_jsonable)}" for k, v in event.items()) + "\n"
    run.write("event.txt", text)
    run.record.update(branch=rows, event=event)
    return cfg, desc


def cmd_staircase(args, run: Run):
    cfg = _integrator(args)
    try:
        if args.radii:
            radii = [float(v) for v in args.radii.split(",")]
            if len(radii) != args.k:
                raise InputError(f"--radii needs {args.k} values, got {len(radii)}")
            res = staircase_place(radii, args.strength, args.shape, (0.0, args.x_max), _grid(args), cfg)
        else:
            res = staircase_construct(
                args.k, args.ratio, args.scale, args.budget, args.shape, section=(0.0, args.x_max), grid=_grid(args), config=cfg
            )
    except BudgetExhausted as exc:
        best = exc.best
        if best is not None:
            run.write("best_attempt.cfg", print_description(best.system, best.assignment), echo=False)
            run.write("best_attempt_cycles.csv", _csv([_cycle_row(c) for c in best.cycles], CYCLE_FIELDS), echo=False)
            run.finish(cfg, SystemDescription(best.system, best.assignment))
        raise
    desc = SystemDescription(res.system, res.assignment)
    run.write("staircase.cfg", print_description(desc))
    rows = [_cycle_row(c) for c in res.cycles]
    run.write("staircase_cycles.csv", _csv(rows, CYCLE_FIELDS))
    attempts = [[None if math.isnan(r) else r, sc, n] for r, sc, n in res.attempts]
    run.record.update(assignment=dict(res.assignment), cycles=rows, attempts=attempts)
    return cfg, desc


def _axis(spec: list[float], name: str) -> list[float]:
    lo, hi, n = spec
    if n < 1 or n != int(n):
        raise InputError(f"--{name}: count must be a positive integer")
    return [float(v) for v in np.linspace(lo, hi, int(n))]


def cmd_cubic_sweep(args, run: Run):
    cfg = IntegratorConfig.sweep(**{k: v for k, v in (("rtol", args.rtol), ("atol", args.atol)) if v is not None})
    grid = _grid(args)
    res = sweep_distributions(
        _axis(args.lam, "lam"), _axis(args.mu, "mu"), _axis(args.alpha, "alpha"), cfg, grid, workers=args.workers
    )
    rows = [
        {
            "lambda": c.parameters[0],
            "mu": c.parameters[1],
            "alpha": c.parameters[2],
            "distribution": str(c.distribution) if not c.error else "error",
            "flags": ";".join(c.flags),
            "error": c.error,
        }
        for c in res.cells
    ]
    run.write("sweep.csv", _csv(rows, ["lambda", "mu", "alpha", "distribution", "flags", "error"]))
    lines = []
    for key, entry in res.summary().items():
        rep = ", ".join(f"{v:.6g}" for v in entry["representative"])
        lines.append(f"[{key}]\ncount = {entry['count']}\nrepresentative = {rep}\nflags = {'; '.join(entry['flags']) or '-'}")
    lines.append(f"[silent anomalies]\ncount = {len(res.silent_anomalies())}")
    run.write("summary.txt", "\n".join(lines) + "\n")
    run.record.update(summary=res.summary(), silent_anomalies=len(res.silent_anomalies()))
    if args.search:
        vcfg = _integrator(args)
        outcomes = []
        if args.search in ("double-hopf", "all"):
            outcomes.append(perturbed_double_hopf(config=vcfg, grid=grid))
        if args.search in ("three-cycles", "all"):
            outcomes.append(big_cycle_search(config=vcfg, grid=grid))
        out = []
        for o in outcomes:
            out.append(f"[{o.target}]\nfound = {str(o.found).lower()}")
            if o.result is not None:
                out.append("parameters = " + ", ".join(f"{v!r}" for v in o.result.parameters))
                out.append(f"distribution = {o.result.distribution}")
            if o.note:
                out.append(f"note = {o.note}")
            for p, d in o.tried:
                out.append("tried = " + ", ".join(f"{v:.6g}" for v in p) + f" -> {d}")
        run.write("search.txt", "\n".join(out) + "\n")
    return cfg, None


def _seeds(text: str | None) -> tuple[tuple[float, float], ...]:
    if not text:
        return ()
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            x, y = (float(v) for v in chunk.split(","))
        except ValueError:
            raise InputError(f"bad seed {chunk!r}; expected 'x,y;x,y;...'") from None
        out.append((x, y))
    return tuple(out)


def cmd_portrait(args, run: Run):
    desc = _description(args)
    a = _assignment(desc)
    cfg = _integrator(args)
    spec = PortraitSpec(tuple(args.window), _seeds(args.seeds), args.arrows, (args.width, args.height), args.t_max)
    detected = []
    if args.detect:
        sec = make_section(desc.system, a, _section(args, desc.system, a))
        detected = list(find_cycles(desc.system, a, sec, _grid(args), cfg).cycles)
    svg = render_portrait(desc.system, a, spec, detected, cfg)
    run.write("portrait.svg", svg, echo=not args.out)
    return cfg, desc


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", metavar="FILE", help="system description file")
        p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override a parameter value")
    p.add_argument("--out", metavar="DIR", help="artifact directory (a manifest.json is written there)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--seed-grid", type=int, metavar="N", help="number of displacement grid points")
    p.add_argument("--json", action="store_true", help="print a JSON record instead of tables")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lienard", description="Lienard-family limit-cycle toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="finite and infinite equilibria")
    _common(p)
    p.add_argument("--region", type=float, nargs=4, default=(-10.0, 10.0, -10.0, 10.0), metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--trajectory", type=float, nargs=2, metavar=("X", "Y"), help="also dump a trajectory CSV")
    p.add_argument("--t-max", type=float, default=50.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify-rotation", help="rotation determinants and sign verdicts")
    _common(p)
    p.set_defaults(func=cmd_verify_rotation)

    p = sub.add_parser("cycles", help="limit cycles crossing an x-axis section")
    _common(p)
    p.add_argument("--section", type=float, nargs=2, metavar=("LO", "HI"))
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("continue", help="one-parameter continuation of a cycle")
    _common(p)
    p.add_argument("--section", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--param", required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--seed-index", type=int, default=0, help="which detected cycle to follow (inner first)")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--max-step", type=float, default=0.2)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("staircase", help="build k nested cycles by alternating odd coefficients")
    _common(p, config=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--shape", choices=("canonical", "rychkov"), default="canonical")
    p.add_argument("--ratio", type=float, default=10.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=9)
    p.add_argument("--radii", help="comma-separated target amplitudes; places cycles by averaging instead of the ratio ladder")
    p.add_argument("--strength", type=float, default=0.3, help="drift scale for --radii")
    p.add_argument("--x-max", type=float, default=10.0)
    p.set_defaults(func=cmd_staircase)

    p = sub.add_parser("cubic-sweep", help="cycle distributions of the cubic system over a grid")
    _common(p, config=False)
    for name in ("lam", "mu", "alpha"):
        p.add_argument(f"--{name}", type=float, nargs=3, default=(-0.2, 0.2, 5), metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--search", choices=("double-hopf", "three-cycles", "all"))
    p.set_defaults(func=cmd_cubic_sweep)

    p = sub.add_parser("portrait", help="SVG phase portrait")
    _common(p)
    p.add_argument("--window", type=float, nargs=4, default=(-2.0, 2.0, -2.0, 2.0), metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--seeds", help="'x,y;x,y;...'")
    p.add_argument("--arrows", type=int, default=15)
    p.add_argument("--width", type=int, default=600)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--t-max", type=float, default=40.0)
    p.add_argument("--detect", action="store_true", help="overlay cycles found on --section")
    p.add_argument("--section", type=float, nargs=2, metavar=("LO", "HI"))
    p.set_defaults(func=cmd_portrait)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "config"):
        args.config = None
    try:
        run = Run(args)
        cfg, desc = args.func(args, run)
        run.finish(cfg, desc)
        return 0
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=_sys.stderr)
        return 1
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1
    except (BudgetExhausted, NotBracketed, LienardError) as exc:
        print(f"analysis failed: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
