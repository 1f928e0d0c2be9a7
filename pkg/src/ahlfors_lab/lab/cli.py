"""Command-line entry point ``lab``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .. import carleson, conformal, metrics, transport
from ..curves import KINDS, SNOWFLAKE_POLICIES, CurveSpec, generate
from ..geometry import (
    curve_from_dict,
    curve_to_dict,
    discretize_arclength,
    load_json,
    measure_from_dict,
    measure_to_dict,
)
from .config import ConfigError, ExperimentConfig, clean
from .experiments import run as run_experiment
from .plot import PlotError, plot_report


def _write_json(obj, path) -> None:
    text = json.dumps(clean(obj), sort_keys=True, indent=1)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _param(text: str):
    key, _, raw = text.partition("=")
    if not key or not _:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _point(text: str) -> complex:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}") from exc
    return complex(x, y)


def cmd_gen(a) -> int:
    params = dict(a.param)
    if a.depth is not None:
        params["depth"] = a.depth
    if a.policy is not None:
        params["policy"] = a.policy
    c = generate(CurveSpec(a.kind, a.samples, params))
    _write_json(curve_to_dict(c), a.out)
    if a.measure_out:
        _write_json(measure_to_dict(discretize_arclength(c, a.atoms_per_segment)), a.measure_out)
    return 0


def cmd_metrics(a) -> int:
    c = curve_from_dict(load_json(a.inp))
    if a.which == "ahlfors":
        out = metrics.ahlfors_constant(c).to_dict()
    elif a.which == "chordarc":
        out = metrics.chord_arc_constant(c).to_dict()
    elif a.which == "smooth":
        out = metrics.smoothness_profile(c).to_dict()
    else:
        out = metrics.moebius_regularity(c, a.samples, a.seed).to_dict()
    out["which"] = a.which
    _write_json(out, a.out)
    return 0


def cmd_carleson(a) -> int:
    m = measure_from_dict(load_json(a.measure))
    if a.form == "sector":
        rep = carleson.sector_norm(m)
    else:
        if not a.boundary:
            raise ConfigError("--boundary is required for the disk form")
        rep = carleson.boundary_norm(m, curve_from_dict(load_json(a.boundary)))
    out = rep.to_dict()
    if rep.scales.size >= 4:
        out["vanishing"] = carleson.vanishing_diagnosis(rep).to_dict()
    _write_json(out, a.out)
    return 0


def cmd_fit(a) -> int:
    c = curve_from_dict(load_json(a.boundary))
    anchor = a.anchor if a.anchor is not None else complex(np.mean(c.points))
    fmap = conformal.fit(c, anchor, exterior=a.exterior, seed=a.seed)
    _write_json(fmap.to_dict(), a.out)
    return 0


def cmd_eval(a) -> int:
    fmap = conformal.ConformalMap.from_dict(load_json(a.map))
    with open(a.points, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        z = np.array([complex(float(r[0]), float(r[1])) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"points file must hold x,y rows: {exc}") from exc
    fn = fmap.inverse if a.inverse else fmap
    w = fn(z)
    d1 = fmap.derivative(w if a.inverse else z)
    out = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        wr = csv.writer(out)
        wr.writerow(["x", "y", "u", "v", "abs_derivative"])
        for zi, wi, di in zip(z, w, d1):
            wr.writerow([repr(zi.real), repr(zi.imag), repr(wi.real), repr(wi.imag), repr(abs(di))])
    finally:
        if a.out:
            out.close()
    return 0


def cmd_transport(a) -> int:
    m = measure_from_dict(load_json(a.measure))
    fmap = conformal.ConformalMap.from_dict(load_json(a.map))
    out = transport.push_forward(m, fmap) if a.dir == "push" else transport.pull_back(m, fmap)
    _write_json(measure_to_dict(out), a.out)
    return 0


def cmd_run(a) -> int:
    if a.config:
        cfg = ExperimentConfig.load(a.config, a.experiment)
    elif a.experiment:
        cfg = ExperimentConfig(a.experiment)
    else:
        raise ConfigError("give --experiment and/or --config")
    if a.seed is not None:
        cfg.seed = a.seed
    out_dir = a.out or cfg.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    rep = run_experiment(cfg)
    with open(os.path.join(out_dir, f"{cfg.experiment}.json"), "w") as fh:
        fh.write(rep.to_json() + "\n")
    for stem, svg in plot_report(rep.to_dict()).items():
        with open(os.path.join(out_dir, stem + ".svg"), "w") as fh:
            fh.write(svg)
    for c in rep.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {cfg.experiment} {c.name}: {json.dumps(clean(c.measured))}")
    if rep.error:
        print(f"[ERROR] {cfg.experiment} {rep.error['type']}: {rep.error['message']}")
    return 0 if rep.passed else 1


def cmd_plot(a) -> int:
    try:
        report = load_json(a.report)
    except json.JSONDecodeError as exc:
        raise PlotError(f"not JSON: {exc}", "report") from exc
    os.makedirs(a.out, exist_ok=True)
    for stem, svg in plot_report(report).items():
        with open(os.path.join(a.out, stem + ".svg"), "w") as fh:
            fh.write(svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description="Carleson measures, curve regularity and conformal maps.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a corpus curve")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--samples", type=int, default=1024)
    g.add_argument("--param", type=_param, action="append", default=[], help="key=value (JSON values allowed)")
    g.add_argument("--depth", type=int, help="snowflake depth (same as --param depth=N)")
    g.add_argument("--policy", choices=SNOWFLAKE_POLICIES, help="snowflake refinement policy")
    g.add_argument("-o", "--out", default="-")
    g.add_argument("--measure-out", help="also write the arclength measure here")
    g.add_argument("--atoms-per-segment", type=int, default=1)
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("metrics", help="regularity constants of a curve")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--which", choices=("ahlfors", "chordarc", "smooth", "moebius"), default="ahlfors")
    m.add_argument("--samples", type=int, default=200, help="Mobius samples")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("-o", "--out", default="-")
    m.set_defaults(func=cmd_metrics)

    c = sub.add_parser("carleson", help="Carleson norm of a measure")
    c.add_argument("--measure", required=True)
    c.add_argument("--boundary")
    c.add_argument("--form", choices=("disk", "sector"), default="disk")
    c.add_argument("-o", "--out", default="-")
    c.set_defaults(func=cmd_carleson)

    f = sub.add_parser("fit", help="fit a conformal map of the disk onto the curve's interior")
    f.add_argument("--boundary", required=True)
    f.add_argument("--anchor", type=_point, help="x,y (default: vertex centroid)")
    f.add_argument("--exterior", action="store_true", help="map onto the unbounded complement")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("-o", "--out", default="-")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="evaluate a fitted map at points from a CSV of x,y rows")
    e.add_argument("--map", required=True)
    e.add_argument("--points", required=True)
    e.add_argument("--inverse", action="store_true")
    e.add_argument("-o", "--out")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("transport", help="push a disk measure forward or pull a domain measure back")
    t.add_argument("--measure", required=True)
    t.add_argument("--map", required=True)
    t.add_argument("--dir", choices=("push", "pull"), default="push")
    t.add_argument("-o", "--out", default="-")
    t.set_defaults(func=cmd_transport)

    r = sub.add_parser("run", help="run an experiment (exit 0 iff every check passes)")
    r.add_argument("--experiment", choices=("E1", "E2", "E3", "E4", "E5", "E6"))
    r.add_argument("--config")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="render SVG profiles from a report JSON")
    pl.add_argument("--report", required=True)
    pl.add_argument("--out", default=".")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PlotError as exc:
        print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        err = {"type": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "diagnostics", None):
            err["diagnostics"] = clean(exc.diagnostics)
        print(json.dumps({"error": err}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
