"""Experiments E1..E6. Each returns a Report with one Check per assertion."""
from __future__ import annotations

import math
import traceback

import numpy as np

from .. import carleson, conformal, curves, metrics, transport
from ..curves import CurveSpec
from ..geometry import (
    AtomicMeasure,
    SampledCurve,
    discretize_arclength,
    dyadic_radii,
    sum_measures,
)
from .config import ConfigError, ExperimentConfig, Report, corpus_entry_name, load_corpus_entry

ANCHORS = {
    "E1": "push-forward is bounded from CM(disk) to CM(domain) when the boundary is Ahlfors-regular",
    "E2": "explicit disk Carleson measure sum eps_n arclength(gamma_{n+1}) with growing push-forward norm",
    "E3": "conformal image of an Ahlfors-regular curve in the disk is Ahlfors-regular",
    "E4": "Schwarz reflection of an analytic curve has vanishing Carleson dilatation density",
    "E5": "pre-Schwarzian Carleson density: smooth versus rough boundary",
    "E6": "domain above y = sin(x^2): windowed Ahlfors ratio grows with the window",
}

SMOOTH_CORPUS = [
    {"name": "circle", "kind": "circle", "samples": 4096},
    {"name": "ellipse", "kind": "ellipse", "samples": 4096, "params": {"a": 1.2, "b": 1.0}},
    {"name": "square", "kind": "square", "samples": 4096, "params": {"side": 2.0}},
    {"name": "perturbed_circle", "kind": "perturbed_circle", "samples": 4096,
     "params": {"amplitude": 0.1, "frequency": 5}},
]

DEFAULTS = {
    "E1": {"sources": 20, "ratio_budget": 50.0, "rho_max": 1 - 2.0**-7, "atoms_per_unit": 2048},
    "E2": {"depth": 6, "policy": "left-fixed", "samples": 12600, "n_max": 5, "circle_samples": 8192,
           "growth_min": 1.1, "sector_slack": 0.10, "min_depths": 4},
    "E3": {"levels": 6, "circle_samples": 4096, "functoriality_tol": 0.01},
    "E4": {"samples": 2048, "ellipses": [[1.2, 1.0, 0.3], [1.5, 0.5, 0.15]], "circle_collar": 0.3,
           "mu_floor": 1e-8, "threshold_slope": 0.5, "radius_floor_cells": 4},
    "E5": {"samples": 3072, "snowflake_depth": 4, "ellipse": [1.2, 1.0], "reference_ellipse": [1.0, 0.5],
           "grid_levels": 8, "min_factor": 3.0},
    "E6": {"windows": [[2.0, 2048], [20.0, 16384]], "min_factor": 5.0, "length_tol": 0.01},
}


def _params(cfg: ExperimentConfig) -> dict:
    p = dict(DEFAULTS[cfg.experiment])
    unknown = (set(cfg.params) | set(cfg.tolerances)) - set(p)
    if unknown:
        raise ConfigError(f"unknown {cfg.experiment} parameters: {sorted(unknown)}; known: {sorted(p)}")
    p.update(cfg.params)
    p.update(cfg.tolerances)
    return p


def _corpus(cfg: ExperimentConfig, default):
    entries = cfg.corpus if cfg.corpus is not None else default
    return [(corpus_entry_name(e), load_corpus_entry(e)) for e in entries]


def _fit(c: SampledCurve, seed: int = 0) -> conformal.ConformalMap:
    return conformal.fit(c, anchor=complex(np.mean(c.points)), koebe_points=1000, seed=seed)


def _max_gap(fmap) -> float:
    th = np.sort(np.mod(fmap.prevertex_angles, 2 * np.pi))
    return float(np.diff(np.append(th, th[0] + 2 * np.pi)).max())


def _polyline_length(points) -> float:
    return float(np.abs(np.diff(np.append(points, points[0]))).sum())


# --- random sources on the disk ----------------------------------------------

def _arc_atoms(rng, rho, spacing):
    start = 2 * np.pi * rng.random()
    span = 2 * np.pi * rng.uniform(0.05, 1.0)
    n = max(8, int(rho * span / spacing))
    t = start + span * (np.arange(n) + 0.5) / n
    return rho * np.exp(1j * t), np.full(n, rho * span / n)


def _radial_atoms(rng, r0, r1, spacing):
    th = 2 * np.pi * rng.random()
    n = max(8, int((r1 - r0) / spacing))
    r = r0 + (r1 - r0) * (np.arange(n) + 0.5) / n
    return r * np.exp(1j * th), np.full(n, (r1 - r0) / n)


def random_source(rng, rho_max: float, spacing: float, components: int = 3) -> AtomicMeasure:
    """Random positive measure on |z| <= rho_max, normalized to sector norm 1.

    Mixes arcs of circles, radial segments and scattered atoms.
    """
    locs, masses = [], []
    for _ in range(components):
        kind = rng.integers(3)
        weight = rng.uniform(0.2, 1.0)
        if kind == 0:
            z, m = _arc_atoms(rng, rng.uniform(0.3, rho_max), spacing)
        elif kind == 1:
            z, m = _radial_atoms(rng, rng.uniform(0.0, 0.8) * rho_max, rho_max, spacing)
        else:
            n = 400
            r = np.sqrt(rng.uniform(0.0, rho_max**2, n))
            z = r * np.exp(2j * np.pi * rng.random(n))
            m = rng.uniform(0.5, 1.5, n) / n
        locs.append(z)
        masses.append(weight * m)
    nu = AtomicMeasure(np.concatenate(locs), np.concatenate(masses), "custom", spacing)
    return nu.scaled(1.0 / carleson.sector_norm(nu).norm)


# --- experiments -------------------------------------------------------------

def run_e1(cfg: ExperimentConfig, rep: Report) -> None:
    p = _params(cfg)
    rng = np.random.default_rng(cfg.seed)
    spacing = 1.0 / p["atoms_per_unit"]
    worst = 0.0
    for name, c in _corpus(cfg, SMOOTH_CORPUS):
        fmap = _fit(c, cfg.seed)
        rho_max = min(p["rho_max"], 1 - 2.5 * _max_gap(fmap))
        ratios = []
        for k in range(p["sources"]):
            nu = random_source(rng, rho_max, spacing)
            tr = transport.norm_ratio(nu, fmap, c, probe_id=f"{name}/source{k}")
            ratios.append(tr.ratio)
        ratios = np.array(ratios)
        worst = max(worst, float(ratios.max()))
        rep.data[name] = {
            "ahlfors_constant": metrics.ahlfors_constant(c).constant,
            "fit": fmap.fit_report,
            "rho_max": rho_max,
            "ratios": ratios,
        }
        rep.check(f"{name}: push-forward norms finite", np.all(np.isfinite(ratios)), int(np.isfinite(ratios).sum()),
                  p["sources"])
        rep.check(f"{name}: max norm ratio within corpus budget", ratios.max() <= p["ratio_budget"],
                  float(ratios.max()), p["ratio_budget"])
    rep.data["max_ratio"] = worst


def run_e2(cfg: ExperimentConfig, rep: Report) -> None:
    p = _params(cfg)
    if cfg.corpus:
        name, c = _corpus(cfg, None)[0]
    else:
        name = f"snowflake({p['depth']},{p['policy']})"
        c = curves.snowflake(p["depth"], p["policy"], p["samples"])
    fmap = _fit(c, cfg.seed)
    n_max = p["n_max"]
    gammas = {n: curves.internal_circle(n, p["circle_samples"]) for n in range(1, n_max + 1)}
    for n, g in gammas.items():
        ok = fmap.admissible(g.points)
        if not np.all(ok):
            raise transport.TransportError(f"level circle {n} meets the boundary collar", int(np.flatnonzero(~ok)[0]))
    lengths = np.array([_polyline_length(fmap(gammas[n].points)) for n in range(1, n_max + 1)])
    growth = lengths[1:] / lengths[:-1]
    eps = 1 / lengths[:-1] - 1 / lengths[1:]
    rep.data.update({"domain": name, "fit": fmap.fit_report, "l": lengths, "eps": eps, "growth": growth})
    rep.check("l_{n+1}/l_n >= growth_min over probed n", growth.min() >= p["growth_min"], float(growth.min()),
              p["growth_min"])
    total = math.fsum(eps)
    telescoped = 1 / lengths[0] - 1 / lengths[-1]
    rep.check("sum eps_n telescopes to 1/l_1 - 1/l_{N+1}",
              abs(total - telescoped) <= 4 * np.finfo(float).eps * telescoped, total, telescoped)
    rep.check("sum eps_n <= 1/l_1", total <= 1 / lengths[0], total, 1 / lengths[0])
    depths, sector, pushed, bound = [], [], [], []
    for N in range(1, n_max):
        nu = sum_measures([discretize_arclength(gammas[n + 1]).scaled(eps[n - 1]) for n in range(1, N + 1)])
        s = carleson.sector_norm(nu)
        b = carleson.boundary_norm(transport.push_forward(nu, fmap), c)
        depths.append(N)
        sector.append(s.norm)
        pushed.append(b.norm)
        bound.append(2 * math.fsum(eps[:N]))
        rep.profile(f"push-forward profile, depth {N}", b.scales, b.rho)
    sector, pushed, bound = map(np.array, (sector, pushed, bound))
    rep.data.update({"depths": depths, "sector_norm": sector, "sector_bound": bound, "pushed_norm": pushed})
    rep.check("sector norm <= 2 sum eps_n (+slack) at every depth",
              np.all(sector <= bound * (1 + p["sector_slack"])), float((sector / bound).max()),
              1 + p["sector_slack"])
    rep.check("push-forward norm strictly increasing in depth",
              len(depths) >= p["min_depths"] and np.all(np.diff(pushed) > 0), pushed, f">= {p['min_depths']} depths")


def run_e3(cfg: ExperimentConfig, rep: Report) -> None:
    p = _params(cfg)
    for name, c in _corpus(cfg, SMOOTH_CORPUS):
        fmap = _fit(c, cfg.seed)
        rows = []
        t_norm = 0.0
        for n in range(1, p["levels"] + 1):
            g = curves.internal_circle(n, p["circle_samples"])
            nu = discretize_arclength(g)
            pushed = transport.push_forward(nu, fmap)
            image = SampledCurve(fmap(g.points), closed=True)
            L = image.length
            tr = transport.norm_ratio(nu.scaled(1 / carleson.sector_norm(nu).norm), fmap, c)
            t_norm = max(t_norm, tr.ratio)
            rows.append({"n": n, "pushed_mass": pushed.total_mass, "image_length": L,
                         "rel_err": abs(pushed.total_mass - L) / L,
                         "C_gamma": metrics.ahlfors_constant(g).constant,
                         "C_image": metrics.ahlfors_constant(image).constant})
        err = max(r["rel_err"] for r in rows)
        rep.check(f"{name}: push-forward of arclength = image arclength", err <= p["functoriality_tol"], err,
                  p["functoriality_tol"])
        worst = 0.0
        for r in rows:
            C = r["C_gamma"]
            r["bound"] = 2 * max(3 * C * t_norm, 27 * C)
            worst = max(worst, r["C_image"] / r["bound"])
        rep.check(f"{name}: image Ahlfors constant within 2 max(3 C T, 27 C)", worst <= 1.0, worst, 1.0,
                  "T is the empirical operator-norm lower bound")
        rep.data[name] = {"fit": fmap.fit_report, "T_lower_bound": t_norm, "levels": rows}


def run_e4(cfg: ExperimentConfig, rep: Report) -> None:
    p = _params(cfg)
    circ = conformal.schwarz_reflection_dilatation(CurveSpec("circle", p["samples"], {}),
                                                   collar=(0.0, p["circle_collar"]))
    mu_max = float(np.abs(circ.mu).max())
    rep.check("circle reflection |mu| <= floor everywhere", mu_max <= p["mu_floor"], mu_max, p["mu_floor"])
    rep.data["circle"] = {"max_mu": mu_max, "samples": int(circ.mu.size),
                          "measure_atoms": len(conformal.dilatation_to_measure(circ, p["mu_floor"]))}
    for a, b, hi in p["ellipses"]:
        spec = CurveSpec("ellipse", p["samples"], {"a": a, "b": b})
        fld = conformal.schwarz_reflection_dilatation(spec, collar=(0.0, hi))
        m = conformal.dilatation_to_measure(fld, p["mu_floor"])
        radii = dyadic_radii(hi, p["radius_floor_cells"] * fld.spacing, 3)
        rep_b = carleson.boundary_norm(m, curves.generate(spec), radii)
        diag = carleson.vanishing_diagnosis(rep_b, p["threshold_slope"])
        tag = f"ellipse a/b={a / b:g}"
        amp = np.abs(fld.mu)
        rep.check(f"{tag}: max |mu| < 1 on the collar", amp.max() < 1, float(amp.max()), 1.0)
        rep.check(f"{tag}: dilatation density vanishing", diag.vanishing, diag.to_dict(), p["threshold_slope"])
        rep.check(f"{tag}: decay exponent >= threshold", diag.exponent >= p["threshold_slope"], diag.exponent,
                  p["threshold_slope"])
        band = np.quantile(fld.dist, [0.0, 0.25, 0.5, 0.75, 1.0])
        idx = np.digitize(fld.dist, band[1:-1])
        rep.data[tag] = {
            "norm": rep_b.norm, "vanishing": diag.to_dict(), "samples": int(amp.size), "dropped": fld.dropped,
            "max_mu_by_distance_quartile": [float(amp[idx == k].max()) for k in range(4)],
            "distance_quartiles": band,
        }
        rep.profile(f"{tag} dilatation density", rep_b.scales, rep_b.rho)


def run_e5(cfg: ExperimentConfig, rep: Report) -> None:
    p = _params(cfg)
    grid = conformal.polar_dyadic_grid(levels=p["grid_levels"])
    n = p["samples"]
    domains = {
        "snowflake": curves.snowflake(p["snowflake_depth"], "all-sides", n),
        "ellipse": curves.ellipse(n, *p["ellipse"]),
        "reference_ellipse": curves.ellipse(n, *p["reference_ellipse"]),
    }
    norms = {}
    for key, c in domains.items():
        fmap = _fit(c, cfg.seed)
        dens = conformal.pre_schwarzian_density(fmap, grid)
        s = carleson.sector_norm(dens.measure)
        norms[key] = s.norm
        # pull-back of arclength on a level curve, recorded alongside
        level = SampledCurve(fmap(curves.internal_circle(2, 2048).points), closed=True)
        mu = discretize_arclength(level)
        back = transport.pull_back(mu, fmap)
        pull_ratio = carleson.sector_norm(back).norm / carleson.boundary_norm(mu, c).norm
        rep.data[key] = {"sector_norm": s.norm, "excluded_fraction": dens.excluded_fraction,
                         "fit": fmap.fit_report, "pull_back_ratio": pull_ratio}
        rep.profile(f"{key} pre-Schwarzian density", s.scales, s.rho, x_label="h")
    factor = norms["snowflake"] / norms["ellipse"]
    rep.data["factor"] = factor
    rep.data["factor_reference_ellipse"] = norms["snowflake"] / norms["reference_ellipse"]
    rep.check("snowflake density norm >= min_factor x ellipse", factor >= p["min_factor"], factor, p["min_factor"])


def run_e6(cfg: ExperimentConfig, rep: Report) -> None:
    p = _params(cfg)
    consts = []
    for x_max, ns in p["windows"]:
        c = curves.graph_sin_x2(int(ns), x_max=float(x_max))
        exact = curves.graph_sin_x2_length(float(x_max))
        r = metrics.ahlfors_constant(c)
        consts.append(r.constant)
        rel = abs(c.length - exact) / exact
        rep.check(f"[0,{x_max:g}]: polyline length matches quadrature", rel <= p["length_tol"], rel, p["length_tol"])
        rep.data[f"[0,{x_max:g}]"] = {"ahlfors_constant": r.constant, "argmax_radius": r.argmax_radius,
                                      "argmax_center": r.argmax_center, "polyline_length": c.length,
                                      "quadrature_length": exact}
        rep.profile(f"window [0,{x_max:g}]", r.profile_scales, r.profile_values)
    factor = consts[-1] / consts[0]
    rep.data["factor"] = factor
    rep.check("largest window ratio >= min_factor x smallest", factor >= p["min_factor"], factor, p["min_factor"])


RUNNERS = {"E1": run_e1, "E2": run_e2, "E3": run_e3, "E4": run_e4, "E5": run_e5, "E6": run_e6}


def run(cfg: ExperimentConfig) -> Report:
    """Run one experiment; any sub-operation error aborts it with an error record."""
    rep = Report(cfg.experiment, ANCHORS[cfg.experiment], cfg.to_dict())
    try:
        rep.config["resolved_params"] = _params(cfg)
        RUNNERS[cfg.experiment](cfg, rep)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a record
        frame = traceback.extract_tb(exc.__traceback__)[-1]
        rep.error = {"type": type(exc).__name__, "message": str(exc),
                     "where": f"{frame.name}:{frame.lineno}",
                     "diagnostics": getattr(exc, "diagnostics", None)}
    return rep
