"""Curve-regularity estimators: Ahlfors regularity, Mobius-invariant length
ratio, chord-arc constant and the small-scale arc/chord envelope.

Every reported constant is the maximum over a finite probe set, so it is a
lower bound of the true supremum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    GeometryError,
    ResolutionError,
    SampledCurve,
    _diameter,
    arclength_in_disks,
    dist_to_curve,
    dyadic_radii,
)


@dataclass
class RegularityReport:
    constant: float
    argmax_center: complex
    argmax_radius: float
    profile_scales: np.ndarray
    profile_values: np.ndarray
    r_min: float
    r_max: float
    extra: dict = field(default_factory=dict)

    @property
    def profile(self) -> list[tuple[float, float]]:
        return list(zip(self.profile_scales.tolist(), self.profile_values.tolist()))

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "argmax_center": [self.argmax_center.real, self.argmax_center.imag],
            "argmax_radius": self.argmax_radius,
            "profile": {"scale": self.profile_scales.tolist(), "value": self.profile_values.tolist()},
            "r_min": self.r_min,
            "r_max": self.r_max,
            **({"extra": self.extra} if self.extra else {}),
        }


def probe_centers(c: SampledCurve, max_curve_centers: int = 256, grid: int = 15) -> np.ndarray:
    """Curve points (evenly strided) plus a square lattice around the curve.

    The lattice is laid out in a frame attached to the curve (origin at the
    vertex centroid, first axis toward points[0]) so the probe set moves
    with the curve under similarities.
    """
    pts = c.points
    stride = max(1, math.ceil(pts.size / max_curve_centers))
    on_curve = pts[::stride]
    if grid <= 0:
        return on_curve
    g = np.mean(pts)
    u = pts[0] - g
    R = np.abs(pts - g).max()
    u = u / abs(u) if abs(u) > 0 else 1.0
    ticks = np.linspace(-R, R, grid)
    X, Y = np.meshgrid(ticks, ticks)
    lattice = g + u * (X + 1j * Y).ravel()
    return np.concatenate([on_curve, lattice])


def _radius_grid(c: SampledCurve, r_min, r_max, per_octave):
    floor = 2 * c.resolution
    r_min = floor if r_min is None else r_min
    if r_min < floor:
        raise ResolutionError(f"r_min {r_min:.3g} below twice the curve resolution {floor:.3g}")
    r_max = c.diameter if r_max is None else r_max
    return dyadic_radii(r_max, r_min, per_octave)


def ahlfors_constant(
    c: SampledCurve,
    centers=None,
    radii=None,
    *,
    r_min: float | None = None,
    r_max: float | None = None,
    per_octave: int = 3,
) -> RegularityReport:
    """sup over probed (z, r) of length(c inside the closed disk D(z, r)) / r."""
    if radii is None:
        radii = _radius_grid(c, r_min, r_max, per_octave)
    else:
        radii = np.sort(np.asarray(radii, dtype=float))
        if radii.size == 0 or radii[0] < 2 * c.resolution:
            raise ResolutionError("radii must be nonempty and at least twice the curve resolution")
    if centers is None:
        centers = probe_centers(c)
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    best = np.zeros(radii.size)
    where = np.zeros(radii.size, dtype=complex)
    for z in centers:
        ratio = arclength_in_disks(c, z, radii) / radii
        better = ratio > best
        best[better] = ratio[better]
        where[better] = z
    k = int(np.argmax(best))
    return RegularityReport(
        constant=float(best[k]),
        argmax_center=complex(where[k]),
        argmax_radius=float(radii[k]),
        profile_scales=radii,
        profile_values=best,
        r_min=float(radii[0]),
        r_max=float(radii[-1]),
        extra={"n_centers": int(centers.size)},
    )


def _polyline_length(points: np.ndarray, closed: bool) -> float:
    p = np.append(points, points[0]) if closed else points
    return float(np.abs(np.diff(p)).sum())


def moebius_regularity(c: SampledCurve, moebius_samples: int = 200, seed: int = 0,
                       pole_clearance: float = 4.0) -> RegularityReport:
    """max over sampled Mobius maps tau of length(tau(c)) / diam(tau(c)).

    Half of the samples are inversions 1/(w - p) about probe points p near the
    curve; the rest send three random points p1, p2, p3 to 0, 1, infinity.
    Poles closer than ``pole_clearance`` resolutions to the curve are skipped.
    """
    if not c.closed:
        raise GeometryError("moebius_regularity needs a closed curve")
    pts = c.points
    rng = np.random.default_rng(seed)
    h = c.resolution
    diam = c.diameter
    clearance = pole_clearance * h
    g = np.mean(pts)

    def ratio_of(tau_pts):
        if not np.all(np.isfinite(tau_pts)):
            return None
        return _polyline_length(tau_pts, True) / _diameter(tau_pts)

    records = [(0.0, ratio_of(pts), "identity", [1, 0, 0, 1])]
    skipped = 0
    for k in range(moebius_samples):
        if k % 2 == 0:
            base = pts[rng.integers(pts.size)]
            off = diam * 10 ** rng.uniform(-3, 0) * np.exp(2j * np.pi * rng.random())
            p = base + off
            coef = [0, 1, 1, -p]
        else:
            p1, p2, p = g + diam * (rng.random(3) - 0.5 + 1j * (rng.random(3) - 0.5)) * 2
            coef = [p2 - p, -p1 * (p2 - p), p2 - p1, -p * (p2 - p1)]
        dp = dist_to_curve(p, c)
        if dp < clearance:
            skipped += 1
            continue
        a, b, cc, d = coef
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            img = (a * pts + b) / (cc * pts + d)
        r = ratio_of(img)
        if r is None:
            skipped += 1
            continue
        records.append((dp, r, "inversion" if k % 2 == 0 else "three-point", [complex(x) for x in coef]))
    ratios = np.array([r[1] for r in records])
    k = int(np.argmax(ratios))
    order = np.argsort([r[0] for r in records])
    worst = records[k]
    return RegularityReport(
        constant=float(ratios[k]),
        argmax_center=complex(0 if worst[2] == "identity" else -worst[3][3] / worst[3][2]),
        argmax_radius=float(worst[0]),
        profile_scales=np.array([records[i][0] for i in order]),
        profile_values=ratios[order],
        r_min=clearance,
        r_max=diam,
        extra={
            "samples": moebius_samples,
            "skipped": skipped,
            "worst_kind": worst[2],
            "worst_coefficients": [[complex(x).real, complex(x).imag] for x in worst[3]],
        },
    )


@dataclass
class PairSample:
    """Sampled point pairs on a closed curve with their shorter-arc and chord lengths."""

    arc: np.ndarray
    chord: np.ndarray
    separation: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.arc / self.chord


def sample_pairs(c: SampledCurve, per_octave: int = 4) -> PairSample:
    """Pairs at dyadic arclength separations, anchored at every vertex.

    For each separation s two families are taken: pairs starting at a vertex
    and pairs centered on a vertex, so corners are probed symmetrically.
    """
    L = c.length
    s_max = L / 2
    s_min = 0.5 * float(c.segment_lengths.min())
    k = int(math.floor(per_octave * math.log2(s_max / s_min)))
    seps = s_max * 2.0 ** (-np.arange(k + 1) / per_octave)
    starts = c.cum_length[:-1]
    arcs, chords, sep = [], [], []
    for s in seps:
        for t0 in (starts, starts - s / 2):
            z1 = c.point_at(t0)
            z2 = c.point_at(t0 + s)
            arcs.append(np.full(t0.size, min(s, L - s)))
            chords.append(np.abs(z2 - z1))
            sep.append(np.full(t0.size, s))
    return PairSample(np.concatenate(arcs), np.concatenate(chords), np.concatenate(sep))


def _require_jordan(c: SampledCurve):
    from .curves import self_intersects

    if not c.closed:
        raise GeometryError("chord-arc quantities need a closed curve")
    if self_intersects(c):
        raise GeometryError("self-intersecting curve: chord-arc constant undefined")


def chord_arc_constant(c: SampledCurve, per_octave: int = 4) -> RegularityReport:
    """max over sampled pairs of (shorter arc) / chord."""
    _require_jordan(c)
    pairs = sample_pairs(c, per_octave)
    ratio = pairs.ratio
    seps = np.unique(pairs.separation)
    prof = np.array([ratio[pairs.separation == s].max() for s in seps])
    k = int(np.argmax(ratio))
    return RegularityReport(
        constant=float(ratio[k]),
        argmax_center=complex(np.nan),
        argmax_radius=float(pairs.chord[k]),
        profile_scales=seps,
        profile_values=prof,
        r_min=float(seps[0]),
        r_max=float(seps[-1]),
        extra={"n_pairs": int(ratio.size), "argmax_arc": float(pairs.arc[k])},
    )


@dataclass
class SmoothnessReport:
    deltas: np.ndarray
    envelope: np.ndarray
    floor: float
    value_at_floor: float

    def to_dict(self) -> dict:
        return {
            "deltas": self.deltas.tolist(),
            "envelope": self.envelope.tolist(),
            "floor": self.floor,
            "value_at_floor": self.value_at_floor,
        }


def smoothness_profile(c: SampledCurve, deltas=None, per_octave: int = 4) -> SmoothnessReport:
    """Envelope delta -> max arc/chord over sampled pairs with chord <= delta.

    The envelope grows with delta; asymptotic smoothness shows up as the
    value at the resolution floor approaching 1. Nothing is extrapolated
    below the floor (twice the curve resolution).
    """
    _require_jordan(c)
    pairs = sample_pairs(c, per_octave)
    floor = 2 * c.resolution
    if deltas is None:
        deltas = dyadic_radii(c.diameter, floor, per_octave)
    deltas = np.sort(np.asarray(deltas, dtype=float))
    order = np.argsort(pairs.chord)
    chord = pairs.chord[order]
    run_max = np.maximum.accumulate(pairs.ratio[order])
    idx = np.searchsorted(chord, deltas, side="right") - 1
    env = np.where(idx >= 0, run_max[np.maximum(idx, 0)], 1.0)
    at_floor = float(env[np.searchsorted(deltas, floor)]) if deltas[-1] >= floor else float("nan")
    return SmoothnessReport(deltas, env, floor, at_floor)
