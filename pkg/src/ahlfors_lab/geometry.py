"""Plane-geometry substrate: sampled curves, disks, atomic measures.

Points in the plane are complex numbers throughout. Curves are polylines and
every curve quantity (length, distance, arclength inside a disk) is computed
exactly on the polyline itself.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class GeometryError(ValueError):
    """Rejected input: a curve, disk or measure that violates its invariants."""


class ResolutionError(ValueError):
    """A requested probe range falls entirely below the sampling resolution."""


def _as_complex(points) -> np.ndarray:
    arr = np.asarray(points)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    return np.ascontiguousarray(arr, dtype=complex).ravel()


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Closed or open polyline, with cumulative arclength.

    For a closed curve the closing segment ``points[-1] -> points[0]`` is
    implied; ``cum_length`` has one extra entry holding the total length.
    """

    points: np.ndarray
    closed: bool = False
    cum_length: np.ndarray = field(init=False, repr=False)
    resolution: float = field(init=False)

    def __post_init__(self):
        pts = _as_complex(self.points)
        if pts.size < 2:
            raise GeometryError("a curve needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("curve points must be finite")
        if self.closed and pts.size >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
            if pts.size < 2:
                raise GeometryError("a curve needs at least 2 distinct points")
        seg = np.abs(np.diff(np.append(pts, pts[0]) if self.closed else pts))
        if np.any(seg == 0):
            raise GeometryError("consecutive points must be distinct")
        pts.setflags(write=False)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        cum.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "cum_length", cum)
        object.__setattr__(self, "resolution", float(seg.max()))

    @property
    def n_points(self) -> int:
        return self.points.size

    @property
    def starts(self) -> np.ndarray:
        return self.points

    @property
    def ends(self) -> np.ndarray:
        if self.closed:
            return np.roll(self.points, -1)
        return self.points[1:]

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every segment (closing segment included)."""
        if self.closed:
            return self.points, np.roll(self.points, -1)
        return self.points[:-1], self.points[1:]

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.cum_length)

    @property
    def length(self) -> float:
        return float(self.cum_length[-1])

    @property
    def diameter(self) -> float:
        return _diameter(self.points)

    def signed_area(self) -> float:
        p = self.points
        q = np.roll(p, -1)
        return 0.5 * float(np.sum(p.real * q.imag - q.real * p.imag))

    def transformed(self, scale: complex = 1.0, shift: complex = 0.0) -> "SampledCurve":
        """Image under the similarity z -> scale * z + shift."""
        return SampledCurve(scale * self.points + shift, self.closed)

    def reversed(self) -> "SampledCurve":
        return SampledCurve(self.points[::-1].copy(), self.closed)

    def point_at(self, s) -> np.ndarray:
        """Points at arclength positions ``s`` (wrapped for closed curves)."""
        s = np.asarray(s, dtype=float)
        total = self.length
        if self.closed:
            s = np.mod(s, total)
            verts = np.append(self.points, self.points[0])
        else:
            s = np.clip(s, 0.0, total)
            verts = self.points
        idx = np.searchsorted(self.cum_length, s, side="right") - 1
        idx = np.clip(idx, 0, verts.size - 2)
        seg_len = self.cum_length[idx + 1] - self.cum_length[idx]
        t = (s - self.cum_length[idx]) / seg_len
        return verts[idx] + t * (verts[idx + 1] - verts[idx])


def _diameter(points: np.ndarray) -> float:
    pts = np.asarray(points)
    if pts.size > 64:
        from scipy.spatial import ConvexHull
        from scipy.spatial import QhullError

        try:
            hull = ConvexHull(np.column_stack([pts.real, pts.imag]))
            pts = pts[hull.vertices]
        except QhullError:
            # collinear input: the extreme points along the line suffice
            order = np.argsort(pts.real + 1e-3 * pts.imag)
            pts = pts[[order[0], order[-1]]]
        else:
            if pts.size > 256:
                return _calipers(pts)
    diff = np.abs(pts[:, None] - pts[None, :])
    return float(diff.max())


def _calipers(P: np.ndarray) -> float:
    """Diameter of a convex polygon given in counter-clockwise order."""
    n = P.size
    area = lambda a, b, c: ((b - a).conjugate() * (c - a)).imag
    best = 0.0
    j = 1
    for i in range(n):
        ni = (i + 1) % n
        while area(P[i], P[ni], P[(j + 1) % n]) > area(P[i], P[ni], P[j]):
            j = (j + 1) % n
        best = max(best, abs(P[i] - P[j]), abs(P[ni] - P[j]))
    return float(best)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise GeometryError(f"disk radius must be positive and finite, got {self.radius}")


PROVENANCES = ("curve-arclength", "area-density", "custom")


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite positive combination of point masses."""

    locations: np.ndarray
    masses: np.ndarray
    provenance: str = "custom"
    base_resolution: float = 0.0

    def __post_init__(self):
        loc = _as_complex(self.locations)
        mass = np.ascontiguousarray(self.masses, dtype=float).ravel()
        if loc.shape != mass.shape:
            raise GeometryError("locations and masses differ in length")
        if np.any(~(mass > 0)) or not np.all(np.isfinite(mass)):
            raise GeometryError("atom masses must be positive and finite")
        if not np.all(np.isfinite(loc)):
            raise GeometryError("atom locations must be finite")
        if self.provenance not in PROVENANCES:
            raise GeometryError(f"unknown provenance {self.provenance!r}")
        if not (self.base_resolution >= 0 and math.isfinite(self.base_resolution)):
            raise GeometryError("base_resolution must be finite and nonnegative")
        loc.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)
        object.__setattr__(self, "base_resolution", float(self.base_resolution))

    @classmethod
    def zero(cls, base_resolution: float = 0.0, provenance: str = "custom") -> "AtomicMeasure":
        return cls(np.empty(0, complex), np.empty(0), provenance, base_resolution)

    def __len__(self) -> int:
        return self.masses.size

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        prov = self.provenance if self.provenance == other.provenance else "custom"
        return AtomicMeasure(
            np.concatenate([self.locations, other.locations]),
            np.concatenate([self.masses, other.masses]),
            prov,
            max(self.base_resolution, other.base_resolution),
        )

    def scaled(self, factor: float) -> "AtomicMeasure":
        if factor == 0:
            return AtomicMeasure.zero(self.base_resolution, self.provenance)
        return AtomicMeasure(self.locations, factor * self.masses, self.provenance, self.base_resolution)

    def moved(self, scale: complex = 1.0, shift: complex = 0.0) -> "AtomicMeasure":
        """Push atoms through the similarity z -> scale * z + shift, masses kept."""
        return AtomicMeasure(
            scale * self.locations + shift,
            self.masses,
            self.provenance,
            self.base_resolution * abs(scale),
        )


def sum_measures(measures: Iterable[AtomicMeasure]) -> AtomicMeasure:
    measures = list(measures)
    if not measures:
        return AtomicMeasure.zero()
    out = measures[0]
    for m in measures[1:]:
        out = out + m
    return out


def discretize_arclength(c: SampledCurve, atoms_per_segment: int = 1) -> AtomicMeasure:
    """Arclength measure of ``c`` as atoms spread uniformly along each segment."""
    if atoms_per_segment < 1:
        raise GeometryError("atoms_per_segment must be a positive integer")
    if c.n_points < 2:
        raise GeometryError("degenerate curve")
    a, b = c.segments()
    k = int(atoms_per_segment)
    frac = (np.arange(k) + 0.5) / k
    loc = (a[:, None] + frac[None, :] * (b - a)[:, None]).ravel()
    mass = np.repeat(c.segment_lengths / k, k)
    return AtomicMeasure(loc, mass, "curve-arclength", c.resolution / k)


def restrict(m: AtomicMeasure, d: Disk) -> float:
    """Mass of atoms strictly inside the open disk ``d``."""
    if len(m) == 0:
        return 0.0
    inside = np.abs(m.locations - d.center) < d.radius
    return math.fsum(m.masses[inside])


def masses_in_disks(m: AtomicMeasure, centers, radii, chunk: int = 2**22) -> np.ndarray:
    """Open-disk masses for every (center, radius): array of shape (centers, radii).

    ``radii`` must be sorted increasing.
    """
    centers = _as_complex(centers)
    radii = np.asarray(radii, dtype=float)
    out = np.zeros((centers.size, radii.size))
    if len(m) == 0 or centers.size == 0:
        return out
    loc, mass = m.locations, m.masses
    step = max(1, chunk // max(loc.size, 1))
    nr = radii.size
    for lo in range(0, centers.size, step):
        cen = centers[lo:lo + step]
        d = np.abs(loc[None, :] - cen[:, None])
        # bin k = number of radii <= d; the atom is inside every disk with index >= k
        k = np.searchsorted(radii, d, side="right")
        rows = np.repeat(np.arange(cen.size), loc.size)
        flat = rows * (nr + 1) + k.ravel()
        hist = np.bincount(flat, weights=np.tile(mass, cen.size), minlength=cen.size * (nr + 1))
        out[lo:lo + step] = np.cumsum(hist.reshape(cen.size, nr + 1), axis=1)[:, :nr]
    return out


def dist_to_curve(w, c: SampledCurve, chunk: int = 2**22):
    """Euclidean distance from point(s) ``w`` to the polyline ``c``."""
    scalar = np.ndim(w) == 0
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    a, b = c.segments()
    d = b - a
    dd = (d.real**2 + d.imag**2)
    out = np.empty(w.shape, dtype=float)
    flat = w.ravel()
    res = out.ravel()
    step = max(1, chunk // a.size)
    for lo in range(0, flat.size, step):
        p = flat[lo:lo + step, None] - a[None, :]
        t = np.clip((p.real * d.real + p.imag * d.imag) / dd, 0.0, 1.0)
        res[lo:lo + step] = np.abs(p - t * d).min(axis=1)
    out = res.reshape(w.shape)
    return float(out[0]) if scalar else out


def arclength_in_disks(c: SampledCurve, center: complex, radii) -> np.ndarray:
    """Length of ``c`` inside the closed disks D(center, r), exact per segment."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    a, b = c.segments()
    p = a - center
    d = b - a
    A = d.real**2 + d.imag**2
    B = p.real * d.real + p.imag * d.imag
    C = p.real**2 + p.imag**2
    disc = B[:, None] ** 2 - A[:, None] * (C[:, None] - radii[None, :] ** 2)
    root = np.sqrt(np.maximum(disc, 0.0))
    t0 = np.maximum((-B[:, None] - root) / A[:, None], 0.0)
    t1 = np.minimum((-B[:, None] + root) / A[:, None], 1.0)
    frac = np.where(disc > 0, np.maximum(t1 - t0, 0.0), 0.0)
    return frac.T @ np.sqrt(A)


def dyadic_radii(r_max: float, r_min: float, per_octave: int = 3) -> np.ndarray:
    """Geometric grid r_max * 2**(-k/per_octave) down to r_min, sorted increasing."""
    if not (r_max > 0 and r_min > 0):
        raise ResolutionError("radius bounds must be positive")
    if r_min > r_max:
        raise ResolutionError(
            f"empty radius range: floor {r_min:.3g} exceeds r_max {r_max:.3g}; refine the sampling"
        )
    k_max = int(math.floor(per_octave * math.log2(r_max / r_min) + 1e-9))
    radii = r_max * 2.0 ** (-np.arange(k_max + 1) / per_octave)
    return radii[::-1].copy()


# --- JSON file formats ---------------------------------------------------

def curve_to_dict(c: SampledCurve) -> dict:
    return {
        "closed": bool(c.closed),
        "points": [[float(z.real), float(z.imag)] for z in c.points],
    }


def curve_from_dict(data: dict) -> SampledCurve:
    try:
        pts = np.asarray(data["points"], dtype=float)
        closed = bool(data["closed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed curve record: {exc}") from exc
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError("curve points must be [[x, y], ...]")
    return SampledCurve(pts[:, 0] + 1j * pts[:, 1], closed)


def measure_to_dict(m: AtomicMeasure) -> dict:
    return {
        "provenance": m.provenance,
        "base_resolution": m.base_resolution,
        "atoms": [
            [float(z.real), float(z.imag), float(w)] for z, w in zip(m.locations, m.masses)
        ],
    }


def measure_from_dict(data: dict) -> AtomicMeasure:
    try:
        atoms = np.asarray(data["atoms"], dtype=float).reshape(-1, 3)
        return AtomicMeasure(
            atoms[:, 0] + 1j * atoms[:, 1],
            atoms[:, 2],
            data["provenance"],
            float(data["base_resolution"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise GeometryError(f"malformed measure record: {exc}") from exc


def save_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh)


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
