"""Generators for the curve corpus.

All closed curves come out counter-clockwise. Smooth families are sampled at
equal arclength on the exact curve; polygonal families (polygon, snowflake)
keep every vertex and split each side into equal pieces so corners survive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .geometry import GeometryError, SampledCurve

KINDS = (
    "circle",
    "segment",
    "ellipse",
    "polygon",
    "square",
    "internal_circle",
    "snowflake",
    "graph_sin_x2",
    "logarithmic_spiral",
    "perturbed_circle",
)

SNOWFLAKE_POLICIES = ("all-sides", "left-fixed")
MAX_DEPTH = 10
MAX_X = 40.0
MAX_TURNS = 8.0


@dataclass(frozen=True)
class CurveSpec:
    kind: str
    samples: int = 1024
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeometryError(f"unknown curve kind {self.kind!r}")
        if self.samples < 16:
            raise GeometryError("samples must be at least 16")


def circle(samples: int = 1024, radius: float = 1.0, center: complex = 0.0) -> SampledCurve:
    t = 2 * np.pi * np.arange(samples) / samples
    return SampledCurve(center + radius * np.exp(1j * t), closed=True)


def segment(samples: int = 1024, start: complex = 0.0, end: complex = 1.0) -> SampledCurve:
    t = np.arange(samples) / (samples - 1)
    return SampledCurve(start + t * (end - start), closed=False)


def internal_circle(n: int, samples: int = 1024) -> SampledCurve:
    """The level circle |z| = 1 - 2**-n."""
    if n < 1:
        raise GeometryError("internal_circle index must be >= 1")
    return circle(samples, 1.0 - 2.0 ** (-n))


def _equal_arclength(f, t_lo, t_hi, samples, closed, dense=64):
    """Resample the parametrized curve f(t) at equal arclength steps."""
    m = max(dense * samples, 4096)
    t = np.linspace(t_lo, t_hi, m + 1)
    z = f(t)
    # two-chord length per fine step: error O(step^3) per step
    mid = f(0.5 * (t[:-1] + t[1:]))
    chord_a = np.abs(mid - z[:-1])
    chord_b = np.abs(z[1:] - mid)
    s = np.concatenate([[0.0], np.cumsum(chord_a + chord_b)])
    n = samples if closed else samples - 1
    target = np.linspace(0.0, s[-1], n + 1)
    if closed:
        target = target[:-1]
    tt = np.interp(target, s, t)
    if not closed:
        tt[-1] = t_hi
    return tt


def ellipse(samples: int = 1024, a: float = 1.0, b: float = 0.5) -> SampledCurve:
    if not (a > 0 and b > 0):
        raise GeometryError("ellipse semi-axes must be positive")
    f = lambda t: a * np.cos(t) + 1j * b * np.sin(t)
    t = _equal_arclength(f, 0.0, 2 * np.pi, samples, closed=True)
    return SampledCurve(f(t), closed=True)


def perturbed_circle(samples: int = 1024, amplitude: float = 0.1, frequency: int = 5) -> SampledCurve:
    if not 0 <= amplitude < 1:
        raise GeometryError("amplitude must lie in [0, 1)")
    f = lambda t: (1 + amplitude * np.cos(frequency * t)) * np.exp(1j * t)
    t = _equal_arclength(f, 0.0, 2 * np.pi, samples, closed=True)
    return SampledCurve(f(t), closed=True)


def logarithmic_spiral(samples: int = 1024, turns: float = 3.0, growth: float = 0.2) -> SampledCurve:
    """Open spiral r = exp(growth * theta) for theta in [0, 2 pi turns]."""
    if not 0 < turns <= MAX_TURNS:
        raise GeometryError(f"turns must lie in (0, {MAX_TURNS}]")
    f = lambda t: np.exp((growth + 1j) * t)
    t = _equal_arclength(f, 0.0, 2 * np.pi * turns, samples, closed=False)
    return SampledCurve(f(t), closed=False)


def graph_sin_x2(samples: int = 4096, x_max: float = 10.0, x_min: float = 0.0) -> SampledCurve:
    """The graph y = sin(x**2) over [x_min, x_max], equal arclength in x."""
    if not (0 <= x_min < x_max <= MAX_X):
        raise GeometryError(f"graph window must satisfy 0 <= x_min < x_max <= {MAX_X}")
    xs = np.linspace(x_min, x_max, max(64 * samples, 200_000))
    speed = np.sqrt(1 + 4 * xs**2 * np.cos(xs**2) ** 2)
    s = cumulative_trapezoid(speed, xs, initial=0.0)
    x = np.interp(np.linspace(0, s[-1], samples), s, xs)
    x[0], x[-1] = x_min, x_max
    return SampledCurve(x + 1j * np.sin(x**2), closed=False)


def graph_sin_x2_length(x_max: float, x_min: float = 0.0) -> float:
    """Arclength of y = sin(x**2) over [x_min, x_max] by adaptive quadrature."""
    from scipy.integrate import quad

    f = lambda x: math.sqrt(1 + 4 * x * x * math.cos(x * x) ** 2)
    # split at the zeros of cos(x^2) so each quad call sees a smooth piece
    k = np.arange(0, int((x_max**2) / math.pi) + 2)
    knots = np.sqrt(np.pi * (k + 0.5))
    knots = knots[(knots > x_min) & (knots < x_max)]
    pts = np.concatenate([[x_min], knots, [x_max]])
    return math.fsum(quad(f, lo, hi, limit=200, epsabs=0, epsrel=1e-13)[0] for lo, hi in zip(pts[:-1], pts[1:]))


def _subdivide_polygon(vertices: np.ndarray, samples: int) -> np.ndarray:
    """Split each side of a closed polygon into equal pieces, keeping vertices."""
    nxt = np.roll(vertices, -1)
    lengths = np.abs(nxt - vertices)
    h = lengths.sum() / samples
    pieces = np.maximum(1, np.round(lengths / h).astype(int))
    out = [v + (w - v) * np.arange(k) / k for v, w, k in zip(vertices, nxt, pieces)]
    return np.concatenate(out)


def polygon(vertices, samples: int = 1024) -> SampledCurve:
    v = np.asarray(vertices)
    if v.ndim == 2:
        v = v[:, 0] + 1j * v[:, 1]
    v = v.astype(complex)
    if v.size < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    area = 0.5 * np.sum(v.real * np.roll(v, -1).imag - np.roll(v, -1).real * v.imag)
    if area < 0:
        v = v[::-1]
    return SampledCurve(_subdivide_polygon(v, samples), closed=True)


def square(samples: int = 1024, side: float = 1.0) -> SampledCurve:
    return polygon(side * np.array([0, 1, 1 + 1j, 1j]) - side * (0.5 + 0.5j), samples)


def snowflake_vertices(depth: int, policy: str = "all-sides") -> np.ndarray:
    """Vertices of the von Koch snowflake on a unit-side triangle.

    ``left-fixed`` freezes the left side of every new bump: that side is never
    subdivided again at later steps.
    """
    if not 0 <= depth <= MAX_DEPTH:
        raise GeometryError(f"snowflake depth must lie in [0, {MAX_DEPTH}]")
    if policy not in SNOWFLAKE_POLICIES:
        raise GeometryError(f"unknown snowflake policy {policy!r}")
    tri = np.exp(1j * (np.pi / 2 + 2 * np.pi * np.arange(3) / 3)) / math.sqrt(3)
    verts = tri
    active = np.ones(3, dtype=bool)  # active[i]: side verts[i] -> verts[i+1] still iterates
    rot = np.exp(-1j * np.pi / 3)  # bumps point outward for a ccw curve
    for _ in range(depth):
        a = verts
        b = np.roll(verts, -1)
        d = (b - a) / 3
        s1 = a + d
        tip = s1 + d * rot
        s2 = a + 2 * d
        grown = np.stack([a, s1, tip, s2], axis=1)
        grown_active = np.stack(
            [active, active & (policy == "all-sides"), active, active], axis=1
        )
        keep = np.stack([np.ones_like(active), active, active, active], axis=1)
        verts = grown[keep]
        active = grown_active[keep]
    return verts


def snowflake_side_count(depth: int, policy: str = "all-sides") -> int:
    """Number of sides predicted by the subdivision recurrence."""
    iterating, frozen = 3, 0
    for _ in range(depth):
        if policy == "all-sides":
            iterating *= 4
        else:
            iterating, frozen = 3 * iterating, frozen + iterating
    return iterating + frozen


def snowflake(depth: int, policy: str = "all-sides", samples: int = 1024) -> SampledCurve:
    return SampledCurve(_subdivide_polygon(snowflake_vertices(depth, policy), samples), closed=True)


def figure_eight() -> SampledCurve:
    """Bow-tie 0 -> 2+2i -> 2 -> 2i -> 0; its diagonals cross at 1+i."""
    return SampledCurve(np.array([0, 2 + 2j, 2, 2j, 0]), closed=True)


def _cplx(v) -> complex:
    """Complex from a number or an [x, y] pair (the JSON form)."""
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def generate(spec: CurveSpec) -> SampledCurve:
    p = spec.params
    n = spec.samples
    kind = spec.kind
    if kind == "circle":
        return circle(n, float(p.get("radius", 1.0)), _cplx(p.get("center", 0.0)))
    if kind == "segment":
        return segment(n, _cplx(p.get("start", 0.0)), _cplx(p.get("end", 1.0)))
    if kind == "square":
        return square(n, float(p.get("side", 1.0)))
    if kind == "ellipse":
        return ellipse(n, float(p.get("a", 1.0)), float(p.get("b", 0.5)))
    if kind == "polygon":
        if "vertices" not in p:
            raise GeometryError("polygon needs vertices")
        return polygon([_cplx(v) for v in p["vertices"]], n)
    if kind == "internal_circle":
        return internal_circle(int(p.get("n", 1)), n)
    if kind == "snowflake":
        return snowflake(int(p.get("depth", 3)), p.get("policy", "all-sides"), n)
    if kind == "graph_sin_x2":
        return graph_sin_x2(n, float(p.get("x_max", 10.0)), float(p.get("x_min", 0.0)))
    if kind == "logarithmic_spiral":
        return logarithmic_spiral(n, float(p.get("turns", 3.0)), float(p.get("growth", 0.2)))
    if kind == "perturbed_circle":
        return perturbed_circle(n, float(p.get("amplitude", 0.1)), int(p.get("frequency", 5)))
    raise GeometryError(f"unknown curve kind {kind!r}")


def self_intersects(c: SampledCurve) -> bool:
    """True iff two non-adjacent segments of ``c`` meet (or adjacent ones overlap)."""
    from shapely.geometry import LinearRing, LineString

    xy = np.column_stack([c.points.real, c.points.imag])
    if c.closed:
        if c.n_points < 3:
            return True
        geom = LinearRing(xy)
    else:
        geom = LineString(xy)
    return not geom.is_simple


def _orient(p, q, r):
    return np.sign((q.real - p.real) * (r.imag - p.imag) - (q.imag - p.imag) * (r.real - p.real))


def _on_seg(p, q, r):
    return (
        (np.minimum(p.real, q.real) <= r.real) & (r.real <= np.maximum(p.real, q.real))
        & (np.minimum(p.imag, q.imag) <= r.imag) & (r.imag <= np.maximum(p.imag, q.imag))
    )


def self_intersects_bruteforce(c: SampledCurve, chunk: int = 1024) -> bool:
    """All-pairs segment test with orientation predicates (quadratic cost)."""
    a, b = c.segments()
    n = a.size
    for lo in range(0, n, chunk):
        i = np.arange(lo, min(lo + chunk, n))[:, None]
        j = np.arange(n)[None, :]
        gap = np.abs(i - j)
        if c.closed:
            gap = np.minimum(gap, n - gap)
        pa, pb, qa, qb = a[i], b[i], a[j], b[j]
        o1, o2 = _orient(pa, pb, qa), _orient(pa, pb, qb)
        o3, o4 = _orient(qa, qb, pa), _orient(qa, qb, pb)
        proper = (o1 * o2 < 0) & (o3 * o4 < 0)
        touch = (
            ((o1 == 0) & _on_seg(pa, pb, qa)) | ((o2 == 0) & _on_seg(pa, pb, qb))
            | ((o3 == 0) & _on_seg(qa, qb, pa)) | ((o4 == 0) & _on_seg(qa, qb, pb))
        )
        if np.any((proper | touch) & (gap > 1)):
            return True
        # neighbours sharing a vertex may only meet there: catch fold-backs
        nxt = (j == (i + 1) % n) if c.closed else (j == i + 1)
        fold = nxt & (o2 == 0) & _on_seg(pa, pb, qb)
        if np.any(fold):
            return True
    return False
