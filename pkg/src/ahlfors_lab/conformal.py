"""Numerical conformal maps of the unit disk, built as zipper chains.

A fitted map is a composition of elementary conformal pieces, applied in
order from the disk to the domain:

    disk --Mobius--> upper half-plane --zipper--> domain [--Mobius--> domain]

The zipper part is the geodesic zipper: a square-root opening map, one
geodesic slit map per boundary sample, and a closing map. Every piece has a
closed-form inverse and closed-form first and second derivatives, so the map
value, derivative and second derivative at a point are propagated exactly by
the chain rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import AtomicMeasure, GeometryError, SampledCurve, dist_to_curve


class FitError(RuntimeError):
    """The zipper construction failed or missed its accuracy budget."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _upper_sqrt(x, ref=None):
    """Square root in the closed upper half-plane.

    On the real axis (where both roots are real) the root with the sign of
    ``ref`` is taken.
    """
    s = np.sqrt(x)
    flip = s.imag < 0
    if ref is not None:
        flip = flip | ((s.imag == 0) & (s.real * np.real(ref) < 0))
    return np.where(flip, -s, s)


# --- pieces ----------------------------------------------------------------

@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    kind = "mobius"

    def apply(self, z, d1, d2):
        den = self.c * z + self.d
        det = self.a * self.d - self.b * self.c
        g1 = det / den**2
        g2 = -2 * self.c * det / den**3
        return (self.a * z + self.b) / den, g1 * d1, g2 * d1 * d1 + g1 * d2

    def value(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def invert(self, w):
        return (self.d * w - self.b) / (-self.c * w + self.a)

    def to_dict(self):
        return {"kind": "mobius", "coef": [[v.real, v.imag] for v in map(complex, (self.a, self.b, self.c, self.d))]}

    @classmethod
    def from_dict(cls, d):
        return cls(*(complex(re, im) for re, im in d["coef"]))


@dataclass(frozen=True, eq=False)
class ZipperChain:
    """Geodesic zipper from the upper half-plane onto a Jordan domain.

    The k-th geodesic slit map is z -> sqrt((z / (c[k] (1 - binv[k] z)))^2 + 1),
    scaled by 1/c[k] so magnitudes stay of order one along the chain;
    ``zeta_inv`` is the reciprocal of the first boundary point's image before
    the closing map. Reciprocals are stored so that 0 encodes infinity.
    """

    z0: complex
    z1: complex
    binv: np.ndarray
    c: np.ndarray
    zeta_inv: float

    kind = "zipper"

    def apply(self, w, d1, d2):
        # closing map inverse: H -> second quadrant, then Mobius m -> m / (1 + m / zeta)
        s = np.sqrt(w.real + 1j * (np.maximum(w.imag, 0.0) + 0.0))
        u = 1j * s
        g1 = 1j / (2 * s)
        g2 = -1j / (4 * s**3)
        d2 = g2 * d1 * d1 + g1 * d2
        d1 = g1 * d1
        den = 1 + u * self.zeta_inv
        z = u / den
        g1 = 1 / den**2
        g2 = -2 * self.zeta_inv / den**3
        d2 = g2 * d1 * d1 + g1 * d2
        d1 = g1 * d1
        for bi, c in zip(self.binv[::-1], self.c[::-1]):
            v = _upper_sqrt(z * z - 1, z)
            g1 = c * z / v
            g2 = -c / v**3
            d2 = g2 * d1 * d1 + g1 * d2
            d1 = g1 * d1
            v = c * v
            den = 1 + v * bi
            z = v / den
            g1 = 1 / den**2
            g2 = -2 * bi / den**3
            d2 = g2 * d1 * d1 + g1 * d2
            d1 = g1 * d1
        # opening map inverse: q = -z^2, point = (z1 - z0 q) / (1 - q)
        q = -z * z
        dq1 = -2 * z
        d2 = -2 * d1 * d1 + dq1 * d2
        d1 = dq1 * d1
        den = 1 - q
        diff = self.z1 - self.z0
        g1 = diff / den**2
        g2 = 2 * diff / den**3
        d2 = g2 * d1 * d1 + g1 * d2
        d1 = g1 * d1
        return (self.z1 - self.z0 * q) / den, d1, d2

    def value(self, w):
        u = 1j * np.sqrt(w.real + 1j * (np.maximum(w.imag, 0.0) + 0.0))
        z = u / (1 + u * self.zeta_inv)
        for bi, c in zip(self.binv[::-1], self.c[::-1]):
            v = c * _upper_sqrt(z * z - 1, z)
            z = v / (1 + v * bi)
        q = -z * z
        return (self.z1 - self.z0 * q) / (1 - q)

    def invert(self, z):
        w = 1j * np.sqrt((z - self.z1) / (z - self.z0))
        w = np.where(w.imag < 0, -w, w)
        for bi, c in zip(self.binv, self.c):
            m = w / (c * (1 - w * bi))
            w = _upper_sqrt(m * m + 1, m)
        m = w / (1 - w * self.zeta_inv)
        return -m * m

    def to_dict(self):
        return {
            "kind": "zipper",
            "z0": [self.z0.real, self.z0.imag],
            "z1": [self.z1.real, self.z1.imag],
            "binv": [float(x) for x in self.binv],
            "c": [float(x) for x in self.c],
            "zeta_inv": float(self.zeta_inv),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            complex(*d["z0"]), complex(*d["z1"]),
            np.asarray(d["binv"], dtype=float), np.asarray(d["c"], dtype=float), float(d["zeta_inv"]),
        )


_PIECES = {"mobius": Mobius, "zipper": ZipperChain}


# --- the map -----------------------------------------------------------------

@dataclass(eq=False)
class ConformalMap:
    """Conformal map phi of the unit disk, phi = pieces[-1] o ... o pieces[0].

    ``prevertex_angles[k]`` is the argument of phi^{-1}(boundary.points[k]);
    it is empty for maps given in closed form.
    """

    pieces: list
    anchor: complex = 0.0
    domain_kind: str = "bounded"
    boundary: SampledCurve | None = None
    prevertex_angles: np.ndarray = field(default_factory=lambda: np.empty(0))
    boundary_fit_error: float = 0.0
    fit_report: dict = field(default_factory=dict)

    # closed-form constructors
    @classmethod
    def identity(cls) -> "ConformalMap":
        return cls([Mobius(1, 0, 0, 1)])

    @classmethod
    def mobius(cls, a, b, c, d) -> "ConformalMap":
        m = Mobius(complex(a), complex(b), complex(c), complex(d))
        return cls([m], anchor=complex(m.value(0j)))

    @classmethod
    def scaling(cls, factor: complex, shift: complex = 0.0) -> "ConformalMap":
        return cls.mobius(factor, shift, 0, 1)

    def jet(self, z):
        """Return (phi(z), phi'(z), phi''(z))."""
        z = np.asarray(z, dtype=complex)
        d1 = np.ones_like(z)
        d2 = np.zeros_like(z)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for p in self.pieces:
                z, d1, d2 = p.apply(z, d1, d2)
        return z, d1, d2

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for p in self.pieces:
                z = p.value(z)
        return z

    def derivative(self, z):
        return self.jet(z)[1]

    def second_derivative(self, z):
        return self.jet(z)[2]

    def pre_schwarzian(self, z):
        _, d1, d2 = self.jet(z)
        return d2 / d1

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for p in reversed(self.pieces):
                w = p.invert(w)
        return w

    @property
    def derivative_at_zero(self) -> complex:
        return complex(self.derivative(np.array([0j]))[0])

    def boundary_uncertainty(self, z) -> np.ndarray:
        """Disk-side width of the prevertex gap facing each point ``z``.

        Points closer to the circle than a couple of such gaps see the
        individual boundary samples rather than the curve.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        th = self.prevertex_angles
        if th.size == 0:
            return np.zeros(z.shape)
        order = np.sort(np.mod(th, 2 * np.pi))
        gaps = np.diff(np.append(order, order[0] + 2 * np.pi))
        idx = np.searchsorted(order, np.mod(np.angle(z), 2 * np.pi), side="right") - 1
        return gaps[idx % order.size]

    def admissible(self, z, factor: float = 2.0) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.abs(z) < 1 - factor * self.boundary_uncertainty(z)

    def to_dict(self) -> dict:
        return {
            "schema": "conformal-map/1",
            "pieces": [p.to_dict() for p in self.pieces],
            "anchor": [complex(self.anchor).real, complex(self.anchor).imag],
            "domain_kind": self.domain_kind,
            "prevertex_angles": [float(t) for t in self.prevertex_angles],
            "boundary_fit_error": float(self.boundary_fit_error),
            "fit_report": self.fit_report,
            "boundary": None if self.boundary is None else {
                "closed": self.boundary.closed,
                "points": [[p.real, p.imag] for p in self.boundary.points],
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConformalMap":
        try:
            pieces = [_PIECES[p["kind"]].from_dict(p) for p in d["pieces"]]
            bnd = d.get("boundary")
            boundary = None
            if bnd is not None:
                pts = np.asarray(bnd["points"], dtype=float)
                boundary = SampledCurve(pts[:, 0] + 1j * pts[:, 1], bnd["closed"])
            return cls(
                pieces,
                anchor=complex(*d.get("anchor", [0.0, 0.0])),
                domain_kind=d.get("domain_kind", "bounded"),
                boundary=boundary,
                prevertex_angles=np.asarray(d.get("prevertex_angles", []), dtype=float),
                boundary_fit_error=float(d.get("boundary_fit_error", 0.0)),
                fit_report=d.get("fit_report", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise GeometryError(f"malformed map record: {exc}") from exc


# --- fitting -----------------------------------------------------------------

def _inside(c: SampledCurve, w: complex) -> bool:
    from shapely.geometry import Point, Polygon

    return Polygon(np.column_stack([c.points.real, c.points.imag])).contains(Point(w.real, w.imag))


def _zip(points: np.ndarray, anchor: complex):
    """Run the geodesic zipper through ``points`` (counter-clockwise).

    Returns the chain, the image of every boundary point on the real line of
    the final half-plane (index 0 maps to infinity) and the anchor image.
    """
    n = points.size
    z0, z1 = complex(points[0]), complex(points[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        track = 1j * np.sqrt((np.append(points[2:], anchor) - z1) / (np.append(points[2:], anchor) - z0))
    track = np.where(track.imag < 0, -track, track)
    track = np.concatenate([[0j], track])  # z1 sits at 0
    binv = np.empty(n - 2)
    c = np.empty(n - 2)
    inf_img = math.inf
    for k in range(n - 2):
        a = track[k + 1]
        if not (a.imag > 0 and np.isfinite(a)):
            raise FitError(
                "zipper lost a boundary point off the half-plane",
                {"step": k, "point_index": k + 2, "image": [a.real, a.imag]},
            )
        aa = a.real**2 + a.imag**2
        bi = a.real / aa
        ck = aa / a.imag
        binv[k], c[k] = bi, ck
        with np.errstate(divide="ignore", invalid="ignore"):
            m = track / (ck * (1 - track * bi))
            track = _upper_sqrt(m * m + 1, m)
        # the base of the slit opens to its domain side, the negative axis
        track[k] = -1.0
        track[k + 1] = 0.0
        # the point at infinity (z0) moves along the real line
        if math.isinf(inf_img):
            mi = -1 / bi if bi != 0 else math.inf
        else:
            mi = inf_img / (1 - inf_img * bi)
        inf_img = math.copysign(math.hypot(mi / ck, 1.0), mi)
    zeta_inv = 0.0 if math.isinf(inf_img) else 1 / inf_img
    chain = ZipperChain(z0, z1, binv, c, zeta_inv)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = track / (1 - track * zeta_inv)
        q = -m * m
    return chain, q[:-1], q[-1]


def fit(
    boundary: SampledCurve,
    anchor: complex = 0.0,
    *,
    exterior: bool = False,
    pole: complex | None = None,
    fit_budget: float = 3.0,
    koebe_points: int = 1000,
    seed: int = 0,
) -> ConformalMap:
    """Fit phi: disk -> domain bounded by ``boundary`` with phi(0) = anchor, phi'(0) > 0.

    With ``exterior=True`` the domain is the unbounded complement; it is first
    sent to a bounded domain by w -> 1/(w - pole), pole inside the curve.
    """
    anchor = complex(anchor)
    if not boundary.closed:
        raise GeometryError("fit needs a closed boundary curve")
    from .curves import self_intersects

    if self_intersects(boundary):
        raise GeometryError("boundary curve is self-intersecting")
    inside = _inside(boundary, anchor)
    pts = boundary.points
    domain_kind = "bounded"
    if exterior:
        if inside:
            raise GeometryError("anchor must lie outside the curve for an exterior fit")
        if pole is None:
            pole = complex(np.mean(pts))
        pole = complex(pole)
        if not _inside(boundary, pole):
            raise GeometryError("inversion pole must lie inside the curve")
        pts = 1.0 / (pts - pole)
        work_anchor = 1.0 / (anchor - pole)
        domain_kind = "unbounded-via-inversion"
    else:
        if not inside:
            raise GeometryError("anchor must lie strictly inside the curve")
        work_anchor = anchor
    ccw = SampledCurve(pts, True).signed_area() > 0
    order = np.arange(pts.size) if ccw else np.arange(pts.size)[::-1]
    pts = pts[order]

    chain, q_bdry, q_anchor = _zip(pts, work_anchor)
    if not q_anchor.imag > 0:
        raise FitError("anchor image left the half-plane", {"anchor_image": [q_anchor.real, q_anchor.imag]})

    A = complex(q_anchor)
    to_half = Mobius(-A.conjugate(), A, -1.0, 1.0)  # disk -> H, 0 -> A
    pieces = [to_half, chain]
    if exterior:
        pieces.append(Mobius(pole, 1.0, 1.0, 0.0))
    raw = ConformalMap(pieces)
    d0 = raw.derivative_at_zero
    rot = d0 / abs(d0)
    # phi(zeta) = raw(zeta / rot) makes phi'(0) = |d0| > 0
    to_half = Mobius(-A.conjugate() / rot, A, -1.0 / rot, 1.0)
    pieces[0] = to_half

    with np.errstate(divide="ignore", invalid="ignore"):
        disk_img = rot * (q_bdry - A) / (q_bdry - A.conjugate())
    angles = np.empty(pts.size)
    angles[0] = np.angle(rot)
    angles[1:] = np.angle(disk_img)
    pre = np.empty(pts.size)
    pre[order] = angles

    fmap = ConformalMap(
        pieces,
        anchor=anchor,
        domain_kind=domain_kind,
        boundary=boundary,
        prevertex_angles=pre,
    )
    fit_err = boundary_fit_error(fmap)
    fmap.boundary_fit_error = fit_err
    fmap.fit_report = {
        "n_pieces": int(chain.c.size + 2 + exterior),
        "boundary_fit_error": fit_err,
        "resolution": boundary.resolution,
        "derivative_at_zero": abs(d0),
        "anchor_image_imag": A.imag,
    }
    if not fit_err <= fit_budget * boundary.resolution:
        raise FitError(
            f"boundary fit error {fit_err:.3g} exceeds {fit_budget} x resolution",
            fmap.fit_report,
        )
    if koebe_points:
        rep = koebe_validate(fmap, koebe_points, seed=seed)
        fmap.fit_report["koebe_min_slack"] = rep.min_slack
        if not rep.passed:
            raise FitError("fitted map violates the Koebe distortion bounds", {**fmap.fit_report, **rep.to_dict()})
    return fmap


def boundary_fit_error(fmap: ConformalMap, per_arc: int = 3) -> float:
    """Largest distance from phi(arc between consecutive prevertices) to its chord.

    Each boundary arc of the fitted domain joins two consecutive samples z_k,
    z_{k+1}; its deviation from the segment [z_k, z_{k+1}] bounds the
    Hausdorff distance between the fitted boundary and the target polyline.
    """
    c = fmap.boundary
    th = np.unwrap(fmap.prevertex_angles)
    if c is None or th.size == 0:
        return 0.0
    nxt = np.append(th[1:], th[0] + 2 * np.pi * np.sign(th[-1] - th[0] or 1))
    frac = (np.arange(per_arc) + 1) / (per_arc + 1)
    ang = th[:, None] + frac[None, :] * (nxt - th)[:, None]
    img = fmap(np.exp(1j * ang))
    a, b = c.segments()
    d = (b - a)[:, None]
    p = img - a[:, None]
    t = np.clip((p * d.conjugate()).real / np.abs(d) ** 2, 0, 1)
    dev = np.abs(p - t * d)
    if not np.all(np.isfinite(dev)):
        return math.inf
    return float(dev.max())


# --- Koebe distortion check --------------------------------------------------

@dataclass
class KoebeReport:
    min_slack: float
    slacks: dict
    worst_point: complex
    disk_radius: float
    disk_slack: float
    passed: bool
    n_points: int

    def to_dict(self):
        return {
            "min_slack": self.min_slack,
            "slacks": self.slacks,
            "worst_point": [self.worst_point.real, self.worst_point.imag],
            "disk_radius": self.disk_radius,
            "disk_slack": self.disk_slack,
            "passed": self.passed,
            "n_points": self.n_points,
        }


def koebe_slacks(f0: complex, df0: complex, z, fz, dfz) -> dict:
    """Relative slack of the four growth/distortion bounds at points ``z``.

    Nonnegative slack means the inequality holds. Slacks are relative to the
    bound, so 0 is equality.
    """
    r = np.abs(z)
    s = abs(df0)
    grow = np.abs(fz - f0)
    dist = np.abs(dfz)
    lo_g = s * r / (1 + r) ** 2
    hi_g = s * r / (1 - r) ** 2
    lo_d = s * (1 - r) / (1 + r) ** 3
    hi_d = s * (1 + r) / (1 - r) ** 3
    with np.errstate(divide="ignore", invalid="ignore"):
        return {
            "growth_lower": np.where(lo_g > 0, (grow - lo_g) / np.where(lo_g > 0, lo_g, 1), 0.0),
            "growth_upper": np.where(hi_g > 0, (hi_g - grow) / np.where(hi_g > 0, hi_g, 1), 0.0),
            "distortion_lower": (dist - lo_d) / lo_d,
            "distortion_upper": (hi_d - dist) / hi_d,
        }


def random_disk_points(n: int, rng, r_max: float = 0.95) -> np.ndarray:
    r = r_max * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def koebe_validate(fmap: ConformalMap, test_points: int = 1000, seed: int = 0, tol: float = 1e-6,
                   r_max: float = 0.95) -> KoebeReport:
    rng = np.random.default_rng(seed)
    z = random_disk_points(test_points, rng, r_max)
    z[0] = 0.0
    f0, df0, _ = (complex(v[0]) for v in fmap.jet(np.array([0j])))
    fz, dfz, _ = fmap.jet(z)
    sl = koebe_slacks(f0, df0, z, fz, dfz)
    stacked = np.vstack(list(sl.values()))
    worst = int(np.argmin(stacked.min(axis=0)))
    min_slack = float(stacked.min())
    # quarter-disk corollary: sampled image boundary stays >= |f'(0)|/4 from f(0)
    radius = abs(df0) / 4
    if fmap.boundary is not None:
        if fmap.prevertex_angles.size:
            edge = fmap(np.exp(1j * fmap.prevertex_angles))
        else:
            edge = fmap.boundary.points
        reach = float(np.abs(edge - f0).min())
    else:
        edge = fmap(np.exp(2j * np.pi * np.arange(4096) / 4096))
        reach = float(np.abs(edge - f0).min())
    disk_slack = (reach - radius) / radius
    passed = bool(min_slack >= -tol and disk_slack >= -tol and np.all(np.isfinite(stacked)))
    return KoebeReport(
        min_slack=min_slack,
        slacks={k: float(v.min()) for k, v in sl.items()},
        worst_point=complex(z[worst]),
        disk_radius=radius,
        disk_slack=float(disk_slack),
        passed=passed,
        n_points=int(test_points),
    )


# --- pre-Schwarzian density ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Polar cells of the unit disk, refined dyadically toward the circle."""

    centers: np.ndarray
    areas: np.ndarray
    resolution: float


def polar_dyadic_grid(levels: int = 8, rings_per_level: int = 2, base_angular: int = 16) -> DiskGrid:
    """Cells in layers 1 - |z| in [2^-(j+1), 2^-j], j = 0..levels-1.

    Layer j has ``base_angular * 2**j`` cells per ring, so cells stay roughly
    square at every scale. Layer 0 covers the whole disk |z| < 1/2.
    """
    centers, areas = [], []
    for j in range(levels):
        if j == 0:
            edges = np.linspace(0.0, 0.5, 2 * rings_per_level + 1)
            n_ang = base_angular
        else:
            edges = 1 - np.linspace(2.0 ** -j, 2.0 ** -(j + 1), rings_per_level + 1)
            n_ang = base_angular * 2**j
        dth = 2 * np.pi / n_ang
        th = (np.arange(n_ang) + 0.5) * dth
        for r0, r1 in zip(edges[:-1], edges[1:]):
            rm = 0.5 * (r0 + r1)
            centers.append(rm * np.exp(1j * th))
            areas.append(np.full(n_ang, 0.5 * (r1**2 - r0**2) * dth))
    outer_radial = 2.0 ** -levels / rings_per_level
    outer_arc = 2 * np.pi / (base_angular * 2 ** (levels - 1))
    return DiskGrid(np.concatenate(centers), np.concatenate(areas), float(max(outer_radial, outer_arc)))


@dataclass(frozen=True, eq=False)
class DensityResult:
    measure: AtomicMeasure
    excluded_fraction: float
    n_cells: int


def pre_schwarzian_density(fmap: ConformalMap, grid: DiskGrid | None = None,
                           collar_factor: float = 2.0, blowup: float = 1e150) -> DensityResult:
    """Atoms |phi''/phi'|^2 (1 - |z|^2) dA on the cells of ``grid``.

    Cells whose center sits inside the map's boundary-uncertainty collar, or
    where the pre-Schwarzian is not finite, are excluded and counted.
    """
    if grid is None:
        grid = polar_dyadic_grid()
    z = grid.centers
    keep = fmap.admissible(z, collar_factor) if fmap.prevertex_angles.size else np.ones(z.size, bool)
    P = np.full(z.size, np.nan, dtype=complex)
    P[keep] = fmap.pre_schwarzian(z[keep])
    ok = keep & np.isfinite(P) & (np.abs(P) < blowup)
    mass = np.abs(P[ok]) ** 2 * (1 - np.abs(z[ok]) ** 2) * grid.areas[ok]
    pos = mass > 0
    meas = AtomicMeasure(z[ok][pos], mass[pos], "area-density", grid.resolution)
    return DensityResult(meas, float(1 - ok.mean()), int(z.size))


# --- reflections and their dilatation -----------------------------------------

def _ellipse_foot(w, a, b, iters=40):
    """Parameter of the nearest point on the ellipse (a cos t, b sin t)."""
    t = np.arctan2(a * w.imag, b * w.real)
    for _ in range(iters):
        c, s = np.cos(t), np.sin(t)
        dx, dy = w.real - a * c, w.imag - b * s
        g = dx * a * s - dy * b * c
        gp = (a * s) ** 2 + (b * c) ** 2 + dx * a * c + dy * b * s
        t = t - g / gp
    return t


def osculating_reflection(kind: str, params: dict):
    """Sense-reversing reflection in a circle or ellipse.

    Each point w inside the curve, at distance d from its foot point p, goes
    to the reflection of w in the osculating circle at p:
    f(w) = p + n(p) d / (1 - kappa(p) d). For a circle this is exactly the
    inversion c + R^2 / conj(w - c).
    """
    if kind == "circle":
        R = float(params.get("radius", 1.0))
        c0 = complex(params.get("center", 0.0))
        return lambda w: c0 + R * R / np.conj(w - c0)
    if kind == "ellipse":
        a = float(params.get("a", 1.0))
        b = float(params.get("b", 0.5))

        def f(w):
            w = np.asarray(w, dtype=complex)
            t = _ellipse_foot(w, a, b)
            c, s = np.cos(t), np.sin(t)
            p = a * c + 1j * b * s
            nrm = b * c + 1j * a * s
            speed = np.abs(nrm)
            n = nrm / speed
            kappa = a * b / speed**3
            d = ((p - w) * np.conj(n)).real  # positive inside
            return p + n * d / (1 - kappa * d)

        return f
    raise GeometryError(f"no closed-form reflection for {kind!r}")


def wirtinger(f, w, h: float):
    """(f_w, f_wbar) by fourth-order central differences of step ``h``."""
    w = np.asarray(w, dtype=complex)

    def d(step):
        return (f(w - 2 * step) - 8 * f(w - step) + 8 * f(w + step) - f(w + 2 * step)) / (12 * h)

    fx = d(h)
    fy = d(1j * h)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


@dataclass(frozen=True, eq=False)
class DilatationField:
    """Complex dilatation mu = f_w / f_wbar of a reflection on a grid of cells."""

    w: np.ndarray
    mu: np.ndarray
    dist: np.ndarray
    cell_area: np.ndarray
    stencil: float
    spacing: float
    dropped: int = 0

    def __post_init__(self):
        if np.any(self.dist <= 0):
            raise GeometryError("dilatation samples must lie off the curve")

    @classmethod
    def zero(cls, spacing: float = 0.01) -> "DilatationField":
        e = np.empty(0)
        return cls(e.astype(complex), e.astype(complex), e, e, 0.0, spacing)


def schwarz_reflection_dilatation(spec, collar=(0.0, 0.2), spacing: float | None = None,
                                  stencil: float | None = None, samples: int = 4096) -> DilatationField:
    """Dilatation of the closed-form reflection over an interior collar.

    ``collar`` bounds the distance to the curve; samples closer to the curve
    than two stencil steps are dropped and counted.
    """
    from .curves import generate

    if spec.kind not in ("circle", "ellipse"):
        raise GeometryError("closed-form reflections exist for circle and ellipse only")
    curve = generate(type(spec)(spec.kind, samples, spec.params))
    f = osculating_reflection(spec.kind, spec.params)
    lo, hi = collar
    if spec.kind == "ellipse":
        a, b = float(spec.params.get("a", 1.0)), float(spec.params.get("b", 0.5))
        reach = min(a, b) ** 2 / max(a, b)
        if hi >= reach:
            raise GeometryError(f"collar must stay inside the focal reach {reach:.4g}")
    if spacing is None:
        spacing = (hi - lo) / 40
    if stencil is None:
        stencil = spacing / 16
    pts = curve.points
    x = np.arange(pts.real.min(), pts.real.max() + spacing, spacing)
    y = np.arange(pts.imag.min(), pts.imag.max() + spacing, spacing)
    X, Y = np.meshgrid(x, y)
    w = (X + 1j * Y).ravel()
    import shapely
    from shapely.geometry import Polygon

    inside = shapely.contains_xy(Polygon(np.column_stack([pts.real, pts.imag])), w.real, w.imag)
    w = w[inside]
    dist = dist_to_curve(w, curve)
    in_collar = (dist > lo) & (dist <= hi)
    w, dist = w[in_collar], dist[in_collar]
    close = dist < 2 * stencil
    dropped = int(close.sum())
    w, dist = w[~close], dist[~close]
    fw, fwb = wirtinger(f, w, stencil)
    mu = fw / fwb
    return DilatationField(w, mu, dist, np.full(w.size, spacing**2), float(stencil), float(spacing), dropped)


def dilatation_to_measure(field_: DilatationField, noise_floor: float = 1e-8) -> AtomicMeasure:
    """Atoms |mu|^2 / dist * cell area; |mu| at or below ``noise_floor`` counts as 0."""
    amp = np.abs(field_.mu)
    keep = amp > noise_floor
    mass = amp[keep] ** 2 / field_.dist[keep] * field_.cell_area[keep]
    return AtomicMeasure(field_.w[keep], mass, "area-density", field_.spacing)
