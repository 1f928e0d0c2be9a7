"""Carleson norm estimators in boundary-disk and sector form, plus a
finite-scale vanishing diagnosis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AtomicMeasure,
    GeometryError,
    ResolutionError,
    SampledCurve,
    dyadic_radii,
    masses_in_disks,
)

FORMS = ("boundary-disk", "sector")
# atoms this far outside the closed unit disk are still treated as on it
_UNIT_TOL = 1e-12
# default scale floor in units of base resolution; one atom more or less in a
# window then moves a ratio by at most ~5%
DEFAULT_FLOOR_FACTOR = 20.0


@dataclass
class CarlesonReport:
    norm: float
    argmax_center: complex
    argmax_scale: float
    scales: np.ndarray
    rho: np.ndarray
    form: str
    r_min: float
    r_max: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown Carleson form {self.form!r}")

    @property
    def profile(self) -> list[tuple[float, float]]:
        return list(zip(self.scales.tolist(), self.rho.tolist()))

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "norm": self.norm,
            "argmax": {
                "center": [self.argmax_center.real, self.argmax_center.imag],
                "scale": self.argmax_scale,
            },
            "profile": {"scale": self.scales.tolist(), "rho": self.rho.tolist()},
            "r_min": self.r_min,
            "r_max": self.r_max,
            **({"extra": self.extra} if self.extra else {}),
        }


def _report(form, scales, ratios, centers, extra) -> CarlesonReport:
    """Collapse a (centers, scales) ratio table into a report."""
    if ratios.size == 0 or not np.any(ratios > 0):
        rho = np.zeros(scales.size)
        return CarlesonReport(0.0, complex(np.nan), float(scales[-1]), scales, rho, form,
                              float(scales[0]), float(scales[-1]), extra)
    best_center = np.argmax(ratios, axis=0)
    rho = ratios[best_center, np.arange(scales.size)]
    k = int(np.argmax(rho))
    return CarlesonReport(
        norm=float(rho[k]),
        argmax_center=complex(centers[best_center[k]]),
        argmax_scale=float(scales[k]),
        scales=scales,
        rho=rho,
        form=form,
        r_min=float(scales[0]),
        r_max=float(scales[-1]),
        extra=extra,
    )


def boundary_norm(
    m: AtomicMeasure,
    boundary: SampledCurve,
    radii=None,
    *,
    r_min: float | None = None,
    r_max: float | None = None,
    per_octave: int = 3,
    max_centers: int | None = 2048,
) -> CarlesonReport:
    """sup over boundary points z and radii r of m(D(z, r)) / r (open disks).

    Default radii run geometrically from max(20 base_resolution, boundary
    resolution) up to just below the boundary diameter.
    """
    diam = boundary.diameter
    floor = 2 * m.base_resolution
    if radii is None:
        lo = max(DEFAULT_FLOOR_FACTOR * m.base_resolution, boundary.resolution) if r_min is None else r_min
        hi = diam * (1 - 1e-9) if r_max is None else r_max
        if lo < floor:
            raise ResolutionError(f"r_min {lo:.3g} below twice the measure base resolution {floor:.3g}")
        if hi > diam:
            raise ResolutionError("r_max exceeds the boundary diameter")
        radii = dyadic_radii(hi, lo, per_octave)
    else:
        radii = np.sort(np.asarray(radii, dtype=float))
        if radii.size == 0:
            raise ResolutionError("empty radius range")
        if radii[0] < floor or radii[-1] > diam:
            raise ResolutionError("radii must lie in [2 base_resolution, diameter]")
    centers = boundary.points
    if max_centers is not None and centers.size > max_centers:
        centers = centers[:: math.ceil(centers.size / max_centers)]
    ratios = masses_in_disks(m, centers, radii) / radii[None, :]
    return _report("boundary-disk", radii, ratios, centers,
                   {"n_centers": int(centers.size), "total_mass": m.total_mass})


def sector_masses(m: AtomicMeasure, h: float, theta0: np.ndarray) -> np.ndarray:
    """Masses of the sectors {1-h <= |z| < 1, |arg z - theta0| <= h}."""
    r = np.abs(m.locations)
    sel = (r >= 1 - h) & (r < 1)
    if not np.any(sel):
        return np.zeros(theta0.size)
    if 2 * h >= 2 * np.pi:
        return np.full(theta0.size, math.fsum(m.masses[sel]))
    th = np.mod(np.angle(m.locations[sel]), 2 * np.pi)
    order = np.argsort(th)
    th, w = th[order], m.masses[sel][order]
    ext_th = np.concatenate([th - 2 * np.pi, th, th + 2 * np.pi])
    cum = np.concatenate([[0.0], np.cumsum(np.tile(w, 3))])
    lo = np.searchsorted(ext_th, theta0 - h, side="left")
    hi = np.searchsorted(ext_th, theta0 + h, side="right")
    return np.maximum(cum[hi] - cum[lo], 0.0)

# the theta0 grid has 4 pi / h points, so keep h bounded below
MIN_SECTOR_HEIGHT = 2.0**-12


def sector_norm(
    m: AtomicMeasure,
    h_range=None,
    *,
    per_octave: int = 3,
    h_max: float | None = None,
) -> CarlesonReport:
    """sup over sectors S of m(S) / h for a measure on the closed unit disk.

    Sector centers theta0 sit on a grid of step h/2. The default heights are
    h = 2**(-k/per_octave), k >= 1, above 20 base resolutions (or above
    MIN_SECTOR_HEIGHT for measures without a resolution).
    """
    if len(m) and np.abs(m.locations).max() > 1 + _UNIT_TOL:
        raise GeometryError("sector_norm needs atoms inside the closed unit disk")
    floor = 2 * m.base_resolution
    if h_range is None:
        top = 2.0 ** (-1.0 / per_octave) if h_max is None else h_max
        lo = max(DEFAULT_FLOOR_FACTOR * m.base_resolution, MIN_SECTOR_HEIGHT)
        hs = dyadic_radii(top, lo, per_octave)
    else:
        hs = np.sort(np.asarray(h_range, dtype=float))
        if hs.size == 0:
            raise ResolutionError("empty height range")
        if hs[0] <= floor or hs[-1] > 1:
            raise ResolutionError("heights must lie in (2 base_resolution, 1]")
    rho = np.zeros(hs.size)
    arg = np.zeros(hs.size)
    for i, h in enumerate(hs):
        theta0 = np.arange(0.0, 2 * np.pi, h / 2)
        ratio = sector_masses(m, h, theta0) / h
        j = int(np.argmax(ratio))
        rho[i], arg[i] = ratio[j], theta0[j]
    k = int(np.argmax(rho))
    return CarlesonReport(
        norm=float(rho[k]),
        argmax_center=complex(np.exp(1j * arg[k])) if rho[k] > 0 else complex(np.nan),
        argmax_scale=float(hs[k]),
        scales=hs,
        rho=rho,
        form="sector",
        r_min=float(hs[0]),
        r_max=float(hs[-1]),
        extra={"argmax_theta": float(arg[k]), "total_mass": m.total_mass},
    )


@dataclass
class VanishingDiagnosis:
    vanishing: bool
    exponent: float
    rho_min: float
    rho_max: float
    n_scales: int

    def to_dict(self) -> dict:
        return {
            "vanishing": self.vanishing,
            "exponent": self.exponent,
            "rho_at_r_min": self.rho_min,
            "rho_at_r_max": self.rho_max,
            "n_scales": self.n_scales,
        }


def vanishing_diagnosis(report: CarlesonReport, threshold_slope: float = 0.5) -> VanishingDiagnosis:
    """Log-log slope test of rho(r) over the probed range.

    Vanishing means slope >= threshold_slope and rho(r_min) <= rho(r_max) / 2.
    This is a finite-scale statement, not a limit. An identically zero
    profile counts as vanishing.
    """
    scales, rho = report.scales, report.rho
    if scales.size < 4:
        raise GeometryError("vanishing diagnosis needs at least 4 scales")
    r0, r1 = float(rho[0]), float(rho[-1])
    if not np.any(rho > 0):
        return VanishingDiagnosis(True, float("inf"), 0.0, 0.0, int(scales.size))
    pos = rho > 0
    if pos.sum() >= 2:
        slope = float(np.polyfit(np.log(scales[pos]), np.log(rho[pos]), 1)[0])
    else:
        slope = float("inf")
    ok = slope >= threshold_slope and r0 <= r1 / 2
    return VanishingDiagnosis(bool(ok), slope, r0, r1, int(scales.size))
