"""Push-forward and pull-back of atomic measures under a conformal map of
the disk, and empirical operator-norm ratios."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .carleson import boundary_norm, sector_norm
from .conformal import ConformalMap
from .geometry import AtomicMeasure, GeometryError, SampledCurve


class TransportError(GeometryError):
    """An atom lies outside the region where the map is trusted."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (atom {index})")
        self.index = index


# round-trip tolerance for accepting phi^{-1}(w) as a genuine preimage
_PREIMAGE_TOL = 1e-8


def push_forward(nu: AtomicMeasure, fmap: ConformalMap, collar_factor: float = 2.0) -> AtomicMeasure:
    """Atoms (z, m) -> (phi(z), m |phi'(z)|)."""
    if len(nu) == 0:
        return AtomicMeasure.zero(nu.base_resolution, nu.provenance)
    z = nu.locations
    ok = fmap.admissible(z, collar_factor)
    if not np.all(ok):
        raise TransportError("atom outside the admissible disk region", int(np.flatnonzero(~ok)[0]))
    w, d1, _ = fmap.jet(z)
    jac = np.abs(d1)
    bad = ~(np.isfinite(w) & np.isfinite(jac) & (jac > 0))
    if np.any(bad):
        raise TransportError("map not finite at atom", int(np.flatnonzero(bad)[0]))
    return AtomicMeasure(w, nu.masses * jac, nu.provenance, float(np.max(nu.base_resolution * jac)))


def pull_back(mu: AtomicMeasure, fmap: ConformalMap, collar_factor: float = 2.0) -> AtomicMeasure:
    """Atoms (w, m) -> (phi^{-1}(w), m / |phi'(phi^{-1}(w))|)."""
    if len(mu) == 0:
        return AtomicMeasure.zero(mu.base_resolution, mu.provenance)
    w = mu.locations
    z = fmap.inverse(w)
    fz, d1, _ = fmap.jet(z)
    scale = np.maximum(1.0, np.abs(w))
    bad = ~(np.isfinite(z) & (np.abs(fz - w) <= _PREIMAGE_TOL * scale))
    if np.any(bad):
        raise TransportError("atom has no preimage in the disk", int(np.flatnonzero(bad)[0]))
    ok = fmap.admissible(z, collar_factor)
    if not np.all(ok):
        raise TransportError("atom inside the boundary-uncertainty collar", int(np.flatnonzero(~ok)[0]))
    jac = np.abs(d1)
    return AtomicMeasure(z, mu.masses / jac, mu.provenance, float(np.max(mu.base_resolution / jac)))


@dataclass
class TransportReport:
    input_norm: float
    output_norm: float
    ratio: float
    probe_id: str = ""
    flagged: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "probe_id": self.probe_id,
            "input_norm": self.input_norm,
            "output_norm": self.output_norm,
            "ratio": None if self.flagged else self.ratio,
            "flagged": self.flagged,
            **({"extra": self.extra} if self.extra else {}),
        }


def norm_ratio(nu: AtomicMeasure, fmap: ConformalMap, target_boundary: SampledCurve,
               probe_id: str = "", **boundary_kw) -> TransportReport:
    """boundary_norm(push_forward(nu)) / sector_norm(nu); flagged when the source norm is 0."""
    src = sector_norm(nu)
    if src.norm == 0:
        return TransportReport(0.0, 0.0, float("nan"), probe_id, True)
    out = boundary_norm(push_forward(nu, fmap), target_boundary, **boundary_kw)
    return TransportReport(
        src.norm, out.norm, out.norm / src.norm, probe_id, False,
        {"output_argmax_scale": out.argmax_scale, "input_argmax_scale": src.argmax_scale},
    )
