"""Deterministic SVG rendering of report profiles as log-log polylines."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

W, H = 480, 320
LEFT, RIGHT, TOP, BOTTOM = 64, 16, 32, 48


class PlotError(ValueError):
    """Malformed report; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str):
        super().__init__(f"{field}: {message}")
        self.field = field

    def to_dict(self) -> dict:
        return {"type": "PlotError", "field": self.field, "message": str(self)}


def _numbers(seq, field):
    if not isinstance(seq, list):
        raise PlotError("expected a list of numbers", field)
    out = []
    for v in seq:
        if isinstance(v, bool):
            raise PlotError("expected numbers", field)
        if isinstance(v, (int, float)):
            out.append(float(v))
        elif v in ("inf", "-inf", "nan"):
            out.append(float(v))
        else:
            raise PlotError("expected numbers", field)
    return out


def _validate(report) -> list[dict]:
    if not isinstance(report, dict):
        raise PlotError("report must be an object", "report")
    profiles = report.get("profiles")
    if not isinstance(profiles, list):
        raise PlotError("missing profile list", "profiles")
    out = []
    for i, prof in enumerate(profiles):
        where = f"profiles[{i}]"
        if not isinstance(prof, dict) or "scale" not in prof or "value" not in prof:
            raise PlotError("needs 'scale' and 'value'", where)
        x = _numbers(prof["scale"], where + ".scale")
        y = _numbers(prof["value"], where + ".value")
        if len(x) != len(y):
            raise PlotError("scale and value differ in length", where)
        out.append({"name": str(prof.get("name", f"profile {i}")), "x": x, "y": y,
                    "x_label": str(prof.get("x_label", "r")), "y_label": str(prof.get("y_label", "ratio"))})
    return out


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _decades(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def svg_profile(name: str, x, y, x_label: str = "r", y_label: str = "ratio") -> str:
    """One log-log plot. Nonpositive or non-finite points are skipped; with no
    plottable point the plot shows axes only."""
    pts = [(math.log10(a), math.log10(b)) for a, b in zip(x, y)
           if a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.0f}" y="20" text-anchor="middle" font-size="13">{escape(name)}</text>',
    ]
    x0, x1, y0, y1 = LEFT, W - RIGHT, H - BOTTOM, TOP
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    parts.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{H - 10}" text-anchor="middle" font-size="12">'
                 f'log10 {escape(x_label)}</text>')
    parts.append(f'<text x="14" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 14 {(y0 + y1) / 2:.0f})">log10 {escape(y_label)}</text>')
    if pts:
        lx = [p[0] for p in pts]
        ly = [p[1] for p in pts]
        ax0, ax1 = min(lx), max(lx)
        ay0, ay1 = min(ly), max(ly)
        if ax1 - ax0 < 1e-12:
            ax0, ax1 = ax0 - 0.5, ax1 + 0.5
        if ay1 - ay0 < 1e-12:
            ay0, ay1 = ay0 - 0.5, ay1 + 0.5
        sx = lambda v: x0 + (v - ax0) / (ax1 - ax0) * (x1 - x0)
        sy = lambda v: y0 + (v - ay0) / (ay1 - ay0) * (y1 - y0)
        for d in _decades(ax0, ax1):
            if ax0 <= d <= ax1:
                parts.append(f'<text x="{_fmt(sx(d))}" y="{y0 + 16}" text-anchor="middle" font-size="10">{d}</text>')
        for d in _decades(ay0, ay1):
            if ay0 <= d <= ay1:
                parts.append(f'<text x="{x0 - 6}" y="{_fmt(sy(d) + 3)}" text-anchor="end" font-size="10">{d}</text>')
        coords = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_report(report: dict) -> dict[str, str]:
    """Map file stem -> SVG text for every profile in a report dict."""
    profiles = _validate(report)
    stem = str(report.get("experiment", "report"))
    return {
        f"{stem}_{i:02d}": svg_profile(p["name"], p["x"], p["y"], p["x_label"], p["y_label"])
        for i, p in enumerate(profiles)
    }
