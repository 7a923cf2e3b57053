"""SVG phase portraits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .cycles import Displacement, LimitCycle
from .errors import InputError, LienardError, StepSizeUnderflow
from .integrate import IntegratorConfig, compile_field, integrate
from .polysys import PlanarSystem, find_equilibria

STYLE = {
    "stable": 'stroke="#1f5fbf" stroke-width="2.2" fill="none"',
    "unstable": 'stroke="#c0392b" stroke-width="2.2" fill="none" stroke-dasharray="6,4"',
    "semistable-candidate": 'stroke="#8e44ad" stroke-width="2.2" fill="none" stroke-dasharray="2,3"',
}


@dataclass(frozen=True)
class PortraitSpec:
    window: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)
    seeds: tuple[tuple[float, float], ...] = ()
    arrows: int = 15  # glyphs per axis; 0 disables the direction field
    size: tuple[int, int] = (600, 600)
    t_max: float = 40.0
    overlay: bool = True

    def __post_init__(self):
        x0, x1, y0, y1 = self.window
        if not (x0 < x1 and y0 < y1):
            raise InputError("portrait window must be nonempty")
        if self.arrows < 0 or self.t_max <= 0:
            raise InputError("arrows must be >= 0 and t_max > 0")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_portrait(
    sys: PlanarSystem,
    a,
    spec: PortraitSpec,
    detected: Sequence[LimitCycle] = (),
    config: IntegratorConfig | None = None,
) -> str:
    """Deterministic SVG document: direction field, trajectories, equilibria, cycles."""
    x0, x1, y0, y1 = spec.window
    W, H = spec.size
    span = max(x1 - x0, y1 - y0)
    cfg = (config or IntegratorConfig.sweep()).with_(
        max_step=span / 200, escape_radius=10 * max(abs(x0), abs(x1), abs(y0), abs(y1), 1.0), max_time=spec.t_max
    )

    def px(x, y):
        return (x - x0) / (x1 - x0) * W, (y1 - y) / (y1 - y0) * H

    def path(points) -> str:
        pts = [px(x, y) for x, y in points]
        return " ".join(f"{_fmt(u)},{_fmt(v)}" for u, v in pts)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f"<!-- window {x0!r} {x1!r} {y0!r} {y1!r} -->",
        '<defs><clipPath id="win"><rect x="0" y="0" width="%d" height="%d"/></clipPath></defs>' % (W, H),
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white" stroke="black"/>',
        '<g clip-path="url(#win)">',
    ]
    ax, ay = px(0.0, 0.0)
    if 0 <= ay <= H:
        out.append(f'<line class="axis" x1="0" y1="{_fmt(ay)}" x2="{W}" y2="{_fmt(ay)}" stroke="#bbbbbb"/>')
    if 0 <= ax <= W:
        out.append(f'<line class="axis" x1="{_fmt(ax)}" y1="0" x2="{_fmt(ax)}" y2="{H}" stroke="#bbbbbb"/>')

    fld = compile_field(sys, a)
    if spec.arrows:
        L = 0.35 * min(W, H) / spec.arrows
        for x in np.linspace(x0, x1, spec.arrows + 2)[1:-1]:
            for y in np.linspace(y0, y1, spec.arrows + 2)[1:-1]:
                p, q = fld(x, y)
                n = math.hypot(p, q)
                if n == 0 or not math.isfinite(n):
                    continue
                u, v = px(x, y)
                du, dv = L * p / n, -L * q / n
                out.append(
                    f'<line class="arrow" x1="{_fmt(u - du / 2)}" y1="{_fmt(v - dv / 2)}" '
                    f'x2="{_fmt(u + du / 2)}" y2="{_fmt(v + dv / 2)}" stroke="#999999" stroke-width="1"/>'
                )
                out.append(f'<circle class="arrowhead" cx="{_fmt(u + du / 2)}" cy="{_fmt(v + dv / 2)}" r="1.2" fill="#999999"/>')

    for sx, sy in spec.seeds:
        try:
            tr = integrate(sys, a, (sx, sy), cfg)
        except StepSizeUnderflow as exc:
            out.append(f"<!-- seed ({sx!r}, {sy!r}): {escape(str(exc))} -->")
            continue
        out.append(f"<!-- seed ({sx!r}, {sy!r}): {tr.termination.reason} at t={tr.termination.time:.6g} -->")
        out.append(f'<polyline class="trajectory" points="{path(tr.states)}" stroke="#333333" stroke-width="1" fill="none"/>')

    if spec.overlay:
        for c in detected:
            disp = Displacement(sys, a, c.section, cfg.with_(max_step=max(c.period / 1000, 1e-6), max_time=2 * c.period + 1))
            _, rec = disp.sample(c.s, record=True)
            style = STYLE.get(c.stability, STYLE["semistable-candidate"])
            out.append(f'<polygon class="cycle {c.stability}" points="{path(rec[1][:, :2])}" {style}/>')
        region = (x0, x1, y0, y1)
        try:
            eqs = find_equilibria(sys, a, region)
        except LienardError as exc:  # diagnostics only
            eqs = []
            out.append(f"<!-- equilibria: {escape(str(exc))} -->")
        for e in eqs:
            u, v = px(*e.location)
            kind = e.classification
            if kind == "saddle":
                out.append(
                    f'<g class="equilibrium saddle"><line x1="{_fmt(u - 6)}" y1="{_fmt(v - 6)}" x2="{_fmt(u + 6)}" y2="{_fmt(v + 6)}" stroke="black" stroke-width="2"/>'
                    f'<line x1="{_fmt(u - 6)}" y1="{_fmt(v + 6)}" x2="{_fmt(u + 6)}" y2="{_fmt(v - 6)}" stroke="black" stroke-width="2"/></g>'
                )
            else:
                fill = "black" if kind.startswith("stable") else "white"
                cls = kind.replace(" ", "-")
                out.append(f'<circle class="equilibrium {cls}" cx="{_fmt(u)}" cy="{_fmt(v)}" r="5" fill="{fill}" stroke="black" stroke-width="1.5"/>')
                if kind == "center-candidate":
                    out.append(f'<circle class="center-dot" cx="{_fmt(u)}" cy="{_fmt(v)}" r="1.5" fill="black"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
