"""Return maps, limit-cycle detection and classification, fine-focus order."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import kernels as K
from .errors import InputError, InvalidSectionError, ShapeError
from .integrate import (
    REASONS,
    CompiledField,
    IntegratorConfig,
    Section,
    compile_field,
    first_return,
    make_section,
)
from .polysys import Equilibrium, PlanarSystem, as_assignment, find_equilibria, jacobian

TAU = 1e-3  # |m - 1| band for semistable candidates
SEMISTABLE_D = 1e-7
DISAGREE = 1e-2
ROOT_TOL = 1e-10
GRID_START = 1e-3

OUTCOMES = ("ok", "escape", "equilibrium-approach", "left-section", "time-out", "step-underflow")


@dataclass(frozen=True)
class ReturnSample:
    s: float
    image: float
    displacement: float
    period: float
    outcome: str
    divergence_integral: float = math.nan
    arclength: float = math.nan

    @property
    def ok(self) -> bool:
        return self.outcome == "ok"


@dataclass(frozen=True)
class MultiplierEstimate:
    divergence: float
    finite_difference: float

    @property
    def value(self) -> float:
        return self.divergence

    @property
    def relative_disagreement(self) -> float:
        return abs(self.divergence - self.finite_difference) / max(abs(self.divergence), 1e-300)

    @property
    def resolved(self) -> bool:
        return self.relative_disagreement <= DISAGREE


@dataclass(frozen=True)
class LimitCycle:
    section: Section
    s: float
    period: float
    multiplier: float
    multiplier_fd: float
    stability: str  # stable | unstable | semistable-candidate
    multiplicity: str  # simple | double-candidate | unresolved
    enclosed: tuple[tuple[tuple[float, float], int], ...] = ()
    displacement: float = 0.0

    @property
    def amplitude(self) -> float:
        return self.s

    @property
    def signature(self) -> tuple[tuple[float, float], ...]:
        return tuple(p for p, w in self.enclosed if w == 1)

    @property
    def multiplier_disagreement(self) -> float:
        return abs(self.multiplier - self.multiplier_fd) / max(abs(self.multiplier), 1e-300)


@dataclass
class CycleReport:
    cycles: list[LimitCycle]
    samples: list[ReturnSample]
    semistable: list[LimitCycle] = field(default_factory=list)
    center_candidate: bool = False
    truncated: ReturnSample | None = None
    noisy_brackets: int = 0
    section: Section | None = None

    def __iter__(self) -> Iterator[LimitCycle]:
        return iter(self.cycles)

    def __len__(self) -> int:
        return len(self.cycles)

    def __getitem__(self, i):
        return self.cycles[i]

    @property
    def count(self) -> int:
        return len(self.cycles)

    @property
    def sign_changes(self) -> int:
        return count_sign_changes([r.displacement for r in self.samples if r.ok])


def count_sign_changes(values: Sequence[float]) -> int:
    signs = [np.sign(v) for v in values if v != 0 and math.isfinite(v)]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


class Displacement:
    """``d(s) = P(s) - s`` on a fixed section of an assigned system."""

    def __init__(self, sys: PlanarSystem, a, section: Section, config: IntegratorConfig | None = None):
        self.sys = sys
        self.a = as_assignment(sys, a)
        self.section = section
        self.config = config or IntegratorConfig()
        self.field: CompiledField = compile_field(sys, self.a)

    def sample(self, s: float, record: bool = False, config: IntegratorConfig | None = None):
        cfg = config or self.config
        status, t, z, _, rec = first_return(self.field, float(s), self.section, cfg, record)
        if status == K.ST_SECTION:
            out = ReturnSample(float(s), float(z[0]), float(z[0]) - float(s), float(t), "ok", float(z[2]), float(z[3]))
        else:
            reason = REASONS[status]
            if reason == "section-hit":  # pragma: no cover
                reason = "ok"
            out = ReturnSample(float(s), float(z[0]), math.nan, float(t), reason, float(z[2]), float(z[3]))
        return (out, rec) if record else out

    def __call__(self, s: float) -> float:
        r = self.sample(s)
        if not r.ok:
            raise ValueError(f"return map undefined at s = {s!r}: {r.outcome}")
        return r.displacement


def return_map(sys: PlanarSystem, a, section: Section, s: float, config: IntegratorConfig | None = None) -> ReturnSample:
    """First return of ``(s, 0)`` to the section with the section's crossing sign."""
    if not section.contains(s):
        raise InputError(f"s = {s!r} is not inside the section ({section.a}, {section.b})")
    return Displacement(sys, a, section, config).sample(s)


def anchor_of(sys: PlanarSystem, a, section: Section) -> float:
    """Section end at an anti-saddle, where small cycles are born; defaults to ``a``."""
    for end in (section.a, section.b):
        J = jacobian(sys, a, (end, 0.0))
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        fx, fy = compile_field(sys, a)(end, 0.0)
        if abs(fx) + abs(fy) == 0.0 and det > 0:
            return end
    return section.a


def grid_points(section: Section, count: int = 64, law: str = "geometric", anchor: float | None = None,
                start: float = GRID_START) -> np.ndarray:
    """Section coordinates ordered outward from the anchor end."""
    if count < 8:
        raise InputError("grid count must be at least 8")
    anchor = section.a if anchor is None else anchor
    width = section.b - section.a
    lo, hi = min(start, width * 1e-3), width * (1 - 1e-3)
    if law == "geometric":
        off = np.geomspace(lo, hi, count)
    elif law == "linear":
        off = np.linspace(lo, hi, count)
    else:
        raise InputError(f"unknown grid spacing law {law!r}")
    return anchor + off if anchor == section.a else anchor - off


def cycle_multiplier(disp: Displacement, s: float, sample: ReturnSample | None = None) -> MultiplierEstimate:
    """Divergence-integral multiplier and central finite difference of the return map."""
    r = sample or disp.sample(s)
    m_div = math.exp(r.divergence_integral)
    h = 1e-4 * max(abs(s - _nearest_end(disp.section, s)), 1e-3)
    h = min(h, 0.5 * (s - disp.section.a), 0.5 * (disp.section.b - s))
    lo, hi = disp.sample(s - h), disp.sample(s + h)
    if lo.ok and hi.ok:
        m_fd = (hi.image - lo.image) / (2 * h)
    else:
        m_fd = math.nan
    return MultiplierEstimate(m_div, m_fd)


def _nearest_end(section: Section, s: float) -> float:
    return section.a if s - section.a <= section.b - s else section.b


def enclosure(orbit: np.ndarray, equilibria: Sequence[tuple[float, float]], min_distance: float = 1e-6) -> list[int]:
    """Winding number of a closed polyline ``(n, 2)`` around each point."""
    pts = np.asarray(equilibria, dtype=float).reshape(-1, 2)
    orbit = np.asarray(orbit, dtype=float)
    if len(pts) == 0:
        return []
    w, dmin = K.winding_numbers(orbit[:, 0].copy(), orbit[:, 1].copy(), pts[:, 0].copy(), pts[:, 1].copy())
    out = []
    for wi, di, p in zip(w, dmin, pts):
        if di < min_distance:
            raise InputError(f"point ({p[0]:.6g}, {p[1]:.6g}) lies within {min_distance} of the orbit")
        r = round(wi)
        if abs(wi - r) >= 0.1:
            raise InputError(f"winding number {wi:.3f} is not close to an integer; orbit not closed")
        out.append(int(r))
    return out


def _classify(m: MultiplierEstimate) -> tuple[str, str]:
    v = m.value
    if abs(v - 1) <= TAU:
        stability, mult = "semistable-candidate", "double-candidate"
    else:
        stability, mult = ("stable" if v < 1 else "unstable"), "simple"
    if not (math.isfinite(m.finite_difference) and m.resolved):
        mult = "unresolved"
    return stability, mult


def _equilibria_for(sys, a, orbit):
    x0, y0 = orbit.min(axis=0)
    x1, y1 = orbit.max(axis=0)
    pad = 0.1 * max(x1 - x0, y1 - y0, 1e-6)
    eqs = find_equilibria(sys, a, (x0 - pad, x1 + pad, y0 - pad, y1 + pad))
    return [e.location for e in eqs]


def promote(disp: Displacement, s: float, residual: float | None = None) -> LimitCycle:
    """Build a LimitCycle at a refined fixed point ``s``."""
    r = disp.sample(s)
    if not r.ok:
        raise InputError(f"no return at s = {s}: {r.outcome}")
    cfg = disp.config.with_(max_step=max(r.period / 1000.0, 1e-6))
    rr, rec = disp.sample(s, record=True, config=cfg)
    orbit = rec[1][:, :2]
    mult = cycle_multiplier(disp, s, r)
    stability, multiplicity = _classify(mult)
    try:
        eqs = _equilibria_for(disp.sys, disp.a, orbit)
        wn = enclosure(orbit, eqs)
        enclosed = tuple(((float(p[0]), float(p[1])), abs(w)) for p, w in zip(eqs, wn))
    except InputError:
        enclosed = ()
        multiplicity = "unresolved"
    return LimitCycle(
        disp.section, float(s), r.period, mult.divergence, mult.finite_difference,
        stability, multiplicity, enclosed, float(r.displacement if residual is None else residual),
    )


def refine_root(disp: Displacement, lo: float, hi: float) -> float:
    f = disp
    s = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(s)


def noise_floor(cfg: IntegratorConfig, s: float, period: float = 2 * math.pi) -> float:
    """Displacement level indistinguishable from integration error (grows with the return time)."""
    return 100.0 * (cfg.rtol * (1.0 + abs(s)) + cfg.atol) * max(1.0, period / (2 * math.pi))


def find_cycles(
    sys: PlanarSystem,
    a,
    section: Section | tuple[float, float],
    grid: tuple[int, str] | int = (64, "geometric"),
    config: IntegratorConfig | None = None,
    extra_points: Sequence[float] = (),
    anchor: float | None = None,
) -> CycleReport:
    """Scan the displacement on a grid, refine each sign change, classify the cycles."""
    if not isinstance(section, Section):
        section = make_section(sys, a, section)
    cfg = config or IntegratorConfig()
    count, law = (grid, "geometric") if isinstance(grid, int) else grid
    disp = Displacement(sys, a, section, cfg)
    anchor = anchor_of(sys, disp.a, section) if anchor is None else anchor
    pts = list(grid_points(section, count, law, anchor))
    if extra_points:
        key = (lambda v: v) if anchor == section.a else (lambda v: -v)
        pts = sorted(set(pts) | {float(v) for v in extra_points if section.contains(v)}, key=key)

    samples: list[ReturnSample] = []
    truncated = None
    for s in pts:
        r = disp.sample(s)
        if not r.ok:
            truncated = r
            break
        samples.append(r)

    report = CycleReport([], samples, truncated=truncated, section=section)
    if len(samples) >= 8 and all(abs(r.displacement) <= noise_floor(cfg, r.s, r.period) for r in samples):
        report.center_candidate = True
        return report

    cycles = []
    for r0, r1 in zip(samples, samples[1:]):
        d0, d1 = r0.displacement, r1.displacement
        if d0 == 0.0:
            cycles.append(promote(disp, r0.s, 0.0))
            continue
        if d0 * d1 >= 0:
            continue
        if abs(d0) <= noise_floor(cfg, r0.s, r0.period) and abs(d1) <= noise_floor(cfg, r1.s, r1.period):
            report.noisy_brackets += 1
            continue
        lo, hi = sorted((r0.s, r1.s))
        try:
            s = refine_root(disp, lo, hi)
            res = disp(s)
        except ValueError:
            report.noisy_brackets += 1
            continue
        if abs(res) > ROOT_TOL * (1 + abs(s)):
            # brentq stops on x; accept the better endpoint of the final bracket
            report.noisy_brackets += 1
        cycles.append(promote(disp, s, res))
    if samples and samples[-1].displacement == 0.0:
        cycles.append(promote(disp, samples[-1].s, 0.0))
    cycles.sort(key=lambda c: abs(c.s - anchor))
    report.cycles = cycles

    # local minima of |d| without a sign change
    for r_prev, r, r_next in zip(samples, samples[1:], samples[2:]):
        d = r.displacement
        if not (np.sign(r_prev.displacement) == np.sign(d) == np.sign(r_next.displacement)):
            continue
        if not (abs(d) < abs(r_prev.displacement) and abs(d) < abs(r_next.displacement)):
            continue
        lo, hi = sorted((r_prev.s, r_next.s))
        res = minimize_scalar(lambda v: abs(disp(v)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, hi)})
        if res.fun < SEMISTABLE_D:
            c = promote(disp, float(res.x), float(disp(float(res.x))))
            report.semistable.append(
                LimitCycle(c.section, c.s, c.period, c.multiplier, c.multiplier_fd,
                           "semistable-candidate", "double-candidate", c.enclosed, c.displacement)
            )
        if len(report.semistable) >= 8:
            break
    return report


# ---------------------------------------------------------------------------
# fine focus


@dataclass(frozen=True)
class FocusOrderEstimate:
    order: int | str | None  # integer, "center-like", or None when the fit is inconclusive
    leading_sign: int
    fit_exponent: float
    fit_residual: float
    samples: tuple[tuple[float, float], ...] = ()


def _focus_section(sys, a, eq: Equilibrium, base: float) -> Section:
    x0 = eq.location[0]
    for sgn in (1, -1):
        r = base
        for _ in range(30):
            lo, hi = sorted((x0, x0 + sgn * r))
            try:
                return make_section(sys, a, (lo, hi))
            except InvalidSectionError:
                r *= 0.5
    raise InvalidSectionError("no valid section next to the equilibrium")


def fine_focus_order(
    sys: PlanarSystem,
    a,
    eq: Equilibrium,
    config: IntegratorConfig | None = None,
    base: float = 0.25,
    ladder: Sequence[int] = tuple(range(1, 13)),
    fit_points: int = 6,
    trace_tol: float = 1e-10,
) -> FocusOrderEstimate:
    """Order of a weak focus from the power law of the displacement on a geometric ladder."""
    if eq.location[1] != 0.0:
        raise ShapeError("fine focus estimation needs an equilibrium on the x-axis")
    if abs(eq.trace) > trace_tol or eq.determinant <= 0:
        raise InputError(f"not a fine focus: trace {eq.trace:.3g}, determinant {eq.determinant:.3g}")
    cfg = (config or IntegratorConfig()).with_(rtol=1e-13, atol=1e-16)
    sec = _focus_section(sys, a, eq, base)
    width = sec.b - sec.a
    x0 = eq.location[0]
    sgn = 1 if sec.a == x0 else -1
    disp = Displacement(sys, a, sec, cfg)
    data = []
    for n in ladder:
        off = width * 2.0 ** (-n)
        r = disp.sample(x0 + sgn * off)
        if r.ok:
            # sign convention: positive means the orbit moves away from the focus
            data.append((off, sgn * r.displacement))
    floor = 1e3 * (cfg.rtol * width + cfg.atol)
    # keep the smallest offsets that still clear the noise floor (closest to the asymptotic regime)
    good = sorted((s, d) for s, d in data if abs(d) > floor * (1 + s))[:fit_points]
    if not good:
        return FocusOrderEstimate("center-like", 0, math.nan, math.nan, tuple(data))
    if len(good) < 4:
        return FocusOrderEstimate(None, int(np.sign(good[0][1])), math.nan, math.nan, tuple(data))
    ls = np.log([s for s, _ in good])
    ld = np.log([abs(d) for _, d in good])
    slope, icpt = np.polyfit(ls, ld, 1)
    resid = float(np.sqrt(np.mean((ld - (slope * ls + icpt)) ** 2)))
    signs = [np.sign(d) for _, d in good]
    lead = int(np.sign(sum(signs)))
    n = int(round((slope - 1) / 2))
    order = n if n >= 0 and abs(slope - (2 * n + 1)) <= 0.15 and resid < 0.05 else None
    return FocusOrderEstimate(order, lead, float(slope), resid, tuple(data))
