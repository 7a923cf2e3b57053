"""Hopf scans, natural-parameter continuation of cycles, fold localization, staircase search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .cycles import (
    TAU,
    CycleReport,
    Displacement,
    LimitCycle,
    anchor_of,
    find_cycles,
    promote,
)
from .errors import BudgetExhausted, InputError, LienardError, NotBracketed, UnknownParameterError
from .integrate import IntegratorConfig, Section, make_section
from .polysys import (
    ParameterAssignment,
    PlanarSystem,
    as_assignment,
    build_lienard,
    find_equilibria,
)

AMPLITUDE_ZERO = 1e-4
DEFAULT_REGION = (-10.0, 10.0, -10.0, 10.0)


# ---------------------------------------------------------------------------
# Hopf


@dataclass(frozen=True)
class HopfPoint:
    parameter: str
    value: float
    location: tuple[float, float]
    direction: int  # sign of d(trace)/d(parameter)
    determinant: float = math.nan


class HopfScan(list):
    """List of :class:`HopfPoint` with collision diagnostics attached."""

    def __init__(self, points=(), collisions=()):
        super().__init__(points)
        self.collisions = list(collisions)


def _antisaddles(sys, a, region):
    return [e for e in find_equilibria(sys, a, region) if e.determinant > 0]


def _nearest(eqs, loc):
    if not eqs:
        return None
    return min(eqs, key=lambda e: math.hypot(e.location[0] - loc[0], e.location[1] - loc[1]))


def hopf_scan(
    sys: PlanarSystem,
    a,
    param: str,
    interval: tuple[float, float],
    steps: int = 200,
    region: tuple[float, float, float, float] = DEFAULT_REGION,
    tol: float = 1e-13,
) -> HopfScan:
    """Trace zero-crossings of every anti-saddle as ``param`` runs over ``interval``."""
    if param not in sys.parameters:
        raise UnknownParameterError(f"{param!r} is not a parameter of this system")
    base = dict(as_assignment(sys, {**dict(a or {}), param: interval[0]}))
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi or steps < 1:
        raise InputError("hopf_scan needs lo < hi and at least one step")
    grid = np.linspace(lo, hi, steps + 1)

    def at(p):
        return ParameterAssignment({**base, param: float(p)})

    start = _antisaddles(sys, at(grid[0]), region)
    tracks = [[(grid[0], e)] for e in start]
    collisions = []
    for p in grid[1:]:
        eqs = find_equilibria(sys, at(p), region)
        anti = [e for e in eqs if e.determinant > 0]
        locs = [e.location for e in eqs]
        for u in range(len(locs)):
            for v in range(u + 1, len(locs)):
                if math.dist(locs[u], locs[v]) < 1e-6:
                    collisions.append((float(p), locs[u], locs[v]))
        for tr in tracks:
            e = _nearest(anti, tr[-1][1].location)
            if e is not None:
                tr.append((p, e))

    points: list[HopfPoint] = []

    def trace_at(p, loc):
        e = _nearest(_antisaddles(sys, at(p), region), loc)
        return (math.nan, loc) if e is None else (e.trace, e.location)

    for tr in tracks:
        for (p0, e0), (p1, e1) in zip(tr, tr[1:]):
            t0, t1 = e0.trace, e1.trace
            if t0 == 0.0:
                cand = (p0, e0)
            elif t0 * t1 < 0:
                a_, b_, loc = p0, p1, e0.location
                ta = t0
                while b_ - a_ > tol * max(1.0, abs(a_)):
                    m = 0.5 * (a_ + b_)
                    tm, loc = trace_at(m, loc)
                    if tm == 0.0:
                        a_ = b_ = m
                        break
                    if (tm > 0) == (ta > 0):
                        a_, ta = m, tm
                    else:
                        b_ = m
                pm = 0.5 * (a_ + b_)
                e = _nearest(_antisaddles(sys, at(pm), region), loc)
                cand = (pm, e)
            else:
                continue
            pv, e = cand
            if e is None or any(abs(h.value - pv) <= 1e-9 and math.dist(h.location, e.location) < 1e-6 for h in points):
                continue
            d = max(1e-7, 1e-7 * abs(pv))
            tp, _ = trace_at(pv + d, e.location)
            tm, _ = trace_at(pv - d, e.location)
            points.append(HopfPoint(param, float(pv), e.location, int(np.sign(tp - tm)), e.determinant))
        if tr and tr[-1][1].trace == 0.0:
            pv, e = tr[-1]
            if not any(abs(h.value - pv) <= 1e-9 for h in points):
                points.append(HopfPoint(param, float(pv), e.location, 0, e.determinant))
    points.sort(key=lambda h: (h.value, h.location))
    return HopfScan(points, collisions)


# ---------------------------------------------------------------------------
# continuation


@dataclass(frozen=True)
class StepPolicy:
    initial: float = 0.05
    min_step: float = 1e-9
    max_step: float = 0.2
    grow: float = 1.5


@dataclass(frozen=True)
class FoldPoint:
    parameter: str
    value: float
    s: float
    multiplier: float
    side_counts: tuple[int, int]  # (below, above) in parameter order
    offset: float = math.nan


@dataclass
class Branch:
    parameter: str
    samples: list[tuple[float, LimitCycle]]
    event: str  # fold | amplitude-to-zero | escape | range-end | stalled
    fold: FoldPoint | None = None
    hopf: HopfPoint | None = None
    note: str = ""

    @property
    def values(self) -> np.ndarray:
        return np.array([p for p, _ in self.samples])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude for _, c in self.samples])

    def is_monotone(self) -> bool:
        amp = self.amplitudes
        if len(amp) < 2:
            return True
        d = np.diff(amp)
        return bool(np.all(d > 0) or np.all(d < 0))


def _offset(c: LimitCycle | float, anchor: float) -> float:
    s = c.s if isinstance(c, LimitCycle) else c
    return abs(s - anchor)


def _local_root(disp: Displacement, s_pred: float, width: float) -> float | None:
    """Root of the displacement in a bracket grown around ``s_pred``."""
    sec = disp.section
    lo_lim, hi_lim = sec.a + 1e-12, sec.b - 1e-12
    s_pred = min(max(s_pred, lo_lim), hi_lim)
    try:
        d0 = disp(s_pred)
    except ValueError:
        return None
    if d0 == 0.0:
        return s_pred
    w = width
    for _ in range(8):
        for s1 in (s_pred - w, s_pred + w):
            if not (lo_lim <= s1 <= hi_lim):
                continue
            try:
                d1 = disp(s1)
            except ValueError:
                continue
            if d0 * d1 <= 0:
                lo, hi = sorted((s_pred, s1))
                try:
                    return float(brentq(disp, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
                except ValueError:
                    return None
        w *= 2
    return None


def _with(a, param, value) -> ParameterAssignment:
    return ParameterAssignment({**dict(a), param: float(value)})


def continue_cycle(
    sys: PlanarSystem,
    a,
    param: str,
    target: float,
    seed: LimitCycle,
    policy: StepPolicy = StepPolicy(),
    config: IntegratorConfig | None = None,
    max_samples: int = 2000,
) -> Branch:
    """Follow ``seed`` from ``a[param]`` toward ``target`` by natural-parameter continuation."""
    if param not in sys.parameters:
        raise UnknownParameterError(f"{param!r} is not a parameter of this system")
    a = as_assignment(sys, a)
    cfg = config or IntegratorConfig()
    section = seed.section
    anchor = anchor_of(sys, a, section)
    p = float(a[param])
    direction = 1.0 if target >= p else -1.0

    disp = Displacement(sys, a, section, cfg)
    s0 = _local_root(disp, seed.s, max(1e-6, 1e-3 * _offset(seed, anchor)))
    if s0 is None or abs(s0 - seed.s) > 1e-6 * (1 + abs(seed.s)):
        raise InputError("seed cycle fails re-verification at the starting parameter value")
    c0 = promote(disp, s0)
    samples = [(p, c0)]
    side = np.sign(c0.multiplier - 1)
    h = policy.initial
    event, note = "range-end", ""
    last_outcome = "ok"

    while direction * (target - p) > 1e-15 and len(samples) < max_samples:
        h = min(h, policy.max_step, abs(target - p))
        p_new = p + direction * h
        if len(samples) >= 2:
            (pa, ca), (pb, cb) = samples[-2], samples[-1]
            s_pred = cb.s + (cb.s - ca.s) * (p_new - pb) / (pb - pa)
        else:
            s_pred = samples[-1][1].s
        step_s = abs(s_pred - samples[-1][1].s)
        width = max(1e-9, 0.5 * step_s, 1e-4 * _offset(samples[-1][1], anchor))
        d_new = Displacement(sys, _with(a, param, p_new), section, cfg)
        s_new = _local_root(d_new, s_pred, width)
        ok = False
        if s_new is not None and section.contains(s_new):
            c = promote(d_new, s_new)
            same_side = np.sign(c.multiplier - 1) == side or abs(c.multiplier - 1) <= TAU
            # refuse jumps to a neighbouring cycle
            jump = abs(s_new - samples[-1][1].s) > 4 * step_s + 10 * width + 1e-3 * _offset(samples[-1][1], anchor)
            ok = same_side and not (len(samples) >= 2 and jump)
        else:
            r = d_new.sample(min(max(s_pred, section.a + 1e-12), section.b - 1e-12))
            last_outcome = r.outcome
        if ok:
            samples.append((p_new, c))
            p = p_new
            if _offset(c, anchor) < AMPLITUDE_ZERO:
                event = "amplitude-to-zero"
                break
            h *= policy.grow
            continue
        h *= 0.5
        if h < policy.min_step:
            last = samples[-1][1]
            if _offset(last, anchor) < 1e-2 and abs(last.multiplier - 1) < 0.1:
                event = "amplitude-to-zero"
            elif last_outcome != "ok":
                event = "escape"
            elif abs(last.multiplier - 1) < 0.1:
                event = "fold"
            else:
                event, note = "stalled", "step size underflow away from a fold"
            break

    branch = Branch(param, samples, event, note=note)
    if event == "amplitude-to-zero":
        pv = samples[-1][0]
        span = max(1e-6, 10 * abs(samples[-1][0] - samples[max(0, len(samples) - 3)][0]))
        scan = hopf_scan(sys, a, param, (pv - span, pv + span), steps=8)
        if scan:
            branch.hopf = min(scan, key=lambda hp: abs(hp.value - pv))
    elif event == "fold":
        pv, last = samples[-1]
        try:
            branch.fold = find_fold(sys, a, param, None, section, cfg, guess=(last.s, pv), direction=direction)
        except LienardError as exc:
            branch.note = f"fold localization failed: {exc}"
    return branch


# ---------------------------------------------------------------------------
# folds


def _fold_residual(sys, a, param, section, cfg, s, p):
    disp = Displacement(sys, _with(a, param, p), section, cfg)
    r = disp.sample(s)
    if not r.ok:
        raise ValueError(r.outcome)
    return np.array([r.displacement, math.exp(r.divergence_integral) - 1.0])


def _solve_fold(sys, a, param, section, cfg, s, p, p_bounds=None, iters=40):
    scale_s = max(1e-6, 1e-5 * max(abs(s), 1e-2))
    for _ in range(iters):
        F = _fold_residual(sys, a, param, section, cfg, s, p)
        if abs(F[0]) <= 1e-10 * (1 + abs(s)) and abs(F[1]) <= 1e-7:
            return s, p, F
        hs = scale_s
        hp = max(1e-7, 1e-6 * abs(p))
        Fs = (_fold_residual(sys, a, param, section, cfg, s + hs, p) - _fold_residual(sys, a, param, section, cfg, s - hs, p)) / (2 * hs)
        Fp = (_fold_residual(sys, a, param, section, cfg, s, p + hp) - _fold_residual(sys, a, param, section, cfg, s, p - hp)) / (2 * hp)
        J = np.column_stack([Fs, Fp])
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            raise LienardError("singular fold Jacobian")
        lam = 1.0
        base = np.linalg.norm(F / [1.0 + abs(s), 1.0])
        while lam > 1e-4:
            sn, pn = s - lam * step[0], p - lam * step[1]
            if section.contains(sn) and (p_bounds is None or p_bounds[0] <= pn <= p_bounds[1]):
                try:
                    Fn = _fold_residual(sys, a, param, section, cfg, sn, pn)
                    if np.linalg.norm(Fn / [1.0 + abs(sn), 1.0]) < base:
                        break
                except ValueError:
                    pass
            lam *= 0.5
        s, p = s - lam * step[0], p - lam * step[1]
        scale_s = max(1e-7, min(scale_s, abs(lam * step[0]) + 1e-7))
    F = _fold_residual(sys, a, param, section, cfg, s, p)
    return s, p, F


def _count(sys, a, param, p, section, cfg, grid, extra=()):
    return find_cycles(sys, _with(a, param, p), section, grid, cfg, extra_points=extra)


def find_fold(
    sys: PlanarSystem,
    a,
    param: str,
    bracket: tuple[float, float] | None,
    section: Section | tuple[float, float],
    config: IntegratorConfig | None = None,
    grid=(64, "geometric"),
    guess: tuple[float, float] | None = None,
    direction: float = 1.0,
) -> FoldPoint:
    """Solve ``d = 0, d_s = 0`` in ``(s, param)`` and verify side counts differing by two.

    With a ``bracket`` the cycle counts at its ends must differ by two.  A
    ``guess`` ``(s, p)`` (e.g. from a stalled continuation) can replace it.
    """
    a = as_assignment(sys, a)
    cfg = config or IntegratorConfig()
    if not isinstance(section, Section):
        section = make_section(sys, _with(a, param, a[param]), section)
    bounds = None
    if bracket is not None:
        p_lo, p_hi = sorted(map(float, bracket))
        r_lo = _count(sys, a, param, p_lo, section, cfg, grid)
        r_hi = _count(sys, a, param, p_hi, section, cfg, grid)
        if abs(r_lo.count - r_hi.count) != 2:
            raise NotBracketed(f"cycle counts {r_lo.count} and {r_hi.count} at the bracket ends do not differ by two")
        rich, p0 = (r_lo, p_lo) if r_lo.count > r_hi.count else (r_hi, p_hi)
        cyc = rich.cycles
        pairs = [(u, v) for u, v in zip(cyc, cyc[1:]) if np.sign(u.multiplier - 1) != np.sign(v.multiplier - 1)]
        if not pairs:
            raise NotBracketed("no adjacent cycle pair of opposite stability on the richer side")
        # the pair that merges first is the closest one
        u, v = min(pairs, key=lambda uv: abs(uv[0].s - uv[1].s))
        s0 = 0.5 * (u.s + v.s)
        bounds = (p_lo, p_hi)
    elif guess is not None:
        s0, p0 = guess
    else:
        raise InputError("find_fold needs a bracket or a guess")

    s_f, p_f, F = _solve_fold(sys, a, param, section, cfg, s0, p0, bounds)
    m = 1.0 + F[1]
    if abs(F[1]) > TAU:
        raise LienardError(f"fold iteration did not converge: |m - 1| = {abs(F[1]):.3g}")

    width = abs(bounds[1] - bounds[0]) if bounds else max(1e-3, abs(p_f) * 1e-2)
    counts = (0, 0)
    offset = math.nan
    for k in range(6):
        delta = max(1e-8, width * 1e-4 * 4**k)
        below = _count(sys, a, param, p_f - delta, section, cfg, grid, extra=(s_f,)).count
        above = _count(sys, a, param, p_f + delta, section, cfg, grid, extra=(s_f,)).count
        counts, offset = (below, above), delta
        if abs(below - above) == 2:
            break
    return FoldPoint(param, float(p_f), float(s_f), float(m), counts, offset)


# ---------------------------------------------------------------------------
# staircase


def staircase_coefficients(k: int, ratio: float, scale: float, top_sign: int = -1) -> list[float]:
    """Odd coefficients ``[mu_1, mu_3, ..., mu_{2k+1}]`` of the staircase.

    Signs alternate downward from the top coefficient; magnitudes fall off as
    ``scale * ratio^(-j(j+1)/2)`` for the ``j``-th coefficient below the top.
    """
    if k < 1:
        raise InputError("k must be at least 1")
    if ratio <= 1 or scale <= 0:
        raise InputError("ratio must exceed 1 and scale must be positive")
    out = [0.0] * (k + 1)
    for j in range(k + 1):
        out[k - j] = top_sign * (-1) ** j * scale * float(ratio) ** (-(j * (j + 1)) / 2)
    return out


def averaging_weights(k: int) -> list[float]:
    """Mean of ``cos^(2i+2)`` over a period: the weight of ``mu_{2i+1}`` in the averaged radial drift."""
    return [math.comb(2 * i + 2, i + 1) / 4 ** (i + 1) for i in range(k + 1)]


def placement_coefficients(radii: Sequence[float], strength: float = 0.3) -> list[float]:
    """Odd coefficients whose averaged drift vanishes simply at each of ``radii``.

    The drift ``r * sum w_i mu_{2i+1} r^(2i)`` is set to ``-strength * prod(r^2 - r_j^2)``,
    so the outermost cycle is attracting and stabilities alternate inward.
    """
    radii = sorted(float(r) for r in radii)
    if not radii or radii[0] <= 0 or len(set(radii)) != len(radii) or strength <= 0:
        raise InputError("radii must be distinct and positive, strength positive")
    poly = -strength * np.polynomial.polynomial.polyfromroots([r * r for r in radii])
    return [float(c / w) for c, w in zip(poly, averaging_weights(len(radii)))]


def staircase_system(k: int, shape: str = "canonical") -> PlanarSystem:
    if shape == "canonical":
        return build_lienard(k, None, [1] * k)
    if shape == "rychkov":
        return build_lienard(k, None, [0] * k)
    raise InputError(f"unknown staircase shape {shape!r}")


@dataclass
class StaircaseResult:
    k: int
    system: PlanarSystem
    assignment: ParameterAssignment
    cycles: list[LimitCycle]
    report: CycleReport
    ratio: float
    scale: float
    success: bool
    attempts: list[tuple[float, float, int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.cycles)


def is_staircase(cycles: Sequence[LimitCycle], k: int) -> bool:
    if len(cycles) != k:
        return False
    amps = [c.amplitude for c in cycles]
    if any(b <= a for a, b in zip(amps, amps[1:])):
        return False
    sides = [np.sign(c.multiplier - 1) for c in cycles]
    if any(s == 0 for s in sides) or any(u == v for u, v in zip(sides, sides[1:])):
        return False
    return all(c.signature == ((0.0, 0.0),) for c in cycles)


def staircase_place(
    radii: Sequence[float],
    strength: float = 0.3,
    shape: str = "rychkov",
    section: tuple[float, float] = (0.0, 10.0),
    grid=(64, "geometric"),
    config: IntegratorConfig | None = None,
) -> StaircaseResult:
    """Staircase with cycles placed near prescribed amplitudes by averaging.

    Used where the geometric ladder packs the inner cycles too close to
    multiplier 1 to certify them. Raises :class:`BudgetExhausted` on failure.
    """
    k = len(radii)
    sys = staircase_system(k, shape)
    odd = placement_coefficients(radii, strength)
    a = ParameterAssignment({f"mu{2 * i + 1}": v for i, v in enumerate(odd)})
    rep = find_cycles(sys, a, section, grid, config or IntegratorConfig())
    cyc = [c for c in rep.cycles if c.multiplicity == "simple"]
    res = StaircaseResult(k, sys, a, cyc, rep, math.nan, strength, is_staircase(cyc, k), [(math.nan, strength, len(cyc))])
    if not res.success:
        raise BudgetExhausted(f"placement at {tuple(radii)} gave {len(cyc)} verified cycles", res)
    return res


LADDER_RATIOS = (10.0, 100.0, 1000.0)
LADDER_SCALES = (1.0, 10.0, 100.0)


def staircase_construct(
    k: int,
    ratio: float = 10.0,
    scale: float = 1.0,
    budget: int = 9,
    shape: str = "canonical",
    top_sign: int = -1,
    section: tuple[float, float] = (0.0, 10.0),
    grid=(64, "geometric"),
    config: IntegratorConfig | None = None,
) -> StaircaseResult:
    """Search the deterministic (ratio, scale) ladder for ``k`` nested cycles.

    Raises :class:`BudgetExhausted` carrying the best attempt when no
    assignment in the budget produces ``k`` verified cycles.
    """
    sys = staircase_system(k, shape)
    cfg = config or IntegratorConfig()
    ladder = [(ratio, scale)] + [(r, s) for r in LADDER_RATIOS for s in LADDER_SCALES if (r, s) != (ratio, scale)]
    best: StaircaseResult | None = None
    attempts = []
    for r, sc in ladder[: max(1, budget)]:
        odd = staircase_coefficients(k, r, sc, top_sign)
        a = ParameterAssignment({f"mu{2 * i + 1}": v for i, v in enumerate(odd)})
        rep = find_cycles(sys, a, section, grid, cfg)
        cyc = [c for c in rep.cycles if c.multiplicity == "simple"]
        attempts.append((r, sc, len(cyc)))
        res = StaircaseResult(k, sys, a, cyc, rep, r, sc, is_staircase(cyc, k), list(attempts))
        if res.success:
            return res
        if best is None or abs(len(cyc) - k) < abs(best.count - k):
            best = res
    best.attempts = attempts
    raise BudgetExhausted(
        f"no assignment with {k} nested cycles within {len(attempts)} attempts; best count {best.count}", best
    )
