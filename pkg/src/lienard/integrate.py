"""Trajectory integration, escape detection and section crossings."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels as K
from .errors import InputError, InvalidSectionError, StepSizeUnderflow
from .polysys import PlanarSystem, _real_roots, as_assignment, numeric_system

REASONS = {
    K.ST_SECTION: "section-hit",
    K.ST_ESCAPE: "escape",
    K.ST_EQUILIBRIUM: "equilibrium-approach",
    K.ST_TIMEOUT: "time-out",
    K.ST_UNDERFLOW: "step-underflow",
    K.ST_LEFT: "left-section",
}


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    initial_step: float = 0.0  # 0 picks one automatically
    max_step: float = 1.0
    escape_radius: float = 1e3
    max_time: float = 1e3
    eq_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rtol", "atol", "escape_radius", "max_time", "max_step"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InputError(f"{name} must be a positive finite number, got {v!r}")
        if self.initial_step < 0 or self.eq_tol < 0:
            raise InputError("initial_step and eq_tol must be non-negative")

    @classmethod
    def verification(cls, **kw) -> "IntegratorConfig":
        return cls(**kw)

    @classmethod
    def sweep(cls, **kw) -> "IntegratorConfig":
        kw.setdefault("rtol", 1e-8)
        kw.setdefault("atol", 1e-10)
        return cls(**kw)

    def with_(self, **kw) -> "IntegratorConfig":
        return replace(self, **kw)

    @property
    def position_tol(self) -> float:
        return K.Y_TOL


@dataclass(frozen=True)
class CompiledField:
    exps: np.ndarray  # (n, 2) int64
    coefs: np.ndarray  # (n, 3) float: P, Q, divergence

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        out = np.empty(4)
        K.field_eval(self.exps, self.coefs, 1.0, float(x), float(y), out)
        return out[0], out[1]

    def divergence(self, x: float, y: float) -> float:
        out = np.empty(4)
        K.field_eval(self.exps, self.coefs, 1.0, float(x), float(y), out)
        return out[2]


@lru_cache(maxsize=512)
def _compile(sys: PlanarSystem, items: tuple) -> CompiledField:
    p, q = numeric_system(sys, dict(items))
    div = p.diff_x() + q.diff_y()
    keys = sorted(set(p) | set(q) | set(div))
    exps = np.array(keys, dtype=np.int64).reshape(-1, 2)
    coefs = np.array(
        [[float(f.coefficient(i, j).constant) for f in (p, q, div)] for i, j in keys], dtype=np.float64
    ).reshape(-1, 3)
    return CompiledField(exps, coefs)


def compile_field(sys: PlanarSystem, a: Mapping[str, float] | None) -> CompiledField:
    a = as_assignment(sys, a)
    items = tuple(sorted((k, float(v)) for k, v in a.items() if k in sys.parameters))
    return _compile(sys, items)


@dataclass(frozen=True)
class Section:
    """Segment ``(a, b)`` of the x-axis crossed with ``sign(y') = sigma``."""

    a: float
    b: float
    sigma: int

    def __post_init__(self):
        if not (self.a < self.b):
            raise InvalidSectionError(f"section interval ({self.a}, {self.b}) is empty")
        if self.sigma not in (-1, 1):
            raise InvalidSectionError("sigma must be +1 or -1")

    def contains(self, s: float) -> bool:
        return self.a < s < self.b


def make_section(sys: PlanarSystem, a, interval: tuple[float, float], samples: int = 64) -> Section:
    """Validate ``interval`` for the assigned system and fix the crossing sign.

    The sign of ``q(x, 0)`` must be constant on the open interval; this is
    checked exactly through the real roots of ``q(x, 0)`` and by sampling.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise InvalidSectionError(f"section interval ({lo}, {hi}) is empty")
    p, q = numeric_system(sys, a)
    q0 = q.univariate_x()
    if all(c == 0 for c in q0):
        raise InvalidSectionError("q(x, 0) vanishes identically")
    for r in _real_roots(q0):
        if lo < float(r) < hi:
            raise InvalidSectionError(f"q(x, 0) vanishes at x = {float(r):.12g} inside ({lo}, {hi})")
    xs = np.linspace(lo, hi, samples + 2)[1:-1]
    vals = [sum(float(c) * x**i for i, c in enumerate(q0)) for x in xs]
    signs = {int(np.sign(v)) for v in vals}
    if len(signs) != 1 or 0 in signs:
        raise InvalidSectionError(f"y' changes sign on ({lo}, {hi})")
    # p must vanish on the axis for the section to be transversal in this sense
    for x in xs[:: max(1, samples // 8)]:
        if abs(float(p.exact_value(float(x), 0))) > 1e-14 * (1 + abs(x)):
            raise InvalidSectionError("x' does not vanish on the x-axis; section is not a crossing line")
    return Section(lo, hi, signs.pop())


@dataclass(frozen=True)
class SectionEvent:
    point: tuple[float, float]
    time: float
    arclength: float
    divergence_integral: float = 0.0


@dataclass(frozen=True)
class Termination:
    reason: str
    state: tuple[float, float]
    time: float


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # (n, 2)
    termination: Termination
    divergence_integral: float = 0.0
    arclength: float = 0.0
    steps: int = 0

    @property
    def final(self) -> tuple[float, float]:
        return self.termination.state


def _drive(
    fld: CompiledField,
    state0,
    cfg: IntegratorConfig,
    mode: int = K.MODE_FREE,
    section: Section | None = None,
    tsign: float = 1.0,
    record: bool = False,
    t_max: float | None = None,
    chunk: int = 4096,
):
    x0, y0 = float(state0[0]), float(state0[1])
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise InputError("initial state must be finite")
    z = np.array([x0, y0, 0.0, 0.0])
    t = 0.0
    h = cfg.initial_step
    tmax = cfg.max_time if t_max is None else float(t_max)
    sa, sb, sg = (section.a, section.b, float(section.sigma)) if section else (0.0, 0.0, 0.0)
    ts, zs = [np.array([0.0])], [z[None, :].copy()]
    nsteps = 0
    out = np.empty(4)
    cap = chunk if record else 0
    while True:
        rec_t = np.empty(cap)
        rec_z = np.empty((cap, 4))
        status, t, h, ns, nrec = K.run(
            fld.exps, fld.coefs, tsign, z, t, tmax, cfg.rtol, cfg.atol, h, cfg.max_step,
            cfg.escape_radius, cfg.eq_tol, mode, sa, sb, sg, 1e-9, rec_t, rec_z, out,
        )
        nsteps += ns
        if record and nrec:
            ts.append(rec_t[:nrec].copy())
            zs.append(rec_z[:nrec].copy())
        z = out.copy()
        if status != K.ST_BUFFER:
            break
        cap = min(cap * 2, 1 << 20)
    return status, t, z, nsteps, (np.concatenate(ts), np.concatenate(zs)) if record else None


def integrate(
    sys: PlanarSystem,
    a,
    state0,
    config: IntegratorConfig | None = None,
    reverse: bool = False,
    t_max: float | None = None,
) -> Trajectory:
    """Adaptive Dormand-Prince integration until escape, equilibrium approach or ``max_time``.

    Raises :class:`StepSizeUnderflow` when the step size collapses.
    """
    cfg = config or IntegratorConfig()
    fld = compile_field(sys, a)
    status, t, z, n, rec = _drive(fld, state0, cfg, tsign=-1.0 if reverse else 1.0, record=True, t_max=t_max)
    if status == K.ST_UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}, state ({z[0]:.6g}, {z[1]:.6g})")
    term = Termination(REASONS[status], (float(z[0]), float(z[1])), float(t))
    tt, zz = rec
    return Trajectory(tt, zz[:, :2].copy(), term, float(z[2]), float(z[3]), n)


def next_crossing(
    sys: PlanarSystem,
    a,
    state,
    section: Section,
    config: IntegratorConfig | None = None,
    reverse: bool = False,
) -> SectionEvent | Termination:
    """Integrate to the next crossing of ``section`` with the section's sign.

    Crossings outside ``(a, b)`` are skipped.  In reversed time the crossing
    sign is flipped as well, so a round trip retraces the same orbit arc.
    """
    cfg = config or IntegratorConfig()
    fld = compile_field(sys, a)
    sec = Section(section.a, section.b, -section.sigma) if reverse else section
    status, t, z, n, _ = _drive(fld, state, cfg, K.MODE_NEXT, sec, tsign=-1.0 if reverse else 1.0)
    if status == K.ST_UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}")
    if status == K.ST_SECTION:
        return SectionEvent((float(z[0]), float(z[1])), float(t), float(z[3]), float(z[2]))
    return Termination(REASONS[status], (float(z[0]), float(z[1])), float(t))


def first_return(fld: CompiledField, s: float, section: Section, cfg: IntegratorConfig, record: bool = False):
    """Kernel-level first return from ``(s, 0)``; stops at the first sigma-crossing anywhere."""
    return _drive(fld, (s, 0.0), cfg, K.MODE_FIRST, section, record=record)


def trajectory_csv(traj: Trajectory) -> str:
    lines = ["t,x,y"]
    for t, (x, y) in zip(traj.t, traj.states):
        lines.append(f"{t:.17g},{x:.17g},{y:.17g}")
    return "\n".join(lines) + "\n"
