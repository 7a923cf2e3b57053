"""Compiled integration kernels.

The vector field is a monomial table: ``E[k] = (i, j)`` and
``C[k] = (p_k, q_k, div_k)`` so that ``P = sum p_k x^i y^j`` and likewise for
``Q`` and the divergence.  The integrated state is
``(x, y, int div dt, arc length)``.
"""

import math

import numpy as np

from ._accel import njit

ST_SECTION = 0
ST_ESCAPE = 1
ST_EQUILIBRIUM = 2
ST_TIMEOUT = 3
ST_UNDERFLOW = 4
ST_BUFFER = 5
ST_LEFT = 6

MODE_FREE = 0
MODE_NEXT = 1  # stop at the next sigma-crossing inside (a, b), skip others
MODE_FIRST = 2  # stop at the first sigma-crossing wherever it is

EQ_HOLD = 1.0  # pseudo-time the field must stay tiny to count as equilibrium approach
Y_TOL = 1e-12

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [
        71 / 57600,
        0.0,
        -71 / 16695,
        71 / 1920,
        -17253 / 339200,
        22 / 525,
        -1 / 40,
    ]
)


@njit
def field_eval(E, C, tsign, x, y, out):
    p = 0.0
    q = 0.0
    d = 0.0
    for k in range(E.shape[0]):
        m = x ** E[k, 0] * y ** E[k, 1]
        p += C[k, 0] * m
        q += C[k, 1] * m
        d += C[k, 2] * m
    p *= tsign
    q *= tsign
    d *= tsign
    out[0] = p
    out[1] = q
    out[2] = d
    out[3] = math.sqrt(p * p + q * q)


@njit
def dp_step(E, C, tsign, z, f0, h, rtol, atol, znew, fnew, K, tmp):
    """One Dormand-Prince step of size ``h``; returns the scaled error norm."""
    n = z.shape[0]
    for c in range(n):
        K[0, c] = f0[c]
    for s in range(1, 6):
        for c in range(n):
            acc = 0.0
            for j in range(s):
                acc += _A[s, j] * K[j, c]
            tmp[c] = z[c] + h * acc
        field_eval(E, C, tsign, tmp[0], tmp[1], K[s])
    for c in range(n):
        acc = 0.0
        for j in range(6):
            acc += _B[j] * K[j, c]
        znew[c] = z[c] + h * acc
    field_eval(E, C, tsign, znew[0], znew[1], fnew)
    for c in range(n):
        K[6, c] = fnew[c]
    # error on x, y and the divergence integral; arc length is diagnostic only
    err = 0.0
    for c in range(3):
        acc = 0.0
        for j in range(7):
            acc += _E[j] * K[j, c]
        sc = atol + rtol * max(abs(z[c]), abs(znew[c]))
        r = h * acc / sc
        err += r * r
    return math.sqrt(err / 3.0)


@njit
def initial_step(E, C, tsign, z, f0, rtol, atol, hmax):
    d0 = 0.0
    d1 = 0.0
    for c in range(2):
        sc = atol + rtol * abs(z[c])
        d0 += (z[c] / sc) ** 2
        d1 += (f0[c] / sc) ** 2
    d0 = math.sqrt(d0 / 2)
    d1 = math.sqrt(d1 / 2)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    return min(h, hmax)


@njit
def run(
    E,
    C,
    tsign,
    z0,
    t0,
    tmax,
    rtol,
    atol,
    h0,
    hmax,
    escape,
    eq_tol,
    mode,
    sec_a,
    sec_b,
    sigma,
    t_ignore,
    rec_t,
    rec_z,
    out_z,
):
    """Integrate from ``(t0, z0)``.

    Returns ``(status, t, h, nsteps, nrec)`` and writes the final state into
    ``out_z``.  Accepted steps are appended to ``rec_t``/``rec_z`` while room
    remains; a full buffer returns ``ST_BUFFER`` so the caller can resume.
    """
    n = 4
    z = z0.copy()
    f = np.empty(n)
    znew = np.empty(n)
    fnew = np.empty(n)
    K = np.empty((7, n))
    tmp = np.empty(n)
    zc = np.empty(n)
    fc = np.empty(n)
    t = t0
    cap = rec_t.shape[0]
    nrec = 0
    nsteps = 0
    field_eval(E, C, tsign, z[0], z[1], f)
    for c in range(n):
        out_z[c] = z[c]
    if f[3] <= eq_tol:
        return ST_EQUILIBRIUM, t, h0, nsteps, nrec
    h = h0 if h0 > 0.0 else initial_step(E, C, tsign, z, f, rtol, atol, hmax)
    below_since = -1.0
    while True:
        if t >= tmax:
            for c in range(n):
                out_z[c] = z[c]
            return ST_TIMEOUT, t, h, nsteps, nrec
        if nrec >= cap and cap > 0:
            for c in range(n):
                out_z[c] = z[c]
            return ST_BUFFER, t, h, nsteps, nrec
        h = min(h, hmax, tmax - t)
        err = dp_step(E, C, tsign, z, f, h, rtol, atol, znew, fnew, K, tmp)
        if not (err <= 1.0):
            if err != err:
                h *= 0.2
            else:
                h *= max(0.2, 0.9 * err ** -0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                for c in range(n):
                    out_z[c] = z[c]
                return ST_UNDERFLOW, t, h, nsteps, nrec
            continue
        nsteps += 1
        tnew = t + h

        if mode != MODE_FREE and sigma * z[1] < 0.0 and sigma * znew[1] >= 0.0:
            # bracketed crossing in (t, tnew]; Illinois iteration on y(t + tau)
            ta = 0.0
            ga = z[1]
            tb = h
            gb = znew[1]
            side = 0
            for c in range(n):
                zc[c] = znew[c]
            tau = h
            for _ in range(200):
                if abs(zc[1]) <= Y_TOL * (1.0 + abs(zc[0])):
                    break
                tau = (ta * gb - tb * ga) / (gb - ga)
                if not (ta < tau < tb):
                    tau = 0.5 * (ta + tb)
                dp_step(E, C, tsign, z, f, tau, rtol, atol, zc, fc, K, tmp)
                gc = zc[1]
                if gc == 0.0:
                    break
                if (gc > 0.0) == (gb > 0.0):
                    tb = tau
                    gb = gc
                    if side == -1:
                        ga *= 0.5
                    side = -1
                else:
                    ta = tau
                    ga = gc
                    if side == 1:
                        gb *= 0.5
                    side = 1
                if tb - ta <= 4e-16 * max(1.0, abs(t)):
                    break
            tcross = t + tau
            if tcross > t_ignore:
                inside = sec_a < zc[0] < sec_b
                if inside or mode == MODE_FIRST:
                    for c in range(n):
                        out_z[c] = zc[c]
                    if nrec < cap:
                        rec_t[nrec] = tcross
                        for c in range(n):
                            rec_z[nrec, c] = zc[c]
                        nrec += 1
                    return (ST_SECTION if inside else ST_LEFT), tcross, h, nsteps, nrec

        for c in range(n):
            z[c] = znew[c]
            f[c] = fnew[c]
        t = tnew
        if nrec < cap:
            rec_t[nrec] = t
            for c in range(n):
                rec_z[nrec, c] = z[c]
            nrec += 1
        if max(abs(z[0]), abs(z[1])) > escape:
            for c in range(n):
                out_z[c] = z[c]
            return ST_ESCAPE, t, h, nsteps, nrec
        if f[3] <= eq_tol:
            if below_since < 0.0:
                below_since = t
            elif t - below_since >= EQ_HOLD:
                for c in range(n):
                    out_z[c] = z[c]
                return ST_EQUILIBRIUM, t, h, nsteps, nrec
        else:
            below_since = -1.0
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= fac


@njit
def winding_numbers(xs, ys, px, py):
    """Sum of signed angle increments of the closed polyline around each point, over 2*pi."""
    out = np.empty(px.shape[0])
    dmin = np.empty(px.shape[0])
    n = xs.shape[0]
    for k in range(px.shape[0]):
        total = 0.0
        best = np.inf
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            ax = xs[i] - px[k]
            ay = ys[i] - py[k]
            bx = xs[j] - px[k]
            by = ys[j] - py[k]
            total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
            # distance from point to segment
            sx = bx - ax
            sy = by - ay
            L2 = sx * sx + sy * sy
            u = 0.0
            if L2 > 0.0:
                u = -(ax * sx + ay * sy) / L2
                u = min(1.0, max(0.0, u))
            dx = ax + u * sx
            dy = ay + u * sy
            best = min(best, math.sqrt(dx * dx + dy * dy))
        out[k] = total / (2.0 * math.pi)
        dmin[k] = best
    return out, dmin
