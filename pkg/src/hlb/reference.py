"""Fixed-step reference integrator for cross-checking the event-driven flow.

A deliberately independent implementation: classical RK4 with a constant
step, events located by bisection on the sign of the switching function,
and the same hybrid semantics (sliding, resets, hysteresis branches,
delayed switching).  The drivers are numba-compiled because a reference
step of 1e-6 over t = 20 is twenty million steps per system.

Right-hand sides come straight from the catalog's module-level functions,
so each entry's driver specializes on its own compiled field.
"""

from __future__ import annotations

import math

import numba
from numba import njit

from .catalog import CatalogEntry
from .errors import DomainError

WEIGHT_EPS = 1e-14


_JIT_CACHE = {}


def _jit(f):
    """Compile (and memoize) a plain rhs so driver specializations are
    reused across calls with the same underlying function."""
    if isinstance(f, numba.core.dispatcher.Dispatcher):
        return f
    if f not in _JIT_CACHE:
        _JIT_CACHE[f] = njit(f)
    return _JIT_CACHE[f]


@njit(inline="always")
def _rk4(f, x, y, mu, h):
    k1x, k1y = f(x, y, mu)
    k2x, k2y = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y, mu)
    k3x, k3y = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y, mu)
    k4x, k4y = f(x + h * k3x, y + h * k3y, mu)
    return (x + h * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0,
            y + h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6.0)


def _make_continuous_driver():
    @njit(cache=False)
    def run(fL, fR, mu, x, y, t, t_end, h):
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            if x <= 0.0:
                x, y = _rk4(fL, x, y, mu, hs)
            else:
                x, y = _rk4(fR, x, y, mu, hs)
            t += hs
        return x, y
    return run


def _make_filippov_driver():
    @njit(cache=False)
    def run(fL, fR, mu, x, y, t, t_end, h, piece, sliding):
        # piece: 0 = left field, 1 = right field
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            if sliding == 1:
                fl = fL(0.0, y, mu)
                fr = fR(0.0, y, mu)
                ys = (fr[0] * fl[1] - fl[0] * fr[1]) / (fr[0] - fl[0])
                if abs(ys) <= 1e-12:
                    # pseudo-equilibrium: stationary for the rest of the run
                    return 0.0, y
                y1 = y + hs * ys  # heun refinement below
                fl1 = fL(0.0, y1, mu)
                fr1 = fR(0.0, y1, mu)
                ys1 = (fr1[0] * fl1[1] - fl1[0] * fr1[1]) / (fr1[0] - fl1[0])
                y1 = y + 0.5 * hs * (ys + ys1)
                fl1 = fL(0.0, y1, mu)
                fr1 = fR(0.0, y1, mu)
                w1 = fl1[0] / (fl1[0] - fr1[0])
                if w1 <= 0.0 or w1 >= 1.0:
                    # bisect the exit point on the weight
                    a = 0.0
                    b = hs
                    for _ in range(60):
                        m = 0.5 * (a + b)
                        ym = y + m * ys
                        flm = fL(0.0, ym, mu)
                        frm = fR(0.0, ym, mu)
                        wm = flm[0] / (flm[0] - frm[0])
                        if wm <= 0.0 or wm >= 1.0:
                            b = m
                        else:
                            a = m
                    y = y + b * ys
                    t += b
                    fl1 = fL(0.0, y, mu)
                    fr1 = fR(0.0, y, mu)
                    w = fl1[0] / (fl1[0] - fr1[0])
                    sliding = 0
                    piece = 0 if w < 0.5 else 1
                    x = 0.0
                else:
                    y = y1
                    t += hs
                continue
            if piece == 0:
                x1, y1 = _rk4(fL, x, y, mu, hs)
            else:
                x1, y1 = _rk4(fR, x, y, mu, hs)
            if x * x1 < 0.0:
                # bisect the crossing within the step
                a = 0.0
                b = hs
                for _ in range(60):
                    m = 0.5 * (a + b)
                    if piece == 0:
                        xm, ym = _rk4(fL, x, y, mu, m)
                    else:
                        xm, ym = _rk4(fR, x, y, mu, m)
                    if x * xm < 0.0:
                        b = m
                    else:
                        a = m
                if piece == 0:
                    xe, ye = _rk4(fL, x, y, mu, b)
                else:
                    xe, ye = _rk4(fR, x, y, mu, b)
                t += b
                fl = fL(0.0, ye, mu)
                fr = fR(0.0, ye, mu)
                if fl[0] > 0.0 and fr[0] < 0.0:
                    sliding = 1
                    x, y = 0.0, ye
                elif fl[0] > 0.0:
                    piece = 1
                    x, y = 0.0, ye
                elif fr[0] < 0.0:
                    piece = 0
                    x, y = 0.0, ye
                else:
                    # repelling: keep the downstream side of the motion
                    piece = 1 if x1 > 0.0 else 0
                    x, y = 0.0, ye
            else:
                x, y, t = x1, y1, t + hs
        return x, y
    return run


def _make_impact_driver():
    @njit(cache=False)
    def run(fM, reset, mu, x, y, t, t_end, h):
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            x1, y1 = _rk4(fM, x, y, mu, hs)
            if x1 > 0.0:
                a = 0.0
                b = hs
                for _ in range(60):
                    m = 0.5 * (a + b)
                    xm, ym = _rk4(fM, x, y, mu, m)
                    if xm > 0.0:
                        b = m
                    else:
                        a = m
                xe, ye = _rk4(fM, x, y, mu, b)
                t += b
                x = 0.0
                y = -reset(ye, mu)
            else:
                x, y, t = x1, y1, t + hs
        return x, y
    return run


def _make_impulse_driver():
    @njit(cache=False)
    def run(fM, pmap, mu, x, y, t, t_end, h):
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            x1, y1 = _rk4(fM, x, y, mu, hs)
            if x * x1 < 0.0 and x1 > 0.0:
                a = 0.0
                b = hs
                for _ in range(60):
                    m = 0.5 * (a + b)
                    xm, ym = _rk4(fM, x, y, mu, m)
                    if xm > 0.0:
                        b = m
                    else:
                        a = m
                xe, ye = _rk4(fM, x, y, mu, b)
                t += b
                x, y = pmap(0.0, ye, mu)
            else:
                x, y, t = x1, y1, t + hs
        return x, y
    return run


def _make_hysteresis_driver():
    @njit(cache=False)
    def run(fL, fR, mu, x, y, t, t_end, h, branch):
        # branch 0 uses fL until x = +mu; branch 1 uses fR until x = -mu
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            if branch == 0:
                x1, y1 = _rk4(fL, x, y, mu, hs)
                g0, g1 = x - mu, x1 - mu
            else:
                x1, y1 = _rk4(fR, x, y, mu, hs)
                g0, g1 = x + mu, x1 + mu
            crossed = (g0 < 0.0 and g1 >= 0.0) if branch == 0 else (g0 > 0.0 and g1 <= 0.0)
            if crossed:
                a = 0.0
                b = hs
                for _ in range(60):
                    m = 0.5 * (a + b)
                    if branch == 0:
                        xm, ym = _rk4(fL, x, y, mu, m)
                        gm = xm - mu
                        hit = gm >= 0.0
                    else:
                        xm, ym = _rk4(fR, x, y, mu, m)
                        gm = xm + mu
                        hit = gm <= 0.0
                    if hit:
                        b = m
                    else:
                        a = m
                if branch == 0:
                    xe, ye = _rk4(fL, x, y, mu, b)
                    x, y = mu, ye
                else:
                    xe, ye = _rk4(fR, x, y, mu, b)
                    x, y = -mu, ye
                t += b
                branch = 1 - branch
            else:
                x, y, t = x1, y1, t + hs
        return x, y
    return run


def _make_delay_driver():
    @njit(cache=False)
    def run(fL, fR, mu, x, y, t, t_end, h, piece, pend_t, pend_p, n_pend):
        # pend_t / pend_p: preallocated ring buffers of scheduled switches
        head = 0
        tail = n_pend
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            if head < tail:
                hs = min(hs, pend_t[head] - t)
                if hs <= 1e-15:
                    piece = pend_p[head]
                    head += 1
                    continue
            if piece == 0:
                x1, y1 = _rk4(fL, x, y, mu, hs)
            else:
                x1, y1 = _rk4(fR, x, y, mu, hs)
            if x * x1 < 0.0:
                a = 0.0
                b = hs
                for _ in range(60):
                    m = 0.5 * (a + b)
                    if piece == 0:
                        xm, ym = _rk4(fL, x, y, mu, m)
                    else:
                        xm, ym = _rk4(fR, x, y, mu, m)
                    if x * xm < 0.0:
                        b = m
                    else:
                        a = m
                if piece == 0:
                    xe, ye = _rk4(fL, x, y, mu, b)
                else:
                    xe, ye = _rk4(fR, x, y, mu, b)
                t += b
                target = 1 if x1 > 0.0 else 0
                pend_t[tail] = t + mu
                pend_p[tail] = target
                tail += 1
                if tail >= pend_t.shape[0]:
                    # compact the ring
                    k = 0
                    for i in range(head, tail):
                        pend_t[k] = pend_t[i]
                        pend_p[k] = pend_p[i]
                        k += 1
                    tail -= head
                    head = 0
                x, y = 0.0, ye
            else:
                x, y, t = x1, y1, t + hs
        return x, y
    return run


def _make_quadrant_driver():
    @njit(cache=False)
    def run(f1, f2, f3, f4, mu, x, y, t, t_end, h, piece):
        # piece 0..3 = quadrants counterclockwise from (+,+)
        while t < t_end - 1e-15:
            hs = min(h, t_end - t)
            if piece == 0:
                x1, y1 = _rk4(f1, x, y, mu, hs)
            elif piece == 1:
                x1, y1 = _rk4(f2, x, y, mu, hs)
            elif piece == 2:
                x1, y1 = _rk4(f3, x, y, mu, hs)
            else:
                x1, y1 = _rk4(f4, x, y, mu, hs)
            cross_x = x * x1 < 0.0
            cross_y = y * y1 < 0.0
            if cross_x or cross_y:
                a = 0.0
                b = hs
                for _ in range(60):
                    m = 0.5 * (a + b)
                    if piece == 0:
                        xm, ym = _rk4(f1, x, y, mu, m)
                    elif piece == 1:
                        xm, ym = _rk4(f2, x, y, mu, m)
                    elif piece == 2:
                        xm, ym = _rk4(f3, x, y, mu, m)
                    else:
                        xm, ym = _rk4(f4, x, y, mu, m)
                    if (cross_x and x * xm < 0.0) or (cross_y and y * ym < 0.0):
                        b = m
                    else:
                        a = m
                if piece == 0:
                    xe, ye = _rk4(f1, x, y, mu, b)
                elif piece == 1:
                    xe, ye = _rk4(f2, x, y, mu, b)
                elif piece == 2:
                    xe, ye = _rk4(f3, x, y, mu, b)
                else:
                    xe, ye = _rk4(f4, x, y, mu, b)
                t += b
                sx = 1 if xe >= 0.0 else -1
                sy = 1 if ye >= 0.0 else -1
                if cross_x:
                    sx = 1 if x1 > 0.0 else -1
                    xe = 0.0
                if cross_y:
                    sy = 1 if y1 > 0.0 else -1
                    ye = 0.0
                if sx == 1 and sy == 1:
                    piece = 0
                elif sx == -1 and sy == 1:
                    piece = 1
                elif sx == -1 and sy == -1:
                    piece = 2
                else:
                    piece = 3
                x, y = xe, ye
            else:
                x, y, t = x1, y1, t + hs
        return x, y
    return run


_CONTINUOUS = _make_continuous_driver()
_FILIPPOV = _make_filippov_driver()
_IMPACT = _make_impact_driver()
_IMPULSE = _make_impulse_driver()
_HYSTERESIS = _make_hysteresis_driver()
_DELAY = _make_delay_driver()
_QUADRANT = _make_quadrant_driver()


def reference_final_state(entry: CatalogEntry, mu: float, init: tuple,
                          t_end: float, h: float = 1e-6) -> tuple:
    """Final state of the fixed-step reference run from an off-manifold
    initial point, with the same hybrid semantics as the adaptive flow."""
    import numpy as np

    sys = entry.builder(mu)
    v = sys.switching.variant
    x0, y0 = init
    if v == "continuous":
        fL = _jit(sys.piece("L").rhs)
        fR = _jit(sys.piece("R").rhs)
        return _CONTINUOUS(fL, fR, mu, x0, y0, 0.0, t_end, h)
    if v == "filippov":
        fL = _jit(sys.piece("L").rhs)
        fR = _jit(sys.piece("R").rhs)
        piece = 0 if x0 < 0 else 1
        return _FILIPPOV(fL, fR, mu, x0, y0, 0.0, t_end, h, piece, 0)
    if v == "impact":
        fM = _jit(sys.piece("M").rhs)
        reset = _jit(sys.reset)
        return _IMPACT(fM, reset, mu, x0, y0, 0.0, t_end, h)
    if v == "impulse":
        fM = _jit(sys.piece("M").rhs)
        pmap = _jit(sys.planar_reset)
        return _IMPULSE(fM, pmap, mu, x0, y0, 0.0, t_end, h)
    if v == "hysteresis":
        fL = _jit(sys.piece("L").rhs)
        fR = _jit(sys.piece("R").rhs)
        branch = 0 if x0 <= 0 else 1
        return _HYSTERESIS(fL, fR, mu, x0, y0, 0.0, t_end, h, branch)
    if v == "delay":
        fL = _jit(sys.piece("L").rhs)
        fR = _jit(sys.piece("R").rhs)
        piece = 0 if x0 <= 0 else 1
        pend_t = np.zeros(256, dtype=np.float64)
        pend_p = np.zeros(256, dtype=np.int64)
        return _DELAY(fL, fR, mu, x0, y0, 0.0, t_end, h, piece, pend_t,
                      pend_p, 0)
    if v == "two_manifolds":
        fs = [_jit(sys.piece(q).rhs) for q in ("Q1", "Q2", "Q3", "Q4")]
        sx = 1 if x0 >= 0 else -1
        sy = 1 if y0 >= 0 else -1
        piece = {(1, 1): 0, (-1, 1): 1, (-1, -1): 2, (1, -1): 3}[(sx, sy)]
        return _QUADRANT(fs[0], fs[1], fs[2], fs[3], mu, x0, y0, 0.0, t_end,
                         h, piece)
    raise DomainError(f"no reference driver for variant {v!r}")
