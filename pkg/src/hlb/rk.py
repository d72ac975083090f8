"""Explicit adaptive Runge-Kutta machinery for planar fields.

Dormand-Prince 5(4) pair with the standard continuous extension.  The state
is kept as plain (x, y) floats; right-hand sides return (xdot, ydot) tuples.
This is deliberately scalar code: the integrator is called millions of times
per sweep and small-array overhead dominates otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BracketError

# Dormand-Prince coefficients
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# embedded 4th-order weights
B1, B3, B4, B5, B6, B7 = (5179 / 57600, 7571 / 16695, 393 / 640,
                          -92097 / 339200, 187 / 2100, 1 / 40)
# dense-output weights
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423


@dataclass
class DenseSegment:
    """Quartic continuous extension of one accepted step on [t0, t1]."""

    t0: float
    t1: float
    x0: float
    y0: float
    rx: tuple  # rcont2..rcont5 for x
    ry: tuple

    def eval(self, t: float) -> tuple:
        h = self.t1 - self.t0
        th = 0.0 if h == 0.0 else (t - self.t0) / h
        th1 = 1.0 - th
        r2, r3, r4, r5 = self.rx
        x = self.x0 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))
        r2, r3, r4, r5 = self.ry
        y = self.y0 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))
        return x, y


def dp45_step(f, t: float, x: float, y: float, h: float, mu: float,
              k1: tuple = None):
    """One Dormand-Prince step.

    Returns (x1, y1, err, k1_next, dense) where err is the scaled-by-nothing
    embedded error estimate components (ex, ey) and k1_next the FSAL stage.
    """
    if k1 is None:
        k1 = f(x, y, mu)
    k1x, k1y = k1
    k2 = f(x + h * A21 * k1x, y + h * A21 * k1y, mu)
    k3 = f(x + h * (A31 * k1x + A32 * k2[0]),
           y + h * (A31 * k1y + A32 * k2[1]), mu)
    k4 = f(x + h * (A41 * k1x + A42 * k2[0] + A43 * k3[0]),
           y + h * (A41 * k1y + A42 * k2[1] + A43 * k3[1]), mu)
    k5 = f(x + h * (A51 * k1x + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
           y + h * (A51 * k1y + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]), mu)
    k6 = f(x + h * (A61 * k1x + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
           y + h * (A61 * k1y + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]), mu)
    x1 = x + h * (A71 * k1x + A73 * k3[0] + A74 * k4[0] + A75 * k5[0] + A76 * k6[0])
    y1 = y + h * (A71 * k1y + A73 * k3[1] + A74 * k4[1] + A75 * k5[1] + A76 * k6[1])
    k7 = f(x1, y1, mu)
    x1_hat = x + h * (B1 * k1x + B3 * k3[0] + B4 * k4[0] + B5 * k5[0]
                      + B6 * k6[0] + B7 * k7[0])
    y1_hat = y + h * (B1 * k1y + B3 * k3[1] + B4 * k4[1] + B5 * k5[1]
                      + B6 * k6[1] + B7 * k7[1])
    err = (x1 - x1_hat, y1 - y1_hat)

    dx = x1 - x
    dy = y1 - y
    bsplx = h * k1x - dx
    bsply = h * k1y - dy
    r5x = h * (D1 * k1x + D3 * k3[0] + D4 * k4[0] + D5 * k5[0]
               + D6 * k6[0] + D7 * k7[0])
    r5y = h * (D1 * k1y + D3 * k3[1] + D4 * k4[1] + D5 * k5[1]
               + D6 * k6[1] + D7 * k7[1])
    dense = DenseSegment(t, t + h, x, y,
                         (dx, bsplx, dx - h * k7[0] - bsplx, r5x),
                         (dy, bsply, dy - h * k7[1] - bsply, r5y))
    return x1, y1, err, k7, dense


def error_norm(err: tuple, x0, y0, x1, y1, rtol: float, atol: float) -> float:
    sx = atol + rtol * max(abs(x0), abs(x1))
    sy = atol + rtol * max(abs(y0), abs(y1))
    ex, ey = err
    return math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))


def initial_step(f, t, x, y, mu, rtol, atol, direction=1.0) -> float:
    """Hairer-style starting step size guess."""
    f0 = f(x, y, mu)
    sx = atol + rtol * abs(x)
    sy = atol + rtol * abs(y)
    d0 = math.sqrt(0.5 * ((x / sx) ** 2 + (y / sy) ** 2))
    d1 = math.sqrt(0.5 * ((f0[0] / sx) ** 2 + (f0[1] / sy) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    x1 = x + direction * h0 * f0[0]
    y1 = y + direction * h0 * f0[1]
    f1 = f(x1, y1, mu)
    d2 = math.sqrt(0.5 * (((f1[0] - f0[0]) / sx) ** 2
                          + ((f1[1] - f0[1]) / sy) ** 2)) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1)


def locate_root(event_fn, t_lo: float, t_hi: float, g_lo: float = None,
                g_hi: float = None, tol_g: float = 1e-12,
                tol_t: float = 1e-14, max_iter: int = 200) -> float:
    """Safeguarded secant/bisection root of a scalar function of time.

    Requires a sign change (or zero endpoint) on [t_lo, t_hi].  Converges to
    |event_fn(t*)| <= tol_g * scale with t* inside the bracket.
    """
    if g_lo is None:
        g_lo = event_fn(t_lo)
    if g_hi is None:
        g_hi = event_fn(t_hi)
    if g_lo == 0.0:
        return t_lo
    if g_hi == 0.0:
        return t_hi
    if g_lo * g_hi > 0:
        raise BracketError(f"no sign change on [{t_lo}, {t_hi}]")
    scale = 1.0 + max(abs(g_lo), abs(g_hi))
    a, b, ga, gb = t_lo, t_hi, g_lo, g_hi
    side = 0
    t = b
    for _ in range(max_iter):
        # Illinois false position: halving a stagnant endpoint weight keeps
        # the convergence superlinear where plain regula falsi stalls
        t = (a * gb - b * ga) / (gb - ga)
        if not (min(a, b) < t < max(a, b)):
            t = 0.5 * (a + b)
        g = event_fn(t)
        if abs(g) <= tol_g * scale:
            return t
        if ga * g < 0:
            b, gb = t, g
            if side == -1:
                ga *= 0.5
            side = -1
        else:
            a, ga = t, g
            if side == 1:
                gb *= 0.5
            side = 1
        if abs(b - a) <= tol_t * (1.0 + abs(b)):
            return b if abs(gb) < abs(ga) else a
    return t
