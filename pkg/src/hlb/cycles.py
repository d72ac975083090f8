"""Poincare sections, return maps and limit-cycle measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import NoReturnError, NumericError
from .integrate import FlowOptions, ModeState, Trajectory, flow
from .pwsys import SystemDef

FIXED_POINT_RTOL = 1e-10


@dataclass(frozen=True)
class Section:
    """Oriented one-dimensional section for return maps.

    Points are anchor + s * direction.  A hit is a crossing of the line
    through the anchor where the coordinate along `normal` changes sign with
    the given orientation (+1 increasing, -1 decreasing); s at the hit must
    lie inside s_range.
    """

    anchor: tuple
    direction: tuple
    orientation: int = 1
    s_range: tuple = (1e-12, math.inf)

    def __post_init__(self):
        dx, dy = self.direction
        n = math.hypot(dx, dy)
        if n == 0:
            raise ValueError("section direction must be nonzero")
        object.__setattr__(self, "direction", (dx / n, dy / n))

    @property
    def normal(self) -> tuple:
        dx, dy = self.direction
        return (-dy, dx)

    def point(self, s: float) -> tuple:
        return (self.anchor[0] + s * self.direction[0],
                self.anchor[1] + s * self.direction[1])

    def coordinate(self, x: float, y: float) -> float:
        return ((x - self.anchor[0]) * self.direction[0]
                + (y - self.anchor[1]) * self.direction[1])


@dataclass
class LimitCycle:
    section_point: float
    period: float
    amplitude: float
    x_max: float
    multiplier: float
    converged: bool
    samples: list = field(default_factory=list)
    events: list = field(default_factory=list)
    residual: float = math.nan
    multiplier_flag: str = ""


def _base_opts(opts: Optional[FlowOptions]) -> FlowOptions:
    if opts is None:
        return FlowOptions()
    return opts


def return_map(sys: SystemDef, mu: float, section: Section, s: float,
               t_max: float = 1e3, opts: FlowOptions = None,
               record: bool = False, n_returns: int = 1):
    """First return (s', T) of the section point at coordinate s.

    The start point lies on the section; the flow runs until the n-th
    crossing with matching orientation.  Raises NoReturnError if the orbit
    does not come back within t_max, and NumericError on blow-up.
    """
    base = _base_opts(opts)
    x0, y0 = section.point(s)
    run_opts = FlowOptions(
        rtol=base.rtol, atol=base.atol, h_max=base.h_max,
        max_steps=base.max_steps, blowup=base.blowup,
        record=record, section=section, stop_after_section_hits=n_returns,
        time_sign=base.time_sign)
    traj = flow(sys, ModeState(t=0.0, x=x0, y=y0), mu, t_max, run_opts)
    hits = traj.section_hits
    if traj.status == "blow_up":
        raise NumericError(f"trajectory blew up during return map (s={s})")
    if len(hits) < n_returns:
        raise NoReturnError(
            f"no section return within t_max={t_max} from s={s} "
            f"(status {traj.status})")
    hit = hits[n_returns - 1]
    return (hit.detail["s"], hit.t) if not record else (hit.detail["s"], hit.t, traj)


def settle_to_section(sys: SystemDef, mu: float, section: Section,
                      seed: tuple, t_settle: float,
                      opts: FlowOptions = None) -> float:
    """Integrate from a seed point and report the last section crossing.

    Used to produce an initial guess for the cycle solver; the returned s
    need only be in the basin of the secant iteration.
    """
    base = _base_opts(opts)
    run_opts = FlowOptions(
        rtol=max(base.rtol, 1e-8), atol=max(base.atol, 1e-10),
        max_steps=base.max_steps, blowup=base.blowup,
        record=False, section=section, time_sign=base.time_sign)
    traj = flow(sys, ModeState(t=0.0, x=seed[0], y=seed[1]), mu,
                t_settle, run_opts)
    hits = traj.section_hits
    if not hits:
        raise NoReturnError(
            f"settle run from {seed} produced no section crossing "
            f"(status {traj.status})")
    return hits[-1].detail["s"]


def find_limit_cycle(sys: SystemDef, mu: float, section: Section,
                     s_guess: float, t_max: float = 1e3,
                     opts: FlowOptions = None, max_iter: int = 100,
                     origin: tuple = (0.0, 0.0)) -> LimitCycle:
    """Locate a limit cycle as a fixed point of the section return map.

    Secant iteration on g(s) = P(s) - s with a bisection safeguard once a
    bracket appears, to |g| <= 1e-10 * (1 + |s|).  The converged cycle is
    re-integrated for one period to collect samples, and the Floquet
    multiplier is estimated by central differences of P.
    """
    def g(s):
        sp, _ = return_map(sys, mu, section, s, t_max=t_max, opts=opts)
        return sp - s

    a = s_guess
    ga = g(a)
    b = s_guess * (1 + 1e-3) + 1e-14
    gb = g(b)
    lo = hi = None
    glo = ghi = None
    best, gbest = (a, ga) if abs(ga) < abs(gb) else (b, gb)
    converged = abs(gbest) <= FIXED_POINT_RTOL * (1 + abs(best))
    it = 0
    while not converged and it < max_iter:
        it += 1
        if ga * gb < 0:
            lo, hi = (a, b) if a < b else (b, a)
            glo, ghi = (ga, gb) if a < b else (gb, ga)
        if gb != ga:
            c = b - gb * (b - a) / (gb - ga)
        else:
            c = 0.5 * (a + b)
        if lo is not None and not (lo < c < hi):
            c = 0.5 * (lo + hi)
        step_cap = 0.5 * (abs(b) + abs(s_guess)) + 1e-9
        if abs(c - b) > step_cap:
            c = b + math.copysign(step_cap, c - b)
        smin, smax = section.s_range
        if smin > -math.inf or smax < math.inf:
            c = min(max(c, smin + 1e-15 if smin > -math.inf else c),
                    smax if smax < math.inf else c)
        try:
            gc = g(c)
        except (NoReturnError, NumericError):
            c = 0.5 * (b + c)
            try:
                gc = g(c)
            except (NoReturnError, NumericError):
                break
        a, ga, b, gb = b, gb, c, gc
        if lo is not None:
            if glo * gc <= 0:
                hi, ghi = c, gc
            else:
                lo, glo = c, gc
        if abs(gc) < abs(gbest):
            best, gbest = c, gc
        converged = abs(gbest) <= FIXED_POINT_RTOL * (1 + abs(best))
    s_star = best

    try:
        sp, period, traj = return_map(sys, mu, section, s_star, t_max=t_max,
                                      opts=opts, record=True)
    except (NoReturnError, NumericError):
        return LimitCycle(s_star, math.nan, math.nan, math.nan, math.nan,
                          False, residual=abs(gbest))
    amplitude, x_max = _cycle_extent(traj, origin)
    multiplier, flag = floquet_multiplier(sys, mu, section, s_star,
                                          t_max=t_max, opts=opts,
                                          _return_detail=True)
    return LimitCycle(section_point=s_star, period=period, amplitude=amplitude,
                      x_max=x_max, multiplier=multiplier, converged=converged,
                      samples=traj.samples, events=traj.events,
                      residual=abs(gbest), multiplier_flag=flag)


def _cycle_extent(traj: Trajectory, origin: tuple):
    """Max distance from origin and max x over one sampled period.

    The discrete maximum over samples is refined by a local parabolic fit in
    time so the reported value does not depend on step placement.
    """
    ox, oy = origin
    samples = traj.samples
    if not samples:
        return math.nan, math.nan

    def refine(metric):
        vals = [metric(s[1], s[2]) for s in samples]
        i = max(range(len(vals)), key=vals.__getitem__)
        best = vals[i]
        if 0 < i < len(vals) - 1:
            t0, t1, t2 = samples[i - 1][0], samples[i][0], samples[i + 1][0]
            v0, v1, v2 = vals[i - 1], vals[i], vals[i + 1]
            # parabolic maximum through three unevenly spaced samples
            d01, d12, d02 = t1 - t0, t2 - t1, t2 - t0
            t_eps = 1e-9 * (1 + abs(t1))
            if d01 > t_eps and d12 > t_eps:
                denom = d01 * d12 * d02
                a = 2 * (v0 * d12 - v1 * d02 + v2 * d01) / denom
                if a < 0:
                    # vertex of the parabola through three unequal samples
                    num = (v0 - v1) * d12 ** 2 - (v2 - v1) * d01 ** 2
                    den = (v0 - v1) * d12 + (v2 - v1) * d01
                    if den != 0:
                        tv = t1 + 0.5 * num / den
                        if t0 <= tv <= t2:
                            # quadratic through the three points, evaluated at tv
                            L0 = ((tv - t1) * (tv - t2)) / ((t0 - t1) * (t0 - t2))
                            L1 = ((tv - t0) * (tv - t2)) / ((t1 - t0) * (t1 - t2))
                            L2 = ((tv - t0) * (tv - t1)) / ((t2 - t0) * (t2 - t1))
                            best = max(best, v0 * L0 + v1 * L1 + v2 * L2)
        return best

    amplitude = refine(lambda x, y: math.hypot(x - ox, y - oy))
    x_max = refine(lambda x, y: x)
    return amplitude, x_max


def cycle_metrics(cycle: LimitCycle, origin: tuple = (0.0, 0.0)):
    """(amplitude, period, x_max) of a converged cycle.

    Amplitude is the maximum distance of the orbit from the bifurcation
    point; x_max the maximum x over the cycle.
    """
    ox, oy = origin
    if origin == (0.0, 0.0) or not cycle.samples:
        return cycle.amplitude, cycle.period, cycle.x_max
    amp = max(math.hypot(s[1] - ox, s[2] - oy) for s in cycle.samples)
    return amp, cycle.period, cycle.x_max


def floquet_multiplier(sys: SystemDef, mu: float, section: Section,
                       s_star: float, t_max: float = 1e3,
                       opts: FlowOptions = None, _return_detail: bool = False):
    """dP/ds at the fixed point by central finite differences.

    h = max(1e-6, 1e-4 * |s*|); falls back to a one-sided difference (and
    flags it) if one offset trajectory fails to return.
    """
    h = max(1e-6, 1e-4 * abs(s_star))
    flag = ""

    def P(s):
        return return_map(sys, mu, section, s, t_max=t_max, opts=opts)[0]

    try:
        pp = P(s_star + h)
    except (NoReturnError, NumericError):
        pp = None
    try:
        pm = P(s_star - h)
    except (NoReturnError, NumericError):
        pm = None
    if pp is not None and pm is not None:
        m = (pp - pm) / (2 * h)
    elif pp is not None:
        m = (pp - P(s_star)) / h
        flag = "one_sided_forward"
    elif pm is not None:
        m = (P(s_star) - pm) / h
        flag = "one_sided_backward"
    else:
        m, flag = math.nan, "failed"
    if _return_detail:
        return m, flag
    return m
