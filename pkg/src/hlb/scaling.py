"""Parameter sweeps, scaling-law fits and per-entry verification.

A sweep solves for the bifurcating limit cycle on a log-spaced mu grid and
fits amplitude ~ k1 * mu**a and period ~ k2 * mu**b by least squares in
log-log coordinates.  verify_entry compares the fitted exponents against
the entry's expected values and runs its qualitative cycle checks.

Sweeps are processed from the largest mu downward so each solve can be
warm-started from the previous fixed point scaled by the expected exponent;
the smallest cycles are then found without long settle runs.  Rows are
reported in ascending mu order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import catalog
from .catalog import CatalogEntry, get_entry
from .cycles import LimitCycle, find_limit_cycle, settle_to_section
from .errors import DomainError, HlbError, NoReturnError, NumericError, SweepFailedError
from .integrate import FlowOptions
from .pwsys import classify_manifold_point, equilibria, fold_points

CSV_HEADER = "mu,amplitude,period,x_max,multiplier,converged"


@dataclass
class SweepRow:
    mu: float
    amplitude: float = math.nan
    period: float = math.nan
    x_max: float = math.nan
    multiplier: float = math.nan
    converged: bool = False
    section_point: float = math.nan
    error: str = ""


@dataclass
class ScalingFit:
    a_hat: float
    k1: float
    b_hat: float
    k2: float
    r2_amp: float
    r2_per: float
    n_points: int
    x_max_exponent: Optional[float] = None


@dataclass
class EntryReport:
    id: str
    name: str
    expected_a: float
    expected_b: float
    a_hat: float = math.nan
    b_hat: float = math.nan
    k1: float = math.nan
    k2: float = math.nan
    r2_amp: float = math.nan
    r2_per: float = math.nan
    x_max_exponent: Optional[float] = None
    n_converged: int = 0
    n_rows: int = 0
    pass_a: bool = False
    pass_b: bool = False
    qualitative: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    error: str = ""

    @property
    def passed(self) -> bool:
        return (self.pass_a and self.pass_b and not self.error
                and all(self.qualitative.values()))


def solve_entry(entry: CatalogEntry, mu: float, s_guess: float = None,
                opts: FlowOptions = None) -> LimitCycle:
    """Build the entry at mu and locate its limit cycle.

    Without a warm-start guess a settle run from the entry's seed point
    provides one.
    """
    sys = entry.builder(mu)
    section = entry.section(mu)
    if s_guess is None:
        s_guess = settle_to_section(sys, mu, section, entry.seed(mu),
                                    entry.settle_time(mu), opts=opts)
    return find_limit_cycle(sys, mu, section, s_guess,
                            t_max=entry.t_max_return, opts=opts,
                            origin=entry.amplitude_origin)


def sweep_mu(entry_id, mu_grid=None, opts: FlowOptions = None,
             warm_start: bool = True) -> list:
    """One SweepRow per mu, via build -> find cycle -> metrics.

    Non-converged rows are flagged and kept.  Raises SweepFailedError when
    nothing converges.
    """
    entry = get_entry(entry_id)
    grid = tuple(mu_grid) if mu_grid is not None else entry.mu_grid
    if any(m <= 0 for m in grid):
        raise DomainError("mu grid must be positive")
    if list(grid) != sorted(grid):
        raise DomainError("mu grid must be ascending")
    a = float(entry.expected_a)
    rows = {}
    s_prev = None
    mu_prev = None
    for mu in sorted(grid, reverse=True):
        row = SweepRow(mu=mu)
        s_guess = None
        if warm_start and s_prev is not None:
            s_guess = s_prev * (mu / mu_prev) ** a
        try:
            cyc = solve_entry(entry, mu, s_guess=s_guess, opts=opts)
            row.amplitude = cyc.amplitude
            row.period = cyc.period
            row.x_max = cyc.x_max
            row.multiplier = cyc.multiplier
            row.section_point = cyc.section_point
            row.converged = (cyc.converged and math.isfinite(cyc.amplitude)
                             and cyc.amplitude > 0 and cyc.period > 0)
        except HlbError as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        if row.converged:
            s_prev, mu_prev = row.section_point, mu
        rows[mu] = row
    out = [rows[mu] for mu in grid]
    if not any(r.converged for r in out):
        raise SweepFailedError(f"entry {entry.id}: no row of the sweep converged")
    return out


def fit_exponents(rows: list) -> ScalingFit:
    """Least-squares power-law exponents from converged sweep rows.

    Fits log(amplitude) and log(period) against log(mu); requires at least
    four converged rows spanning 1.5 decades.
    """
    good = [r for r in rows if r.converged]
    if len(good) < 4:
        raise DomainError(f"need >= 4 converged rows, have {len(good)}")
    mus = np.array([r.mu for r in good])
    span = math.log10(mus.max() / mus.min())
    if span < 1.5:
        raise DomainError(f"mu span {span:.2f} decades < 1.5")
    lx = np.log(mus)
    la = np.log([r.amplitude for r in good])
    lp = np.log([r.period for r in good])
    a_hat, lk1, r2a = _linfit(lx, la)
    b_hat, lk2, r2p = _linfit(lx, lp)
    fit = ScalingFit(a_hat=a_hat, k1=math.exp(lk1), b_hat=b_hat,
                     k2=math.exp(lk2), r2_amp=r2a, r2_per=r2p,
                     n_points=len(good))
    if all(r.x_max > 0 and math.isfinite(r.x_max) for r in good):
        fit.x_max_exponent = _linfit(lx, np.log([r.x_max for r in good]))[0]
    return fit


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    yhat = A @ (slope, intercept)
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


# ---------------------------------------------------------------------------
# qualitative checks
# ---------------------------------------------------------------------------

def _winding_number(samples, point):
    px, py = point
    total = 0.0
    prev = None
    for (_, x, y, _, _) in samples:
        ang = math.atan2(y - py, x - px)
        if prev is not None:
            d = ang - prev
            while d > math.pi:
                d -= 2 * math.pi
            while d < -math.pi:
                d += 2 * math.pi
            total += d
        prev = ang
    return total / (2 * math.pi)


def _check_stable_cycle(entry, sys, mu, cycle):
    ok = (cycle.converged and math.isfinite(cycle.multiplier)
          and abs(cycle.multiplier) < 1.0)
    return ok, f"converged={cycle.converged} multiplier={cycle.multiplier:.6g}"


def _check_alpha_negative(entry, sys, mu, cycle):
    from .pwsys import alpha_criticality
    JL = sys.piece("L").jac(0.0, 0.0, mu)
    JR = sys.piece("R").jac(0.0, 0.0, mu)
    eL = np.linalg.eigvals(JL)
    eR = np.linalg.eigvals(JR)
    if abs(eL[0].imag) < 1e-12 or abs(eR[0].imag) < 1e-12:
        return False, "pieces are not both focal"
    alpha = alpha_criticality(eL[0].real, abs(eL[0].imag),
                              eR[0].real, abs(eR[0].imag))
    return alpha < 0, f"alpha={alpha:.4f}"


def _check_encircles_unstable_focus(entry, sys, mu, cycle):
    for pid in sys.pieces:
        for eq in equilibria(sys, pid, mu):
            if eq.kind == "unstable_focus" and eq.admissibility == "admissible":
                w = _winding_number(cycle.samples, eq.location)
                return abs(abs(w) - 1) < 0.1, f"winding={w:.3f} about {eq.location}"
    return False, "no admissible unstable focus found"


def _check_sliding_segment(entry, sys, mu, cycle):
    kinds = {e.kind for e in cycle.events}
    return ({"sliding_entry", "sliding_exit"} <= kinds,
            f"event kinds {sorted(kinds)}")


def _check_one_sided(entry, sys, mu, cycle):
    xs = [s[1] for s in cycle.samples if not s[4]]
    x_max = max(xs) if xs else 0.0
    return x_max < 1e-10, f"max non-sliding x = {x_max:.3e}"


def _check_no_attracting_sliding_in_bbox(entry, sys, mu, cycle):
    ys = [s[2] for s in cycle.samples]
    lo, hi = min(ys), max(ys)
    bad = 0
    for y in np.linspace(lo, hi, 1000):
        if classify_manifold_point(sys, y, mu) == "attracting_sliding":
            bad += 1
    return bad == 0, f"{bad}/1000 attracting points in [{lo:.3g}, {hi:.3g}]"


def _check_two_folds(entry, sys, mu, cycle):
    w = (-6 * mu, 6 * mu)
    fl = fold_points(sys, "L", mu, w)
    fr = fold_points(sys, "R", mu, w)
    ok = (len(fl) == 1 and len(fr) == 1
          and abs(fl[0].location[1] + mu) < 1e-6 * (1 + mu)
          and abs(fr[0].location[1] - mu) < 1e-6 * (1 + mu)
          and fl[0].visibility == "invisible"
          and fr[0].visibility == "invisible")
    return ok, (f"L folds {[f.location[1] for f in fl]}, "
                f"R folds {[f.location[1] for f in fr]}")


def _check_admissible_unstable_focus(entry, sys, mu, cycle):
    eqs = equilibria(sys, "M", mu)
    ok = any(e.kind == "unstable_focus" and e.admissibility == "admissible"
             for e in eqs)
    return ok, f"equilibria {[(e.kind, e.admissibility) for e in eqs]}"


def _check_virtual_equilibrium_positive_x(entry, sys, mu, cycle):
    eqs = equilibria(sys, "M", mu)
    ok = any(e.admissibility == "virtual" and e.location[0] > 0 for e in eqs)
    return ok, f"equilibria {[(e.kind, e.admissibility, e.location) for e in eqs]}"


def _check_four_crossings_per_period(entry, sys, mu, cycle):
    # re-run over two periods and count an interior one-period window, so a
    # crossing that coincides with the section stop is not dropped
    from .integrate import FlowOptions, ModeState, flow
    t0, x0, y0, _, _ = cycle.samples[0]
    T = cycle.period
    traj = flow(sys, ModeState(0.0, x0, y0), mu, 2.2 * T,
                FlowOptions(record=False))
    n = sum(1 for e in traj.events
            if e.kind == "crossing" and 0.1 * T <= e.t < 1.1 * T)
    return n == 4, f"{n} crossings in one period window"


def _check_penetration_much_smaller(entry, sys, mu, cycle):
    ok = 0 < cycle.x_max <= 0.05 * cycle.amplitude
    return ok, f"x_max={cycle.x_max:.3e} amplitude={cycle.amplitude:.3e}"


QUALITATIVE_CHECKS = {
    "stable_cycle": _check_stable_cycle,
    "alpha_negative": _check_alpha_negative,
    "encircles_unstable_focus": _check_encircles_unstable_focus,
    "sliding_segment": _check_sliding_segment,
    "one_sided": _check_one_sided,
    "no_attracting_sliding_in_bbox": _check_no_attracting_sliding_in_bbox,
    "two_folds": _check_two_folds,
    "admissible_unstable_focus": _check_admissible_unstable_focus,
    "virtual_equilibrium_positive_x": _check_virtual_equilibrium_positive_x,
    "four_crossings_per_period": _check_four_crossings_per_period,
    "penetration_much_smaller": _check_penetration_much_smaller,
}


def run_qualitative_checks(entry: CatalogEntry, mu: float,
                           s_guess: float = None, opts: FlowOptions = None):
    """Run the entry's named predicates on the cycle found at mu."""
    sys = entry.builder(mu)
    cycle = solve_entry(entry, mu, s_guess=s_guess, opts=opts)
    results = {}
    details = {}
    for name in entry.qualitative:
        fn = QUALITATIVE_CHECKS[name]
        try:
            ok, detail = fn(entry, sys, mu, cycle)
        except HlbError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results[name] = bool(ok)
        details[name] = detail
    return results, details, cycle


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_entry(entry_id, tol_a: float = 0.05, tol_b: float = 0.05,
                 opts: FlowOptions = None, mu_qualitative: float = 1e-3,
                 min_converged: int = None) -> EntryReport:
    """Sweep the default grid, fit exponents and compare against Table 1.

    A failed sweep yields a failing report rather than an exception.
    """
    entry = get_entry(entry_id)
    rep = EntryReport(id=entry.id, name=entry.name,
                      expected_a=float(entry.expected_a),
                      expected_b=float(entry.expected_b))
    try:
        rows = sweep_mu(entry_id, opts=opts)
    except HlbError as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        return rep
    rep.rows = rows
    rep.n_rows = len(rows)
    rep.n_converged = sum(r.converged for r in rows)
    need = min_converged if min_converged is not None else max(4, round(0.75 * len(rows)))
    if rep.n_converged < need:
        rep.error = f"only {rep.n_converged}/{len(rows)} rows converged"
        return rep
    try:
        fit = fit_exponents(rows)
    except DomainError as exc:
        rep.error = str(exc)
        return rep
    rep.a_hat, rep.b_hat = fit.a_hat, fit.b_hat
    rep.k1, rep.k2 = fit.k1, fit.k2
    rep.r2_amp, rep.r2_per = fit.r2_amp, fit.r2_per
    rep.x_max_exponent = fit.x_max_exponent
    rep.pass_a = abs(fit.a_hat - float(entry.expected_a)) <= tol_a
    rep.pass_b = abs(fit.b_hat - float(entry.expected_b)) <= tol_b
    mu_q = min(mu_qualitative, max(entry.mu_grid))
    guess = None
    for r in rows:
        if r.converged:
            guess = r.section_point * (mu_q / r.mu) ** float(entry.expected_a)
            break
    try:
        results, details, _ = run_qualitative_checks(entry, mu_q,
                                                     s_guess=guess, opts=opts)
        rep.qualitative = results
    except HlbError as exc:
        rep.qualitative = {"cycle_solve": False}
        rep.error = f"qualitative checks failed: {exc}"
    return rep


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def rows_to_csv(rows: list) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(f"{r.mu!r},{r.amplitude!r},{r.period!r},"
                     f"{r.x_max!r},{r.multiplier!r},{int(r.converged)}")
    return "\n".join(lines) + "\n"


def report_to_dict(rep: EntryReport) -> dict:
    return {
        "id": rep.id,
        "name": rep.name,
        "expected": {"a": rep.expected_a, "b": rep.expected_b},
        "fit": {"a_hat": rep.a_hat, "b_hat": rep.b_hat,
                "k1": rep.k1, "k2": rep.k2,
                "r2_amp": rep.r2_amp, "r2_per": rep.r2_per,
                "x_max_exponent": rep.x_max_exponent},
        "n_converged": rep.n_converged,
        "n_rows": rep.n_rows,
        "pass_a": rep.pass_a,
        "pass_b": rep.pass_b,
        "qualitative": rep.qualitative,
        "passed": rep.passed,
        "error": rep.error,
        "rows": [{"mu": r.mu, "amplitude": r.amplitude, "period": r.period,
                  "x_max": r.x_max, "multiplier": r.multiplier,
                  "converged": r.converged, "error": r.error}
                 for r in rep.rows],
    }
