"""Piecewise-smooth planar systems and their local analysis.

A system is a collection of smooth pieces glued along switching manifolds
(the lines x=0 and, for four-piece systems, y=0), together with a switching
structure that says how trajectories behave at the manifold: continuous
matching, Filippov sliding, impacts, impulses, hysteresis bands or delayed
switching.  All values are immutable after construction; every operation
here is a pure function, so systems can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NotSlidingError, NumericError

Rhs = Callable[[float, float, float], tuple]

TANGENCY_RTOL = 1e-9
BOUNDARY_TOL = 1e-9
FOLD_RESIDUAL_TOL = 1e-10
DEGENERATE_FOLD_TOL = 1e-8


@dataclass(frozen=True)
class Region:
    """Axis-aligned sign condition, e.g. x <= 0 or a quadrant.

    Bounds of None are unconstrained.  Hysteresis pieces carry mu-dependent
    bounds (|x| <= band) so that overshoot samples still lie in the closure.
    """

    x_low: Optional[float] = None
    x_high: Optional[float] = None
    y_low: Optional[float] = None
    y_high: Optional[float] = None

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        if self.x_low is not None and x < self.x_low - tol:
            return False
        if self.x_high is not None and x > self.x_high + tol:
            return False
        if self.y_low is not None and y < self.y_low - tol:
            return False
        if self.y_high is not None and y > self.y_high + tol:
            return False
        return True

    def interior_contains(self, x: float, y: float, tol: float = BOUNDARY_TOL) -> bool:
        if self.x_low is not None and x < self.x_low + tol:
            return False
        if self.x_high is not None and x > self.x_high - tol:
            return False
        if self.y_low is not None and y < self.y_low + tol:
            return False
        if self.y_high is not None and y > self.y_high - tol:
            return False
        return True

    def on_boundary(self, x: float, y: float, tol: float = BOUNDARY_TOL) -> bool:
        return self.contains(x, y, tol) and not self.interior_contains(x, y, tol)

    @property
    def x_side(self) -> int:
        """+1 if the region lies in x >= const, -1 for x <= const, 0 otherwise."""
        if self.x_low is not None and self.x_high is None:
            return 1
        if self.x_high is not None and self.x_low is None:
            return -1
        return 0


@dataclass(frozen=True)
class SmoothPiece:
    """One smooth component of the vector field.

    rhs(x, y, mu) -> (xdot, ydot).  jacobian(x, y, mu) -> 2x2 array; when
    None a central finite-difference Jacobian is used.  smoothness_tag is
    one of 'linear', 'affine', 'smooth', 'sqrt_singular'.
    """

    rhs: Rhs
    region: Region = field(default_factory=Region)
    jacobian: Optional[Callable[[float, float, float], np.ndarray]] = None
    smoothness_tag: str = "smooth"

    def __call__(self, x: float, y: float, mu: float) -> tuple:
        return self.rhs(x, y, mu)

    def jac(self, x: float, y: float, mu: float) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x, y, mu), dtype=float)
        return finite_difference_jacobian(self.rhs, x, y, mu)


def finite_difference_jacobian(rhs: Rhs, x: float, y: float, mu: float,
                               h: float = 1e-6) -> np.ndarray:
    hx = h * (1.0 + abs(x))
    hy = h * (1.0 + abs(y))
    fxp = rhs(x + hx, y, mu)
    fxm = rhs(x - hx, y, mu)
    fyp = rhs(x, y + hy, mu)
    fym = rhs(x, y - hy, mu)
    return np.array(
        [[(fxp[0] - fxm[0]) / (2 * hx), (fyp[0] - fym[0]) / (2 * hy)],
         [(fxp[1] - fxm[1]) / (2 * hx), (fyp[1] - fym[1]) / (2 * hy)]])


@dataclass(frozen=True)
class SwitchingStructure:
    """How the pieces are glued together.

    variant: 'continuous' | 'filippov' | 'impact' | 'impulse' | 'hysteresis'
             | 'delay' | 'two_manifolds'

    For hysteresis the thresholds sit at x = +band/-band with band = mu; for
    delay the switching lag is mu time units.  Impulse systems carry the
    source crossing direction and a target-manifold residual used to verify
    that the reset lands on the target.
    """

    variant: str
    source_direction: int = 1
    target_residual: Optional[Callable[[float, float], float]] = None

    VARIANTS = ("continuous", "filippov", "impact", "impulse",
                "hysteresis", "delay", "two_manifolds")

    def __post_init__(self):
        if self.variant not in self.VARIANTS:
            raise DomainError(f"unknown switching variant {self.variant!r}")


@dataclass(frozen=True)
class SystemDef:
    """A complete piecewise-smooth planar system.

    pieces maps piece ids to SmoothPiece.  Single-manifold systems use ids
    'L' (x<=0) and 'R' (x>=0); impact/impulse systems a single 'M'; four
    piece systems 'Q1'..'Q4' (counterclockwise quadrants).  reset(y, mu) is
    the impact law; planar_reset(x, y, mu) the impulse map.
    """

    pieces: dict
    switching: SwitchingStructure
    reset: Optional[Callable[[float, float], float]] = None
    planar_reset: Optional[Callable[[float, float, float], tuple]] = None
    mu_range: tuple = (-1.0, 1.0)
    mu: float = 0.0              # bound parameter value
    name: str = ""

    def piece(self, piece_id: str) -> SmoothPiece:
        try:
            return self.pieces[piece_id]
        except KeyError:
            raise DomainError(f"unknown piece {piece_id!r}") from None

    def piece_at(self, x: float, y: float) -> str:
        """Piece whose region interior contains the point (closure fallback)."""
        for pid, p in self.pieces.items():
            if p.region.interior_contains(x, y):
                return pid
        for pid, p in self.pieces.items():
            if p.region.contains(x, y):
                return pid
        raise DomainError(f"point ({x}, {y}) not covered by any piece")


@dataclass(frozen=True)
class EquilibriumInfo:
    location: tuple
    eigenvalues: tuple           # pair of complex numbers
    kind: str                    # stable_focus, unstable_focus, stable_node,
                                 # unstable_node, saddle, center
    admissibility: str           # admissible, virtual, boundary
    piece_id: str = ""


@dataclass(frozen=True)
class FoldInfo:
    location: tuple
    piece_id: str
    visibility: str              # 'visible' | 'invisible'
    curvature: float
    degenerate: bool = False


# ---------------------------------------------------------------------------
# field evaluation and manifold analysis
# ---------------------------------------------------------------------------

def evaluate_field(sys: SystemDef, piece_id: str, x: float, y: float,
                   mu: float) -> tuple:
    """Evaluate one piece's vector field at a point of its region closure."""
    lo, hi = sys.mu_range
    if not (lo <= mu <= hi):
        raise DomainError(f"mu={mu} outside valid range [{lo}, {hi}]")
    piece = sys.piece(piece_id)
    if not piece.region.contains(x, y):
        raise DomainError(
            f"({x}, {y}) outside closure of piece {piece_id!r} region")
    fx, fy = piece.rhs(x, y, mu)
    if not (math.isfinite(fx) and math.isfinite(fy)):
        raise NumericError(f"non-finite field at ({x}, {y}), piece {piece_id!r}")
    return fx, fy


def sliding_field(fL: tuple, fR: tuple) -> tuple:
    """Filippov sliding field on x=0: the convex combination tangent to it.

    f_s = (fR1*fL - fL1*fR) / (fR1 - fL1), i.e. weight lam = fL1/(fL1-fR1)
    on fR.  Requires opposite-sign normal components.
    """
    fL1, fL2 = fL
    fR1, fR2 = fR
    if fL1 == fR1:
        raise DomainError("degenerate sliding point: equal normal components")
    if fL1 * fR1 >= 0:
        raise NotSlidingError(
            f"normal components fL1={fL1}, fR1={fR1} do not oppose")
    denom = fR1 - fL1
    ys = (fR1 * fL2 - fL1 * fR2) / denom
    return 0.0, ys


def filippov_weight(fL1: float, fR1: float) -> float:
    """Convex weight lam on fR such that (1-lam)*fL1 + lam*fR1 = 0."""
    return fL1 / (fL1 - fR1)


def classify_manifold_point(sys: SystemDef, y: float, mu: float,
                            tol_rel: float = TANGENCY_RTOL) -> str:
    """Classify (0, y) of a Filippov system by the two normal components."""
    fL = sys.piece("L").rhs(0.0, y, mu)
    fR = sys.piece("R").rhs(0.0, y, mu)
    scale = 1.0 + max(abs(fL[0]), abs(fL[1]), abs(fR[0]), abs(fR[1]))
    tol = tol_rel * scale
    if min(abs(fL[0]), abs(fR[0])) <= tol:
        return "tangency"
    if fL[0] > 0 and fR[0] < 0:
        return "attracting_sliding"
    if fL[0] < 0 and fR[0] > 0:
        return "repelling_sliding"
    return "crossing_up" if fL[0] > 0 else "crossing_down"


def fold_points(sys: SystemDef, piece_id: str, mu: float,
                y_window: tuple, n_scan: int = 1000) -> list:
    """Folds of one piece on the manifold x=0 within a y-window.

    Simple roots of the normal component y -> f1(0, y) are bracketed on a
    uniform scan and polished to |f1| <= 1e-10.  Visibility follows the
    curvature convention: for a piece occupying x>0 a fold is visible iff
    the flow's tangent parabola bends into x>0 (curvature > 0), mirrored
    for x<0 pieces.
    """
    piece = sys.piece(piece_id)
    side = piece.region.x_side
    ya, yb = y_window
    if not yb > ya:
        raise DomainError("empty y_window")

    def g(y):
        return piece.rhs(0.0, y, mu)[0]

    ys = np.linspace(ya, yb, n_scan + 1)
    vals = np.array([g(y) for y in ys])
    folds = []
    for i in range(n_scan):
        a, b, ga, gb = ys[i], ys[i + 1], vals[i], vals[i + 1]
        if ga == 0.0:
            root = a
        elif ga * gb < 0:
            root = _polish_root(g, a, b, ga, gb)
        else:
            continue
        if folds and abs(root - folds[-1]) < (yb - ya) / n_scan * 1e-6:
            continue
        folds.append(root)
    if vals[-1] == 0.0:
        folds.append(ys[-1])

    out = []
    for y0 in folds:
        fx, fy = piece.rhs(0.0, y0, mu)
        if abs(fx) > FOLD_RESIDUAL_TOL:
            continue
        jac = piece.jac(0.0, y0, mu)
        # curvature: d/dt of the normal component along the flow
        curv = jac[0, 0] * fx + jac[0, 1] * fy
        scale = 1.0 + abs(fx) + abs(fy)
        degenerate = abs(curv) <= DEGENERATE_FOLD_TOL * scale
        if side >= 0:
            visible = curv > 0
        else:
            visible = curv < 0
        out.append(FoldInfo(location=(0.0, y0), piece_id=piece_id,
                            visibility="visible" if visible else "invisible",
                            curvature=curv, degenerate=degenerate))
    return out


def _polish_root(g, a, b, ga, gb, tol=FOLD_RESIDUAL_TOL, max_iter=200):
    """Safeguarded bisection/secant for a bracketed scalar root."""
    for _ in range(max_iter):
        if gb != ga:
            c = b - gb * (b - a) / (gb - ga)
        else:
            c = 0.5 * (a + b)
        if not (min(a, b) < c < max(a, b)):
            c = 0.5 * (a + b)
        gc = g(c)
        if abs(gc) <= tol or abs(b - a) < 1e-16 * (1 + abs(c)):
            return c
        if ga * gc <= 0:
            b, gb = c, gc
        else:
            a, ga = c, gc
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

def _classify_eigs(eigs) -> str:
    l1, l2 = eigs
    re1, re2 = l1.real, l2.real
    if abs(l1.imag) > 1e-12 * (1 + abs(l1)):
        if abs(re1) <= 1e-12 * (1 + abs(l1)):
            return "center"
        return "stable_focus" if re1 < 0 else "unstable_focus"
    if re1 * re2 < 0:
        return "saddle"
    return "stable_node" if re1 < 0 else "unstable_node"


def _admissibility(region: Region, x: float, y: float) -> str:
    if region.on_boundary(x, y):
        return "boundary"
    return "admissible" if region.interior_contains(x, y) else "virtual"


def equilibria(sys: SystemDef, piece_id: str, mu: float,
               bbox: tuple = (-2.0, 2.0, -2.0, 2.0),
               grid: int = 21) -> list:
    """Equilibria of one piece's field (admissible or virtual).

    Linear and affine pieces are solved exactly from the Jacobian at the
    origin; other pieces run damped Newton from a grid of seeds over bbox.
    sqrt-singular pieces are searched only where the field is differentiable
    (a boundary layer |x| < 1e-12 around the manifold is excluded).
    """
    piece = sys.piece(piece_id)
    out = []
    if piece.smoothness_tag in ("linear", "affine"):
        A = piece.jac(0.0, 0.0, mu)
        b = np.array(piece.rhs(0.0, 0.0, mu))
        try:
            z = np.linalg.solve(A, -b)
        except np.linalg.LinAlgError:
            return []
        res = np.array(piece.rhs(z[0], z[1], mu))
        if np.max(np.abs(res)) > 1e-9 * (1 + np.max(np.abs(b))):
            return []
        eigs = np.linalg.eigvals(A)
        out.append(EquilibriumInfo(
            location=(float(z[0]), float(z[1])),
            eigenvalues=(complex(eigs[0]), complex(eigs[1])),
            kind=_classify_eigs(eigs),
            admissibility=_admissibility(piece.region, z[0], z[1]),
            piece_id=piece_id))
        return out

    xa, xb, ya, yb = bbox
    seeds_x = np.linspace(xa, xb, grid)
    seeds_y = np.linspace(ya, yb, grid)
    found = []
    for sx in seeds_x:
        for sy in seeds_y:
            if piece.smoothness_tag == "sqrt_singular" and abs(sx) < 1e-3:
                continue
            z = _damped_newton(piece, sx, sy, mu)
            if z is None:
                continue
            x0, y0 = z
            if piece.smoothness_tag == "sqrt_singular" and abs(x0) < 1e-12:
                continue
            if any(abs(x0 - u) + abs(y0 - v) < 1e-8 for u, v in found):
                continue
            found.append((x0, y0))
    for x0, y0 in found:
        J = piece.jac(x0, y0, mu)
        eigs = np.linalg.eigvals(J)
        out.append(EquilibriumInfo(
            location=(x0, y0),
            eigenvalues=(complex(eigs[0]), complex(eigs[1])),
            kind=_classify_eigs(eigs),
            admissibility=_admissibility(piece.region, x0, y0),
            piece_id=piece_id))
    return out


def _damped_newton(piece: SmoothPiece, x: float, y: float, mu: float,
                   tol: float = 1e-12, max_iter: int = 60):
    fx, fy = piece.rhs(x, y, mu)
    r = math.hypot(fx, fy)
    for _ in range(max_iter):
        if not math.isfinite(r):
            return None
        if r <= tol:
            return x, y
        try:
            J = piece.jac(x, y, mu)
            dx, dy = np.linalg.solve(J, [-fx, -fy])
        except (np.linalg.LinAlgError, ValueError):
            return None
        lam = 1.0
        for _ in range(25):
            xn, yn = x + lam * dx, y + lam * dy
            fxn, fyn = piece.rhs(xn, yn, mu)
            rn = math.hypot(fxn, fyn)
            if math.isfinite(rn) and rn < r:
                x, y, fx, fy, r = xn, yn, fxn, fyn, rn
                break
            lam *= 0.5
        else:
            return None
    return (x, y) if r <= 1e-9 else None


def alpha_criticality(lamL: float, omL: float, lamR: float, omR: float) -> float:
    """Criticality coefficient lamL/omL + lamR/omR of a focus/focus pair.

    Negative alpha means the stable focus dominates and the bifurcating
    cycle is stable.
    """
    if omL <= 0 or omR <= 0:
        raise DomainError("angular frequencies must be positive")
    return lamL / omL + lamR / omR
