"""The 21 reference systems: a classical Hopf bifurcation plus twenty
mechanisms that create a limit cycle at mu = 0 in a planar piecewise-smooth
system, normalized so the cycle exists for mu > 0.

Each entry carries a builder mu -> SystemDef, the expected amplitude and
period scaling exponents, a Poincare section, a seed point for settle runs
and the names of the qualitative checks its cycle must satisfy.  The
left piece always occupies x <= 0.

Right-hand sides are module-level functions of (x, y, mu) so the fixed-step
reference integrator can compile them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .cycles import Section
from .errors import DomainError
from .pwsys import Region, SmoothPiece, SwitchingStructure, SystemDef

MU_RANGE = (-0.2, 0.2)

_SQ2 = math.sqrt(0.5)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _hopf(x, y, mu):
    r2 = x * x + y * y
    return mu * x - y - x * r2, x + mu * y - y * r2


# entry 1: continuous focus/focus, trace 0.5 (left) / -1.0 (right)
def _f01_L(x, y, mu):
    return 0.5 * x - y, x + mu


def _f01_R(x, y, mu):
    return -1.0 * x - y, x + mu


# entry 1 criticality flip: weakly stable right focus, alpha > 0
def _f01flip_R(x, y, mu):
    return -0.2 * x - y, x + mu


# entry 2: continuous focus/node, right trace -2.2 (real eigenvalues)
def _f02_R(x, y, mu):
    return -2.2 * x - y, x + mu


# entry 3: Filippov BEB, unstable focus in the left piece at (-mu, 0)
def _f03_L(x, y, mu):
    return 0.2 * (x + mu) - y, (x + mu) + 0.2 * y


def _f03_R(x, y, mu):
    return y - 2.0 * mu, -1.2 * y + 3.0 * mu


# entry 4: both pieces focal at the manifold, opposite stability, no
# attracting sliding on the unstable side
def _f04_L(x, y, mu):
    return 0.2 * (x + mu) - y, (x + mu) + 0.2 * y


def _f04_R(x, y, mu):
    return -(x + mu) - (y - 1.5 * mu), (x + mu) - (y - 1.5 * mu)


# entries 5/6: boundary foci/fold sliding along the manifold (clockwise)
def _f05_L(x, y, mu):
    return 0.2 * x + (y - mu), -x + 0.2 * (y - mu)


def _f05_R(x, y, mu):
    return -x + (y + mu), -x - (y + mu)


def _f06_L(x, y, mu):
    return -0.3 * x + (y - mu), -x - 0.3 * (y - mu)


def _f06_R(x, y, mu):
    return y + mu, -1.0


# entry 7: invisible fold pair separating with mu, asymmetric speeds
def _f07_L(x, y, mu):
    return -(y + mu), -1.3 - 0.5 * y


def _f07_R(x, y, mu):
    return -(y - mu), 1.0 - 0.7 * y


# entries 8/9: foci/fold pinned at the origin, stability through mu,
# quadratic radial damping away from the manifold
def _f08_L(x, y, mu):
    lam = 0.3 + mu + x
    return lam * x - y, x + lam * y


def _f08_R(x, y, mu):
    lam = -0.3 - x
    return lam * x - y, x + lam * y


def _f09_L(x, y, mu):
    lam = mu + x
    return lam * x - y, x + lam * y


def _f09_R(x, y, mu):
    return -y, 1.0 - 0.8 * y


# entry 10: odd-symmetric invisible-invisible fold pair at +-mu
def _f10_L(x, y, mu):
    return -(y + mu), -1.0 - 0.6 * y


def _f10_R(x, y, mu):
    return -(y - mu), 1.0 - 0.6 * y


# entries 11-13: impacting systems, flow in x <= 0
def _f11_M(x, y, mu):
    return 0.3 * (x + mu) + y, -(x + mu) + 0.3 * y


def _f11_reset(y, mu):
    return 0.3 * y


def _f12_M(x, y, mu):
    return -0.3 * (x - mu) + y, -(x - mu) - 0.3 * y


def _f12_reset(y, mu):
    return 2.4 * y


def _f13_M(x, y, mu):
    return -0.8 * (x - mu) + 1.0 * (y - mu), 0.21 * (x - mu) - 1.2 * (y - mu)


def _f13_reset(y, mu):
    return 1.2 * y


# entry 14: rotational flow with an impulse from x=0 to the half-line
# {y = 0, x <= 0}; impulse magnitude vanishes at the origin
def _f14_M(x, y, mu):
    return -y, x


def _f14_map(x, y, mu):
    # source point (0, y) with y < 0; radial factor 1 + mu - |y|
    return y * (1.0 + mu + y), 0.0


def _f14_target(x, y):
    return y


# entries 15/16: relay fields with a stable sliding point at the origin
def _f15_L(x, y, mu):
    return 1.0, -1.0 - y


def _f15_R(x, y, mu):
    return -1.0, 1.0 - y


# entries 17/18: stable invisible-invisible fold pair at the origin
def _f17_L(x, y, mu):
    return -y, -1.0 - 0.6 * y


def _f17_R(x, y, mu):
    return -y, 1.0 - 0.6 * y


# entry 19: four constant-ish quadrant fields spiralling about the origin
def _f19_Q1(x, y, mu):
    return -1.0, 1.0 + mu


def _f19_Q2(x, y, mu):
    return -1.0, -1.0


def _f19_Q3(x, y, mu):
    return 1.0, -1.0


def _f19_Q4(x, y, mu):
    return 1.0, 1.0 + x


# entry 20: continuous focus/focus with a square-root wall in x > 0
def _f20_L(x, y, mu):
    return 0.5 * x - y, x + mu


def _f20_R(x, y, mu):
    return -1.0 * x - math.sqrt(abs(x)) - y, x + mu


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

_L_HALF = Region(x_high=0.0)
_R_HALF = Region(x_low=0.0)
_PLANE = Region()


def _two_piece(fL, fR, mu, variant, tagL="affine", tagR="affine",
               name="") -> SystemDef:
    if variant == "hysteresis":
        regL, regR = Region(x_high=mu), Region(x_low=-mu)
    elif variant == "delay":
        regL = regR = _PLANE
    else:
        regL, regR = _L_HALF, _R_HALF
    return SystemDef(
        pieces={"L": SmoothPiece(fL, regL, smoothness_tag=tagL),
                "R": SmoothPiece(fR, regR, smoothness_tag=tagR)},
        switching=SwitchingStructure(variant),
        mu_range=MU_RANGE, mu=mu, name=name)


def _build_H(mu):
    return _two_piece(_hopf, _hopf, mu, "continuous", "smooth", "smooth", "H")


def _build_1(mu):
    return _two_piece(_f01_L, _f01_R, mu, "continuous", name="1")


def _build_1_flip(mu):
    return _two_piece(_f01_L, _f01flip_R, mu, "continuous", name="1-flip")


def _build_2(mu):
    return _two_piece(_f01_L, _f02_R, mu, "continuous", name="2")


def _build_3(mu):
    return _two_piece(_f03_L, _f03_R, mu, "filippov", name="3")


def _build_4(mu):
    return _two_piece(_f04_L, _f04_R, mu, "filippov", name="4")


def _build_5(mu):
    return _two_piece(_f05_L, _f05_R, mu, "filippov", name="5")


def _build_6(mu):
    return _two_piece(_f06_L, _f06_R, mu, "filippov", name="6")


def _build_7(mu):
    return _two_piece(_f07_L, _f07_R, mu, "filippov", name="7")


def _build_8(mu):
    return _two_piece(_f08_L, _f08_R, mu, "filippov", "smooth", "smooth", "8")


def _build_9(mu):
    return _two_piece(_f09_L, _f09_R, mu, "filippov", "smooth", "affine", "9")


def _build_10(mu):
    return _two_piece(_f10_L, _f10_R, mu, "filippov", name="10")


def _impacting(fM, reset, mu, name) -> SystemDef:
    return SystemDef(
        pieces={"M": SmoothPiece(fM, Region(x_high=0.0), smoothness_tag="affine")},
        switching=SwitchingStructure("impact"),
        reset=reset, mu_range=MU_RANGE, mu=mu, name=name)


def _build_11(mu):
    return _impacting(_f11_M, _f11_reset, mu, "11")


def _build_12(mu):
    return _impacting(_f12_M, _f12_reset, mu, "12")


def _build_13(mu):
    return _impacting(_f13_M, _f13_reset, mu, "13")


def _build_14(mu):
    return SystemDef(
        pieces={"M": SmoothPiece(_f14_M, Region(x_high=0.0),
                                 smoothness_tag="linear")},
        switching=SwitchingStructure("impulse", source_direction=1,
                                     target_residual=_f14_target),
        planar_reset=_f14_map, mu_range=MU_RANGE, mu=mu, name="14")


def _regularized(fL, fR, mu, variant, name) -> SystemDef:
    # for mu <= 0 the regularization width vanishes: plain Filippov system
    if mu <= 0:
        return _two_piece(fL, fR, mu, "filippov", name=name)
    return _two_piece(fL, fR, mu, variant, name=name)


def _build_15(mu):
    return _regularized(_f15_L, _f15_R, mu, "hysteresis", "15")


def _build_16(mu):
    return _regularized(_f15_L, _f15_R, mu, "delay", "16")


def _build_17(mu):
    return _regularized(_f17_L, _f17_R, mu, "hysteresis", "17")


def _build_18(mu):
    return _regularized(_f17_L, _f17_R, mu, "delay", "18")


def _build_19(mu):
    q = Region
    return SystemDef(
        pieces={"Q1": SmoothPiece(_f19_Q1, q(x_low=0.0, y_low=0.0), smoothness_tag="affine"),
                "Q2": SmoothPiece(_f19_Q2, q(x_high=0.0, y_low=0.0), smoothness_tag="affine"),
                "Q3": SmoothPiece(_f19_Q3, q(x_high=0.0, y_high=0.0), smoothness_tag="affine"),
                "Q4": SmoothPiece(_f19_Q4, q(x_low=0.0, y_high=0.0), smoothness_tag="affine")},
        switching=SwitchingStructure("two_manifolds"),
        mu_range=MU_RANGE, mu=mu, name="19")


def _build_20(mu):
    return _two_piece(_f20_L, _f20_R, mu, "continuous",
                      tagL="affine", tagR="sqrt_singular", name="20")


# ---------------------------------------------------------------------------
# sections and seeds
# ---------------------------------------------------------------------------

def _sec_neg_y(orientation):
    def make(mu):
        return Section((0.0, 0.0), (0.0, -1.0), orientation)
    return make


def _sec_neg_x(orientation, full_line=False):
    def make(mu):
        rng = (-math.inf, math.inf) if full_line else (1e-12, math.inf)
        return Section((0.0, 0.0), (-1.0, 0.0), orientation, rng)
    return make


def _sec_17(mu):
    # the hysteresis switch-on line x = -mu, crossed rightward below it
    return Section((-mu, 0.0), (0.0, -1.0), 1)


def _sec_20(mu):
    # keep the active half-line clear of the square-root layer's exit,
    # where the orbit leaves the manifold tangentially
    return Section((0.0, 0.0), (0.0, -1.0), 1, (0.5 * mu, math.inf))


def _sec_14(mu):
    return Section((0.0, 0.0), (-_SQ2, -_SQ2), 1)


# ---------------------------------------------------------------------------
# the registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    """One reference system with its verification recipe."""

    id: str
    name: str
    expected_a: Fraction
    expected_b: Fraction
    builder: Callable[[float], SystemDef]
    section: Callable[[float], Section]
    seed: Callable[[float], tuple]
    settle_time: Callable[[float], float]
    mu_grid: tuple
    qualitative: tuple = ()
    notes: str = ""
    alpha_flip_builder: Optional[Callable[[float], SystemDef]] = None
    amplitude_origin: tuple = (0.0, 0.0)
    t_max_return: float = 1e3


_DEFAULT_GRID = tuple(float(m) for m in np.geomspace(1e-4, 1e-2, 8))
_CUBE_ROOT_GRID = tuple(float(m) for m in np.geomspace(1e-6, 1e-3, 8))


def _const(v):
    return lambda mu: v


ENTRIES = {}


def _add(entry: CatalogEntry):
    ENTRIES[entry.id] = entry


_add(CatalogEntry(
    id="H", name="Hopf",
    expected_a=Fraction(1, 2), expected_b=Fraction(0),
    builder=_build_H, section=_sec_neg_y(1),
    seed=lambda mu: (0.0, -(2.5 * math.sqrt(mu) + 0.01)),
    settle_time=_const(40.0), mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle",),
    notes="smooth supercritical normal form; cycle radius sqrt(mu)"))

_add(CatalogEntry(
    id="1", name="focus/focus BEB",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_1, section=_sec_neg_y(1),
    seed=lambda mu: (-8 * mu, -8 * mu), settle_time=_const(70.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "alpha_negative", "encircles_unstable_focus"),
    alpha_flip_builder=_build_1_flip,
    notes="continuous piecewise-linear; unstable focus admissible for mu>0"))

_add(CatalogEntry(
    id="2", name="focus/node BEB",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_2, section=_sec_neg_y(1),
    seed=lambda mu: (-6 * mu, -6 * mu), settle_time=_const(70.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "encircles_unstable_focus"),
    notes="right piece is a stable node; no criticality condition"))

_add(CatalogEntry(
    id="3", name="generic BEB",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_3, section=_sec_neg_x(1),
    seed=lambda mu: (-4 * mu, 0.0), settle_time=_const(30.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "sliding_segment", "one_sided"),
    notes="cycle closes through an attracting sliding segment in x<=0"))

_add(CatalogEntry(
    id="4", name="degenerate BEB",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_4, section=_sec_neg_y(1),
    seed=lambda mu: (-5 * mu, -5 * mu), settle_time=_const(70.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "no_attracting_sliding_in_bbox"),
    notes="both pieces focal at the bifurcation point; crossing-only cycle"))

_add(CatalogEntry(
    id="5", name="slipping foci",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_5, section=_sec_neg_y(-1),
    seed=lambda mu: (-6 * mu, 0.0), settle_time=_const(40.0),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="boundary foci at (0, +-mu), clockwise winding"))

_add(CatalogEntry(
    id="6", name="slipping focus/fold",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_6, section=_sec_neg_y(-1),
    seed=lambda mu: (-6 * mu, 0.0), settle_time=_const(40.0),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="stable boundary focus against a slipping fold"))

_add(CatalogEntry(
    id="7", name="slipping folds",
    expected_a=Fraction(1, 2), expected_b=Fraction(1, 2),
    builder=_build_7, section=_sec_neg_y(1),
    seed=lambda mu: (0.0, -3.0 * math.sqrt(mu)),
    settle_time=lambda mu: max(12.0, 260.0 * math.sqrt(mu)),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "two_folds"),
    notes="invisible folds at y=-mu (left piece) and y=+mu (right piece)"))

_add(CatalogEntry(
    id="8", name="fixed foci",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_8, section=_sec_neg_y(1),
    seed=lambda mu: (0.0, -2.0 * mu), settle_time=_const(25.0),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="boundary foci pinned at the origin; net rotation rate "
          "crosses zero at mu=0"))

_add(CatalogEntry(
    id="9", name="fixed focus/fold",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_9, section=_sec_neg_y(1),
    seed=lambda mu: (0.0, -2.0 * mu), settle_time=_const(25.0),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="left focus pinned at the origin against a fixed invisible fold"))

_add(CatalogEntry(
    id="10", name="fixed folds",
    expected_a=Fraction(1, 2), expected_b=Fraction(1, 2),
    builder=_build_10, section=_sec_neg_y(1),
    seed=lambda mu: (0.0, -3.0 * math.sqrt(mu)),
    settle_time=lambda mu: max(12.0, 260.0 * math.sqrt(mu)),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "two_folds"),
    notes="odd-symmetric invisible fold pair centred on the origin"))

_add(CatalogEntry(
    id="11", name="impacting admissible focus",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_11, section=_sec_neg_x(-1),
    seed=lambda mu: (-3 * mu, 0.0), settle_time=_const(40.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "admissible_unstable_focus"),
    notes="unstable focus at (-mu, 0); restitution 0.3 damps the impacts"))

_add(CatalogEntry(
    id="12", name="impacting virtual focus",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_12, section=_sec_neg_x(-1),
    seed=lambda mu: (-5 * mu, 0.0), settle_time=_const(50.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "virtual_equilibrium_positive_x"),
    notes="stable focus at (+mu, 0) outside the domain; impacts pump"))

_add(CatalogEntry(
    id="13", name="impacting virtual node",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_13, section=_sec_neg_x(-1),
    seed=lambda mu: (-3 * mu, 0.0), settle_time=_const(40.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "virtual_equilibrium_positive_x"),
    notes="stable node at (mu, mu) outside the domain"))

_add(CatalogEntry(
    id="14", name="impulsive",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_14, section=_sec_14,
    seed=lambda mu: (-1.5 * mu * _SQ2, -1.5 * mu * _SQ2),
    settle_time=_const(9.0), mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle",),
    notes="quarter-turn rotation plus an impulse to {y=0, x<0} whose "
          "radial gain 1+mu-s crosses unity at the origin"))

_add(CatalogEntry(
    id="15", name="hysteretic pseudo-equilibrium",
    expected_a=Fraction(1), expected_b=Fraction(1),
    builder=_build_15, section=_sec_neg_x(-1, full_line=True),
    seed=lambda mu: (0.0, 0.5 * mu), settle_time=_const(4.0),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="relay loop across the band |x| <= mu; period 4*mu to leading order"))

_add(CatalogEntry(
    id="16", name="time-delayed pseudo-equilibrium",
    expected_a=Fraction(1), expected_b=Fraction(1),
    builder=_build_16, section=_sec_neg_x(-1, full_line=True),
    seed=lambda mu: (-0.2 * mu, 0.5 * mu), settle_time=_const(4.0),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="same relay fields with switching delayed by mu"))

_add(CatalogEntry(
    id="17", name="hysteretic two-fold",
    expected_a=Fraction(1, 3), expected_b=Fraction(1, 3),
    builder=_build_17, section=_sec_17,
    seed=lambda mu: (-mu, -1.3 * (5.0 * mu) ** (1.0 / 3.0)),
    settle_time=lambda mu: max(3.0, 70.0 * (5.0 * mu) ** (1.0 / 3.0)),
    mu_grid=_CUBE_ROOT_GRID, qualitative=("stable_cycle",),
    notes="stable fold pair plus hysteresis band; cube-root amplitude"))

_add(CatalogEntry(
    id="18", name="time-delayed two-fold",
    expected_a=Fraction(1, 2), expected_b=Fraction(1, 2),
    builder=_build_18, section=_sec_neg_y(1),
    seed=lambda mu: (-0.1 * math.sqrt(mu), -2.5 * math.sqrt(mu)),
    settle_time=lambda mu: max(4.0, 150.0 * math.sqrt(mu)),
    mu_grid=_DEFAULT_GRID, qualitative=("stable_cycle",),
    notes="stable fold pair with switching delayed by mu"))

_add(CatalogEntry(
    id="19", name="intersecting discontinuity surfaces",
    expected_a=Fraction(1), expected_b=Fraction(1),
    builder=_build_19, section=_sec_neg_x(1),
    seed=lambda mu: (-2.5 * mu, -0.3 * mu),
    settle_time=lambda mu: max(0.5, 400.0 * mu),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "four_crossings_per_period"),
    notes="four quadrant fields; gain 1+mu per loop against a quadratic "
          "damping in the fourth quadrant"))

_add(CatalogEntry(
    id="20", name="square-root singularity",
    expected_a=Fraction(1), expected_b=Fraction(0),
    builder=_build_20, section=_sec_20,
    seed=lambda mu: (-5 * mu, -2 * mu), settle_time=_const(40.0),
    mu_grid=_DEFAULT_GRID,
    qualitative=("stable_cycle", "penetration_much_smaller"),
    notes="like the focus/focus BEB but a sqrt(|x|) wall keeps the cycle "
          "out of x > 0; max x scales like mu^2"))


ORDERED_IDS = ("H",) + tuple(str(i) for i in range(1, 21))


def get_entry(entry_id) -> CatalogEntry:
    key = str(entry_id)
    if key not in ENTRIES:
        raise DomainError(f"unknown catalog id {entry_id!r}")
    return ENTRIES[key]


def list_entries():
    """(id, name, expected_a, expected_b) for all 21 entries."""
    return [(e.id, e.name, e.expected_a, e.expected_b)
            for e in (ENTRIES[i] for i in ORDERED_IDS)]


def expected_exponents(entry_id):
    e = get_entry(entry_id)
    return e.expected_a, e.expected_b


def build_system(entry_id, mu: float) -> SystemDef:
    e = get_entry(entry_id)
    lo, hi = MU_RANGE
    if not (lo <= mu <= hi):
        raise DomainError(f"mu={mu} outside the catalog range [{lo}, {hi}]")
    return e.builder(mu)
