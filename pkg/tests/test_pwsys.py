import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hlb import (DomainError, NotSlidingError, Region, SmoothPiece,
                 alpha_criticality, classify_manifold_point, equilibria,
                 evaluate_field, fold_points, sliding_field)
from hlb.catalog import get_entry
from hlb.pwsys import filippov_weight

from conftest import two_piece


# ---------------------------------------------------------------------------
# evaluate_field
# ---------------------------------------------------------------------------

def test_evaluate_harmonic_piece():
    sys = two_piece(lambda x, y, mu: (-y, x), lambda x, y, mu: (-y, x))
    assert evaluate_field(sys, "R", 1.0, 0.0, 0.0) == (0.0, 1.0)


def test_evaluate_sqrt_piece_finite_and_continuous():
    sys = get_entry("20").builder(1e-3)
    fL = evaluate_field(sys, "L", 0.0, 0.3, 1e-3)
    fR = evaluate_field(sys, "R", 0.0, 0.3, 1e-3)
    assert all(math.isfinite(v) for v in fR)
    assert fL == pytest.approx(fR, abs=1e-14)


def test_evaluate_beb_prototype_left_piece():
    # left piece of the focus/focus prototype at (-1, 0.5), mu=0:
    # (0.5*(-1) - 0.5, 1*(-1) + 0) evaluated by hand
    sys = get_entry("1").builder(0.0)
    assert evaluate_field(sys, "L", -1.0, 0.5, 0.0) == pytest.approx((-1.0, -1.0))


def test_evaluate_outside_region_raises():
    sys = get_entry("1").builder(0.0)
    with pytest.raises(DomainError):
        evaluate_field(sys, "L", 0.5, 0.0, 0.0)


def test_evaluate_mu_out_of_range():
    sys = get_entry("1").builder(0.0)
    with pytest.raises(DomainError):
        evaluate_field(sys, "L", -0.5, 0.0, 99.0)


# ---------------------------------------------------------------------------
# sliding_field
# ---------------------------------------------------------------------------

def test_sliding_field_symmetric():
    assert sliding_field((1.0, 1.0), (-1.0, 1.0)) == (0.0, 1.0)


def test_sliding_field_direct_formula():
    assert sliding_field((2.0, 0.0), (-1.0, 3.0)) == (0.0, 2.0)
    assert sliding_field((3.0, 1.0), (-1.0, 0.0)) == (0.0, 0.25)


def test_sliding_field_same_sign_raises():
    with pytest.raises(NotSlidingError):
        sliding_field((1.0, 0.0), (2.0, 0.0))


def test_sliding_field_degenerate_raises():
    with pytest.raises(DomainError):
        sliding_field((1.0, 0.0), (1.0, 5.0))


@given(st.floats(0.01, 10), st.floats(-10, -0.01),
       st.floats(-5, 5), st.floats(-5, 5))
def test_sliding_field_convex_combination(fL1, fR1, fL2, fR2):
    zero, ys = sliding_field((fL1, fL2), (fR1, fR2))
    lam = filippov_weight(fL1, fR1)
    assert zero == 0.0
    assert 0.0 < lam < 1.0
    assert abs((1 - lam) * fL1 + lam * fR1) <= 1e-12 * (1 + abs(fL1) + abs(fR1))
    assert ys == pytest.approx((1 - lam) * fL2 + lam * fR2, rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------------------
# classify_manifold_point
# ---------------------------------------------------------------------------

def _const_fields(fL1, fR1):
    return two_piece(lambda x, y, mu: (fL1, 0.0), lambda x, y, mu: (fR1, 0.0))


def test_classify_attracting():
    assert classify_manifold_point(_const_fields(1.0, -1.0), 0.0, 0.0) \
        == "attracting_sliding"


def test_classify_repelling():
    assert classify_manifold_point(_const_fields(-1.0, 1.0), 0.0, 0.0) \
        == "repelling_sliding"


def test_classify_crossing():
    assert classify_manifold_point(_const_fields(1.0, 1.0), 0.0, 0.0) \
        == "crossing_up"
    assert classify_manifold_point(_const_fields(-1.0, -1.0), 0.0, 0.0) \
        == "crossing_down"


def test_classify_tangency():
    assert classify_manifold_point(_const_fields(1e-12, -1.0), 0.0, 0.0) \
        == "tangency"


def test_continuity_invariant_across_manifold():
    # continuous entries agree across pieces at 100 random (y, mu) samples
    rng = np.random.default_rng(7)
    for eid in ("H", "1", "2", "20"):
        entry = get_entry(eid)
        for _ in range(100):
            mu = float(rng.uniform(-0.05, 0.05))
            y = float(rng.uniform(-1, 1))
            sys = entry.builder(mu)
            fL = sys.piece("L").rhs(0.0, y, mu)
            fR = sys.piece("R").rhs(0.0, y, mu)
            assert fL == pytest.approx(fR, abs=1e-12)


# ---------------------------------------------------------------------------
# fold_points
# ---------------------------------------------------------------------------

def test_fold_linear_root():
    sys = two_piece(lambda x, y, mu: (1.0, 1.0),
                    lambda x, y, mu: (-y + 2.0, 1.0))
    folds = fold_points(sys, "R", 0.0, (-5.0, 5.0))
    assert len(folds) == 1
    assert folds[0].location[1] == pytest.approx(2.0, abs=1e-10)


def test_fold_visibility_invisible_for_right_piece():
    sys = two_piece(lambda x, y, mu: (1.0, 1.0),
                    lambda x, y, mu: (-y, 1.0))
    (fold,) = fold_points(sys, "R", 0.0, (-1.0, 1.0))
    assert fold.location[1] == pytest.approx(0.0, abs=1e-10)
    assert fold.curvature == pytest.approx(-1.0, rel=1e-6)
    assert fold.visibility == "invisible"


def _scan_fold_oracle(rhs, mu, window, n=10_000):
    """Independent oracle: sign-change scan of the normal component."""
    ys = np.linspace(window[0], window[1], n)
    vals = np.array([rhs(0.0, y, mu)[0] for y in ys])
    roots = []
    for i in range(n - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0:
            a, b = ys[i], ys[i + 1]
            for _ in range(80):
                m = 0.5 * (a + b)
                if rhs(0.0, a, mu)[0] * rhs(0.0, m, mu)[0] <= 0:
                    b = m
                else:
                    a = m
            roots.append(0.5 * (a + b))
    return roots


def test_fold_slipping_pair_matches_scan_oracle():
    mu = 1e-3
    sys = get_entry("7").builder(mu)
    for pid, expected in (("L", -mu), ("R", mu)):
        oracle = _scan_fold_oracle(sys.piece(pid).rhs, mu, (-6 * mu, 6 * mu))
        found = fold_points(sys, pid, mu, (-6 * mu, 6 * mu))
        assert len(found) == len(oracle) == 1
        assert found[0].location[1] == pytest.approx(oracle[0], abs=1e-9)
        assert found[0].location[1] == pytest.approx(expected, abs=1e-9)
        assert found[0].visibility == "invisible"
        # residual invariant
        assert abs(sys.piece(pid).rhs(0.0, found[0].location[1], mu)[0]) <= 1e-10


def test_fold_moves_linearly_with_mu():
    # a simple fold responds O(delta) to a mu perturbation
    entry = get_entry("7")
    mu, d = 1e-3, 1e-6
    y0 = fold_points(entry.builder(mu), "R", mu, (0.0, 5e-3))[0].location[1]
    y1 = fold_points(entry.builder(mu + d), "R", mu + d, (0.0, 5e-3))[0].location[1]
    assert (y1 - y0) / d == pytest.approx(1.0, rel=1e-4)


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

def _tau_delta_system():
    # xdot = tau*x - y, ydot = delta*x - mu with tau=-1, delta=1
    def rhs(x, y, mu):
        return -x - y, x - mu
    return two_piece(rhs, rhs, tagL="affine", tagR="affine")


def test_equilibria_linear_closed_form():
    eqs = equilibria(_tau_delta_system(), "R", 0.01)
    assert len(eqs) == 1
    eq = eqs[0]
    assert eq.location == pytest.approx((0.01, -0.01), abs=1e-12)
    assert eq.kind == "stable_focus"
    lam = eq.eigenvalues[0]
    assert lam.real == pytest.approx(-0.5, abs=1e-12)
    assert abs(lam.imag) == pytest.approx(math.sqrt(0.75), abs=1e-12)


def test_equilibria_virtual_when_region_excludes():
    # L owns x <= 0 but the equilibrium sits at x = 0.01
    eqs = equilibria(_tau_delta_system(), "L", 0.01)
    assert eqs[0].admissibility == "virtual"


def test_equilibria_boundary_at_bifurcation():
    eqs = equilibria(_tau_delta_system(), "L", 0.0)
    assert eqs[0].location == pytest.approx((0.0, 0.0), abs=1e-12)
    assert eqs[0].admissibility == "boundary"


def test_equilibria_newton_on_smooth_piece():
    # quadratically damped focus of the pinned-foci entry: origin only
    sys = get_entry("8").builder(1e-3)
    eqs = equilibria(sys, "L", 1e-3, bbox=(-0.15, 0.15, -0.15, 0.15))
    assert any(np.hypot(*e.location) < 1e-9 for e in eqs)


# ---------------------------------------------------------------------------
# alpha_criticality
# ---------------------------------------------------------------------------

def test_alpha_values():
    assert alpha_criticality(1.0, 1.0, -2.0, 1.0) == pytest.approx(-1.0)
    assert alpha_criticality(1.0, 1.0, -1.0, 1.0) == pytest.approx(0.0)


def test_alpha_beb_prototype_from_eigendecomposition():
    # oracle: eigen-decomposition of the two Jacobians of the prototype
    sys = get_entry("1").builder(0.0)
    eL = np.linalg.eigvals(sys.piece("L").jac(0.0, 0.0, 0.0))
    eR = np.linalg.eigvals(sys.piece("R").jac(0.0, 0.0, 0.0))
    alpha = alpha_criticality(eL[0].real, abs(eL[0].imag),
                              eR[0].real, abs(eR[0].imag))
    assert alpha == pytest.approx(-0.319151, abs=1e-5)
    assert alpha < 0


def test_alpha_domain_error():
    with pytest.raises(DomainError):
        alpha_criticality(1.0, 0.0, 1.0, 1.0)


@given(st.floats(-3, 3), st.floats(0.1, 5), st.floats(-3, 3), st.floats(0.1, 5))
def test_alpha_antisymmetry(lamL, omL, lamR, omR):
    a1 = alpha_criticality(lamL, omL, lamR, omR)
    a2 = alpha_criticality(-lamR, omR, -lamL, omL)
    assert a1 == pytest.approx(-a2, rel=1e-12, abs=1e-12)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(3)
    for eid in ("1", "3", "8", "11"):
        sys = get_entry(eid).builder(1e-3)
        for pid, piece in sys.pieces.items():
            for _ in range(5):
                x, y = rng.uniform(-0.5, 0.5, size=2)
                if piece.region.x_side < 0:
                    x = -abs(x) - 0.01
                elif piece.region.x_side > 0:
                    x = abs(x) + 0.01
                J = piece.jac(x, y, 1e-3)
                from hlb.pwsys import finite_difference_jacobian
                J_fd = finite_difference_jacobian(piece.rhs, x, y, 1e-3)
                assert np.allclose(J, J_fd, rtol=1e-5, atol=1e-8)
