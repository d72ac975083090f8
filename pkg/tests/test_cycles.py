import math

import pytest

from hlb import (NoReturnError, Section, cycle_metrics, find_limit_cycle,
                 floquet_multiplier, return_map)
from hlb.catalog import get_entry

from conftest import two_piece

# section used throughout: the positive x-axis of the smooth normal form
POS_X = Section((0.0, 0.0), (1.0, 0.0), 1)


def test_section_normalizes_direction():
    sec = Section((0.0, 0.0), (0.0, -2.0), 1)
    assert sec.direction == (0.0, -1.0)
    assert sec.point(0.5) == (0.0, -0.5)


def test_return_map_on_invariant_circle(hopf_system):
    # r = sqrt(mu) is invariant: the return is the identity with period 2*pi
    sp, T = return_map(hopf_system, 0.01, POS_X, 0.1)
    assert sp == pytest.approx(0.1, abs=1e-9)
    assert T == pytest.approx(2 * math.pi, abs=1e-9)


def test_return_map_monotone_contraction(hopf_system):
    sp, _ = return_map(hopf_system, 0.01, POS_X, 0.2)
    assert 0.1 < sp < 0.2


def test_return_map_no_return():
    sys = two_piece(lambda x, y, mu: (1.0, 0.0), lambda x, y, mu: (1.0, 0.0),
                    variant="continuous")
    with pytest.raises(NoReturnError):
        return_map(sys, 0.0, POS_X, 1.0, t_max=5.0)


def test_find_limit_cycle_hopf_radius_and_period(hopf_system):
    cyc = find_limit_cycle(hopf_system, 0.01, POS_X, 0.12)
    assert cyc.converged
    assert cyc.amplitude == pytest.approx(0.1, abs=1e-6)
    assert cyc.period == pytest.approx(2 * math.pi, abs=1e-6)
    assert abs(cyc.residual) <= 1e-10 * (1 + cyc.section_point)


def test_hopf_amplitude_square_root_law():
    entry = get_entry("H")
    sys4 = entry.builder(0.04)
    cyc4 = find_limit_cycle(sys4, 0.04, POS_X, 0.18)
    assert cyc4.amplitude == pytest.approx(0.2, abs=1e-6)


def test_floquet_multiplier_matches_variational_oracle(hopf_system):
    # oracle: linearizing rdot = mu r - r^3 about r* = sqrt(mu) gives
    # d(rdot)/dr = -2 mu, so the return derivative is exp(-4 pi mu)
    m = floquet_multiplier(hopf_system, 0.01, POS_X, 0.1)
    assert m == pytest.approx(math.exp(-4 * math.pi * 0.01), abs=1e-5)
    assert 0 < m < 1


def test_floquet_multiplier_rigid_rotation():
    sys = two_piece(lambda x, y, mu: (-y, x), lambda x, y, mu: (-y, x),
                    variant="continuous")
    m = floquet_multiplier(sys, 0.0, POS_X, 0.5)
    assert m == pytest.approx(1.0, abs=1e-6)


def test_hysteretic_two_fold_multiplier_contracts():
    # oracle: iterate the return map from perturbed seeds and watch the
    # geometric contraction toward the fixed point
    entry = get_entry("17")
    mu = 1e-4
    sys = entry.builder(mu)
    sec = entry.section(mu)
    from hlb.scaling import solve_entry
    cyc = solve_entry(entry, mu)
    s_star = cyc.section_point
    h = 0.02 * s_star
    s = s_star + h
    ratios = []
    for _ in range(3):
        sp, _ = return_map(sys, mu, sec, s)
        ratios.append((sp - s_star) / (s - s_star))
        s = sp
    assert all(0 < r < 1 for r in ratios)
    assert cyc.multiplier == pytest.approx(ratios[-1], rel=0.2)
    assert 0 < cyc.multiplier < 1


def test_cycle_metrics_circle(hopf_system):
    cyc = find_limit_cycle(hopf_system, 0.01, POS_X, 0.1)
    amp, T, x_max = cycle_metrics(cyc)
    assert amp == pytest.approx(0.1, abs=1e-6)
    assert x_max == pytest.approx(0.1, abs=1e-6)
    assert T == cyc.period


def test_cycle_metrics_one_sided_cycle():
    # the generic-BEB cycle touches the manifold but never crosses it
    entry = get_entry("3")
    mu = 1e-3
    from hlb.scaling import solve_entry
    cyc = solve_entry(entry, mu)
    amp, T, x_max = cycle_metrics(cyc)
    assert x_max <= 1e-10
    assert amp > 0 and T > 0


def test_return_map_monotone_near_fixed_point():
    # P is increasing on [s*-delta, s*+delta] for stable cycles
    for eid in ("1", "11"):
        entry = get_entry(eid)
        mu = 1e-3
        sys = entry.builder(mu)
        sec = entry.section(mu)
        from hlb.scaling import solve_entry
        cyc = solve_entry(entry, mu)
        s_star = cyc.section_point
        delta = 0.1 * s_star
        ss = [s_star + delta * (k / 2 - 1) for k in range(5)]
        ps = [return_map(sys, mu, sec, s)[0] for s in ss]
        assert all(p2 > p1 for p1, p2 in zip(ps, ps[1:]))


def test_period_positive_on_all_entries_at_one_mu():
    from hlb.scaling import solve_entry
    for eid in ("H", "4", "7", "12", "15", "19"):
        entry = get_entry(eid)
        cyc = solve_entry(entry, 1e-3)
        assert cyc.period > 0
        assert cyc.amplitude > 0
