import math
from fractions import Fraction

import numpy as np
import pytest

from hlb import DomainError, build_system, expected_exponents, list_entries
from hlb.catalog import ENTRIES, ORDERED_IDS, get_entry

# the expected scaling exponents (amplitude, period) per entry
EXPONENT_TABLE = {
    "H": ("Hopf", Fraction(1, 2), Fraction(0)),
    "1": ("focus/focus BEB", Fraction(1), Fraction(0)),
    "2": ("focus/node BEB", Fraction(1), Fraction(0)),
    "3": ("generic BEB", Fraction(1), Fraction(0)),
    "4": ("degenerate BEB", Fraction(1), Fraction(0)),
    "5": ("slipping foci", Fraction(1), Fraction(0)),
    "6": ("slipping focus/fold", Fraction(1), Fraction(0)),
    "7": ("slipping folds", Fraction(1, 2), Fraction(1, 2)),
    "8": ("fixed foci", Fraction(1), Fraction(0)),
    "9": ("fixed focus/fold", Fraction(1), Fraction(0)),
    "10": ("fixed folds", Fraction(1, 2), Fraction(1, 2)),
    "11": ("impacting admissible focus", Fraction(1), Fraction(0)),
    "12": ("impacting virtual focus", Fraction(1), Fraction(0)),
    "13": ("impacting virtual node", Fraction(1), Fraction(0)),
    "14": ("impulsive", Fraction(1), Fraction(0)),
    "15": ("hysteretic pseudo-equilibrium", Fraction(1), Fraction(1)),
    "16": ("time-delayed pseudo-equilibrium", Fraction(1), Fraction(1)),
    "17": ("hysteretic two-fold", Fraction(1, 3), Fraction(1, 3)),
    "18": ("time-delayed two-fold", Fraction(1, 2), Fraction(1, 2)),
    "19": ("intersecting discontinuity surfaces", Fraction(1), Fraction(1)),
    "20": ("square-root singularity", Fraction(1), Fraction(0)),
}


def test_list_entries_count_and_ids():
    rows = list_entries()
    assert len(rows) == 21
    assert [r[0] for r in rows] == list(ORDERED_IDS)


def test_expected_exponents_match_table():
    for eid, (name, a, b) in EXPONENT_TABLE.items():
        got_a, got_b = expected_exponents(eid)
        assert (got_a, got_b) == (a, b), eid
        assert ENTRIES[eid].name == name


def test_expected_exponents_spot_values():
    assert expected_exponents("H") == (Fraction(1, 2), Fraction(0))
    assert expected_exponents("17") == (Fraction(1, 3), Fraction(1, 3))
    assert expected_exponents("15") == (Fraction(1), Fraction(1))
    assert expected_exponents("7") == (Fraction(1, 2), Fraction(1, 2))
    assert expected_exponents("18") == (Fraction(1, 2), Fraction(1, 2))
    assert expected_exponents("19") == (Fraction(1), Fraction(1))


def test_unknown_id_raises():
    with pytest.raises(DomainError):
        expected_exponents("99")
    with pytest.raises(DomainError):
        build_system("99", 1e-3)


def test_mu_out_of_range_raises():
    with pytest.raises(DomainError):
        build_system("1", 5.0)


def test_builders_respect_switching_invariants():
    rng = np.random.default_rng(11)
    mus = (1e-4, 5e-4, 1e-3, 5e-3, 1e-2)
    for eid in ORDERED_IDS:
        for mu in mus:
            sys = build_system(eid, mu)
            v = sys.switching.variant
            if v == "continuous":
                for _ in range(20):
                    y = float(rng.uniform(-1, 1))
                    fL = sys.piece("L").rhs(0.0, y, mu)
                    fR = sys.piece("R").rhs(0.0, y, mu)
                    assert fL == pytest.approx(fR, abs=1e-12)
            if v == "impact":
                assert sys.reset(0.0, mu) == 0.0
                for _ in range(20):
                    y = float(rng.uniform(1e-6, 1.0))
                    assert sys.reset(y, mu) > 0
            if v in ("hysteresis", "delay"):
                assert mu > 0


def test_builders_cover_the_plane():
    rng = np.random.default_rng(5)
    for eid in ORDERED_IDS:
        sys = build_system(eid, 1e-3)
        impactlike = sys.switching.variant in ("impact", "impulse")
        for _ in range(50):
            x, y = rng.uniform(-1, 1, size=2)
            if impactlike:
                x = -abs(x)
            sys.piece_at(x, y)   # raises if uncovered


def test_regularized_entries_degrade_to_filippov_at_nonpositive_mu():
    for eid in ("15", "16", "17", "18"):
        sys = build_system(eid, -1e-3)
        assert sys.switching.variant == "filippov"
        sys = build_system(eid, 1e-3)
        assert sys.switching.variant in ("hysteresis", "delay")


def test_two_fold_entries_have_invisible_fold_pair():
    from hlb import fold_points
    mu = 1e-3
    for eid in ("7", "10"):
        sys = build_system(eid, mu)
        for pid, y_exp in (("L", -mu), ("R", mu)):
            folds = fold_points(sys, pid, mu, (-6 * mu, 6 * mu))
            assert len(folds) == 1
            assert folds[0].location[1] == pytest.approx(y_exp, abs=1e-9)
            assert folds[0].visibility == "invisible"


def test_impacting_entries_equilibria():
    from hlb import equilibria
    mu = 1e-3
    eq11 = equilibria(build_system("11", mu), "M", mu)
    assert any(e.kind == "unstable_focus" and e.admissibility == "admissible"
               for e in eq11)
    for eid, kind in (("12", "stable_focus"), ("13", "stable_node")):
        eqs = equilibria(build_system(eid, mu), "M", mu)
        assert any(e.kind == kind and e.admissibility == "virtual"
                   and e.location[0] > 0 for e in eqs)


def test_alpha_flip_builder_positive_alpha():
    from hlb import alpha_criticality
    entry = get_entry("1")
    sys = entry.alpha_flip_builder(1e-3)
    eL = np.linalg.eigvals(sys.piece("L").jac(0.0, 0.0, 1e-3))
    eR = np.linalg.eigvals(sys.piece("R").jac(0.0, 0.0, 1e-3))
    alpha = alpha_criticality(eL[0].real, abs(eL[0].imag),
                              eR[0].real, abs(eR[0].imag))
    assert alpha > 0


def test_degenerate_beb_no_attracting_sliding_for_positive_mu():
    # sampling manifold points in a wide window finds no attracting sliding
    from hlb import classify_manifold_point
    mu = 1e-3
    sys = build_system("4", mu)
    for y in np.linspace(-8 * mu, 8 * mu, 1000):
        assert classify_manifold_point(sys, float(y), mu) != "attracting_sliding"


def test_catalog_entry_metadata_serializable():
    import json
    doc = [{"id": i, "name": n, "a": str(a), "b": str(b)}
           for i, n, a, b in list_entries()]
    text = json.dumps(doc)
    assert json.loads(text)[0]["id"] == "H"
