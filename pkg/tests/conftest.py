import math

import pytest

from hlb import Region, SmoothPiece, SwitchingStructure, SystemDef


def two_piece(fL, fR, variant="filippov", mu=0.0, tagL="smooth", tagR="smooth"):
    """Ad-hoc two-piece system for unit tests."""
    return SystemDef(
        pieces={"L": SmoothPiece(fL, Region(x_high=0.0), smoothness_tag=tagL),
                "R": SmoothPiece(fR, Region(x_low=0.0), smoothness_tag=tagR)},
        switching=SwitchingStructure(variant),
        mu_range=(-1.0, 1.0), mu=mu)


@pytest.fixture(scope="session")
def harmonic_system():
    def harm(x, y, mu):
        return -y, x
    return two_piece(harm, harm, variant="continuous")


@pytest.fixture(scope="session")
def hopf_system():
    from hlb.catalog import get_entry
    return get_entry("H").builder(0.01)


@pytest.fixture(scope="session")
def verify_reports():
    """All 21 verification reports plus the wall time of the run.

    Shared by the acceptance criteria so the Table-1 sweep happens once.
    """
    import time
    from hlb import ORDERED_IDS, verify_entry

    t0 = time.time()
    reports = {eid: verify_entry(eid) for eid in ORDERED_IDS}
    elapsed = time.time() - t0
    return reports, elapsed
