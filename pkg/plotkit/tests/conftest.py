"""Fixtures: real exported files produced through the lab's CLI."""

import json
import pathlib
import subprocess
import sys

import pytest

ALL_IDS = ("H",) + tuple(str(i) for i in range(1, 21))


@pytest.fixture(scope="session")
def export_dir(tmp_path_factory):
    """Portrait JSON for all 21 entries plus sweep CSV + fit JSON each."""
    from hlb.cli import main as hlb_main

    root = tmp_path_factory.mktemp("exports")
    for eid in ALL_IDS:
        portrait = root / f"portrait_{eid}.json"
        code = hlb_main(["portrait", "--id", eid, "--mu-neg=-1e-2",
                         "--mu-pos", "1e-2", "--t-end", "40",
                         "--out", str(portrait)])
        assert code == 0, f"portrait export failed for {eid}"
        sweep = root / f"sweep_{eid}.csv"
        fit = root / f"fit_{eid}.json"
        code = hlb_main(["sweep", "--id", eid, "--out", str(sweep),
                         "--fit-out", str(fit)])
        assert code == 0, f"sweep export failed for {eid}"
    return root


@pytest.fixture(scope="session")
def hopf_portrait(export_dir):
    return export_dir / "portrait_H.json"


@pytest.fixture()
def synthetic_portrait(tmp_path):
    """Minimal hand-built document for schema-level tests."""
    doc = {
        "schema_version": 1,
        "entry": "X",
        "name": "synthetic",
        "records": [{
            "mu": -0.01,
            "manifolds": [{"axis": "x", "value": 0.0}],
            "trajectories": [],
            "events": [],
            "equilibria": [{"piece": "L", "x": -0.5, "y": 0.0,
                            "kind": "stable_focus",
                            "admissibility": "admissible"}],
            "folds": [],
            "sliding_regions": [],
            "cycle": None,
        }],
    }
    path = tmp_path / "synthetic.json"
    path.write_text(json.dumps(doc))
    return path, doc
