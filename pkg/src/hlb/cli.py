"""Command-line front end.

Subcommands: list the catalog, simulate a trajectory, sweep a mu grid to
CSV, verify scaling exponents against the expected table, and export phase
portrait data as JSON for plotting.  Exit codes: 0 success (all checks
passed), 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys as _sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import catalog, scaling
from .catalog import ORDERED_IDS, get_entry
from .cycles import find_limit_cycle, settle_to_section
from .errors import DomainError, HlbError
from .integrate import FlowOptions, ModeState, flow
from .pwsys import classify_manifold_point, equilibria, fold_points

SCHEMA_VERSION = 1

USAGE_EXIT = 2


def _dumps(doc, **kw):
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return float(o)
        raise TypeError(f"not JSON serializable: {type(o)}")
    return json.dumps(doc, default=default, **kw)


def _entry_ids(args) -> list:
    if getattr(args, "all", False):
        return list(ORDERED_IDS)
    if args.id is None:
        raise DomainError("one of --id or --all is required")
    eid = str(args.id)
    if eid not in catalog.ENTRIES:
        raise DomainError(f"unknown catalog id {eid!r}")
    return [eid]


# ---------------------------------------------------------------------------
# list
# ---------------------------------------------------------------------------

def cmd_list(args) -> int:
    rows = catalog.list_entries()
    if args.json:
        doc = [{"id": i, "name": n, "expected_a": str(a), "expected_b": str(b)}
               for i, n, a, b in rows]
        _write(args.out, _dumps(doc, indent=2) + "\n")
    else:
        print(f"{'id':>3}  {'a':>5} {'b':>5}  name")
        for i, n, a, b in rows:
            print(f"{i:>3}  {str(a):>5} {str(b):>5}  {n}")
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    entry = get_entry(args.id)
    mu = args.mu
    sys = entry.builder(mu)
    seed = _seed_point(entry, mu, args.seed)
    traj = flow(sys, ModeState(0.0, seed[0], seed[1]), mu, args.t_end,
                FlowOptions(record=True))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "entry": entry.id,
        "mu": mu,
        "t_end": args.t_end,
        "status": traj.status,
        "samples": [[t, x, y, pid, bool(sl)] for t, x, y, pid, sl in traj.samples],
        "events": [_event_dict(e) for e in traj.events],
    }
    _write(args.out, _dumps(doc) + "\n")
    return 0


def _event_dict(e):
    return {"t": e.t, "kind": e.kind, "x": e.x, "y": e.y,
            "detail": _jsonable(e.detail)}


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, tuple):
            out[k] = list(v)
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    entry = get_entry(args.id)
    if args.mu_min is not None or args.mu_max is not None or args.points:
        lo = args.mu_min if args.mu_min is not None else min(entry.mu_grid)
        hi = args.mu_max if args.mu_max is not None else max(entry.mu_grid)
        n = args.points or len(entry.mu_grid)
        grid = tuple(float(m) for m in np.geomspace(lo, hi, n))
    else:
        grid = entry.mu_grid
    rows = scaling.sweep_mu(entry.id, mu_grid=grid)
    csv_text = scaling.rows_to_csv(rows)
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "entry": entry.id,
               "rows": [r.__dict__ for r in rows]}
        _write(args.out, _dumps(doc) + "\n")
    else:
        _write(args.out, csv_text)
    if args.fit_out:
        fit = scaling.fit_exponents(rows)
        fit_doc = {"schema_version": SCHEMA_VERSION, "entry": entry.id,
                   "a_hat": fit.a_hat, "k1": fit.k1, "b_hat": fit.b_hat,
                   "k2": fit.k2, "r2_amp": fit.r2_amp, "r2_per": fit.r2_per,
                   "n_points": fit.n_points,
                   "x_max_exponent": fit.x_max_exponent}
        with open(args.fit_out, "w") as fh:
            fh.write(_dumps(fit_doc, indent=2))
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_one(job):
    eid, tol_a, tol_b = job
    rep = scaling.verify_entry(eid, tol_a=tol_a, tol_b=tol_b)
    return scaling.report_to_dict(rep)


def cmd_verify(args) -> int:
    ids = _entry_ids(args)
    tol_a = args.tol_a if args.tol_a is not None else args.tol
    tol_b = args.tol_b if args.tol_b is not None else args.tol
    jobs = [(eid, tol_a, tol_b) for eid in ids]
    if args.parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            reports = list(pool.map(_verify_one, jobs))
    else:
        reports = [_verify_one(j) for j in jobs]
    reports.sort(key=lambda r: ORDERED_IDS.index(r["id"]))
    doc = {"schema_version": SCHEMA_VERSION, "tol_a": tol_a, "tol_b": tol_b,
           "entries": reports,
           "all_passed": all(r["passed"] for r in reports)}
    _write(args.out, _dumps(doc, indent=2) + "\n")
    for r in reports:
        status = "pass" if r["passed"] else "FAIL"
        line = (f"{r['id']:>3} {status}  a_hat={r['fit']['a_hat']:.4f} "
                f"(expect {r['expected']['a']:.4f})  "
                f"b_hat={r['fit']['b_hat']:.4f} "
                f"(expect {r['expected']['b']:.4f})")
        if r["error"]:
            line += f"  [{r['error']}]"
        print(line, file=_sys.stderr)
    return 0 if doc["all_passed"] else 1


# ---------------------------------------------------------------------------
# portrait
# ---------------------------------------------------------------------------

def cmd_portrait(args) -> int:
    entry = get_entry(args.id)
    mus = [args.mu_neg, args.mu_pos]
    if not (mus[0] < 0 < mus[1]):
        raise DomainError("portrait needs mu_neg < 0 < mu_pos")
    records = [_portrait_record(entry, mu, args.t_end, args.seed)
               for mu in mus]
    doc = {"schema_version": SCHEMA_VERSION, "entry": entry.id,
           "name": entry.name, "records": records}
    _write(args.out, _dumps(doc) + "\n")
    return 0


def _seed_point(entry, mu, rng_seed):
    seed = entry.seed(abs(mu) if mu > 0 else max(abs(mu), 1e-3))
    if rng_seed:
        rng = random.Random(rng_seed)
        jitter = 1e-3 * max(abs(seed[0]), abs(seed[1]), 1e-6)
        seed = (seed[0] + jitter * (2 * rng.random() - 1),
                seed[1] + jitter * (2 * rng.random() - 1))
    return seed


def _portrait_record(entry, mu, t_end, rng_seed) -> dict:
    sys = entry.builder(mu)
    seed = _seed_point(entry, mu, rng_seed)
    traj = flow(sys, ModeState(0.0, seed[0], seed[1]), mu, t_end,
                FlowOptions(record=True))
    eqs = []
    folds = []
    scale = 6 * abs(mu) + 1e-12
    for pid in sys.pieces:
        try:
            for eq in equilibria(sys, pid, mu):
                eqs.append({"piece": pid, "x": eq.location[0],
                            "y": eq.location[1], "kind": eq.kind,
                            "admissibility": eq.admissibility})
        except HlbError:
            pass
        if sys.switching.variant in ("continuous", "filippov"):
            try:
                for f in fold_points(sys, pid, mu, (-scale, scale)):
                    folds.append({"piece": pid, "x": f.location[0],
                                  "y": f.location[1],
                                  "visibility": f.visibility,
                                  "curvature": f.curvature})
            except HlbError:
                pass
    sliding = _sliding_regions(sys, mu, scale)
    cycle = None
    if mu > 0:
        try:
            cyc = scaling.solve_entry(entry, mu)
            if cyc.converged:
                cycle = {"section_point": cyc.section_point,
                         "period": cyc.period,
                         "amplitude": cyc.amplitude,
                         "x_max": cyc.x_max,
                         "multiplier": cyc.multiplier,
                         "samples": [[t, x, y] for t, x, y, _, sl in cyc.samples],
                         "sliding_flags": [bool(s[4]) for s in cyc.samples],
                         "events": [_event_dict(e) for e in cyc.events]}
        except HlbError:
            cycle = None
    return {
        "mu": mu,
        "manifolds": _manifold_lines(sys, mu),
        "trajectories": [{
            "samples": [[t, x, y] for t, x, y, _, _ in traj.samples],
            "status": traj.status,
        }],
        "events": [_event_dict(e) for e in traj.events],
        "equilibria": eqs,
        "folds": folds,
        "sliding_regions": sliding,
        "cycle": cycle,
    }


def _manifold_lines(sys, mu) -> list:
    v = sys.switching.variant
    if v == "two_manifolds":
        return [{"axis": "x", "value": 0.0}, {"axis": "y", "value": 0.0}]
    if v == "hysteresis":
        return [{"axis": "x", "value": -mu}, {"axis": "x", "value": mu}]
    return [{"axis": "x", "value": 0.0}]


def _sliding_regions(sys, mu, scale, n=400) -> list:
    if sys.switching.variant != "filippov":
        return []
    ys = np.linspace(-scale, scale, n)
    segs = []
    cur = None
    for y in ys:
        cls = classify_manifold_point(sys, float(y), mu)
        if cls in ("attracting_sliding", "repelling_sliding"):
            if cur is None or cur["kind"] != cls:
                cur = {"kind": cls, "y_min": float(y), "y_max": float(y)}
                segs.append(cur)
            else:
                cur["y_max"] = float(y)
        else:
            cur = None
    return segs


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _write(path, text):
    if path in (None, "-"):
        _sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlb",
                                description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list catalog entries")
    p_list.add_argument("--json", action="store_true")
    p_list.add_argument("--out", default=None)
    p_list.set_defaults(fn=cmd_list)

    p_sim = sub.add_parser("simulate", help="integrate one trajectory")
    p_sim.add_argument("--id", required=True)
    p_sim.add_argument("--mu", type=float, required=True)
    p_sim.add_argument("--t-end", type=float, default=50.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(fn=cmd_simulate)

    p_sw = sub.add_parser("sweep", help="sweep mu and write CSV/JSON rows")
    p_sw.add_argument("--id", required=True)
    p_sw.add_argument("--mu-min", type=float, default=None)
    p_sw.add_argument("--mu-max", type=float, default=None)
    p_sw.add_argument("--points", type=int, default=None)
    p_sw.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sw.add_argument("--out", default=None)
    p_sw.add_argument("--fit-out", default=None,
                      help="also write the scaling fit as JSON")
    p_sw.set_defaults(fn=cmd_sweep)

    p_ver = sub.add_parser("verify", help="verify scaling exponents")
    g = p_ver.add_mutually_exclusive_group(required=True)
    g.add_argument("--id", default=None)
    g.add_argument("--all", action="store_true")
    p_ver.add_argument("--tol", type=float, default=0.05)
    p_ver.add_argument("--tol-a", type=float, default=None)
    p_ver.add_argument("--tol-b", type=float, default=None)
    p_ver.add_argument("--parallel", action="store_true")
    p_ver.add_argument("--out", default=None)
    p_ver.set_defaults(fn=cmd_verify)

    p_pt = sub.add_parser("portrait", help="export phase-portrait data")
    p_pt.add_argument("--id", required=True)
    p_pt.add_argument("--mu-neg", type=float, default=-1e-2)
    p_pt.add_argument("--mu-pos", type=float, default=1e-2)
    p_pt.add_argument("--t-end", type=float, default=60.0)
    p_pt.add_argument("--seed", type=int, default=0)
    p_pt.add_argument("--out", default=None)
    p_pt.set_defaults(fn=cmd_portrait)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except DomainError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_EXIT
    except HlbError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
