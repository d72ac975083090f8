"""Numerical laboratory for Hopf-like bifurcations in planar
piecewise-smooth ODE systems: a catalog of reference systems, an
event-driven integrator with sliding/impact/hysteresis/delay semantics,
return-map limit-cycle solvers, and scaling-law verification."""

from .catalog import (CatalogEntry, ENTRIES, ORDERED_IDS, build_system,
                      expected_exponents, get_entry, list_entries)
from .cycles import (LimitCycle, Section, cycle_metrics, find_limit_cycle,
                     floquet_multiplier, return_map, settle_to_section)
from .errors import (BracketError, DomainError, HlbError,
                     ModelInconsistencyError, NoReturnError, NotSlidingError,
                     NumericError, SweepFailedError)
from .integrate import (Event, FlowOptions, ModeState, Trajectory,
                        apply_reset, flow, locate_event, slide_segment)
from .pwsys import (EquilibriumInfo, FoldInfo, Region, SmoothPiece,
                    SwitchingStructure, SystemDef, alpha_criticality,
                    classify_manifold_point, equilibria, evaluate_field,
                    fold_points, sliding_field)
from .scaling import (EntryReport, ScalingFit, SweepRow, fit_exponents,
                      solve_entry, sweep_mu, verify_entry)

__version__ = "0.1.0"
