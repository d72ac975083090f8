"""Plotting front end for the bifurcation lab's exported data files:
phase portraits from portrait JSON and log-log scaling plots from sweep
CSV plus fit JSON."""

from .doc import (PortraitDoc, SchemaError, load_fit_json, load_portrait,
                  load_sweep_csv, parse_portrait)
from .render import (build_portrait_figure, build_scaling_figure,
                     render_portrait, render_scaling)

__version__ = "0.1.0"
