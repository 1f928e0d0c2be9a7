"""Experiment orchestration, reports, plots and the ``lab`` CLI."""
from .config import ConfigError, ExperimentConfig, Report
from .experiments import ANCHORS, DEFAULTS, run
from .plot import PlotError, plot_report, svg_profile

__all__ = ["ConfigError", "ExperimentConfig", "Report", "ANCHORS", "DEFAULTS", "run",
           "PlotError", "plot_report", "svg_profile"]
