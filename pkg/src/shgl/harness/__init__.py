"""Sweeps, inequality diagnostics, reports and the ``shgl`` command line."""
from .diagnostics import (check_energy_inequality, check_quadratic_form, regularity_report)
from .report import emit_report
from .sweep import ScalingReport, SweepPlan, fit_power_law, run_sweep, scaling_report
