"""Monte Carlo eps-sweep and power-law fits, written as CSV and SVG.

This is the computation behind the residual, error and noise-defect scaling
checks.  Each seed gives one sup-in-time value per quantity; the fit is taken
through the 90th percentile and the median over seeds.  Output goes to
``demo_out/``.  Takes about a minute.
"""
from pathlib import Path

from shgl.harness.report import emit_report
from shgl.harness.sweep import SweepPlan, run_records, scaling_report

out = Path("demo_out")
plan = SweepPlan(eps_list=(0.4, 0.3, 0.2, 0.15, 0.1), seeds_per_eps=16, quantity="residual")
records = run_records(plan.configs(), plan.kappa, plan.gamma, plan.rho, with_sh=True)

for quantity in ("residual", "error", "noise_defect"):
    rep = scaling_report(records, quantity)
    paths = emit_report(rep, "csv", out, quantity) + emit_report(rep, "svg", out, quantity)
    verdict = "inside" if rep.passed else "OUTSIDE"
    print(f"{quantity:>13}: slope q90 {rep.slope_q90:.2f}, median {rep.slope_median:.2f}, "
          f"{verdict} band {rep.pass_band}  -> {', '.join(p.name for p in paths)}")

# The noise defect comes out near eps^1.5, steeper than the eps^(1-kappa)
# upper bound it is compared against; see the README.
