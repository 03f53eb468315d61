"""Deterministic and statistical checks of the supporting estimates.

Covers the weighted quadratic-form inequality, the weighted energy
inequality along a trajectory, the OU variance of the exact update, the
semigroup kernel bounds and the domain-size convergence.
"""
from shgl.harness.diagnostics import (diagnostics_suite, energy_refinement_check,
                                      kernel_bounds_fit, kernel_bounds_table)

for row in diagnostics_suite(seed=0):
    print(f"{row['check']:<32} {row['value']:<10.4g} {'ok' if row['passed'] else 'FAIL'}")

energy = energy_refinement_check()
print("\nenergy inequality: discretization defect "
      f"{energy['coarse']['discretization_defect']:.4f} at dt=0.01 -> "
      f"{energy['fine']['discretization_defect']:.4f} at dt=0.005")

fit = kernel_bounds_fit(kernel_bounds_table())
print("\nkernel H^m norms, fitted eps-slopes at T=1:")
for key, slope in fit.items():
    if key != "passed":
        print(f"  m={key}: {slope:.3f}")
print(f"  within bounds: {bool(fit['passed'])}")
