"""Stochastic Swift-Hohenberg equation and its Ginzburg-Landau modulation approximation.

Submodules
----------
grids          fast/slow periodic grids and fields
weights        weights and weighted Lebesgue, Sobolev and Hölder norms
noise          counter-based space-time white noise and fast/slow coupling
spectral       symbols, semigroups, OU updates, bumps and exchange kernels
solvers        SH and GL integrators
approximation  u_A, its residual and its error
harness        sweeps, diagnostics, reports and the command line
"""
from .approximation import (ApproximationPair, approx_error, build_uA, noise_approx_defect,
                            residual_eval, run_coupled)
from .grids import (FastGrid, Field, GridError, SlowGrid, make_fast_grid, make_periodic_grid,
                    slow_grid_from)
from .noise import NoisePath, SlowNoiseView, SlowWhiteNoise, band_coefficients
from .solvers import BlowUpError, SimConfig, Trajectory, run_gl, run_sh, step_gl, step_sh
from .spectral import (BumpSpec, KernelSpec, SymbolSpec, bump_eval, exchange_defect,
                       kernel_build, kernel_sobolev_norm, ou_mode_update, semigroup_apply,
                       symbol_eval)
from .weights import (NormSpec, WeightSpec, c0_kappa_norm, check_weight_derivatives,
                      holder_norm, weighted_lp_norm, weighted_sobolev_norm)

__version__ = "0.1.0"
