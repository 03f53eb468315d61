"""A single coupled run: the SH pattern next to its Ginzburg-Landau envelope.

The fast field u lives on x in [-L/2, L/2).  The amplitude A lives on the
slow grid X = eps x.  The approximation u_A = eps A(eps^2 t, eps x) e^{ix} + c.c.
should track u with an error of order eps, while the residual of u_A is
an order smaller.  Run with ``python demos/01_modulated_wave.py``.
"""
import numpy as np

from shgl import ApproximationPair, SimConfig, c0_kappa_norm
from shgl.grids import Field

for eps in (0.4, 0.2, 0.1):
    cfg = SimConfig(eps=eps, seed=0)
    pair = ApproximationPair(cfg)
    worst_err = worst_res = 0.0
    for _ in range(cfg.n_steps):
        pair.advance()
        worst_err = max(worst_err, pair.error())
        worst_res = max(worst_res, c0_kappa_norm(Field(pair.fast, pair.residual()), 0.05))
    u = pair.fast.to_physical(pair.sh.u, real=True)
    print(f"eps={eps:<4}  slow time T0=1 reached after {cfg.n_steps} fast steps  "
          f"sup|u| {np.max(np.abs(u)):.3f}  sup|u_A| {np.max(np.abs(pair.uA_values())):.3f}")
    print(f"          sup_t ||u - u_A||_L2(rho,eps) = {worst_err:.4f}   "
          f"sup_t ||Res(u_A)||_C0_kappa = {worst_res:.4f}")

# Halving eps roughly halves the error and cuts the residual by about 2^1.5.
