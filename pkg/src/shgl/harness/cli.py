"""Command line entry point: ``shgl <subcommand> [options]``.

Exit status is 0 iff every pass band checked by the subcommand is met.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..solvers import SimConfig, run_gl, run_sh
from . import diagnostics as diag
from .config import RUN_OPTIONS, load_config
from .report import emit_report, write_csv, write_jsonl
from .sweep import SweepPlan, run_sweep

__all__ = ["main", "build_parser"]

log = logging.getLogger("shgl")

_SWEEPS = {"residual-sweep": "residual", "error-sweep": "error", "noise-check": "noise_defect"}


def _eps_list(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _formats(text: str) -> list[str]:
    fmts = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fmts if f not in ("csv", "jsonl", "svg")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {bad}")
    return fmts


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shgl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("simulate", *_SWEEPS, "kernel-bounds", "diagnostics"):
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="INI file with [grid] [noise] [physics] [run]")
        s.add_argument("--seed", type=int, help="seed (first seed for sweeps)")
        s.add_argument("--out-dir", type=Path, default=Path("out"))
        s.add_argument("--format", type=_formats, default=None,
                       help="comma list of csv, jsonl, svg")
        if name in _SWEEPS or name == "kernel-bounds":
            s.add_argument("--eps-list", type=_eps_list, default=None)
        if name in _SWEEPS:
            s.add_argument("--seeds-per-eps", type=int, default=16)
        if name == "simulate":
            s.add_argument("--model", choices=("sh", "gl"), default="sh")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args) -> tuple[SimConfig, dict]:
    if args.config is not None:
        return load_config(args.config, seed=args.seed)
    cfg = SimConfig() if args.seed is None else SimConfig(seed=args.seed)
    return cfg, dict(RUN_OPTIONS)


def _simulate(args, cfg: SimConfig) -> bool:
    cfg = cfg.with_(store_fields=True)
    traj = run_sh(cfg) if args.model == "sh" else run_gl(cfg)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.model}_{cfg.config_hash()[:12]}"
    names = list(traj.fields)
    np.savez(out / f"{stem}.npz", times=np.asarray(traj.times),
             **{k: traj.array(k) for k in names})
    g = traj.grid
    manifest = {
        "model": args.model, "config_hash": traj.config_hash, "seed": traj.seed,
        "config": cfg.to_dict(), "dt": traj.dt, "times": list(map(float, traj.times)),
        "steps": list(map(int, traj.steps)), "fields": names,
        "grid": {"type": type(g).__name__, "n": int(g.n), "half_length": float(g.half_length),
                 "spacing": float(g.spacing)},
        "arrays": f"{stem}.npz",
    }
    (out / f"{stem}.json").write_text(json.dumps(manifest, indent=2))
    print(f"wrote {out / (stem + '.npz')} ({len(traj.times)} snapshots)")
    return True


def _sweep(args, cfg: SimConfig, run: dict) -> bool:
    quantity = _SWEEPS[args.command]
    plan = SweepPlan(
        eps_list=args.eps_list or (0.4, 0.3, 0.2, 0.15, 0.1),
        seeds_per_eps=args.seeds_per_eps, quantity=quantity, base=cfg,
        first_seed=args.seed if args.seed is not None else cfg.seed,
        kappa=run["kappa"], gamma=run["gamma"], rho=run["rho"], workers=run["workers"])
    rep = run_sweep(plan)
    for fmt in args.format or ["jsonl", "csv", "svg"]:
        for path in emit_report(rep, fmt, args.out_dir):
            print(f"wrote {path}")
    meta = rep.fit_meta()
    print(f"{quantity}: slope q90 {meta['slope_q90']:.3f} (R2 {meta['r2_q90']:.3f}), "
          f"median {meta['slope_median']:.3f} (R2 {meta['r2_median']:.3f}), "
          f"band {rep.pass_band}, target {rep.target}: {'PASS' if rep.passed else 'FAIL'}")
    return rep.passed


def _kernel_bounds(args) -> bool:
    kwargs = {"eps_list": args.eps_list} if args.eps_list else {}
    rows = diag.kernel_bounds_table(**kwargs)
    fit = diag.kernel_bounds_fit(rows)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = write_csv(args.out_dir / "kernel_bounds.csv", rows, ["variant", "eps", "T", "m", "norm"],
                     {"slope_m0.5": fit[0.5], "slope_m1": fit[1.0], "passed": fit["passed"]})
    print(f"wrote {path}")
    print(f"SemigroupBand slopes: m=0.5 {fit[0.5]:.3f}, m=1 {fit[1.0]:.3f}: "
          f"{'PASS' if fit['passed'] else 'FAIL'}")
    return fit["passed"]


def _diagnostics(args) -> bool:
    rows = diag.diagnostics_suite(seed=args.seed or 0)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    fmts = args.format or ["csv"]
    if "csv" in fmts:
        print(f"wrote {write_csv(args.out_dir / 'diagnostics.csv', rows)}")
    if "jsonl" in fmts:
        print(f"wrote {write_jsonl(args.out_dir / 'diagnostics.jsonl', rows)}")
    for r in rows:
        print(f"{r['check']}: {r['value']:.6g} {'PASS' if r['passed'] else 'FAIL'}")
    return all(r["passed"] for r in rows)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    cfg, run = _load(args)
    if args.command == "simulate":
        ok = _simulate(args, cfg)
    elif args.command in _SWEEPS:
        ok = _sweep(args, cfg, run)
    elif args.command == "kernel-bounds":
        ok = _kernel_bounds(args)
    else:
        ok = _diagnostics(args)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
