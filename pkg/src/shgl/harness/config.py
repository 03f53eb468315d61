"""INI config files whose sections mirror :class:`SimConfig`.

Sections and their keys::

    [grid]     M, points_per_2pi, delta, dealias, gl_half_length, gl_n
    [noise]    seed, sigma, noise_ref_points_per_2pi, noise_time_refine
    [physics]  eps, nu, nonlinearity, ic, ic_a0, ic_modes, ic_amplitude, ic_wavenumber
    [run]      T0, dt, dt_max, t_final, record_every, store_fields, blowup,
               kappa, gamma, rho, workers
"""
from __future__ import annotations

import ast
import configparser
import dataclasses
from pathlib import Path

from ..solvers import SimConfig

__all__ = ["SECTIONS", "RUN_OPTIONS", "load_config", "dump_config"]

SECTIONS = {
    "grid": ("M", "points_per_2pi", "delta", "dealias", "gl_half_length", "gl_n"),
    "noise": ("seed", "sigma", "noise_ref_points_per_2pi", "noise_time_refine"),
    "physics": ("eps", "nu", "nonlinearity", "ic", "ic_a0", "ic_modes", "ic_amplitude",
                "ic_wavenumber"),
    "run": ("T0", "dt", "dt_max", "t_final", "record_every", "store_fields", "blowup"),
}
RUN_OPTIONS = {"kappa": 0.05, "gamma": 0.05, "rho": 2.0, "workers": 1}

_DEFAULTS = {f.name: f.default for f in dataclasses.fields(SimConfig)}


def _coerce(name: str, raw: str, default):
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        return tuple(tuple(float(v) for v in m) for m in ast.literal_eval(raw))
    return raw.strip()


def load_config(path, **overrides) -> tuple[SimConfig, dict]:
    """Parse an INI file into ``(SimConfig, run options)``; ``overrides`` win."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(Path(path)):
        raise FileNotFoundError(path)
    known = set(SECTIONS)
    unknown = [s for s in parser.sections() if s not in known]
    if unknown:
        raise ValueError(f"unknown config sections {unknown}")
    values, run = {}, dict(RUN_OPTIONS)
    for section, keys in SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key in keys:
                values[key] = _coerce(key, raw, _DEFAULTS[key])
            elif section == "run" and key in RUN_OPTIONS:
                run[key] = type(RUN_OPTIONS[key])(raw)
            else:
                raise ValueError(f"unknown key {key!r} in [{section}]")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**values), run


def dump_config(cfg: SimConfig, path, run: dict | None = None) -> Path:
    """Write ``cfg`` (and run options) in the format read by :func:`load_config`."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    d = dataclasses.asdict(cfg)
    for section, keys in SECTIONS.items():
        parser[section] = {k: repr(d[k]) if isinstance(d[k], tuple) else str(d[k]) for k in keys}
    for k, v in (run or {}).items():
        parser["run"][k] = str(v)
    path = Path(path)
    with path.open("w") as fh:
        parser.write(fh)
    return path
