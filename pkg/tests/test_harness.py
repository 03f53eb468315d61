import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shgl.grids import Field, make_fast_grid
from shgl.harness import cli
from shgl.harness.config import dump_config, load_config
from shgl.harness.diagnostics import (check_energy_inequality, check_quadratic_form,
                                      energy_constants, quadratic_form_constants,
                                      regularity_ensemble, regularity_report)
from shgl.harness.report import emit_report, read_csv, read_jsonl, write_csv
from shgl.harness.sweep import (SweepPlan, fit_power_law, quantile_stats, rerun_record,
                                run_records, scaling_report)
from shgl.solvers import SimConfig, run_gl, run_sh
from shgl.weights import WeightSpec, c0_kappa_norm, holder_norm, weighted_lp_norm

EPS = (0.4, 0.3, 0.2, 0.15, 0.1)


def test_fit_exact_power():
    slope, intercept, r2 = fit_power_law([(e, 3 * e ** 2) for e in EPS])
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(math.log(3), abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_power_law([(0.2, 1.0), (0.2, 2.0), (0.2, 3.0)])
    with pytest.raises(ValueError):
        fit_power_law([(0.2, 1.0), (0.1, 0.0)])


@settings(max_examples=50)
@given(st.integers(0, 2 ** 32 - 1))
def test_fit_noisy_synthetic(seed):
    rng = np.random.default_rng(seed)
    pts = [(e, e ** 1.5 * (1 + 0.05 * rng.uniform(-1, 1))) for e in EPS]
    assert 1.3 <= fit_power_law(pts)[0] <= 1.7


@given(st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=8, unique=True),
       st.floats(1e-3, 1e3))
def test_fit_scale_invariance(values, scale):
    pts = [(0.1 * (i + 1), v) for i, v in enumerate(values)]
    s1, i1, _ = fit_power_law(pts)
    s2, i2, _ = fit_power_law([(e, scale * v) for e, v in pts])
    assert s2 == pytest.approx(s1, rel=1e-9, abs=1e-9)
    assert i2 - i1 == pytest.approx(math.log(scale), rel=1e-9, abs=1e-9)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50))
def test_quantiles_monotone(values):
    s = quantile_stats(values)
    assert s["median"] <= s["q90"] + 1e-9 * (1 + abs(s["q90"]))


def test_sweep_plan_validation():
    with pytest.raises(ValueError):
        SweepPlan(eps_list=(0.4, 0.2))
    with pytest.raises(ValueError):
        SweepPlan(seeds_per_eps=4)
    with pytest.raises(ValueError):
        SweepPlan(quantity="bogus")
    plan = SweepPlan(eps_list=(0.4, 0.3, 0.2), seeds_per_eps=8, first_seed=5)
    cfgs = plan.configs()
    assert len(cfgs) == 24 and cfgs[0].seed == 5 and cfgs[-1].eps == 0.2


def _synthetic_records(fail=0):
    rng = np.random.default_rng(0)
    recs = []
    for e in EPS:
        for s in range(8):
            recs.append({"eps": e, "seed": s, "sup_res_c0kappa": e ** 1.5 * rng.uniform(0.9, 1.1)})
    for r in recs[:fail]:
        r.pop("sup_res_c0kappa")
        r["failed"] = "blow-up"
    return recs


def test_scaling_report_failures():
    ok = scaling_report(_synthetic_records(), "residual")
    assert ok.passed and ok.valid and ok.failures == 0
    some = scaling_report(_synthetic_records(fail=8), "residual")
    assert some.valid and some.failures == 8
    many = scaling_report(_synthetic_records(fail=9), "residual")
    assert not many.valid and not many.passed


def test_report_csv_round_trip(tmp_path):
    rep = scaling_report(_synthetic_records(), "residual")
    (path,) = emit_report(rep, "csv", tmp_path)
    rows, meta = read_csv(path)
    assert len(rows) == 5
    for row, (e, st_) in zip(rows, zip(rep.eps, rep.stats)):
        assert row["eps"] == e
        assert row["q90"] == st_["q90"] and row["median"] == st_["median"]
    assert meta["slope_q90"] == rep.slope_q90 and meta["passed"] is True
    assert len(path.read_text().strip().splitlines()) == 7


def test_report_empty_csv(tmp_path):
    rep = scaling_report([], "residual")
    (path,) = emit_report(rep, "csv", tmp_path)
    assert path.read_text().strip() == "eps,n,median,q90,mean,stderr"


def test_report_jsonl_and_svg(tmp_path):
    rep = scaling_report(_synthetic_records(), "residual")
    (jl,) = emit_report(rep, "jsonl", tmp_path)
    assert read_jsonl(jl) == rep.records
    (svg,) = emit_report(rep, "svg", tmp_path)
    assert svg.read_text().lstrip().startswith("<?xml") and "<svg" in svg.read_text()
    with pytest.raises(ValueError):
        emit_report(rep, "xlsx", tmp_path)


@settings(max_examples=50)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=10))
def test_csv_float_round_trip(values):
    import tempfile
    from pathlib import Path
    with tempfile.TemporaryDirectory() as d:
        p = write_csv(Path(d) / "t.csv", [{"v": float(v)} for v in values])
        rows, _ = read_csv(p)
    assert [float(r["v"]) for r in rows] == [float(v) for v in values]


def test_records_reproducible():
    recs = run_records([SimConfig(eps=0.4, seed=s, T0=0.25) for s in (0, 1)], with_sh=True)
    for r in recs:
        json.dumps(r)
        again = rerun_record(json.loads(json.dumps(r)))
        assert again == r
    bad = dict(recs[0], config_hash="0" * 64)
    with pytest.raises(ValueError):
        rerun_record(bad)


def test_config_round_trip(tmp_path):
    cfg = SimConfig(eps=0.3, M=5, seed=11, ic_modes=((0.5, 0.1, 0.0),), dealias=True)
    path = dump_config(cfg, tmp_path / "c.ini", {"kappa": 0.1})
    back, run = load_config(path)
    assert back == cfg and back.config_hash() == cfg.config_hash()
    assert run["kappa"] == 0.1 and run["workers"] == 1
    assert load_config(path, seed=4)[0].seed == 4
    (tmp_path / "bad.ini").write_text("[grid]\nbogus = 1\n")
    with pytest.raises(ValueError):
        load_config(tmp_path / "bad.ini")


def test_quadratic_form_examples():
    g = make_fast_grid(16, 16)
    zero = check_quadratic_form(Field(g, np.zeros(g.n)), 4.0)
    assert zero == (0.0, 0.0, True)
    v = Field(g, np.exp(-g.x ** 2 / 8) * np.cos(g.x))
    lhs, rhs, ok = check_quadratic_form(v, 4.0)
    assert ok
    # independent quadrature with analytic derivatives of v
    sympy = pytest.importorskip("sympy")
    X = sympy.symbols("x")
    expr = sympy.exp(-X ** 2 / 8) * sympy.cos(X)
    x = g.x
    w = (1 + x * x) ** -2.0
    d2 = sympy.lambdify(X, sympy.diff(expr, X, 2), "numpy")(x)
    d4 = sympy.lambdify(X, sympy.diff(expr, X, 4), "numpy")(x)
    vv = v.values
    L0v = -vv - 2 * d2 - d4
    assert lhs == pytest.approx(np.sum(w * vv * L0v) * g.dx, rel=1e-10)
    c = quadratic_form_constants(4.0)
    assert rhs == pytest.approx(-c["a"] * np.sum(w * d2 ** 2) * g.dx
                                + c["b"] * np.sum(w * vv ** 2) * g.dx, rel=1e-10)


def test_energy_constants_values():
    c = energy_constants(4.0, 1.0, 0.2)
    assert c["C2"] == pytest.approx(25 / 6, rel=1e-8)
    assert c["a"] == pytest.approx(c["C2"] / (1 + 2 * c["C2"]))
    # C_Z = -min_s (s^4/2 + 3 s^3 + 3 s^2 + s), attained at a root of 2s^3 + 9s^2 + 6s + 1
    roots = np.roots([2, 9, 6, 1]).real
    vals = 0.5 * roots ** 4 + 3 * roots ** 3 + 3 * roots ** 2 + roots
    assert c["C_Z"] == pytest.approx(-vals.min(), rel=1e-8)


def test_energy_inequality_trivial():
    cfg = SimConfig(eps=0.5, sigma=0.0, M=4, ic="zero", t_final=0.5, dt=0.01, record_every=1,
                    store_fields=True)
    rep = check_energy_inequality(run_sh(cfg), 4.0)
    assert rep.pass_fraction == 1.0 and np.all(rep.lhs == 0) and np.all(rep.rhs == 0)


def test_energy_inequality_generic_run():
    cfg = SimConfig(eps=0.5, M=4, seed=1, ic="mode", t_final=2.0, dt=0.01, record_every=1,
                    store_fields=True)
    rep = check_energy_inequality(run_sh(cfg), 4.0)
    assert rep.pass_fraction >= 0.99
    with pytest.raises(ValueError):
        check_energy_inequality(run_sh(cfg.with_(record_every=2)), 4.0)


def test_regularity_constant_run_matches_ode():
    a0 = 0.2
    cfg = SimConfig(eps=0.5, sigma=0.0, T0=0.5, dt=1e-3, dt_max=1e-3, ic="constant",
                    ic_amplitude=a0, gl_n=32, gl_half_length=20.0, store_fields=True)
    traj = run_gl(cfg)
    rep = regularity_report(traj, rho=4.0)
    T = np.array(traj.times)
    A = a0 * np.sqrt(np.exp(2 * T) / (1 + 3 * a0 ** 2 * (np.exp(2 * T) - 1)))
    one = Field(traj.grid, np.ones(traj.grid.n))
    # first-order time stepping at dt = 1e-3
    assert rep["B_C0"] == pytest.approx(A.max(), rel=1e-3)
    amp = rep["B_C0"]
    assert rep["A_Holder"] == pytest.approx(amp * c0_kappa_norm(one, 0.05), rel=1e-12)
    assert rep["B_L4"] == pytest.approx(amp * weighted_lp_norm(one, WeightSpec(4), 4), rel=1e-12)
    assert rep["B_H1"] == pytest.approx(amp * weighted_lp_norm(one, WeightSpec(4), 2), rel=1e-12)
    assert rep["Zs_C0"] == 0


def test_holder_small_eta_dominates():
    traj = run_gl(SimConfig(eps=0.5, T0=0.2, dt=0.01, gl_n=64, gl_half_length=20.0,
                            store_fields=True))
    Z = Field(traj.grid, traj.array("Zs")[-1])
    assert holder_norm(Z, 1e-6, 0.05) >= c0_kappa_norm(Z, 0.05)


def test_regularity_refinement_stable():
    base = SimConfig(eps=0.5, T0=1.0, dt=0.01, ic="constant", ic_amplitude=0.3,
                     gl_half_length=8 * np.pi, noise_ref_points_per_2pi=512)
    coarse = regularity_ensemble(base.with_(gl_n=256), range(32))
    fine = regularity_ensemble(base.with_(gl_n=512), range(32))
    change = abs(fine["Zs_Holder"] / coarse["Zs_Holder"] - 1)
    assert change < 0.10
    for key in ("B_L4", "B_H1", "B_W1,4", "A_Holder"):
        assert abs(fine[key] / coarse[key] - 1) < 0.25


def test_cli_kernel_bounds_and_simulate(tmp_path, capsys):
    assert cli.main(["kernel-bounds", "--out-dir", str(tmp_path)]) == 0
    rows, meta = read_csv(tmp_path / "kernel_bounds.csv")
    assert {r["variant"] for r in rows} == {"SemigroupBand", "E2", "IC_band"}
    assert meta["passed"] is True
    ini = tmp_path / "c.ini"
    ini.write_text("[grid]\nM = 4\n[physics]\neps = 0.5\nic = mode\n[run]\nt_final = 1.0\n")
    assert cli.main(["simulate", "--config", str(ini), "--seed", "3",
                     "--out-dir", str(tmp_path)]) == 0
    (manifest,) = tmp_path.glob("sh_*.json")
    meta = json.loads(manifest.read_text())
    arrays = np.load(tmp_path / meta["arrays"])
    assert arrays["u"].shape == (len(meta["times"]), meta["grid"]["n"])
    assert meta["config"]["seed"] == 3
    assert meta["config_hash"] == SimConfig.from_dict(meta["config"]).config_hash()


def test_cli_noise_check_small(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nT0 = 0.1\n")
    code = cli.main(["noise-check", "--config", str(ini), "--eps-list", "0.4,0.3,0.2",
                     "--seeds-per-eps", "8", "--out-dir", str(tmp_path)])
    assert code in (0, 1)
    recs = read_jsonl(tmp_path / "noise_defect.jsonl")
    assert len(recs) == 24 and all("sup_noise_defect_c0gamma" in r for r in recs)
    assert (tmp_path / "noise_defect.csv").exists() and (tmp_path / "noise_defect.svg").exists()
