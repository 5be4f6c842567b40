"""Acceptance battery.

Each test exercises one end-to-end guarantee and prints a single PASS/FAIL
line with the measured quantity next to its tolerance, so a plain pytest run
doubles as a checklist.  Criteria 2 through 6 share the session corpus from
conftest: five decreasing families, s in {2, 3, 5}, delta in {0.2, 0.1},
epsilon = delta**3, n = 2001, t_end = 2.
"""

import csv
import time

import numpy as np
import pytest

from conftest import CORPUS_FAMILIES

from degenwave import cli, monitors
from degenwave.core import (
    RiemannField,
    conserved_from_riemann,
    field_scale,
    model_params,
    riemann_from_conserved,
)
from degenwave.entropy import PROFILES, d0, entropy_pair_residual, quadrature_for
from degenwave.grid import GridSpec
from degenwave.harness import (
    ExperimentConfig,
    cmd_threshold,
    parse_config_text,
    single_run,
)
from degenwave.report import read_kv

# High-precision Beta evaluations B(1/2, lam + 1), computed offline.
D0_EXACT = {
    2.0: 7.285951943662744835459825,
    3.0: 5.244115108584239620929679,
    5.0: 4.206546315976362783525057,
}


def _report(capsys, num, ok, text):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {num:2d}: {text}")
    assert ok, f"criterion {num}: {text}"


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_criterion_01_round_trip(capsys):
    rng = np.random.default_rng(7)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(1000):
        p = model_params(float(rng.uniform(1.3, 6.0)))
        u = rng.uniform(-2.0, 2.0, 64)
        b = rng.uniform(0.0, 3.0, 64)
        b[rng.random(64) < 0.1] = 0.0  # exact vacuum nodes
        r = RiemannField(w=u - b, z=u + b)
        c = conserved_from_riemann(r, p)
        r2 = riemann_from_conserved(c, p)
        c2 = conserved_from_riemann(r2, p)
        err = max(np.max(np.abs(r2.w - r.w)), np.max(np.abs(r2.z - r.z)),
                  np.max(np.abs(c2.v - c.v)), np.max(np.abs(c2.u - c.u)))
        worst = max(worst, err / field_scale(r.w, r.z))
    wall = time.perf_counter() - start
    ok = worst <= 1e-12 and wall < 1.0
    _report(capsys, 1, ok,
            f"riemann/conserved round trip on 1000 random admissible fields: "
            f"max rel err {worst:.2e} <= 1e-12 in {wall:.2f} s < 1 s")


def test_criterion_02_invariant_region(corpus, capsys):
    worst = -np.inf
    max_wall = 0.0
    passed = True
    for m in corpus:
        v = monitors.invariant_region(m.traj)
        passed &= v.passed
        if np.isfinite(v.max_violation):
            worst = max(worst, v.max_violation / m.mdata.scale)
        max_wall = max(max_wall, m.wall)
    families = {m.family for m in corpus}
    ok = (passed and len(families) >= 5
          and {m.s for m in corpus} == {2.0, 3.0, 5.0}
          and {m.delta for m in corpus} == {0.2, 0.1}
          and max_wall <= 60.0)
    _report(capsys, 2, ok,
            f"invariant box held on all {len(corpus)} corpus runs "
            f"({len(families)} families): worst violation/scale {worst:.1e} "
            f"<= 1e-10, slowest run {max_wall:.1f} s <= 60 s")


def test_criterion_03_monotone_profiles_and_v_decay(corpus, capsys):
    worst_inc = -np.inf
    worst_rise = -np.inf
    passed = True
    for m in corpus:
        mono = monitors.monotonicity(m.traj, m.p)
        vdec = monitors.v_time_decrease(m.traj, m.p)
        passed &= mono.passed and vdec.passed
        worst_inc = max(worst_inc, mono.max_violation / m.mdata.scale)
        worst_rise = max(worst_rise, vdec.max_violation)
    _report(capsys, 3, passed,
            f"profiles stay nonincreasing (worst increment/scale "
            f"{worst_inc:.1e} <= 1e-8) and v never rises in t (worst rise "
            f"{worst_rise:.1e} <= 1e-10) across the corpus")


def test_criterion_04_l1_bounds_and_remark(corpus, capsys):
    worst_rel = 0.0
    passed = True
    for m in corpus:
        l1 = monitors.l1_derivative_bounds(m.traj, m.p)
        tv0, rhs = monitors.remark_identity(m.mdata)
        rel = abs(tv0 - rhs) / max(1.0, abs(rhs))
        worst_rel = max(worst_rel, rel)
        passed &= l1.passed and rel <= 1e-6
    _report(capsys, 4, passed,
            f"TV and |w_t|_1 + |z_t|_1 bounds held; initial-TV identity "
            f"|TV(0) - 2(u0(-inf) - u0(+inf))| off by {worst_rel:.1e} "
            f"relative <= 1e-6 across the corpus")


def test_criterion_05_comparison_bounds(corpus, capsys):
    worst = -np.inf
    worst_tol = 0.0
    passed = True
    for m in corpus:
        v = monitors.comparison_bounds(m.traj, m.p)
        passed &= v.passed
        if v.max_violation > worst:
            worst = v.max_violation
            worst_tol = v.tolerance
    _report(capsys, 5, passed,
            f"translated initial profiles bracket every snapshot: worst "
            f"excess {worst:.2e} within tolerance {worst_tol:.2e} "
            f"(2 dx max|slope| + rounding slack)")


def test_criterion_06_f_identity(corpus, capsys):
    worst = 0.0
    worst_tol = np.inf
    passed = True
    for m in corpus:
        v = monitors.f_identity(m.traj, m.p, epsilon=m.solve.epsilon)
        passed &= v.passed
        if v.max_violation / v.tolerance > worst / worst_tol:
            worst, worst_tol = v.max_violation, v.tolerance
    _report(capsys, 6, passed,
            f"F(t) tracked (u_minus - u_plus) t on every corpus run over "
            f"[0, 2]: worst residual {worst:.2e} <= 5 (dx + eps) scale "
            f"= {worst_tol:.2e}")


THRESHOLD_CFG = """\
[model]
s = 3

[grid]
x_min = -16
x_max = 16
n = 1201

[data]
family = vel_bump
level = 0.15
width = 1.0

[solve]
delta = 0.02
t_end = 16
snapshot_count = 33

[monitors]
hard = monotonicity

[sweep]
param = amplitude
values = 0.02, 0.04, 0.06, 0.12

[output]
plots = off
"""


def test_criterion_07_nonexistence_certificate(tmp_path, capsys):
    cfg = parse_config_text(THRESHOLD_CFG)
    out = tmp_path / "threshold"
    rc = cmd_threshold(cfg, out)
    rows = read_rows(out / "threshold.csv")
    t_vals = [float(r["t_value"]) for r in rows]
    classes = [r["classification"] for r in rows]
    consistent = all((c == "existence") == (t >= 0.0)
                     for c, t in zip(classes, t_vals))
    class_flips = sum(classes[i] != classes[i - 1] for i in range(1, len(rows)))
    sign_flips = sum((t_vals[i] >= 0.0) != (t_vals[i - 1] >= 0.0)
                     for i in range(1, len(rows)))
    last = rows[-1]  # deepest T < 0 member
    deg_t = float(last["degeneracy_t"])
    t_star = float(last["t_star"])
    crossing = float(last["margin_crossing_t"])
    rel = abs(crossing - t_star) / t_star
    ok = (rc == 0 and consistent and class_flips == 1 and sign_flips == 1
          and np.isfinite(deg_t) and rel <= 0.10)
    _report(capsys, 7, ok,
            f"classification flips exactly at the T sign change; breakdown "
            f"member hit vacuum at t = {deg_t:.2f} and its margin crossed "
            f"zero at t = {crossing:.2f} vs t* = {t_star:.2f} "
            f"({100.0 * rel:.1f}% <= 10%)")


def test_criterion_08_entropy_pairs(capsys):
    d0_err = max(abs(d0(model_params(s)) - D0_EXACT[s]) for s in (2.0, 3.0, 5.0))
    rng = np.random.default_rng(0)
    f = PROFILES["sine"].f
    ratios = []
    for s in (2.0, 3.0, 5.0):
        p = model_params(s)
        quad = quadrature_for(p)
        for _ in range(20):
            v = float(rng.uniform(0.2, 2.0))
            u = float(rng.uniform(-2.0, 2.0))
            rc_ = entropy_pair_residual(v, u, f, p, quad, h=0.02)
            rf = entropy_pair_residual(v, u, f, p, quad, h=0.01)
            ratios.append(max(abs(rc_[0]), abs(rc_[1]))
                          / max(abs(rf[0]), abs(rf[1])))
    ok = d0_err <= 1e-10 and all(3.5 <= r <= 4.5 for r in ratios)
    _report(capsys, 8, ok,
            f"d0 matches the Beta oracle to {d0_err:.1e} <= 1e-10 for "
            f"s in {{2,3,5}}; compatibility-residual h-halving ratios in "
            f"[{min(ratios):.2f}, {max(ratios):.2f}] subset [3.5, 4.5] "
            f"at 20 random points per s")


def test_criterion_09_weak_form_sweep(capsys):
    deltas = (0.2, 0.1, 0.05)
    results = {}
    for name, params in CORPUS_FAMILIES.items():
        vals = []
        for d in deltas:
            n = 1 + round(500 * 0.2 / d)  # dx shrinks with delta
            cfg = ExperimentConfig(s=3.0, grid=GridSpec(-12.0, 12.0, n),
                                   family=name, family_params=dict(params),
                                   delta=d, t_end=2.0, snapshot_count=129,
                                   plots=False)
            res = single_run(cfg)
            assert res.failure is None
            vals.append(max(max(abs(r1), abs(r2))
                            for _, r1, r2 in res.weak_rows))
        results[name] = vals
    floor = results["const"][-1]
    monotone = all(v[0] > v[1] > v[2] for v in results.values())
    capped = all(v[-1] <= 10.0 * floor for v in results.values())
    worst = max(v[-1] / floor for v in results.values())
    _report(capsys, 9, monotone and capped,
            f"weak-form residual decreased across delta = 0.2/0.1/0.05 for "
            f"all {len(results)} families; finals within {worst:.1f}x <= 10x "
            f"of the constant-data floor {floor:.2e}")


NEG_MONOTONICITY_CFG = """\
[model]
s = 3
[grid]
x_min = -12
x_max = 12
n = 801
[data]
family = bump_v0
level = 0.5
amplitude = 0.3
[solve]
delta = 0.1
t_end = 0.5
[output]
plots = off
"""

NEG_BOX_CFG = """\
[model]
s = 3
[grid]
x_min = -12
x_max = 12
n = 801
[data]
family = vel_bump
level = 0.5
amplitude = 0.4
[solve]
delta = 0.1
t_end = 0.5
[monitors]
hard = invariant_region
c1 = -0.65
c0 = -0.5
c2 = 0.25
[output]
plots = off
"""

NEG_ORDER_CFG = """\
[model]
s = 3
[grid]
x_min = -16
x_max = 16
n = 1201
[data]
family = vel_bump
level = 0.15
amplitude = 0.12
[solve]
delta = 0.02
t_end = 16
[monitors]
hard = order
[output]
plots = off
"""


def test_criterion_10_negative_controls(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("DEGENWAVE_OUT", raising=False)
    cases = [
        ("monotonicity", NEG_MONOTONICITY_CFG),  # rising profile in the data
        ("invariant_region", NEG_BOX_CFG),       # box deliberately too small
        ("order", NEG_ORDER_CFG),                # breakdown crosses z < w
    ]
    all_ok = True
    for name, text in cases:
        cfg_file = tmp_path / f"{name}.cfg"
        cfg_file.write_text(text)
        out = tmp_path / name
        rc = cli.main(["run", "--config", str(cfg_file), "--out", str(out)])
        sections = read_kv(out / "report.txt")
        failed = [r["monitor"] for r in read_rows(out / "monitors.csv")
                  if r["passed"] == "false"]
        all_ok &= (rc == 2
                   and sections["report"]["status"] == "monitor_failure"
                   and failed == [name])
    names = ", ".join(name for name, _ in cases)
    _report(capsys, 10, all_ok,
            f"3 negative controls each aborted with exit code 2, one per "
            f"hard monitor ({names})")
