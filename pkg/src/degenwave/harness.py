"""Experiment harness: config files, the four commands, artifact layout.

Configs are flat key = value files with sections ([model], [grid], [data],
[solve], [monitors], [sweep], [entropy], [output]); values are scalars or
comma-separated lists.  Each command owns one output directory; sweep members
write into member_XX/ subdirectories and the parent assembles the summary
table after all members finish (optionally in parallel worker processes).

Exit codes: 0 all hard monitors pass, 2 a hard monitor failed, 1 config or
I/O problems (raised here as ConfigError and mapped by the CLI).
"""

from __future__ import annotations

import configparser
import dataclasses
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import beta as beta_fn

from . import monitors, plots
from . import report as rep
from .core import model_params, pow_pos
from .entropy import PROFILES, entropy_pair_residual, quadrature_for
from .families import build_family
from .grid import GridSpec
from .initdata import check_admissible, mollify_riemann, threshold
from .solver import MonitorFailure, SolveConfig, run


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


DEFAULT_HARD = ("invariant_region", "monotonicity")
DEFAULT_SOFT = ("conserved_bounds", "v_time_decrease", "comparison_bounds",
                "l1_derivative_bounds", "f_identity", "weak_form_residual")
DEFAULT_PROFILES = ("identity", "square", "sine")


@dataclass
class ExperimentConfig:
    s: float
    grid: GridSpec | None = None
    family: str = "const"
    family_params: dict = field(default_factory=dict)
    delta: float | None = None
    epsilon: float | None = None
    t_end: float | None = None
    cfl: float = 0.9
    snapshot_times: tuple | None = None
    snapshot_count: int = 17
    monitor_cadence: int = 10
    v_tol: float | None = None
    hard_monitors: tuple = DEFAULT_HARD
    soft_monitors: tuple = DEFAULT_SOFT
    cut: float | None = None
    box_override: tuple | None = None    # (c1, c0, c2): deliberate-violation knob
    sweep_delta: tuple = ()
    sweep_epsilon: tuple | None = None
    sweep_param: str = "amplitude"
    sweep_values: tuple = ()
    scale_grid: bool = False
    quad_nodes: int = 64
    fd_h: float = 1e-2
    fd_levels: int = 4
    v_samples: tuple = (0.25, 0.5, 1.0, 2.0)
    u_samples: tuple = (-1.0, 0.0, 1.0)
    profiles: tuple = DEFAULT_PROFILES
    plots: bool = True


def _floats(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from exc


def _names(text: str) -> tuple:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def parse_config_text(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                   interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    def get(section, key, cast=float, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key).strip()
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {key}: bad value {raw!r}") from exc

    if not cp.has_option("model", "s"):
        raise ConfigError("missing required key [model] s")
    cfg = ExperimentConfig(s=get("model", "s"))

    if cp.has_section("grid"):
        for key in ("x_min", "x_max", "n"):
            if not cp.has_option("grid", key):
                raise ConfigError(f"missing required key [grid] {key}")
        try:
            cfg.grid = GridSpec(get("grid", "x_min"), get("grid", "x_max"),
                                get("grid", "n", int))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    if cp.has_section("data"):
        if not cp.has_option("data", "family"):
            raise ConfigError("missing required key [data] family")
        cfg.family = cp.get("data", "family").strip()
        for key, raw in cp.items("data"):
            if key == "family":
                continue
            raw = raw.strip()
            try:
                cfg.family_params[key] = float(raw)
            except ValueError:
                cfg.family_params[key] = raw

    if cp.has_section("solve"):
        cfg.delta = get("solve", "delta")
        cfg.epsilon = get("solve", "epsilon")
        cfg.t_end = get("solve", "t_end")
        cfg.cfl = get("solve", "cfl", default=cfg.cfl)
        cfg.monitor_cadence = get("solve", "monitor_cadence", int,
                                  cfg.monitor_cadence)
        cfg.v_tol = get("solve", "v_tol")
        cfg.snapshot_count = get("solve", "snapshot_count", int,
                                 cfg.snapshot_count)
        if cp.has_option("solve", "snapshot_times"):
            cfg.snapshot_times = _floats(cp.get("solve", "snapshot_times"))

    if cp.has_section("monitors"):
        if cp.has_option("monitors", "hard"):
            cfg.hard_monitors = _names(cp.get("monitors", "hard"))
        if cp.has_option("monitors", "soft"):
            cfg.soft_monitors = _names(cp.get("monitors", "soft"))
        cfg.cut = get("monitors", "cut")
        keys = ("c1", "c0", "c2")
        have = [k for k in keys if cp.has_option("monitors", k)]
        if have and len(have) != 3:
            raise ConfigError("box override needs all three of c1, c0, c2")
        if have:
            cfg.box_override = tuple(get("monitors", k) for k in keys)

    if cp.has_section("sweep"):
        if cp.has_option("sweep", "delta"):
            cfg.sweep_delta = _floats(cp.get("sweep", "delta"))
            if not cfg.sweep_delta:
                raise ConfigError("[sweep] delta list is empty")
            if np.any(np.diff(cfg.sweep_delta) >= 0.0):
                raise ConfigError("[sweep] delta must be strictly decreasing")
        if cp.has_option("sweep", "epsilon"):
            cfg.sweep_epsilon = _floats(cp.get("sweep", "epsilon"))
        if cp.has_option("sweep", "param"):
            cfg.sweep_param = cp.get("sweep", "param").strip()
        if cp.has_option("sweep", "values"):
            cfg.sweep_values = _floats(cp.get("sweep", "values"))
        cfg.scale_grid = get("sweep", "scale_grid", _bool, cfg.scale_grid)

    if cp.has_section("entropy"):
        cfg.quad_nodes = get("entropy", "nodes", int, cfg.quad_nodes)
        cfg.fd_h = get("entropy", "h", default=cfg.fd_h)
        cfg.fd_levels = get("entropy", "levels", int, cfg.fd_levels)
        if cp.has_option("entropy", "v"):
            cfg.v_samples = _floats(cp.get("entropy", "v"))
        if cp.has_option("entropy", "u"):
            cfg.u_samples = _floats(cp.get("entropy", "u"))
        if cp.has_option("entropy", "profiles"):
            cfg.profiles = _names(cp.get("entropy", "profiles"))

    if cp.has_section("output"):
        cfg.plots = get("output", "plots", _bool, cfg.plots)

    return cfg


def _bool(raw: str) -> bool:
    low = str(raw).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text())


def config_echo(cfg: ExperimentConfig) -> dict:
    """Resolved configuration as report sections (canonical order)."""
    sections = {"config.model": {"s": cfg.s}}
    if cfg.grid is not None:
        g = cfg.grid
        sections["config.grid"] = {"x_min": g.x_min, "x_max": g.x_max, "n": g.n}
    sections["config.data"] = {"family": cfg.family,
                               **{k: cfg.family_params[k]
                                  for k in sorted(cfg.family_params)}}
    sections["config.solve"] = {
        "delta": cfg.delta if cfg.delta is not None else "unset",
        "epsilon": cfg.epsilon if cfg.epsilon is not None else "auto",
        "t_end": cfg.t_end if cfg.t_end is not None else "unset",
        "cfl": cfg.cfl,
        "snapshot_times": (
            ",".join(rep.fmt(t) for t in cfg.snapshot_times)
            if cfg.snapshot_times is not None else f"auto({cfg.snapshot_count})"),
        "monitor_cadence": cfg.monitor_cadence,
        "v_tol": cfg.v_tol if cfg.v_tol is not None else "auto",
    }
    sections["config.monitors"] = {
        "hard": ",".join(cfg.hard_monitors),
        "soft": ",".join(cfg.soft_monitors),
        "cut": cfg.cut if cfg.cut is not None else "auto",
    }
    if cfg.box_override is not None:
        sections["config.monitors"]["box_override"] = ",".join(
            rep.fmt(c) for c in cfg.box_override)
    if cfg.sweep_delta or cfg.sweep_values:
        sections["config.sweep"] = {
            "delta": ",".join(rep.fmt(d) for d in cfg.sweep_delta),
            "epsilon": (",".join(rep.fmt(e) for e in cfg.sweep_epsilon)
                        if cfg.sweep_epsilon else "auto"),
            "param": cfg.sweep_param,
            "values": ",".join(rep.fmt(v) for v in cfg.sweep_values),
            "scale_grid": cfg.scale_grid,
        }
    sections["config.entropy"] = {
        "nodes": cfg.quad_nodes, "h": cfg.fd_h, "levels": cfg.fd_levels,
        "v": ",".join(rep.fmt(v) for v in cfg.v_samples),
        "u": ",".join(rep.fmt(u) for u in cfg.u_samples),
        "profiles": ",".join(cfg.profiles),
    }
    return sections


def resolve_out(cli_out) -> Path:
    env = os.environ.get("DEGENWAVE_OUT")
    if env:
        return Path(env)
    return Path(cli_out) if cli_out else Path("out")


# ---------------------------------------------------------------------------
# single simulation

@dataclass
class RunResult:
    run_id: str
    echo: dict
    threshold: object
    admissibility: object
    mdata: object
    solve: SolveConfig
    traj: object
    verdicts: list
    freport: object | None
    weak_rows: list
    failure: object | None      # the failed guard verdict, if the run aborted
    wall: float


def _require_solve(cfg: ExperimentConfig):
    for name in ("grid", "delta", "t_end"):
        if getattr(cfg, name) is None:
            raise ConfigError(f"this command needs {name} configured")


def min_gap(traj) -> float:
    return min(0.5 * float(np.min(f.z - f.w)) for f in traj.snapshots)


def evaluate_monitors(traj, p, cfg: ExperimentConfig, scfg: SolveConfig):
    table = {
        "invariant_region": lambda: monitors.invariant_region(traj),
        "conserved_bounds": lambda: monitors.conserved_bounds(traj),
        "monotonicity": lambda: monitors.monotonicity(traj, p),
        "v_time_decrease": lambda: monitors.v_time_decrease(traj, p),
        "order": lambda: monitors.order(traj),
        "comparison_bounds": lambda: monitors.comparison_bounds(traj, p),
        "l1_derivative_bounds": lambda: monitors.l1_derivative_bounds(traj, p),
        "f_identity": lambda: monitors.f_identity(traj, p, cfg.cut,
                                                  epsilon=scfg.epsilon),
    }
    verdicts = []
    for name in (*cfg.hard_monitors, *cfg.soft_monitors):
        if name == "weak_form_residual":
            continue
        if name not in table:
            raise ConfigError(f"unknown monitor {name!r} (known: "
                              f"{', '.join(sorted(table))}, weak_form_residual)")
        verdicts.append(table[name]())

    freport = monitors.f_functional(traj, p, cfg.cut)
    weak_rows = []
    if "weak_form_residual" in (*cfg.hard_monitors, *cfg.soft_monitors):
        md = traj.mdata
        quiet = md.support_radius + monitors.lam_max_bound(md, p) * scfg.t_end
        battery = monitors.default_battery(traj.grid, scfg.t_end, quiet_radius=quiet)
        weak_rows = monitors.weak_form_residual(traj, p, battery)
    return verdicts, freport, weak_rows


def single_run(cfg: ExperimentConfig) -> RunResult:
    _require_solve(cfg)
    p = model_params(cfg.s)
    data = build_family(cfg.family, cfg.grid, p, cfg.family_params)
    adm = check_admissible(data, p)
    thr = threshold(data, p)
    md = mollify_riemann(data, p, cfg.delta)
    if cfg.box_override is not None:
        c1, c0, c2 = cfg.box_override
        md = dataclasses.replace(md, c1=c1, c0=c0, c2=c2, separated=True)

    snaps = cfg.snapshot_times
    if snaps is None:
        snaps = tuple(np.linspace(0.0, cfg.t_end, max(cfg.snapshot_count, 2)))
    try:
        scfg = SolveConfig(delta=cfg.delta, t_end=cfg.t_end, epsilon=cfg.epsilon,
                           cfl=cfg.cfl, snapshot_times=snaps,
                           monitor_cadence=cfg.monitor_cadence, v_tol=cfg.v_tol)
        guards = monitors.make_guards(md, cfg.hard_monitors, p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    echo = config_echo(cfg)
    rid = rep.run_id(rep.kv_text(echo))

    start = time.perf_counter()
    failure = None
    try:
        traj = run(md, scfg, p, guards=guards)
    except MonitorFailure as exc:
        traj = exc.trajectory
        failure = exc.verdict
    except ValueError as exc:     # containment / config-level geometry errors
        raise ConfigError(str(exc)) from exc
    wall = time.perf_counter() - start

    if failure is None:
        verdicts, freport, weak_rows = evaluate_monitors(traj, p, cfg, scfg)
    else:
        verdicts, freport, weak_rows = [failure], None, []
    return RunResult(run_id=rid, echo=echo, threshold=thr, admissibility=adm,
                     mdata=md, solve=scfg, traj=traj, verdicts=verdicts,
                     freport=freport, weak_rows=weak_rows, failure=failure,
                     wall=wall)


def write_run_artifacts(out: Path, res: RunResult, p, draw: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    md = res.mdata
    traj = res.traj
    thr = res.threshold

    sections = {"report": {
        "schema_version": rep.SCHEMA_VERSION,
        "run_id": res.run_id,
        "kind": "run",
        "status": "monitor_failure" if res.failure is not None else "ok",
    }}
    sections.update(res.echo)
    sections["data"] = {
        "family": md.data.family,
        "delta": md.delta,
        "epsilon": res.solve.epsilon,
        "admissible": res.admissibility.ok,
        "threshold_t": thr.t_value,
        "classification": thr.classification,
        "integral_v1": thr.integral_v1,
        "separated": md.separated,
        "monotone": md.monotone,
        "c1": md.c1, "c0": md.c0, "c2": md.c2,
        "v_floor": md.v_floor,
        "support_radius": md.support_radius,
        "max_slope": md.max_slope,
        "scale": md.scale,
    }
    if thr.witness is not None:
        sections["data"]["witness_x"] = thr.witness[0]
        sections["data"]["witness_y"] = thr.witness[1]

    dts = traj.dt_history if traj.dt_history is not None else np.array([])
    sections["solve"] = {
        "t_end": res.solve.t_end,
        "cfl": res.solve.cfl,
        "steps": traj.steps,
        "snapshots": len(traj.times),
        "lambda_max": traj.lambda_max,
        "dt_min": float(np.min(dts)) if dts.size else float("nan"),
        "dt_max": float(np.max(dts)) if dts.size else float("nan"),
        "v_tol": traj.v_tol,
    }
    if traj.degeneracy is not None:
        t_d, x_d, v_d = traj.degeneracy
        sections["solve"].update(degeneracy_t=t_d, degeneracy_x=x_d,
                                 degeneracy_v=v_d)
    else:
        sections["solve"]["degeneracy_t"] = "none"

    sections["monitors"] = rep.monitor_summary(res.verdicts)

    if res.freport is not None:
        fr = res.freport
        sections["f"] = {
            "predicted_slope": fr.predicted_slope,
            "cut": fr.cut,
            "c_m": fr.c_m,
            "margin_slope": fr.margin_slope,
            "t_star": fr.t_star,
            "crossing_time": fr.crossing_time(),
            "max_residual": fr.max_residual,
        }

    x = traj.grid.x
    last = len(traj.times) - 1
    c_end = traj.conserved(last, p)
    tv_end = (monitors.total_variation(traj.final.w)
              + monitors.total_variation(traj.final.z))
    tv0, remark_rhs = monitors.remark_identity(md)
    gap = min_gap(traj)
    sections["norms"] = {
        "v_l1_final": float(np.trapezoid(c_end.v, x)),
        "v_max_final": float(np.max(c_end.v)),
        "tv_final": tv_end,
        "tv_initial": tv0,
        "remark_rhs": remark_rhs,
        "min_gap": gap,
        "min_v": float(pow_pos(max(gap, 0.0), 1.0 / p.theta)),
    }

    if res.weak_rows:
        sections["weak_form"] = {
            name: f"r1 {rep.fmt(r1)} r2 {rep.fmt(r2)}"
            for name, r1, r2 in res.weak_rows
        }
        rep.write_residuals(out / "residuals.csv", res.weak_rows)

    rep.write_kv(out / "report.txt", sections)
    rep.write_snapshots(out / "snapshots.csv", traj, p)
    rep.write_monitors(out / "monitors.csv", res.verdicts)
    if res.freport is not None:
        rep.write_f_series(out / "f_series.csv", res.freport)
    rep.write_kv(out / "timing.txt", {"timing": {"wall_seconds": res.wall}})

    if draw:
        plots.plot_run(traj, p, out / "run.png")
        if res.freport is not None:
            plots.plot_f(res.freport, out / "f.png")


def _exit_code(results) -> int:
    for res in results:
        if res.failure is not None:
            return 2
        if any(v.hard and not v.passed for v in res.verdicts):
            return 2
    return 0


# ---------------------------------------------------------------------------
# commands

def cmd_run(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    res = single_run(cfg)
    write_run_artifacts(out, res, model_params(cfg.s), cfg.plots)
    return _exit_code([res])


def _worker_single_run(cfg: ExperimentConfig) -> RunResult:
    return single_run(cfg)


def _map_runs(members, workers: int):
    if workers <= 1 or len(members) <= 1:
        return [single_run(m) for m in members]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_worker_single_run, members))


def cmd_threshold(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    _require_solve(cfg)
    if not cfg.sweep_values:
        raise ConfigError("threshold needs [sweep] values (and param) to sweep")
    p = model_params(cfg.s)
    members = [
        dataclasses.replace(
            cfg, plots=False,
            family_params={**cfg.family_params, cfg.sweep_param: val})
        for val in cfg.sweep_values
    ]
    results = _map_runs(members, workers)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for i, (val, res) in enumerate(zip(cfg.sweep_values, results)):
        write_run_artifacts(out / f"member_{i:02d}", res, p, draw=False)
        thr = res.threshold
        traj = res.traj
        gap = min_gap(traj)
        v_min = float(pow_pos(max(gap, 0.0), 1.0 / p.theta)) if gap >= 0.0 else -1.0
        fr = res.freport
        deg_t = traj.degeneracy[0] if traj.degeneracy is not None else float("nan")
        if thr.t_value >= 0.0:
            evidence = (gap >= -1e-10 * res.mdata.scale
                        and fr is not None and res.failure is None)
        else:
            evidence = (traj.degeneracy is not None
                        or (fr is not None and np.isfinite(fr.crossing_time())))
        rows.append({
            "value": val,
            "t_value": thr.t_value,
            "classification": thr.classification,
            "admissible": thr.admissible,
            "min_v": v_min,
            "f_residual": fr.max_residual if fr is not None else float("nan"),
            "degeneracy_t": deg_t,
            "margin_crossing_t": fr.crossing_time() if fr is not None else float("nan"),
            "t_star": fr.t_star if fr is not None else float("nan"),
            "evidence": "ok" if evidence else "weak",
        })

    header = ["value", "t_value", "classification", "admissible", "min_v",
              "f_residual", "degeneracy_t", "margin_crossing_t", "t_star",
              "evidence"]
    rep.write_csv(out / "threshold.csv", header,
                  [[r[k] for k in header] for r in rows])

    signs = [r["t_value"] >= 0.0 for r in rows]
    flips = [i for i in range(1, len(signs)) if signs[i] != signs[i - 1]]
    echo = config_echo(cfg)
    sections = {"report": {
        "schema_version": rep.SCHEMA_VERSION,
        "run_id": rep.run_id(rep.kv_text(echo)),
        "kind": "threshold",
        "members": len(rows),
    }}
    sections.update(echo)
    sections["classification"] = {
        "param": cfg.sweep_param,
        "flip_count": len(flips),
        "flips_at": ",".join(
            f"{cfg.sweep_values[i - 1]:g}->{cfg.sweep_values[i]:g}" for i in flips)
            if flips else "none",
        "consistent": all(
            (r["classification"] == "existence") == (r["t_value"] >= 0.0)
            for r in rows),
    }
    rep.write_kv(out / "report.txt", sections)
    rep.write_kv(out / "timing.txt",
                 {"timing": {"wall_seconds": sum(r.wall for r in results)}})
    if cfg.plots:
        plots.plot_threshold(
            [{"amplitude": r["value"], "t_value": r["t_value"],
              "classification": r["classification"]} for r in rows],
            out / "threshold.png")
    return _exit_code(results)


def cmd_converge(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    _require_solve(cfg)
    deltas = cfg.sweep_delta
    if len(deltas) < 3:
        raise ConfigError("converge needs a [sweep] delta list of length >= 3")
    eps_list = cfg.sweep_epsilon
    if eps_list is None:
        eps_list = tuple(d**3 for d in deltas)
    if len(eps_list) != len(deltas):
        raise ConfigError("[sweep] epsilon must match the delta list length")

    p = model_params(cfg.s)
    members = []
    for d, e in zip(deltas, eps_list):
        g = cfg.grid
        if cfg.scale_grid:
            n = 1 + int(round((g.n - 1) * deltas[0] / d))
            g = GridSpec(g.x_min, g.x_max, n)
        members.append(dataclasses.replace(cfg, grid=g, delta=d, epsilon=e,
                                           plots=False))
    results = _map_runs(members, workers)
    out.mkdir(parents=True, exist_ok=True)

    fine_x = members[-1].grid.x
    finals = []
    for i, res in enumerate(results):
        write_run_artifacts(out / f"member_{i:02d}", res, p, draw=False)
        last = len(res.traj.times) - 1
        v = res.traj.conserved(last, p).v
        finals.append(np.interp(fine_x, res.traj.grid.x, v))

    rows = []
    for i, (d, e, res) in enumerate(zip(deltas, eps_list, results)):
        weak = max((max(abs(r1), abs(r2)) for _, r1, r2 in res.weak_rows),
                   default=float("nan"))
        diff = (float(np.trapezoid(np.abs(finals[i] - finals[i - 1]), fine_x))
                if i > 0 else float("nan"))
        rows.append({"delta": d, "epsilon": e, "n": members[i].grid.n,
                     "dx": members[i].grid.dx, "l1_diff": diff,
                     "weak_residual": weak})

    header = ["delta", "epsilon", "n", "dx", "l1_diff", "weak_residual"]
    rep.write_csv(out / "converge.csv", header,
                  [[r[k] for k in header] for r in rows])

    diffs = [r["l1_diff"] for r in rows[1:]]
    res_vals = [r["weak_residual"] for r in rows]
    echo = config_echo(cfg)
    sections = {"report": {
        "schema_version": rep.SCHEMA_VERSION,
        "run_id": rep.run_id(rep.kv_text(echo)),
        "kind": "converge",
        "members": len(rows),
    }}
    sections.update(echo)
    sections["convergence"] = {
        "l1_diffs": ",".join(rep.fmt(v) for v in diffs),
        "l1_decreasing": bool(np.all(np.diff(diffs) < 0.0)) if len(diffs) > 1 else True,
        "weak_residuals": ",".join(rep.fmt(v) for v in res_vals),
        "weak_decreasing": bool(np.all(np.diff(res_vals) < 0.0)),
    }
    rep.write_kv(out / "report.txt", sections)
    rep.write_kv(out / "timing.txt",
                 {"timing": {"wall_seconds": sum(r.wall for r in results)}})
    if cfg.plots:
        plots.plot_converge(rows, out / "converge.png")
    return _exit_code(results)


def cmd_entropy(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    p = model_params(cfg.s)
    if cfg.quad_nodes < 2:
        raise ConfigError("[entropy] nodes must be >= 2")
    for name in cfg.profiles:
        if name not in PROFILES:
            raise ConfigError(f"unknown profile {name!r} "
                              f"(known: {', '.join(sorted(PROFILES))})")
    hs = [cfg.fd_h * 0.5**k for k in range(cfg.fd_levels)]
    if min(cfg.v_samples) <= 2.0 * max(hs):
        raise ConfigError("v samples must exceed 2h (stencil stays off vacuum)")

    quad = quadrature_for(p, cfg.quad_nodes)
    d0_num = float(np.sum(quad.weights))
    d0_oracle = float(beta_fn(0.5, p.lambda_exp + 1.0))

    start = time.perf_counter()
    table = []
    for pname in cfg.profiles:
        prof = PROFILES[pname]
        for v in cfg.v_samples:
            for u in cfg.u_samples:
                for h in hs:
                    r1, r2 = entropy_pair_residual(v, u, prof.f, p, quad, h=h)
                    table.append((pname, v, u, h, abs(r1), abs(r2)))
    wall = time.perf_counter() - start

    out.mkdir(parents=True, exist_ok=True)
    rep.write_csv(out / "entropy.csv", ["profile", "v", "u", "h", "r1", "r2"],
                  table)

    by_h = []
    for h in hs:
        rows_h = [r for r in table if r[3] == h]
        by_h.append({"h": h,
                     "r1": max(r[4] for r in rows_h),
                     "r2": max(r[5] for r in rows_h)})
    ratios = [by_h[k - 1]["r1"] / by_h[k]["r1"] if by_h[k]["r1"] > 0 else float("inf")
              for k in range(1, len(by_h))]

    echo = config_echo(cfg)
    sections = {"report": {
        "schema_version": rep.SCHEMA_VERSION,
        "run_id": rep.run_id(rep.kv_text(echo)),
        "kind": "entropy",
    }}
    sections.update(echo)
    sections["quadrature"] = {
        "nodes": quad.n,
        "lambda": quad.lam,
        "d0": d0_num,
        "d0_oracle": d0_oracle,
        "d0_abs_error": abs(d0_num - d0_oracle),
    }
    sections["residuals"] = {
        **{f"max_r1_h{rep.fmt(row['h'])}": row["r1"] for row in by_h},
        **{f"max_r2_h{rep.fmt(row['h'])}": row["r2"] for row in by_h},
        "r1_halving_ratios": ",".join(rep.fmt(r) for r in ratios),
    }
    rep.write_kv(out / "report.txt", sections)
    rep.write_kv(out / "timing.txt", {"timing": {"wall_seconds": wall}})
    if cfg.plots:
        plots.plot_entropy(by_h, out / "entropy.png")
    return 0
