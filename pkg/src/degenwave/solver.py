"""Explicit viscous solver in Riemann coordinates.

The regularized system

    w_t + lam2(v) w_x = eps * w_xx
    z_t + lam1(v) z_x = eps * z_xx,      lam1 = -lam2 = -theta * v**((s-1)/2)

is advanced with first-order upwind advection (lam2 >= 0 biases the w-stencil
backward, lam1 <= 0 biases the z-stencil forward), centered diffusion and
explicit Euler in time.  Under the CFL bound

    dt * (lam_max / dx + 2 * eps / dx**2) <= cfl < 1

every update is a convex combination of neighboring old values, which is the
discrete mechanism behind the structural guarantees the monitors check:
value ranges never expand, and nonincreasing profiles stay nonincreasing.

Wave speeds are evaluated from the current state (coefficient lagging).  At
nodes where (z - w)/2 has been driven to zero the state is vacuum: both
speeds vanish, advection switches off and only diffusion acts there.  The
solver tolerates (z - w)/2 < 0 in raw arrays -- for data without a common
Riemann bound this is precisely how finite-time breakdown manifests -- and
records the first degeneracy event instead of failing.

Far-field boundary values are Dirichlet, reimposed after every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams, RiemannField, ConservedField, conserved_from_riemann, pow_pos
from .grid import GridSpec
from .initdata import MollifiedRiemannData


class MonitorFailure(RuntimeError):
    """A hard monitor rejected the running state."""

    def __init__(self, verdict, trajectory=None):
        super().__init__(f"monitor {verdict.name} failed: {verdict.detail}")
        self.verdict = verdict
        self.trajectory = trajectory


class BlowupError(RuntimeError):
    """Non-finite values appeared in the update."""

    def __init__(self, step_index: int, t: float):
        super().__init__(f"non-finite state at step {step_index}, t = {t:.6g}")
        self.step_index = step_index
        self.t = t


@dataclass(frozen=True)
class SolveConfig:
    """Time integration controls.

    epsilon defaults to delta**3, keeping the viscosity well below the data
    smoothing scale; explicit epsilon values above delta**3 are rejected.
    """

    delta: float
    t_end: float
    epsilon: float | None = None
    cfl: float = 0.9
    snapshot_times: tuple | None = None
    monitor_cadence: int = 10
    v_tol: float | None = None  # degeneracy threshold; default 0.5 * data v_floor

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must lie in (0, 1)")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        eps = self.epsilon
        if eps is None:
            object.__setattr__(self, "epsilon", self.delta**3)
        else:
            if eps < 0.0:
                raise ValueError("epsilon must be nonnegative")
            if eps > self.delta**3 * (1.0 + 1e-9):
                raise ValueError("epsilon must not exceed delta**3")
        if self.monitor_cadence < 1:
            raise ValueError("monitor_cadence must be >= 1")

    def resolve_snapshots(self) -> np.ndarray:
        """Sorted snapshot times, always containing 0 and t_end."""
        if self.snapshot_times is None:
            times = np.linspace(0.0, self.t_end, 17)
        else:
            times = np.asarray(self.snapshot_times, dtype=float)
            if np.any(times < 0.0) or np.any(times > self.t_end * (1.0 + 1e-12)):
                raise ValueError("snapshot times must lie in [0, t_end]")
            times = np.unique(np.concatenate([[0.0], times, [self.t_end]]))
        return times


@dataclass
class Trajectory:
    """Snapshots of a single run plus bookkeeping the monitors need."""

    grid: GridSpec
    mdata: MollifiedRiemannData
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # RiemannField per time
    dt_history: np.ndarray | None = None
    steps: int = 0
    lambda_max: float = 0.0
    degeneracy: tuple | None = None  # (t, x, v) of the first v < v_tol event
    v_tol: float = 0.0

    def conserved(self, i: int, p: ModelParams) -> ConservedField:
        """Snapshot i as (v, u), clamping any vacuum overshoot to v = 0."""
        return conserved_from_riemann(self.snapshots[i], p, clamp_rtol=np.inf)

    @property
    def final(self) -> RiemannField:
        return self.snapshots[-1]


def _speed_exponent(p: ModelParams) -> float:
    # v**((s-1)/2) expressed through g = v**theta:  g**((s-1)/(s+1))
    return (p.s - 1.0) / (p.s + 1.0)


def max_speed(w: np.ndarray, z: np.ndarray, p: ModelParams) -> float:
    g_max = max(float(np.max(z - w)) * 0.5, 0.0)
    return p.theta * g_max ** _speed_exponent(p)


def cfl_dt(state: RiemannField, cfg: SolveConfig, p: ModelParams, grid: GridSpec) -> float:
    """dt = cfl / (lam_max / dx + 2 eps / dx**2); infinite if nothing moves."""
    lam = max_speed(state.w, state.z, p)
    denom = lam / grid.dx + 2.0 * cfg.epsilon / grid.dx**2
    if denom == 0.0:
        return math.inf
    return cfg.cfl / denom


def _advance(w, z, wn, zn, dt, dx, eps, p, bc):
    """One explicit step into preallocated output arrays wn, zn."""
    g = 0.5 * (z - w)
    np.maximum(g, 0.0, out=g)
    lam = p.theta * g ** _speed_exponent(p)

    r = dt / dx
    mu = eps * dt / (dx * dx)
    li = lam[1:-1]
    wi, zi = w[1:-1], z[1:-1]
    wn[1:-1] = wi - (r * li) * (wi - w[:-2]) + mu * (w[2:] - 2.0 * wi + w[:-2])
    zn[1:-1] = zi + (r * li) * (z[2:] - zi) + mu * (z[2:] - 2.0 * zi + z[:-2])
    wn[0], wn[-1], zn[0], zn[-1] = bc
    return float(np.max(lam))


def step(state: RiemannField, cfg: SolveConfig, p: ModelParams, grid: GridSpec,
         dt: float | None = None) -> RiemannField:
    """Single-step convenience wrapper around the in-place kernel."""
    if dt is None:
        dt = cfl_dt(state, cfg, p, grid)
        if not math.isfinite(dt):
            dt = cfg.t_end
    wn = np.empty_like(state.w)
    zn = np.empty_like(state.z)
    bc = (state.w[0], state.w[-1], state.z[0], state.z[-1])
    _advance(state.w, state.z, wn, zn, dt, grid.dx, cfg.epsilon, p, bc)
    return RiemannField(w=wn, z=zn, t=state.t + dt)


def run(mdata: MollifiedRiemannData, cfg: SolveConfig, p: ModelParams,
        guards: list | None = None) -> Trajectory:
    """Integrate mollified data to t_end, collecting snapshots.

    guards: callables (w, z, t) -> None or a failed verdict, evaluated on the
    initial state, every cfg.monitor_cadence steps and at the end; a non-None
    return aborts with MonitorFailure carrying the partial trajectory.

    Raises ValueError if the domain cannot contain the light cone, so that
    the Dirichlet far fields stay consistent with the data for all of [0, t_end].
    """
    grid = mdata.grid
    lam_data = p.theta * pow_pos(max(float(np.max(mdata.z0 - mdata.w0)) * 0.5, 0.0),
                                 _speed_exponent(p))
    if not grid.covers(mdata.support_radius, lam_data, cfg.t_end):
        raise ValueError(
            f"domain [{grid.x_min}, {grid.x_max}] too small for support radius "
            f"{mdata.support_radius:.3g} and speed {lam_data:.3g} up to t = {cfg.t_end}"
        )

    v_tol = cfg.v_tol if cfg.v_tol is not None else 0.5 * mdata.v_floor
    g_tol = pow_pos(v_tol, p.theta)

    snap_times = cfg.resolve_snapshots()
    traj = Trajectory(grid=grid, mdata=mdata, v_tol=v_tol)

    w = mdata.w0.copy()
    z = mdata.z0.copy()
    wn = np.empty_like(w)
    zn = np.empty_like(z)
    bc = mdata.dirichlet

    t = 0.0
    dts = []
    next_snap = 0
    dx = grid.dx

    def check_guards():
        if not guards:
            return
        for guard in guards:
            verdict = guard(w, z, t)
            if verdict is not None:
                traj.dt_history = np.asarray(dts)
                traj.times.append(t)
                traj.snapshots.append(RiemannField(w=w.copy(), z=z.copy(), t=t))
                raise MonitorFailure(verdict, traj)

    def note_degeneracy():
        if traj.degeneracy is not None:
            return
        g = 0.5 * (z - w)
        i = int(np.argmin(g))
        if g[i] < g_tol:
            v = float(pow_pos(max(g[i], 0.0), 1.0 / p.theta))
            traj.degeneracy = (t, float(grid.x[i]), v)

    check_guards()
    note_degeneracy()
    while next_snap < len(snap_times):
        target = snap_times[next_snap]
        while t < target - 1e-14:
            denom = max_speed(w, z, p) / dx + 2.0 * cfg.epsilon / (dx * dx)
            dt = cfg.cfl / denom if denom > 0.0 else target - t
            hit = t + dt >= target - 1e-14
            if hit:
                dt = target - t
            lam_step = _advance(w, z, wn, zn, dt, dx, cfg.epsilon, p, bc)
            w, wn = wn, w
            z, zn = zn, z
            t = target if hit else t + dt
            traj.steps += 1
            traj.lambda_max = max(traj.lambda_max, lam_step)
            dts.append(dt)
            if not (np.isfinite(w).all() and np.isfinite(z).all()):
                raise BlowupError(traj.steps, t)
            note_degeneracy()
            if traj.steps % cfg.monitor_cadence == 0:
                check_guards()
        traj.times.append(t)
        traj.snapshots.append(RiemannField(w=w.copy(), z=z.copy(), t=t))
        next_snap += 1
    check_guards()

    traj.dt_history = np.asarray(dts)
    return traj


def conserved_fluxes(state: RiemannField, grid: GridSpec, cfg: SolveConfig,
                     p: ModelParams, v_rtol: float = 1e-8):
    """Residual of the conserved-form rewrite on a single state.

    The Riemann-form time derivatives (central differences in x)

        w_t = -lam2 w_x + eps w_xx,   z_t = -lam1 z_x + eps z_xx

    pushed through the Jacobian of (v, u) with respect to (w, z) must agree
    with the conserved-form right-hand sides

        v_t = u_x + eps v_xx - eps (a_x w_x + b_x z_x)
        u_t = c (v**s)_x + eps u_xx,

    where a = -1 / (2 theta v**((s-1)/2)) and b = -a are the v-row Jacobian
    entries.  The identity is algebraic, so on a smooth state the discrete
    residual is pure truncation, O(dx**2).

    Returns (r_v, r_u, valid): residual arrays and a mask that excludes
    boundary nodes and anything within two nodes of vacuum, where the
    Jacobian entries blow up.
    """
    w, z = state.w, state.z
    dx = grid.dx
    eps = cfg.epsilon

    g = 0.5 * (z - w)
    v = pow_pos(np.maximum(g, 0.0), 1.0 / p.theta)
    u = 0.5 * (w + z)
    lam2 = p.theta * np.maximum(g, 0.0) ** _speed_exponent(p)

    def d1(f):
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
        return out

    def d2(f):
        out = np.zeros_like(f)
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
        return out

    vscale = max(float(np.max(v)), 1.0)
    ok = v > v_rtol * vscale
    denom = np.where(ok, 2.0 * p.theta * pow_pos(v, p.s_half), 1.0)
    a = np.where(ok, -1.0 / denom, 0.0)
    b = -a

    wt = -lam2 * d1(w) + eps * d2(w)
    zt = lam2 * d1(z) + eps * d2(z)  # lam1 = -lam2

    vt_riemann = a * wt + b * zt
    ut_riemann = 0.5 * (wt + zt)

    vt_conserved = d1(u) + eps * d2(v) - eps * (d1(a) * d1(w) + d1(b) * d1(z))
    ut_conserved = p.c * d1(pow_pos(v, p.s)) + eps * d2(u)

    r_v = vt_riemann - vt_conserved
    r_u = ut_riemann - ut_conserved

    valid = np.zeros(grid.n, dtype=bool)
    valid[2:-2] = ok[2:-2] & ok[1:-3] & ok[3:-1] & ok[:-4] & ok[4:]
    return r_v, r_u, valid
