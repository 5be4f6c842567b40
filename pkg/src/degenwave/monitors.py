"""Run monitors: structural guarantees checked on live runs and trajectories.

Hard monitors guard properties the scheme preserves exactly (up to rounding),
so any violation means the run is wrong and must abort:

  * invariant_region -- w stays in [c1 - delta, c0 - delta], z in
    [c0 + delta, c2 + delta] (maximum principle box of the separated data);
  * monotonicity     -- nonincreasing profiles stay nonincreasing;
  * order            -- z >= w pointwise (for data without a common Riemann
    bound the crossing is the expected breakdown signature, so runs that probe
    breakdown leave this guard off).

Soft monitors quantify agreement with properties that hold for the vanishing-
viscosity limit and are met by the discrete run up to O(dx + eps):

  * v_time_decrease        -- v(x, t) nonincreasing in t at every node;
  * comparison_bounds      -- w0(x) <= w(x,t) <= w0(x - lam_M t) and the
    mirrored bounds for z, lam_M = theta * max(v0)**((s-1)/2);
  * l1_derivative_bounds   -- total variation of w, z never grows, and the
    advective time derivatives obey |w_t|_1 + |z_t|_1 <= lam_M * TV(0);
  * f_identity             -- F(t) = -integral(v - v0) follows the line
    (u_minus - u_plus) * t;
  * weak_form_residual     -- the (v, u) fields satisfy the weak form of the
    inviscid system against smooth compactly supported test functions.

The F machinery also produces the nonexistence certificate: with a cut M
outside the data support, F2 is bounded by C_M = 2 * M * max(v0) while
F1 + F3 force F below (z0(M) - w0(-M)) * t + C_M; once the margin
(w0(-M) - z0(M)) * t - C_M turns positive no solution with v >= 0 can exist,
so the state must hit vacuum before t* = C_M / (w0(-M) - z0(M)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams, pow_pos
from .initdata import MollifiedRiemannData, poly_bump
from .solver import Trajectory

# Default relative tolerances (times the data scale unless stated otherwise).
RTOL_BOX = 1e-10          # invariant region
RTOL_SLOPE = 1e-8         # one-sided slopes, also comparison additive term
ATOL_V_DECREASE = 1e-10   # absolute, on v
RTOL_ORDER = 1e-9         # z >= w
RTOL_TV = 1e-10           # total-variation growth
F_TOL_FACTOR = 5.0        # f_identity: factor * (dx + eps) * scale


@dataclass
class Verdict:
    name: str
    passed: bool
    hard: bool
    max_violation: float
    tolerance: float
    t: float = float("nan")
    x: float = float("nan")
    detail: str = ""


def _worst(arrs):
    """(value, flat index) of the largest entry across stacked arrays."""
    stacked = np.asarray(arrs)
    i = int(np.argmax(stacked))
    return float(stacked.flat[i]), np.unravel_index(i, stacked.shape)


# ---------------------------------------------------------------------------
# hard monitors (state-level cores + trajectory wrappers + solver guards)

def _box_violation(w, z, c1, c0, c2, delta):
    return np.maximum.reduce([
        (c1 - delta) - w,
        w - (c0 - delta),
        (c0 + delta) - z,
        z - (c2 + delta),
    ])


def invariant_region(traj: Trajectory, rtol: float = RTOL_BOX) -> Verdict:
    """Every snapshot stays in the invariant box of the mollified data."""
    md = traj.mdata
    tol = rtol * md.scale
    if not md.separated:
        return Verdict("invariant_region", True, True, float("nan"), tol,
                       detail="skipped: data not separated (no common bound c0)")
    viol = [_box_violation(f.w, f.z, md.c1, md.c0, md.c2, md.delta) for f in traj.snapshots]
    worst, (it, ix) = _worst(viol)
    return Verdict(
        "invariant_region", worst <= tol, True, worst, tol,
        t=traj.times[it], x=float(traj.grid.x[ix]),
        detail=f"box [{md.c1 - md.delta:.6g}, {md.c0 - md.delta:.6g}] x "
               f"[{md.c0 + md.delta:.6g}, {md.c2 + md.delta:.6g}]",
    )


def conserved_bounds(traj: Trajectory, rtol: float = RTOL_BOX) -> Verdict:
    """Box corollaries in the conserved variables at every snapshot:

        (c1 + c0)/2 <= u <= (c2 + c0)/2
        c1 - c0 + 2 delta <= 2 v**theta <= c2 - c1 + 2 delta

    with u = (w + z)/2 and 2 v**theta = z - w read off the snapshot.
    """
    md = traj.mdata
    tol = rtol * md.scale
    if not md.separated:
        return Verdict("conserved_bounds", True, True, float("nan"), tol,
                       detail="skipped: data not separated (no common bound c0)")
    d = md.delta
    viol = []
    for f in traj.snapshots:
        u = 0.5 * (f.w + f.z)
        two_vth = f.z - f.w
        viol.append(np.maximum.reduce([
            0.5 * (md.c1 + md.c0) - u,
            u - 0.5 * (md.c2 + md.c0),
            (md.c1 - md.c0 + 2.0 * d) - two_vth,
            two_vth - (md.c2 - md.c1 + 2.0 * d),
        ]))
    worst, (it, ix) = _worst(viol)
    return Verdict("conserved_bounds", worst <= tol, True, worst, tol,
                   t=traj.times[it], x=float(traj.grid.x[ix]))


def monotonicity(traj: Trajectory, p: ModelParams,
                 slope_rtol: float = RTOL_SLOPE) -> Verdict:
    """Profiles stay nonincreasing in x on every snapshot.

    Node increments are compared against slope_rtol * scale (equivalently
    slopes against slope_rtol * scale / dx).
    """
    md = traj.mdata
    tol = slope_rtol * md.scale
    incs = []
    for f in traj.snapshots:
        dw = np.diff(f.w)
        dz = np.diff(f.z)
        incs.append(np.maximum(dw, dz))
    worst, (it, ix) = _worst(incs)
    return Verdict("monotonicity", worst <= tol, True, worst, tol,
                   t=traj.times[it], x=float(traj.grid.x[ix]))


def v_time_decrease(traj: Trajectory, p: ModelParams,
                    atol: float = ATOL_V_DECREASE) -> Verdict:
    """v(x, t2) <= v(x, t1) + atol for every snapshot pair t1 < t2.

    This is a property of the vanishing-viscosity limit, not of the viscous
    flow itself: diffusion can lift v slightly at interior minima, at a rate
    O(eps * g_xx), so the check is soft.  Away from vacuum dips the measured
    rise is zero to rounding.
    """
    vmat = np.stack([traj.conserved(i, p).v for i in range(len(traj.snapshots))])
    running_min = np.minimum.accumulate(vmat, axis=0)
    rise = vmat[1:] - running_min[:-1]
    worst, (jt, jx) = _worst(rise)
    return Verdict("v_time_decrease", worst <= atol, False, worst, atol,
                   t=traj.times[jt + 1], x=float(traj.grid.x[jx]))


def order(traj: Trajectory, rtol: float = RTOL_ORDER) -> Verdict:
    """z >= w pointwise on every snapshot (within rounding)."""
    md = traj.mdata
    tol = rtol * md.scale
    viol = [f.w - f.z for f in traj.snapshots]
    worst, (it, ix) = _worst(viol)
    return Verdict("order", worst <= tol, True, worst, tol,
                   t=traj.times[it], x=float(traj.grid.x[ix]))


def make_guards(md: MollifiedRiemannData, names, p: ModelParams) -> list:
    """Step guards for solver.run; each returns a failed Verdict or None."""
    tol_box = RTOL_BOX * md.scale
    tol_inc = RTOL_SLOPE * md.scale
    tol_ord = RTOL_ORDER * md.scale
    x = md.grid.x
    guards = []

    def guard_invariant_region(w, z, t):
        viol = _box_violation(w, z, md.c1, md.c0, md.c2, md.delta)
        i = int(np.argmax(viol))
        if viol[i] > tol_box:
            return Verdict("invariant_region", False, True, float(viol[i]), tol_box,
                           t=t, x=float(x[i]), detail=f"state left the box at node {i}")
        return None

    def guard_monotonicity(w, z, t):
        for name, f in (("w", w), ("z", z)):
            d = np.diff(f)
            i = int(np.argmax(d))
            if d[i] > tol_inc:
                return Verdict("monotonicity", False, True, float(d[i]), tol_inc,
                               t=t, x=float(x[i]),
                               detail=f"{name} increases by {d[i]:.3e} at node {i}")
        return None

    def guard_order(w, z, t):
        d = w - z
        i = int(np.argmax(d))
        if d[i] > tol_ord:
            return Verdict("order", False, True, float(d[i]), tol_ord,
                           t=t, x=float(x[i]), detail=f"z < w at node {i}")
        return None

    table = {
        "invariant_region": guard_invariant_region,
        "monotonicity": guard_monotonicity,
        "order": guard_order,
    }
    for name in names:
        if name not in table:
            raise ValueError(f"unknown hard monitor {name!r} (known: {sorted(table)})")
        if name == "invariant_region" and not md.separated:
            continue  # no common bound, so no box to enforce
        guards.append(table[name])
    return guards


# ---------------------------------------------------------------------------
# soft monitors

def lam_max_bound(md: MollifiedRiemannData, p: ModelParams) -> float:
    """lam_M = theta * max(v0)**((s-1)/2) of the mollified initial state."""
    g_max = max(float(np.max(md.z0 - md.w0)) * 0.5, 0.0)
    return p.theta * float(pow_pos(g_max, (p.s - 1.0) / (p.s + 1.0)))


def comparison_bounds(traj: Trajectory, p: ModelParams,
                      slope_rtol: float = RTOL_SLOPE) -> Verdict:
    """Initial profiles translated at the maximal speed bracket the solution.

    Tolerance: 2 * dx * max|slope| + slope_rtol * scale, the displacement a
    first-order front can leak past the exact comparison argument.
    """
    md = traj.mdata
    x = traj.grid.x
    lam_m = lam_max_bound(md, p)
    tol = 2.0 * traj.grid.dx * md.max_slope + slope_rtol * md.scale

    worst = -np.inf
    where = (float("nan"), float("nan"))
    for t, f in zip(traj.times, traj.snapshots):
        w_hi = np.interp(x - lam_m * t, x, md.w0, left=md.w0[0], right=md.w0[-1])
        z_lo = np.interp(x + lam_m * t, x, md.z0, left=md.z0[0], right=md.z0[-1])
        viol = np.maximum.reduce([
            md.w0 - f.w,      # w0(x) <= w(x, t)
            f.w - w_hi,       # w(x, t) <= w0(x - lam_M t)
            z_lo - f.z,       # z0(x + lam_M t) <= z(x, t)
            f.z - md.z0,      # z(x, t) <= z0(x)
        ])
        i = int(np.argmax(viol))
        if viol[i] > worst:
            worst = float(viol[i])
            where = (t, float(x[i]))
    return Verdict("comparison_bounds", worst <= tol, False, worst, tol,
                   t=where[0], x=where[1], detail=f"lam_M = {lam_m:.6g}")


def total_variation(f: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(f))))


def remark_identity(md: MollifiedRiemannData) -> tuple[float, float]:
    """(TV(w0) + TV(z0), 2 * (u0(-inf) - u0(+inf))).

    For nonincreasing profiles the two agree: the v0**theta contributions to
    w0 and z0 cancel in the sum, and each TV telescopes to the far-field
    difference.
    """
    tv0 = total_variation(md.w0) + total_variation(md.z0)
    u0 = md.data.u0
    return tv0, 2.0 * (float(u0[0]) - float(u0[-1]))


def l1_derivative_bounds(traj: Trajectory, p: ModelParams,
                         rtol: float = RTOL_TV) -> Verdict:
    """TV never grows; advective time derivatives stay below lam_M * TV(0).

    |w_t|_1 is evaluated through the characteristic form w_t = -lam2 w_x
    (and z_t = -lam1 z_x), i.e. sum of lam2 * |increment| over cells.
    """
    md = traj.mdata
    tv0 = total_variation(md.w0) + total_variation(md.z0)
    lam_m = lam_max_bound(md, p)
    tol = rtol * max(tv0, 1.0)

    worst_tv = -np.inf
    worst_dt = -np.inf
    where_t = float("nan")
    for t, f in zip(traj.times, traj.snapshots):
        tv = total_variation(f.w) + total_variation(f.z)
        g = np.maximum(0.5 * (f.z - f.w), 0.0)
        lam2 = p.theta * g ** ((p.s - 1.0) / (p.s + 1.0))
        mid = 0.5 * (lam2[1:] + lam2[:-1])
        dt_norm = float(np.sum(mid * np.abs(np.diff(f.w))) + np.sum(mid * np.abs(np.diff(f.z))))
        if tv - tv0 > worst_tv:
            worst_tv = tv - tv0
            where_t = t
        worst_dt = max(worst_dt, dt_norm - lam_m * tv0)
    worst = max(worst_tv, worst_dt)
    return Verdict(
        "l1_derivative_bounds", worst <= tol, False, worst, tol, t=where_t,
        detail=f"TV(0) = {tv0:.6g}, lam_M = {lam_m:.6g}",
    )


@dataclass
class FReport:
    """Mass-defect functional F(t) = -integral(v - v0) and its certificate."""

    times: np.ndarray
    f: np.ndarray
    predicted_slope: float       # u_minus - u_plus
    cut: float                   # M
    f1: np.ndarray               # contribution from x <= -M
    f2: np.ndarray               # from [-M, M]
    f3: np.ndarray               # from x >= M
    c_m: float                   # 2 * M * max(v0)
    margin_slope: float          # w0(-M) - z0(M)
    margin: np.ndarray           # margin_slope * t - c_m
    t_star: float                # c_m / margin_slope (inf when slope <= 0)
    max_residual: float          # max |F(t) - predicted_slope * t|

    def crossing_time(self) -> float:
        """First reported time with margin >= 0 (inf if it never crosses)."""
        idx = np.flatnonzero(self.margin >= 0.0)
        return float(self.times[idx[0]]) if idx.size else float("inf")


def f_functional(traj: Trajectory, p: ModelParams, cut: float | None = None) -> FReport:
    md = traj.mdata
    x = traj.grid.x
    if cut is None:
        cut = min(md.support_radius + 2.0 * md.delta, 0.45 * (x[-1] - x[0]))
    if not (x[0] < -cut < cut < x[-1]):
        raise ValueError(f"cut M = {cut} outside the grid")
    # snap the cut to grid nodes so the three pieces share endpoints and the
    # decomposition sums exactly to F
    i_r = int(np.argmin(np.abs(x - cut)))
    cut = float(x[i_r])
    i_l = int(np.argmin(np.abs(x + cut)))

    v0 = traj.conserved(0, p).v
    u_minus = float(0.5 * (md.w0[0] + md.z0[0]))
    u_plus = float(0.5 * (md.w0[-1] + md.z0[-1]))

    times = np.asarray(traj.times)
    f_all = np.empty(times.size)
    f1 = np.empty(times.size)
    f2 = np.empty(times.size)
    f3 = np.empty(times.size)
    for i in range(times.size):
        dv = traj.conserved(i, p).v - v0
        f_all[i] = -np.trapezoid(dv, x)
        f1[i] = -np.trapezoid(dv[: i_l + 1], x[: i_l + 1])
        f2[i] = -np.trapezoid(dv[i_l : i_r + 1], x[i_l : i_r + 1])
        f3[i] = -np.trapezoid(dv[i_r:], x[i_r:])

    c_m = 2.0 * cut * float(np.max(v0))
    w0_at = float(md.w0[i_l])
    z0_at = float(md.z0[i_r])
    margin_slope = w0_at - z0_at
    predicted = u_minus - u_plus
    t_star = c_m / margin_slope if margin_slope > 0.0 else float("inf")
    return FReport(
        times=times,
        f=f_all,
        predicted_slope=predicted,
        cut=float(cut),
        f1=f1,
        f2=f2,
        f3=f3,
        c_m=c_m,
        margin_slope=margin_slope,
        margin=margin_slope * times - c_m,
        t_star=t_star,
        max_residual=float(np.max(np.abs(f_all - predicted * times))),
    )


def f_identity(traj: Trajectory, p: ModelParams, cut: float | None = None,
               factor: float = F_TOL_FACTOR, epsilon: float = 0.0) -> Verdict:
    """F(t) follows (u_minus - u_plus) * t within factor * (dx + eps) * scale."""
    rep = f_functional(traj, p, cut)
    tol = factor * (traj.grid.dx + epsilon) * traj.mdata.scale
    it = int(np.argmax(np.abs(rep.f - rep.predicted_slope * rep.times)))
    return Verdict("f_identity", rep.max_residual <= tol, False,
                   rep.max_residual, tol, t=float(rep.times[it]),
                   detail=f"predicted slope {rep.predicted_slope:.6g}")


# ---------------------------------------------------------------------------
# weak form

@dataclass(frozen=True)
class SpaceTimeBump:
    """Separable C^3 test function: bump((x-x0)/rx) * bump((t-t0)/rt)."""

    name: str
    x0: float
    rx: float
    t0: float
    rt: float

    def _sx(self, x):
        return (np.asarray(x, dtype=float) - self.x0) / self.rx

    def _st(self, t):
        return (np.asarray(t, dtype=float) - self.t0) / self.rt

    def __call__(self, x, t):
        return poly_bump(self._sx(x)) * poly_bump(self._st(t))

    def dx(self, x, t):
        xi = self._sx(x)
        y = np.maximum(1.0 - xi * xi, 0.0)
        return (-8.0 * xi * y**3 / self.rx) * poly_bump(self._st(t))

    def dt(self, x, t):
        ti = self._st(t)
        y = np.maximum(1.0 - ti * ti, 0.0)
        return poly_bump(self._sx(x)) * (-8.0 * ti * y**3 / self.rt)


def default_battery(grid, t_end: float, quiet_radius: float | None = None) -> list:
    """Three test functions: one touching t = 0, one interior, and (when the
    domain has room outside quiet_radius) one supported where nothing moves."""
    width = grid.x_max - grid.x_min
    center = 0.5 * (grid.x_max + grid.x_min)
    fns = [
        SpaceTimeBump("touch0", center, 0.40 * width, 0.0, 0.90 * t_end),
        SpaceTimeBump("interior", center, 0.40 * width, 0.55 * t_end, 0.40 * t_end),
    ]
    if quiet_radius is not None:
        # left gap between the domain edge and the light cone
        gap_lo, gap_hi = grid.x_min, center - quiet_radius
        if gap_hi - gap_lo > 0.08 * width:
            x0 = 0.5 * (gap_lo + gap_hi)
            fns.append(SpaceTimeBump("quiet", x0, 0.45 * (gap_hi - gap_lo),
                                     0.5 * t_end, 0.45 * t_end))
    return fns


def weak_form_residual(traj: Trajectory, p: ModelParams, test_fns: list) -> list:
    """Rows (name, r1, r2): weak-form defects of the two conservation laws.

        r1 = int int v phi_t - u phi_x + int v0 phi(., 0)
        r2 = int int u phi_t - c v**s phi_x + int u0 phi(., 0)

    Quadrature is trapezoidal on the grid in x and over the snapshot times
    in t, so the result carries the time-sampling error of the trajectory in
    addition to the O(dx + eps) defect of the scheme itself.
    """
    x = traj.grid.x
    times = np.asarray(traj.times)
    if times.size < 3:
        raise ValueError("need at least 3 snapshots for the time quadrature")

    vs = []
    us = []
    for i in range(times.size):
        c = traj.conserved(i, p)
        vs.append(c.v)
        us.append(c.u)
    v = np.stack(vs)             # (nt, nx)
    u = np.stack(us)
    vpow = pow_pos(v, p.s)

    rows = []
    for fn in test_fns:
        xx = x[None, :]
        tt = times[:, None]
        phi_t = fn.dt(xx, tt)
        phi_x = fn.dx(xx, tt)
        integrand1 = v * phi_t - u * phi_x
        integrand2 = u * phi_t - p.c * vpow * phi_x
        r1 = np.trapezoid(np.trapezoid(integrand1, x, axis=1), times)
        r2 = np.trapezoid(np.trapezoid(integrand2, x, axis=1), times)
        phi0 = fn(x, 0.0)
        r1 += np.trapezoid(v[0] * phi0, x)
        r2 += np.trapezoid(u[0] * phi0, x)
        rows.append((fn.name, float(r1), float(r2)))
    return rows
