"""Initial-data pipeline.

A problem instance starts from sampled profiles (v0, v1) on a grid.  From
these we build the companion field u0 (antiderivative of v1), check the
one-sided admissibility conditions

    v1 + theta * v0**((s-1)/2) * v0_x <= 0
    v1 - theta * v0**((s-1)/2) * v0_x <= 0

(equivalently: both Riemann profiles w0 = u0 - v0**theta and
z0 = u0 + v0**theta are nonincreasing), classify the data by the sign of the
threshold functional

    T = integral(v1) + v0**theta(+inf) + v0**theta(-inf),

and produce the smoothed, delta-separated Riemann data that the viscous
solver actually evolves:

    w0_delta = mollify(u0 - v0**theta) - delta
    z0_delta = mollify(u0 + v0**theta) + delta.

The mollifier kernel is the compactly supported polynomial bump
K(x) ~ (1 - (x/delta)**2)**4 on |x| < delta, normalized discretely so its
weights sum to one.  Convolution with such a kernel is a convex combination
of samples, so it preserves value ranges and monotonicity exactly; with the
flat tails the data generators guarantee, edge padding makes the boundary
treatment exact as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import ModelParams, field_scale, pow_pos
from .grid import GridSpec

# Tail samples used to estimate far-field limits, and the flatness tolerance
# (relative to the data scale) beyond which a tail warning is recorded.
TAIL_NODES = 5
TAIL_RTOL = 1e-8

ADMISSIBILITY_RTOL = 1e-10


def poly_bump(xi):
    """Compact bump (1 - xi**2)**4 on |xi| < 1, zero outside."""
    xi = np.asarray(xi, dtype=float)
    y = 1.0 - xi * xi
    return np.where(y > 0.0, y, 0.0) ** 4


# integral of (1 - xi**2)**4 over [-1, 1]
POLY_BUMP_MASS = 256.0 / 315.0


def poly_step(xi):
    """Smooth unit step: normalized antiderivative of poly_bump, C^4.

    Exactly 0 for xi <= -1 and exactly 1 for xi >= 1.
    """
    xi = np.clip(np.asarray(xi, dtype=float), -1.0, 1.0)
    a = xi - 4.0 * xi**3 / 3.0 + 6.0 * xi**5 / 5.0 - 4.0 * xi**7 / 7.0 + xi**9 / 9.0
    # the polynomial lands ~1e-16 outside [0, 1] near the endpoints; clamp
    # so the step is exact there and stays monotone
    return np.clip((a + 128.0 / 315.0) / POLY_BUMP_MASS, 0.0, 1.0)


def build_u0(v1: np.ndarray, grid: GridSpec, left_limit: float = 0.0) -> np.ndarray:
    """Antiderivative of v1 by cumulative trapezoid, anchored at the left end."""
    v1 = np.asarray(v1, dtype=float)
    if v1.shape != (grid.n,):
        raise ValueError("v1 must be sampled on the grid")
    u0 = np.empty(grid.n)
    u0[0] = left_limit
    u0[1:] = left_limit + cumulative_trapezoid(v1, dx=grid.dx)
    return u0


@dataclass
class InitialData:
    """Sampled (v0, v1) with the derived u0 on a grid."""

    grid: GridSpec
    v0: np.ndarray
    v1: np.ndarray
    u0: np.ndarray
    family: str = "custom"

    @classmethod
    def from_profiles(cls, grid, v0, v1, u0_left=0.0, family="custom", u0=None):
        """Build from sampled profiles.

        Without an explicit u0, the companion field comes from numerical
        integration of v1.  Generators that know u0 in closed form should
        pass it: the quadrature error of the trapezoid rule, though tiny, is
        enough to break exact constancy of a Riemann profile that is constant
        analytically.
        """
        v0 = np.asarray(v0, dtype=float)
        v1 = np.asarray(v1, dtype=float)
        if v0.shape != (grid.n,) or v1.shape != (grid.n,):
            raise ValueError("v0 and v1 must be sampled on the grid")
        if np.any(v0 < 0.0):
            raise ValueError("v0 must be nonnegative")
        if u0 is None:
            u0 = build_u0(v1, grid, u0_left)
        else:
            u0 = np.asarray(u0, dtype=float)
            if u0.shape != (grid.n,):
                raise ValueError("u0 must be sampled on the grid")
        return cls(grid=grid, v0=v0, v1=v1, u0=u0, family=family)

    def riemann_profiles(self, p: ModelParams):
        """Raw (unsmoothed) w0 = u0 - v0**theta and z0 = u0 + v0**theta."""
        vth = pow_pos(self.v0, p.theta)
        return self.u0 - vth, self.u0 + vth


@dataclass
class AdmissibilityReport:
    ok: bool
    max_excess: float
    tol: float
    violations: list = field(default_factory=list)  # (index, x, e_plus, e_minus)


def check_admissible(data: InitialData, p: ModelParams, rtol: float = ADMISSIBILITY_RTOL) -> AdmissibilityReport:
    """Both raw Riemann profiles must be nonincreasing.

    The pointwise conditions v1 +- theta * v0**((s-1)/2) * v0_x <= 0 say
    exactly that w0 = u0 - v0**theta and z0 = u0 + v0**theta are
    nonincreasing, and the integrated form is what sampled data can certify
    without finite-difference slack: node increments of w0 and z0 are
    compared against rtol * scale.  Equality is admitted, so boundary data
    (v1 = -theta * v0**((s-1)/2) * |v0_x|, constant w0) pass.
    """
    w0, z0 = data.riemann_profiles(p)
    tol = rtol * field_scale(w0, z0)
    dw = np.diff(w0)
    dz = np.diff(z0)
    excess = np.maximum(dw, dz)
    bad = np.flatnonzero(excess > tol)
    x = data.grid.x
    violations = [(int(i), float(x[i]), float(dw[i]), float(dz[i])) for i in bad[:10]]
    return AdmissibilityReport(
        ok=bad.size == 0,
        max_excess=float(np.max(excess)),
        tol=tol,
        violations=violations,
    )


@dataclass
class ThresholdReport:
    t_value: float
    classification: str  # "existence" if t_value >= 0 else "nonexistence"
    admissible: bool
    integral_v1: float
    v0_theta_left: float
    v0_theta_right: float
    witness: tuple | None = None  # (x, y) with w0(x) > z0(y), when certified
    warnings: list = field(default_factory=list)


def threshold(data: InitialData, p: ModelParams) -> ThresholdReport:
    """Classify the data by the sign of T (>= 0: existence; < 0: nonexistence).

    Far-field limits of v0 are read from the boundary samples; if the
    outermost TAIL_NODES samples of v0 or v1 are not flat, the estimate is
    suspect and a warning is recorded rather than an error raised.
    """
    warnings = []
    scale = max(1.0, float(np.max(np.abs(data.v0))), float(np.max(np.abs(data.v1))))
    for name, arr in (("v0", data.v0), ("v1", data.v1)):
        for side, tail in (("left", arr[:TAIL_NODES]), ("right", arr[-TAIL_NODES:])):
            if np.max(np.abs(tail - tail[0 if side == "left" else -1])) > TAIL_RTOL * scale:
                warnings.append(f"{name} {side} tail not flat; far-field limit extrapolated")
    if max(abs(float(data.v1[0])), abs(float(data.v1[-1]))) > TAIL_RTOL * scale:
        warnings.append("v1 does not vanish at the boundary; integral(v1) truncated")

    integral_v1 = float(np.trapezoid(data.v1, dx=data.grid.dx))
    vth_l = float(pow_pos(data.v0[0], p.theta))
    vth_r = float(pow_pos(data.v0[-1], p.theta))
    t_value = integral_v1 + vth_l + vth_r

    adm = check_admissible(data, p)
    witness = None
    if t_value < 0.0 and adm.ok:
        w0, z0 = data.riemann_profiles(p)
        i = int(np.argmax(w0))
        j = int(np.argmin(z0))
        if w0[i] > z0[j]:
            witness = (float(data.grid.x[i]), float(data.grid.x[j]))

    return ThresholdReport(
        t_value=t_value,
        classification="existence" if t_value >= 0.0 else "nonexistence",
        admissible=adm.ok,
        integral_v1=integral_v1,
        v0_theta_left=vth_l,
        v0_theta_right=vth_r,
        witness=witness,
        warnings=warnings,
    )


def mollifier_weights(delta: float, dx: float) -> np.ndarray:
    """Discrete bump-kernel weights on radius floor(delta/dx), summing to 1."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    m = int(delta / dx + 1e-9)
    if m == 0:
        return np.array([1.0])
    xi = np.arange(-m, m + 1) * (dx / delta)
    wgt = poly_bump(xi)
    return wgt / wgt.sum()


@dataclass
class MollifiedRiemannData:
    """Smoothed, delta-separated Riemann initial data plus derived constants.

    bounds (c1, c0, c2) realize the ordering c1 <= w0 <= c0 <= z0 <= c2 of the
    raw profiles; together with the shifts they pin the invariant region
    [c1 - delta, c0 - delta] x [c0 + delta, c2 + delta].  A common bound c0
    exists only when max(w0_raw) <= min(z0_raw) ("separated"); nonexistence
    data (T < 0) are not separated and carry c0 = nan.
    """

    grid: GridSpec
    delta: float
    w0: np.ndarray
    z0: np.ndarray
    c1: float
    c0: float
    c2: float
    separated: bool
    monotone: bool
    max_slope: float         # measured M(delta): sup of -w0_x, -z0_x, floored at 0
    v_floor: float           # guaranteed min of v over time, when separated
    support_radius: float    # largest |x| at which the smoothed fields still vary
    scale: float
    data: InitialData

    @property
    def dirichlet(self):
        """Far-field (w_left, w_right, z_left, z_right) boundary values."""
        return float(self.w0[0]), float(self.w0[-1]), float(self.z0[0]), float(self.z0[-1])

    def initial_field(self):
        from .core import RiemannField

        return RiemannField(w=self.w0.copy(), z=self.z0.copy(), t=0.0)


def _support_radius(x, w, z, tol):
    dev = np.maximum.reduce([
        np.abs(w - w[0]), np.abs(z - z[0]),
    ])
    dev_r = np.maximum.reduce([
        np.abs(w - w[-1]), np.abs(z - z[-1]),
    ])
    varying = np.flatnonzero((dev > tol) & (dev_r > tol))
    if varying.size == 0:
        return 0.0
    return float(max(abs(x[varying[0]]), abs(x[varying[-1]])))


def mollify_riemann(data: InitialData, p: ModelParams, delta: float) -> MollifiedRiemannData:
    """Build w0_delta = smooth(u0 - v0**theta) - delta and its z counterpart."""
    grid = data.grid
    wgt = mollifier_weights(delta, grid.dx)
    m = (len(wgt) - 1) // 2
    if 2 * m + 1 > grid.n:
        raise ValueError("mollifier wider than the grid; enlarge the domain")

    w_raw, z_raw = data.riemann_profiles(p)

    def smooth(f):
        if m == 0:
            return f.copy()
        return np.convolve(np.pad(f, m, mode="edge"), wgt, mode="valid")

    w0 = smooth(w_raw) - delta
    z0 = smooth(z_raw) + delta

    scale = field_scale(w0, z0)
    sep = float(np.min(z_raw) - np.max(w_raw))
    separated = sep >= -1e-12 * scale
    c1 = float(np.min(w_raw))
    c2 = float(np.max(z_raw))
    c0 = 0.5 * (float(np.max(w_raw)) + float(np.min(z_raw))) if separated else float("nan")

    slope_tol = 1e-12 * scale / grid.dx
    neg_slopes = max(float(np.max(np.diff(w0))), float(np.max(np.diff(z0)))) / grid.dx
    monotone = neg_slopes <= slope_tol
    max_slope = max(
        0.0,
        float(np.max(-np.diff(w0))) / grid.dx,
        float(np.max(-np.diff(z0))) / grid.dx,
    )
    v_floor = float(pow_pos(0.5 * (max(sep, 0.0) + 2.0 * delta), 1.0 / p.theta))

    return MollifiedRiemannData(
        grid=grid,
        delta=delta,
        w0=w0,
        z0=z0,
        c1=c1,
        c0=c0,
        c2=c2,
        separated=separated,
        monotone=monotone,
        max_slope=max_slope,
        v_floor=v_floor,
        support_radius=_support_radius(grid.x, w0, z0, 1e-12 * scale),
        scale=scale,
        data=data,
    )
