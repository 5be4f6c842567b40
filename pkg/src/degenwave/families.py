"""Analytic initial-data families.

Every family has exactly flat tails (the shapes are compactly supported
polynomials, not exponentially decaying ones), so far-field limits read off
the boundary samples are exact and the threshold functional carries no tail
truncation error.

All admissible families keep both Riemann profiles nonincreasing:

    const        v0 = level, v1 = 0 (trivial steady state)
    vel_bump     v0 = level, v1 = -amplitude-mass bump  (T = 2*level**theta - amplitude)
    v0_ramp      decreasing v0 ramp with v1 on the admissibility boundary
                 (w0 is constant, z0 strictly decreasing; always T >= 0)
    both_ramp    v0 ramp plus an extra velocity bump (strictly admissible)
    vacuum_ramp  v0 ramp down to vacuum v = 0 (boundary case T = 0)

and one deliberately inadmissible family for negative controls:

    bump_v0      a bump in v0 with v1 = 0 (both profiles non-monotone)
"""

from __future__ import annotations

import numpy as np

from .core import ModelParams, pow_pos
from .grid import GridSpec
from .initdata import POLY_BUMP_MASS, InitialData, poly_bump, poly_step


def _ramp(x, high, low, center, width):
    """Profile decreasing from high to low across [center - width, center + width],
    together with its analytic derivative."""
    xi = (x - center) / width
    prof = high + (low - high) * poly_step(xi)
    dprof = (low - high) * poly_bump(xi) / (POLY_BUMP_MASS * width)
    return prof, dprof


def family_const(grid: GridSpec, p: ModelParams, level=1.0, **_):
    x = grid.x
    return InitialData.from_profiles(
        grid, np.full_like(x, float(level)), np.zeros_like(x), family="const"
    )


def family_vel_bump(grid, p, level=1.0, amplitude=1.0, center=0.0, width=2.0, **_):
    """Constant v0 with an inward velocity bump of mass `amplitude`.

    u0 = -amplitude * poly_step is the exact antiderivative of v1, so both
    Riemann profiles are nonincreasing sample by sample, not just up to
    quadrature error.
    """
    x = grid.x
    xi = (x - float(center)) / float(width)
    v0 = np.full_like(x, float(level))
    v1 = -float(amplitude) * poly_bump(xi) / (float(width) * POLY_BUMP_MASS)
    u0 = -float(amplitude) * poly_step(xi)
    return InitialData.from_profiles(grid, v0, v1, u0=u0, family="vel_bump")


def _ramp_data(grid, p, high, low, center, width, extra_v1=None, extra_u0=None,
               family="v0_ramp"):
    x = grid.x
    v0, dv0 = _ramp(x, float(high), float(low), float(center), float(width))
    # admissibility boundary: v1 = -theta * v0**((s-1)/2) * |v0_x|.  Since
    # theta - 1 = (s-1)/2 this v1 is exactly d/dx(v0**theta), so the closed
    # form u0 = v0**theta - high**theta makes the raw w0 = u0 - v0**theta a
    # floating-point constant (and z0 = 2*v0**theta - high**theta monotone).
    v1 = p.theta * pow_pos(v0, p.s_half) * dv0
    u0 = pow_pos(v0, p.theta) - float(high) ** p.theta
    if extra_v1 is not None:
        v1 = v1 + extra_v1
        u0 = u0 + extra_u0
    return InitialData.from_profiles(grid, v0, v1, u0=u0, family=family)


def family_v0_ramp(grid, p, high=1.0, low=0.4, center=0.0, width=3.0, **_):
    return _ramp_data(grid, p, high, low, center, width)


def family_both_ramp(grid, p, high=1.0, low=0.4, center=0.0, width=3.0,
                     amplitude=0.3, bump_center=0.0, bump_width=2.0, **_):
    x = grid.x
    xi = (x - float(bump_center)) / float(bump_width)
    extra_v1 = -float(amplitude) * poly_bump(xi) / (float(bump_width) * POLY_BUMP_MASS)
    extra_u0 = -float(amplitude) * poly_step(xi)
    return _ramp_data(grid, p, high, low, center, width,
                      extra_v1=extra_v1, extra_u0=extra_u0, family="both_ramp")


def family_vacuum_ramp(grid, p, high=1.0, center=0.0, width=3.0, **_):
    return _ramp_data(grid, p, high, 0.0, center, width, family="vacuum_ramp")


def family_bump_v0(grid, p, level=0.5, amplitude=0.5, center=0.0, width=2.0, **_):
    """Inadmissible: v0 has a bump, so neither Riemann profile is monotone."""
    x = grid.x
    v0 = float(level) + float(amplitude) * poly_bump((x - float(center)) / float(width))
    return InitialData.from_profiles(grid, v0, np.zeros_like(x), family="bump_v0")


FAMILIES = {
    "const": family_const,
    "vel_bump": family_vel_bump,
    "v0_ramp": family_v0_ramp,
    "both_ramp": family_both_ramp,
    "vacuum_ramp": family_vacuum_ramp,
    "bump_v0": family_bump_v0,
}


def load_profiles_csv(path, grid: GridSpec) -> InitialData:
    """Read columns x, v0, v1 from a CSV file and interpolate onto the grid."""
    raw = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("x", "v0", "v1"):
        if col not in (raw.dtype.names or ()):
            raise ValueError(f"profiles file {path} lacks column {col!r}")
    order = np.argsort(raw["x"])
    xs = raw["x"][order]
    x = grid.x
    v0 = np.interp(x, xs, raw["v0"][order])
    v1 = np.interp(x, xs, raw["v1"][order])
    return InitialData.from_profiles(grid, v0, v1, family="from_file")


def build_family(name: str, grid: GridSpec, p: ModelParams, params: dict) -> InitialData:
    """Construct a named family; unknown names list the available ones."""
    if name == "from_file":
        path = params.get("file")
        if not path:
            raise ValueError("family 'from_file' needs a 'file' parameter")
        return load_profiles_csv(path, grid)
    try:
        builder = FAMILIES[name]
    except KeyError:
        known = ", ".join(sorted([*FAMILIES, "from_file"]))
        raise ValueError(f"unknown data family {name!r} (known: {known})") from None
    return builder(grid, p, **params)
