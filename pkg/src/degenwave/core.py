"""State algebra for the degenerate wave model.

The model is the second-order equation

    v_tt = c * (v**s)_xx,      v >= 0,  s > 1,

written as a first-order system for v and a companion field u:

    v_t - u_x = 0
    u_t - c * (v**s)_x = 0.

With theta = (s + 1) / 2 and c = theta**2 / s the system diagonalizes in the
Riemann coordinates

    w = u - v**theta,      z = u + v**theta,

whose characteristic speeds are -theta * v**((s-1)/2) and
+theta * v**((s-1)/2).  Both speeds collapse to zero on the degeneracy line
v = 0, which is what makes the problem interesting: hyperbolicity is lost
exactly where the state touches vacuum.

Everything downstream (initial data, solver, monitors, entropy pairs) works
in terms of the quantities defined here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# s may approach 1 but not reach it; below this margin the model is rejected.
EXPONENT_FLOOR = 1e-12

# Relative tolerance for clamping small negative v**theta to the vacuum state.
CLAMP_RTOL = 1e-12


class AdmissibilityError(ValueError):
    """State leaves the admissible region (v < 0 beyond clamp tolerance)."""


@dataclass(frozen=True)
class ModelParams:
    """Derived constants of the model for a fixed exponent s.

    theta      = (s + 1) / 2, the exponent of v in the Riemann coordinates
    c          = theta**2 / s, the stiffness constant (so c * s = theta**2)
    lambda_exp = -(s + 3) / (2 * (s + 1)), entropy kernel exponent, in (-1, 0)
    s_half     = (s - 1) / 2, the exponent of v in the wave speeds
    """

    s: float
    theta: float
    c: float
    lambda_exp: float
    s_half: float


def model_params(s: float) -> ModelParams:
    """Validate s > 1 and derive the model constants."""
    s = float(s)
    if not np.isfinite(s) or s <= 1.0 + EXPONENT_FLOOR:
        raise ValueError(f"exponent s must exceed 1 (got s={s!r})")
    theta = (s + 1.0) / 2.0
    c = theta * theta / s
    lam = -(s + 3.0) / (2.0 * (s + 1.0))
    return ModelParams(s=s, theta=theta, c=c, lambda_exp=lam, s_half=(s - 1.0) / 2.0)


def pow_pos(base, expo: float):
    """base**expo for base >= 0 via exp/log, with an exact zero at base <= 0.

    Fractional powers of tiny negatives (roundoff) would produce NaN; the
    vacuum state must map to an exact 0 instead.
    """
    b = np.asarray(base, dtype=float)
    out = np.zeros_like(b)
    pos = b > 0.0
    np.exp(expo * np.log(b, where=pos, out=np.zeros_like(b)), where=pos, out=out)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass
class ConservedField:
    """Sampled (v, u) state on a grid at time t."""

    v: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.v.shape != self.u.shape:
            raise ValueError("v and u must have the same shape")
        if np.any(self.v < 0.0):
            raise AdmissibilityError("v must be nonnegative")


@dataclass
class RiemannField:
    """Sampled (w, z) state on a grid at time t.

    Admissibility z >= w (i.e. v**theta = (z - w)/2 >= 0) is enforced where
    fields are constructed or transformed, not on every mutation: the solver
    owns raw arrays during time stepping.
    """

    w: np.ndarray
    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.w.shape != self.z.shape:
            raise ValueError("w and z must have the same shape")


def riemann_from_conserved(f: ConservedField, p: ModelParams) -> RiemannField:
    """(v, u) -> (w, z) = (u - v**theta, u + v**theta)."""
    vth = pow_pos(f.v, p.theta)
    return RiemannField(w=f.u - vth, z=f.u + vth, t=f.t)


def conserved_from_riemann(
    f: RiemannField,
    p: ModelParams,
    clamp_rtol: float | None = None,
) -> ConservedField:
    """(w, z) -> (v, u) = (((z - w)/2)**(1/theta), (w + z)/2).

    Small negative (z - w)/2 (within clamp_rtol * scale of zero, scale being
    the magnitude of the fields) is clamped to the vacuum state v = 0.  A dip
    beyond that tolerance means the state is genuinely inadmissible and an
    AdmissibilityError is raised.  Pass clamp_rtol=np.inf to clamp
    unconditionally (used when inspecting runs that drive v to vacuum).
    """
    if clamp_rtol is None:
        clamp_rtol = CLAMP_RTOL
    g = 0.5 * (f.z - f.w)
    floor = -clamp_rtol * field_scale(f.w, f.z)
    if np.any(g < floor):
        i = int(np.argmin(g))
        raise AdmissibilityError(
            f"z - w < 0 beyond clamp tolerance at index {i}: (z-w)/2 = {g.flat[i]:.3e}"
        )
    v = pow_pos(np.maximum(g, 0.0), 1.0 / p.theta)
    return ConservedField(v=v, u=0.5 * (f.w + f.z), t=f.t)


def eigenvalues(v, p: ModelParams):
    """Characteristic speeds (lam1, lam2) = (-1, +1) * theta * v**((s-1)/2).

    They coincide (both zero) exactly at the vacuum state v = 0.
    """
    lam2 = p.theta * pow_pos(v, p.s_half)
    return -lam2, lam2


def speeds_from_gap(g, p: ModelParams):
    """Fast wave speed theta * v**((s-1)/2) computed from g = (z - w)/2.

    Uses v**((s-1)/2) = g**((s-1)/(s+1)); g <= 0 maps to speed 0.  Avoids the
    round trip through v when only speeds are needed.
    """
    return p.theta * pow_pos(g, (p.s - 1.0) / (p.s + 1.0))


def field_scale(w: np.ndarray, z: np.ndarray) -> float:
    """Magnitude scale of a Riemann state, used for relative tolerances."""
    return max(
        1.0,
        float(np.max(np.abs(w), initial=0.0)),
        float(np.max(np.abs(z), initial=0.0)),
    )
