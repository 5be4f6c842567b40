"""Weak entropy pairs of the degenerate system.

For a smooth profile f the pair

    eta0(v, u) = int_{-1}^{1} f(u + v**theta * tau) * (1 - tau**2)**lam dtau
    q0(v, u)   = -theta * v**((s-1)/2)
                 * int_{-1}^{1} f(u + v**theta * tau) * tau * (1 - tau**2)**lam dtau

with lam = -(s + 3) / (2 * (s + 1)) in (-1, 0) satisfies the compatibility
relations

    q_u = -eta_v,      q_v = -theta**2 * v**(s-1) * eta_u,

and degenerates at vacuum to eta0(0, u) = d0 * f(u) with the normalization

    d0 = int_{-1}^{1} (1 - tau**2)**lam dtau = B(1/2, lam + 1).

The kernel (1 - tau**2)**lam is singular at the endpoints (lam < 0), so the
integrals are evaluated with a Gauss-Jacobi rule built for exactly that
weight: nodes and weights come from the eigen-decomposition of the symmetric
tridiagonal recurrence matrix of the Jacobi polynomials with alpha = beta =
lam (Golub-Welsch).  The rule integrates polynomials through degree 2n - 1
against the weight exactly, and smooth profiles to near machine precision at
the default n = 64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import beta as beta_fn

from .core import ModelParams, pow_pos

DEFAULT_NODES = 64


@dataclass(frozen=True)
class JacobiQuadrature:
    """Nodes and weights for int_{-1}^{1} f(tau) (1 - tau**2)**lam dtau."""

    lam: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size


def gauss_jacobi(n: int, lam: float) -> JacobiQuadrature:
    """Golub-Welsch rule for the ultraspherical weight (1 - tau**2)**lam."""
    if n < 1:
        raise ValueError("need at least one node")
    if not -1.0 < lam:
        raise ValueError("weight exponent must exceed -1")

    # Monic three-term recurrence for alpha = beta = lam: the diagonal
    # vanishes by symmetry and the off-diagonal coefficients are
    #   beta_1 = 1 / (3 + 2 lam),
    #   beta_k = k (k + 2 lam) / ((2k + 2 lam)**2 - 1),  k >= 2.
    k = np.arange(1, n, dtype=float)
    beta = np.empty(n - 1) if n > 1 else np.empty(0)
    if n > 1:
        beta[0] = 1.0 / (3.0 + 2.0 * lam)
        kk = k[1:]
        beta[1:] = kk * (kk + 2.0 * lam) / ((2.0 * kk + 2.0 * lam) ** 2 - 1.0)

    mu0 = 2.0 ** (2.0 * lam + 1.0) * beta_fn(lam + 1.0, lam + 1.0)
    if n == 1:
        return JacobiQuadrature(lam=lam, nodes=np.zeros(1), weights=np.array([mu0]))

    evals, evecs = eigh_tridiagonal(np.zeros(n), np.sqrt(beta))
    nodes = evals
    weights = mu0 * evecs[0, :] ** 2
    # the rule is symmetric about 0; remove the eigen-solver's rounding skew
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return JacobiQuadrature(lam=lam, nodes=nodes, weights=weights)


def quadrature_for(p: ModelParams, n: int = DEFAULT_NODES) -> JacobiQuadrature:
    return gauss_jacobi(n, p.lambda_exp)


def d0(p: ModelParams, n: int = DEFAULT_NODES) -> float:
    """Normalization constant, the weight's total mass (sum of the rule's weights)."""
    return float(np.sum(quadrature_for(p, n).weights))


@dataclass(frozen=True)
class TestProfile:
    """Named smooth profile f with two derivatives."""

    name: str
    f: Callable
    d1: Callable
    d2: Callable


PROFILES = {
    "one": TestProfile("one", lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                       lambda x: np.zeros_like(np.asarray(x, dtype=float))),
    "identity": TestProfile("identity", lambda x: np.asarray(x, dtype=float),
                            lambda x: np.ones_like(np.asarray(x, dtype=float)),
                            lambda x: np.zeros_like(np.asarray(x, dtype=float))),
    "square": TestProfile("square", lambda x: np.asarray(x, dtype=float) ** 2,
                          lambda x: 2.0 * np.asarray(x, dtype=float),
                          lambda x: np.full_like(np.asarray(x, dtype=float), 2.0)),
    "sine": TestProfile("sine", np.sin, np.cos, lambda x: -np.sin(x)),
}


def _moments(v, u, f, p: ModelParams, quad: JacobiQuadrature):
    """(plain, tau-weighted) quadrature sums of f(u + v**theta * tau)."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    vth = np.asarray(pow_pos(v, p.theta), dtype=float)
    xi = u[..., None] + vth[..., None] * quad.nodes
    fx = f(xi)
    m0 = fx @ quad.weights
    m1 = fx @ (quad.weights * quad.nodes)
    return m0, m1


def eta0(v, u, f, p: ModelParams, quad: JacobiQuadrature):
    """Entropy eta0(v, u) for profile f."""
    m0, _ = _moments(v, u, f, p, quad)
    return float(m0) if np.ndim(m0) == 0 else m0


def q0(v, u, f, p: ModelParams, quad: JacobiQuadrature):
    """Entropy flux q0(v, u) for profile f."""
    _, m1 = _moments(v, u, f, p, quad)
    out = -p.theta * pow_pos(v, p.s_half) * m1
    return float(out) if np.ndim(out) == 0 else out


def entropy_pair_residual(v: float, u: float, f, p: ModelParams,
                          quad: JacobiQuadrature, h: float = 1e-3):
    """Central-difference defect of the compatibility relations at (v, u).

        r1 = q_u + eta_v
        r2 = q_v + theta**2 * v**(s-1) * eta_u

    Both vanish for the exact pair; with step h the finite differences leave
    O(h**2) truncation.  Requires v > 2h so the v-stencil stays in v > 0.
    """
    if v <= 2.0 * h:
        raise ValueError("need v > 2h to keep central differences away from vacuum")
    e = lambda vv, uu: eta0(vv, uu, f, p, quad)
    q = lambda vv, uu: q0(vv, uu, f, p, quad)
    eta_v = (e(v + h, u) - e(v - h, u)) / (2.0 * h)
    eta_u = (e(v, u + h) - e(v, u - h)) / (2.0 * h)
    q_v = (q(v + h, u) - q(v - h, u)) / (2.0 * h)
    q_u = (q(v, u + h) - q(v, u - h)) / (2.0 * h)
    r1 = q_u + eta_v
    r2 = q_v + p.theta**2 * v ** (p.s - 1.0) * eta_u
    return float(r1), float(r2)


def entropy_production(traj, f, p: ModelParams, quad: JacobiQuadrature,
                       test_fns: list) -> list:
    """Rows (name, production) of int int eta0 * phi_t + q0 * phi_x dx dt.

    For the vanishing-viscosity family this stays bounded uniformly in eps
    (and is signed for convex profiles); it is reported, not thresholded.
    """
    x = traj.grid.x
    times = np.asarray(traj.times)
    etas = []
    qs = []
    for i in range(times.size):
        c = traj.conserved(i, p)
        m0, m1 = _moments(c.v, c.u, f, p, quad)
        etas.append(m0)
        qs.append(-p.theta * pow_pos(c.v, p.s_half) * m1)
    eta_mat = np.stack(etas)
    q_mat = np.stack(qs)

    rows = []
    for fn in test_fns:
        xx = x[None, :]
        tt = times[:, None]
        integrand = eta_mat * fn.dt(xx, tt) + q_mat * fn.dx(xx, tt)
        val = np.trapezoid(np.trapezoid(integrand, x, axis=1), times)
        rows.append((fn.name, float(val)))
    return rows
