"""Viscous approximation toolkit for a degenerate quasilinear wave system.

The package simulates w_t + lam2 w_x = eps w_xx, z_t + lam1 z_x = eps z_xx
(the Riemann-coordinate form of v_tt = c (|v|**(s-1) v)_xx with s > 1),
classifies initial data by the threshold integral T, and checks the
structural estimates of the vanishing-viscosity construction on every run.
"""

from .core import (
    AdmissibilityError,
    ConservedField,
    ModelParams,
    RiemannField,
    conserved_from_riemann,
    eigenvalues,
    model_params,
    riemann_from_conserved,
)
from .entropy import JacobiQuadrature, d0, eta0, gauss_jacobi, q0, quadrature_for
from .families import FAMILIES, build_family
from .grid import GridSpec
from .initdata import (
    InitialData,
    MollifiedRiemannData,
    check_admissible,
    mollify_riemann,
    threshold,
)
from .solver import (
    BlowupError,
    MonitorFailure,
    SolveConfig,
    Trajectory,
    cfl_dt,
    conserved_fluxes,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "BlowupError",
    "ConservedField",
    "FAMILIES",
    "GridSpec",
    "InitialData",
    "JacobiQuadrature",
    "ModelParams",
    "MollifiedRiemannData",
    "MonitorFailure",
    "RiemannField",
    "SolveConfig",
    "Trajectory",
    "build_family",
    "cfl_dt",
    "check_admissible",
    "conserved_fluxes",
    "conserved_from_riemann",
    "d0",
    "eta0",
    "eigenvalues",
    "gauss_jacobi",
    "mollify_riemann",
    "model_params",
    "q0",
    "quadrature_for",
    "riemann_from_conserved",
    "run",
    "step",
    "threshold",
]
