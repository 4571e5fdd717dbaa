"""Numerical engine for hyperelliptic spectral curves of beta-ensembles.

Builds the Riemann-surface apparatus of a real multi-cut curve s^2 = sigma(x)
(period matrix, Abel map, theta functions, prime form, bidifferential,
equilibrium data) and verifies the exact theta-function identities attached to
the beta = 1, 2, 4 ensembles together with the finite-size determinantal and
Pfaffian kernel formulas.
"""

from .curve import CurveSpec, SurfacePoint, LocalChart, load_curve_file
from .periods import PeriodData, compute_periods
from .theta import ThetaCharacteristic, ThetaContext, theta, theta_grad, theta_hessian
from .abel import CurveFrame
from .equilibrium import EquilibriumData, solve_equilibrium

__all__ = [
    "CurveSpec",
    "SurfacePoint",
    "LocalChart",
    "load_curve_file",
    "PeriodData",
    "compute_periods",
    "ThetaCharacteristic",
    "ThetaContext",
    "theta",
    "theta_grad",
    "theta_hessian",
    "CurveFrame",
    "EquilibriumData",
    "solve_equilibrium",
]

__version__ = "0.1.0"
