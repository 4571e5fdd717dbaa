"""Lattice-sum kernels for the theta function.

The compiled Cython kernel is preferred; the numpy fallback is selected at
import time when the extension is unavailable.  Both expose

    theta_sum_raw(m, tau, w, order) -> (value, grad, hess)

where m is the (N, g) array of shifted lattice points n + mu, tau the (g, g)
matrix and w = z + nu; grad/hess are None unless requested via order >= 1, 2.
"""

try:
    from ._theta_cy import theta_sum_raw

    BACKEND = "cython"
except ImportError:  # pragma: no cover - exercised only without the extension
    from ._theta_np import theta_sum_raw

    BACKEND = "numpy"

from ._theta_np import theta_sum_raw as theta_sum_raw_numpy

__all__ = ["theta_sum_raw", "theta_sum_raw_numpy", "BACKEND"]
