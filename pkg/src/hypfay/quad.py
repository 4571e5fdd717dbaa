"""Quadrature backends shared by the period, Abel and equilibrium modules.

Everything here integrates analytic integrands, so the rules are composite
Gauss-Legendre panels (with doubling-based error estimates), the cosine
substitution for inverse-square-root edge singularities, and tanh-sinh for the
logarithmic kernel of the energy functional.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss

_GL_CACHE = {}


class QuadratureNoConvergence(RuntimeError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


def gl_nodes(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def segment_gl(f, z0, z1, n=64):
    """Gauss-Legendre on the straight segment z0 -> z1 (complex endpoints)."""
    x, w = gl_nodes(n)
    t = 0.5 * (x + 1.0)
    z = z0 + (z1 - z0) * t
    vals = f(z)
    return 0.5 * (z1 - z0) * np.sum(vals * w, axis=-1)


def segment_gl_adaptive(f, z0, z1, tol=1e-12, n0=48, max_panels=64):
    """Panel-doubling Gauss-Legendre with an a posteriori error estimate.

    Returns (value, err_estimate). Panels split until two refinement levels
    agree to `tol` (absolute, scaled by the running magnitude).
    """
    panels = 1
    prev = segment_gl(f, z0, z1, n=n0)
    while panels <= max_panels:
        panels *= 2
        ts = np.linspace(0.0, 1.0, panels + 1)
        pts = z0 + (z1 - z0) * ts
        cur = sum(segment_gl(f, pts[i], pts[i + 1], n=n0) for i in range(panels))
        err = abs(cur - prev)
        if err < tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur
    raise QuadratureNoConvergence(
        f"segment quadrature stalled at {panels} panels", achieved=err
    )


def cosine_segment(f, lo, hi, n=200):
    """Integrate f over [lo, hi] where f ~ 1/sqrt((x-lo)(hi-x)) at the edges.

    Substitution x = m + w cos(theta) turns the edge singularities into a
    smooth integrand in theta; Gauss-Legendre in theta then converges
    geometrically for integrands analytic around the segment.
    """
    m = 0.5 * (lo + hi)
    w = 0.5 * (hi - lo)
    x, wq = gl_nodes(n)
    th = 0.5 * (x + 1.0) * np.pi
    nodes = m + w * np.cos(th)
    return 0.5 * np.pi * np.sum(f(nodes) * w * np.sin(th) * wq, axis=-1)


def cosine_segment_adaptive(f, lo, hi, tol=1e-13, n0=96, n_max=3200):
    n = n0
    prev = cosine_segment(f, lo, hi, n=n)
    while n <= n_max:
        n *= 2
        cur = cosine_segment(f, lo, hi, n=n)
        err = abs(cur - prev)
        if err < tol * max(1.0, abs(cur)):
            return cur, err
        prev = cur
    raise QuadratureNoConvergence(
        f"cosine-substitution quadrature stalled at n={n}", achieved=err
    )


def tanh_sinh_nodes(n=160, h=None):
    """Symmetric tanh-sinh rule on (-1, 1); clusters doubly-exponentially."""
    if h is None:
        h = 3.4 / n
    k = np.arange(-n, n + 1)
    t = h * k
    phi = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(phi)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(phi) ** 2
    keep = 1.0 - np.abs(x) > 1e-17
    return x[keep], w[keep]


def trapezoid_circle(f, n=128):
    """Spectral trapezoid rule of (1/2 pi i) * contour integral over |w| = 1.

    `f` receives the points w on the unit circle; the rule returns
    (1/2 pi i) * sum f(w) dw, exact for Laurent polynomials of degree < n.
    """
    th = 2.0 * np.pi * np.arange(n) / n
    w = np.exp(1j * th)
    return np.sum(f(w) * w) / n
