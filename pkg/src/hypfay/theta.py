"""Theta functions with characteristics.

theta_{mu,nu}(z | tau) = sum_n exp(i pi (n+mu).tau(n+mu) + 2 i pi (n+mu).(z+nu))

The lattice window is a box centred at the rounded stationary point of the
Gaussian factor; the per-axis radius comes from the tail bound
sum_{|m| > R} exp(-pi lam_min m^2) with lam_min the smallest eigenvalue of
Im tau.  Gradients and Hessians are term-wise derivatives over the same
window, never nested finite differences.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND, theta_sum_raw

__all__ = [
    "ThetaCharacteristic",
    "ThetaContext",
    "theta",
    "theta_grad",
    "theta_hessian",
    "binary_addition_check",
    "modular_check",
    "BACKEND",
]


class TailBoundExceeded(RuntimeError):
    """Requested tolerance needs a lattice radius beyond the hard cap."""


class DegenerateProbe(RuntimeError):
    """Probe value too small to calibrate the modular constant."""


@dataclass(frozen=True)
class ThetaCharacteristic:
    """Real (or complex) characteristic vectors (mu, nu)."""

    mu: tuple
    nu: tuple

    @classmethod
    def make(cls, mu, nu):
        mu = tuple(complex(v) for v in np.atleast_1d(mu))
        nu = tuple(complex(v) for v in np.atleast_1d(nu))
        return cls(mu, nu)

    @classmethod
    def zero(cls, g):
        return cls.make(np.zeros(g), np.zeros(g))

    @classmethod
    def half(cls, e_prime, e):
        """Half-integer characteristic (e'/2, e/2) from integer vectors."""
        return cls.make(np.asarray(e_prime) / 2.0, np.asarray(e) / 2.0)

    @property
    def g(self):
        return len(self.mu)

    def parity(self):
        """e . e' mod 2 for a half-integer characteristic (mu=e'/2, nu=e/2)."""
        e_prime = np.asarray([2 * m for m in self.mu])
        e = np.asarray([2 * n for n in self.nu])
        if not (np.allclose(e_prime.imag, 0) and np.allclose(e.imag, 0)):
            raise ValueError("parity defined for real half-integer characteristics")
        ei = np.rint(e.real).astype(int)
        epi = np.rint(e_prime.real).astype(int)
        if not (np.allclose(e.real, ei) and np.allclose(e_prime.real, epi)):
            raise ValueError("not a half-integer characteristic")
        return int(np.dot(ei, epi)) % 2


class ThetaContext:
    """Immutable evaluation context for one matrix tau.

    Separate contexts are built for each of tau, tau/2, 2tau, (beta/2) tau;
    no rescaling shortcuts.
    """

    HARD_CAP = 60

    def __init__(self, tau, tol=1e-14):
        tau = np.atleast_2d(np.asarray(tau, dtype=complex))
        if tau.shape[0] != tau.shape[1]:
            raise ValueError("tau must be square")
        if np.max(np.abs(tau - tau.T)) > 1e-9 * max(1.0, np.max(np.abs(tau))):
            raise ValueError("tau must be symmetric")
        y = tau.imag
        eigs = np.linalg.eigvalsh(0.5 * (y + y.T))
        if eigs[0] <= 0:
            raise ValueError("Im tau must be positive definite")
        self.tau = tau
        self.g = tau.shape[0]
        self.lam_min = float(eigs[0])
        self.tol = float(tol)
        self.y_inv = np.linalg.inv(y)
        # box radius: exp(-pi lam_min R^2) * (2R+1)^g <= tol  (crude union bound,
        # solved with a couple of fixed-point sweeps, then padded)
        r = np.sqrt(max(-np.log(self.tol), 1.0) / (np.pi * self.lam_min))
        for _ in range(3):
            r = np.sqrt(
                (max(-np.log(self.tol), 1.0) + self.g * np.log(2 * r + 3))
                / (np.pi * self.lam_min)
            )
        self.radius = int(np.ceil(r)) + 2
        if self.radius > self.HARD_CAP:
            raise TailBoundExceeded(
                f"lattice radius {self.radius} exceeds cap {self.HARD_CAP}"
            )
        self.tail_bound = (2 * self.radius + 3) ** self.g * np.exp(
            -np.pi * self.lam_min * self.radius**2
        )
        rng = np.arange(-self.radius, self.radius + 1)
        self._box = np.array(
            list(itertools.product(rng, repeat=self.g)), dtype=float
        )

    def _window(self, mu, w):
        """Lattice points n + mu, with n centred at the Gaussian peak."""
        peak = -self.y_inv @ np.asarray(w).imag - np.asarray(mu).real
        n0 = np.rint(peak)
        return (self._box + n0[None, :]) + np.asarray(mu)[None, :]

    def eval(self, char: ThetaCharacteristic, z, order=0, backend=None):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if z.shape != (self.g,):
            raise ValueError(f"z must have length g={self.g}")
        mu = np.asarray(char.mu, dtype=complex)
        nu = np.asarray(char.nu, dtype=complex)
        w = z + nu
        m = self._window(mu, w).astype(complex)
        fn = theta_sum_raw if backend is None else backend
        return fn(m, self.tau, w, order)


def theta(ctx: ThetaContext, char: ThetaCharacteristic, z):
    val, _, _ = ctx.eval(char, z, order=0)
    return val


def theta_grad(ctx: ThetaContext, char: ThetaCharacteristic, z):
    _, grad, _ = ctx.eval(char, z, order=1)
    return grad


def theta_hessian(ctx: ThetaContext, char: ThetaCharacteristic, z):
    _, _, hess = ctx.eval(char, z, order=2)
    return hess


def quasi_periodicity_factor(ctx, char, z, m_vec, n_vec):
    """Factor relating theta(z + m + tau n) to theta(z)."""
    m_vec = np.asarray(m_vec, dtype=float)
    n_vec = np.asarray(n_vec, dtype=float)
    mu = np.asarray(char.mu, dtype=complex)
    nu = np.asarray(char.nu, dtype=complex)
    z = np.asarray(z, dtype=complex)
    tn = ctx.tau @ n_vec
    return np.exp(
        2j * np.pi * np.dot(m_vec, mu)
        - 1j * np.pi * np.dot(n_vec, tn + 2.0 * z + 2.0 * nu)
    )


def half_integer_classes(g):
    """All alpha in Z^g / 2Z^g as integer vectors."""
    return [np.array(alpha) for alpha in itertools.product((0, 1), repeat=g)]


def binary_addition_check(ctx_half, ctx_full, char1, char2, z1, z2):
    """Residual of the binary addition relation linking tau/2 and tau theta values.

    theta_{mu,nu}(z1+z2 | tau/2) theta_{mu',nu'}(z1-z2 | tau/2)
      = sum_alpha theta_{(mu+mu'+alpha)/2, nu+nu'}(2 z1 | tau)
                  theta_{(mu-mu'+alpha)/2, nu-nu'}(2 z2 | tau)
    """
    g = ctx_full.g
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    mu1 = np.asarray(char1.mu)
    nu1 = np.asarray(char1.nu)
    mu2 = np.asarray(char2.mu)
    nu2 = np.asarray(char2.nu)
    lhs = theta(ctx_half, char1, z1 + z2) * theta(ctx_half, char2, z1 - z2)
    rhs = 0.0
    terms = [abs(lhs)]
    for alpha in half_integer_classes(g):
        ca = ThetaCharacteristic.make((mu1 + mu2 + alpha) / 2.0, nu1 + nu2)
        cb = ThetaCharacteristic.make((mu1 - mu2 + alpha) / 2.0, nu1 - nu2)
        term = theta(ctx_full, ca, 2.0 * z1) * theta(ctx_full, cb, 2.0 * z2)
        rhs = rhs + term
        terms.append(abs(term))
    return abs(lhs - rhs) / max(terms)


def log_hess_bilinear_block(ctx, char, u1, q1, u2, q2):
    """Grid of q1_i . Hess[ln theta](u1_i - u2_j) . q2_j over node families.

    Exploits the factorization exp(2 i pi m . (u1_i - u2_j)) = e1_{iw} e2_{jw}
    with half the Gaussian weight absorbed into each factor, so the whole grid
    reduces to three (n1, W) @ (W, n2) matrix products over a shared lattice
    window.  Used by the quadratic-functional contour quadrature, where the
    naive per-pair evaluation would dominate the runtime.
    """
    g = ctx.g
    mu = np.asarray(char.mu, dtype=complex)
    nu = np.asarray(char.nu, dtype=complex)
    u1 = np.asarray(u1, dtype=complex).reshape(g, -1)
    u2 = np.asarray(u2, dtype=complex).reshape(g, -1)
    q1 = np.asarray(q1, dtype=complex).reshape(g, -1)
    q2 = np.asarray(q2, dtype=complex).reshape(g, -1)
    v1 = u1 + nu[:, None]

    # shared lattice box covering every pairwise stationary point
    c1 = -ctx.y_inv @ v1.imag
    c2 = ctx.y_inv @ u2.imag
    lo = np.floor(c1.min(axis=1) + c2.min(axis=1) - mu.real) - ctx.radius
    hi = np.ceil(c1.max(axis=1) + c2.max(axis=1) - mu.real) + ctx.radius
    axes = [np.arange(l, h + 1) for l, h in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    m = np.stack([gr.ravel() for gr in grids], axis=1) + mu[None, :]

    quad = np.einsum("wi,ij,wj->w", m, ctx.tau, m)
    half = 0.5j * np.pi * quad
    e1 = np.exp(half[:, None] + 2j * np.pi * (m @ v1))        # (W, n1)
    e2 = np.exp(half[:, None] - 2j * np.pi * (m @ u2))        # (W, n2)
    p1 = 2j * np.pi * (m @ q1)                                # (W, n1)
    p2 = 2j * np.pi * (m @ q2)                                # (W, n2)

    theta_grid = e1.T @ e2
    g1_grid = (p1 * e1).T @ e2
    g2_grid = e1.T @ (p2 * e2)
    h_grid = (p1 * e1).T @ (p2 * e2)
    return h_grid / theta_grid - g1_grid * g2_grid / theta_grid**2


def modular_check(tau, char, z, probe=None, rng=None):
    """Residual of the modular relation between -tau^{-1}/2 and 2 tau.

    theta_{nu,-mu}(z | -tau^{-1}/2) = D exp(2 i pi z . tau^{-1} z)
                                        theta_{mu,nu}(2z | 2 tau)
    with the constant D calibrated at a probe point (the relation fixes it
    only up to this curve-dependent constant).
    """
    tau = np.atleast_2d(np.asarray(tau, dtype=complex))
    g = tau.shape[0]
    tau_inv = np.linalg.inv(tau)
    ctx_mod = ThetaContext(-tau_inv / 2.0)
    ctx_two = ThetaContext(2.0 * tau)
    mu = np.asarray(char.mu)
    nu = np.asarray(char.nu)
    char_mod = ThetaCharacteristic.make(nu, -mu)

    def both_sides(zz):
        zz = np.asarray(zz, dtype=complex)
        lhs = theta(ctx_mod, char_mod, zz)
        rhs = np.exp(2j * np.pi * zz @ tau_inv @ zz) * theta(ctx_two, char, 2.0 * zz)
        return lhs, rhs

    if probe is None:
        probe = np.zeros(g)
        lp, rp = both_sides(probe)
        if min(abs(lp), abs(rp)) < 1e-10:
            rng = np.random.default_rng(0) if rng is None else rng
            probe = rng.uniform(-0.3, 0.3, size=g)
    lp, rp = both_sides(probe)
    if min(abs(lp), abs(rp)) < 1e-10:
        raise DegenerateProbe("modular probe value below threshold")
    d_const = lp / rp
    lz, rz = both_sides(z)
    return abs(lz - d_const * rz) / max(abs(lz), abs(d_const * rz)), d_const
