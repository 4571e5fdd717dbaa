"""Equilibrium data of the beta-ensemble attached to a real multi-cut curve.

Given branch points a_0 < b_0 < ... < a_g < b_g, a degree-(2g+2) potential is
constructed so that the equilibrium measure is supported exactly on the cuts:
the auxiliary polynomial M(x) = t_top prod (x - z_h) has one root per gap,
fixed by the vanishing of the gap integrals of M s (damped Newton with the
analytic Jacobian, coordinate bisection as fallback), the top coefficient by
unit total mass, and the potential by the polynomial part of M s at infinity.

The module also evaluates the linear/quadratic/lattice functionals of test
functions (contour quadrature around the support), the equilibrium energy by
direct double quadrature, and the curve-geometric formulas they satisfy.
"""

from dataclasses import dataclass, field

import numpy as np

from .curve import MINUS, PLUS, CurveSpec, SurfacePoint, s_det
from .laurent import InfinitySeries
from .quad import cosine_segment_adaptive, gl_nodes, tanh_sinh_nodes

__all__ = [
    "EquilibriumData",
    "FunctionalValues",
    "solve_equilibrium",
    "functionals",
    "energy_direct",
    "check_Ef0",
    "compute_v_eq",
]


class RootEscapedGap(RuntimeError):
    pass


class NoConvergence(RuntimeError):
    pass


class NegativeDensity(RuntimeError):
    pass


def _poly_eval(coeffs, x):
    out = np.zeros_like(np.asarray(x, dtype=complex))
    for c in coeffs[::-1]:
        out = out * x + c
    return out


@dataclass
class EquilibriumData:
    spec: CurveSpec
    z_roots: np.ndarray        # g roots, one per gap
    t_top: float
    m_coeffs: np.ndarray       # ascending, degree g
    v_coeffs: np.ndarray       # ascending, degree 2g+2, V(0) = 0
    eps_star: np.ndarray       # g+1 masses, one per cut
    gap_residuals: np.ndarray  # |int_gap M s| after the solve

    @property
    def vp_coeffs(self):
        k = np.arange(1, len(self.v_coeffs))
        return self.v_coeffs[1:] * k

    @property
    def t_coeffs(self):
        """t_k = k [x^k] V for k = 1..2g+2 (potential V = sum t_k x^k / k)."""
        k = np.arange(1, len(self.v_coeffs))
        return self.v_coeffs[1:] * k

    def m_values(self, x):
        return _poly_eval(self.m_coeffs, x)

    def v_values(self, x):
        return _poly_eval(self.v_coeffs, x)

    def vp_values(self, x):
        return _poly_eval(self.vp_coeffs, x)

    def w1_values(self, x, s):
        """Stieltjes transform on the surface: (V'(x) - M(x) s) / 2."""
        return 0.5 * (self.vp_values(x) - self.m_values(x) * s)

    def density(self, x):
        """Equilibrium density M(x) Im s(x+i0) / 2 pi on the support."""
        x = np.asarray(x, dtype=float)
        s_up = s_det(self.spec, x, side=+1)
        rho = self.m_values(x).real * s_up.imag / (2.0 * np.pi)
        return rho

    @property
    def eps_vector(self):
        """(eps_1, ..., eps_g): the filling fractions entering the formulas."""
        return self.eps_star[1:]


def _gap_quad_nodes(spec, n=220):
    """Per-gap cosine nodes/weights for integrals of s * polynomial."""
    a = spec.a.real
    b = spec.b.real
    xg, wg = gl_nodes(n)
    th = 0.5 * (xg + 1.0) * np.pi
    out = []
    for j in range(spec.genus):
        lo, hi = b[j], a[j + 1]
        m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = m + w * np.cos(th)
        out.append((x, 0.5 * np.pi * w * np.sin(th) * wg))
    return out


def solve_equilibrium(spec: CurveSpec, newton_tol=1e-13, max_iter=60) -> EquilibriumData:
    """Roots z_h, top coefficient and potential for the given support."""
    g = spec.genus
    if spec.mode != "real":
        raise NotImplementedError("equilibrium construction requires real branch points")
    a = spec.a.real
    b = spec.b.real
    series = InfinitySeries(spec.branch_points)

    if g == 0:
        z = np.zeros(0)
        m0 = np.array([1.0])
    else:
        nodes = _gap_quad_nodes(spec)
        s_vals = [s_det(spec, x.astype(complex)).real for x, _ in nodes]

        def j_vec(z):
            out = np.empty(g)
            for h in range(g):
                x, w = nodes[h]
                prod = np.ones_like(x)
                for zk in z:
                    prod = prod * (x - zk)
                out[h] = np.sum(s_vals[h] * prod * w).real
            return out

        def j_jac(z):
            jac = np.empty((g, g))
            for h in range(g):
                x, w = nodes[h]
                for k in range(g):
                    prod = np.ones_like(x)
                    for j, zk in enumerate(z):
                        if j != k:
                            prod = prod * (x - zk)
                    jac[h, k] = -np.sum(s_vals[h] * prod * w).real
            return jac

        z = 0.5 * (b[:-1] + a[1:])
        lo_gap = b[:-1]
        hi_gap = a[1:]
        ok = False
        for _ in range(max_iter):
            f = j_vec(z)
            if np.max(np.abs(f)) < newton_tol * max(1.0, spec.scale ** (g + 2)):
                ok = True
                break
            try:
                step = np.linalg.solve(j_jac(z), f)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                cand = z - step
                margin = 1e-12 * spec.scale
                cand = np.clip(cand, lo_gap + margin, hi_gap - margin)
                if np.max(np.abs(j_vec(cand))) < np.max(np.abs(f)):
                    z = cand
                    continue
            # coordinate bisection fallback; the gap-face signs guarantee brackets
            for h in range(g):
                lo, hi = lo_gap[h], hi_gap[h]
                zl = z.copy()
                zh = z.copy()
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    zl[h] = lo + 1e-13 * spec.scale
                    zh[h] = mid
                    fl = j_vec(zl)[h]
                    fm = j_vec(zh)[h]
                    if fl * fm <= 0:
                        hi = mid
                    else:
                        lo = mid
                z[h] = 0.5 * (lo + hi)
        if not ok:
            f = j_vec(z)
            if np.max(np.abs(f)) > 1e-10 * max(1.0, spec.scale ** (g + 2)):
                raise NoConvergence(f"gap integrals stalled at {np.max(np.abs(f)):.3e}")
        if np.any(z <= lo_gap) or np.any(z >= hi_gap):
            raise RootEscapedGap("a root left its open gap")
        m0 = np.array([1.0])
        for zk in z:
            m0 = np.convolve(m0, np.array([-zk, 1.0]))

    # mass normalization: t_top * sum_h int_{S_h} prod(x - z) Im s(x+i0) / 2pi = 1
    masses = np.empty(g + 1)
    for h in range(g + 1):
        def f(x):
            s_up = s_det(spec, x, side=+1)
            return _poly_eval(m0, x).real * s_up.imag / (2.0 * np.pi)

        masses[h], _ = cosine_segment_adaptive(f, a[h], b[h], tol=1e-13)
    total = float(np.sum(masses))
    if total <= 0:
        raise NegativeDensity("mass normalization produced a nonpositive total")
    t_top = 1.0 / total
    m_coeffs = t_top * m0
    eps_star = t_top * masses

    vp = series.polynomial_part_m_s(m_coeffs).real
    v_coeffs = np.concatenate(([0.0], vp / np.arange(1, len(vp) + 1)))

    gap_res = np.empty(g)
    for h in range(g):
        def f(x):
            return _poly_eval(m_coeffs, x).real * s_det(spec, x.astype(complex)).real

        val, _ = cosine_segment_adaptive(f, b[h], a[h + 1], tol=1e-14)
        gap_res[h] = abs(val)

    eq = EquilibriumData(
        spec=spec,
        z_roots=np.asarray(z, dtype=float),
        t_top=t_top,
        m_coeffs=m_coeffs,
        v_coeffs=v_coeffs,
        eps_star=eps_star,
        gap_residuals=gap_res,
    )
    _check_density(eq)
    return eq


def _check_density(eq, n_probe=64):
    a = eq.spec.a.real
    b = eq.spec.b.real
    for h in range(eq.spec.genus + 1):
        x = np.linspace(a[h], b[h], n_probe + 2)[1:-1]
        if np.min(eq.density(x)) < -1e-12:
            raise NegativeDensity(f"density negative on cut {h}")


def density_and_fillings(eq: EquilibriumData):
    """Density sampler and the per-cut masses (checked nonnegative)."""
    _check_density(eq)
    return eq.density, eq.eps_star


# --------------------------------------------------------------- functionals

@dataclass
class FunctionalValues:
    l_value: complex = None
    q_value: complex = None
    u_value: np.ndarray = None


def _support_contours(spec, inflate, n):
    """Sheet-plus sample nodes/weights on ccw stadia around every cut."""
    from .periods import a_cycle

    xs, ws = [], []
    for h in range(spec.genus + 1):
        path = a_cycle(spec, h, inflate=inflate)
        x, w = path.nodes(n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def functional_l(eq, f, inflate=0.8, n=96):
    """L[f] = oint_S W_1(xi) f(xi) dxi / 2 i pi."""
    prev = None
    while n <= 1024:
        x, w = _support_contours(eq.spec, inflate, n)
        s = s_det(eq.spec, x)
        vals = eq.w1_values(x, s) * f(x)
        cur = np.sum(vals * w) / (2j * np.pi)
        if prev is not None and abs(cur - prev) < 1e-11 * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    return prev


def functional_u(eq, frame, f, inflate=0.8, n=96):
    """U[f] = oint_S f(X(z)) du(z) / 2 i pi (vector)."""
    prev = None
    while n <= 1024:
        x, w = _support_contours(eq.spec, inflate, n)
        s = s_det(eq.spec, x)
        du = frame.periods.du_dx(x, s)
        cur = (du * (f(x) * w)[None, :]).sum(axis=1) / (2j * np.pi)
        if prev is not None and np.max(np.abs(cur - prev)) < 1e-11:
            return cur
        prev = cur
        n *= 2
    return prev


def functional_q(eq, frame, f1, f2, beta=2.0, n=32, inner=0.35, outer=1.05):
    """Q[f1, f2] = (2/beta) oint oint W_2 f1 f2 (dxi/2 i pi)^2.

    W_2 is the regular part of the bidifferential on the plus sheet; the two
    contours use different inflations so the diagonal is never approached, and
    the theta-log-Hessian grid is assembled through the factorized block.
    """
    from .theta import log_hess_bilinear_block

    prev = None
    while n <= 256:
        x1, w1 = _support_contours(eq.spec, inner, n)
        x2, w2 = _support_contours(eq.spec, outer, n)
        s1 = s_det(eq.spec, x1)
        s2 = s_det(eq.spec, x2)
        u1 = _contour_abel(frame, x1)
        u2 = _contour_abel(frame, x2)
        q1 = frame.periods.du_dx(x1, s1)
        q2 = frame.periods.du_dx(x2, s2)
        lh = log_hess_bilinear_block(frame.ctx, frame.char_odd, u1, q1, u2, q2)
        w2grid = -lh - 1.0 / (x1[:, None] - x2[None, :]) ** 2
        cur = (
            (f1(x1) * w1) @ w2grid @ (f2(x2) * w2) / (2j * np.pi) ** 2 * (2.0 / beta)
        )
        if prev is not None and abs(cur - prev) < 1e-9 * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    return prev


def _contour_abel(frame, x):
    """Abel vectors for sheet-plus contour nodes (vertical-descent paths)."""
    out = np.empty((frame.g, len(x)), dtype=complex)
    for i, xi in enumerate(x):
        p = SurfacePoint.from_x(frame.spec, xi, sheet=PLUS)
        out[:, i] = frame.abel(p)
    return out


def functionals(eq, frame, f, f2=None, beta=2.0):
    """Bundle L[f], U[f] and Q[f, f2 or f] for a holomorphic test function."""
    return FunctionalValues(
        l_value=functional_l(eq, f),
        q_value=functional_q(eq, frame, f, f2 if f2 is not None else f, beta=beta),
        u_value=functional_u(eq, frame, f),
    )


# -------------------------------------------------------------------- energy

def _mass_nodes(eq, h, n):
    """Nodes x_i and weights W_i with int_{S_h} F rho dx ~ sum W_i F(x_i)."""
    a = eq.spec.a.real[h]
    b = eq.spec.b.real[h]
    xg, wg = gl_nodes(n)
    th = 0.5 * (xg + 1.0) * np.pi
    m, w = 0.5 * (a + b), 0.5 * (b - a)
    x = m + w * np.cos(th)
    wts = eq.density(x) * w * np.sin(th) * wg * 0.5 * np.pi
    return x, wts


def _log_correlation_same_cut(eq, h, n_u=220, n_x=160):
    """int int_{S_h^2} rho(xi) rho(eta) ln|xi - eta| dxi deta."""
    a = eq.spec.a.real[h]
    b = eq.spec.b.real[h]
    length = b - a
    ts_x, ts_w = tanh_sinh_nodes(n=n_u)
    # u in (0, length), nodes clustered at the logarithmic endpoint u = 0
    u = 0.5 * length * (ts_x + 1.0)
    uw = 0.5 * length * ts_w

    xg, wg = gl_nodes(n_x)
    th = 0.5 * (xg + 1.0) * np.pi
    total = 0.0
    for ui, uwi in zip(u, uw):
        lo, hi = a + ui, b
        if hi - lo < 1e-15 * length:
            continue
        m, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = m + w * np.cos(th)
        g_of_u = np.sum(
            eq.density(x) * eq.density(x - ui) * w * np.sin(th) * wg
        ) * 0.5 * np.pi
        total += 2.0 * np.log(ui) * g_of_u * uwi
    return total


def _log_correlation_cross(eq, h1, h2, n=180):
    x1, w1 = _mass_nodes(eq, h1, n)
    x2, w2 = _mass_nodes(eq, h2, n)
    return float(np.sum(w1[:, None] * w2[None, :] * np.log(np.abs(x1[:, None] - x2[None, :]))))


def energy_direct(eq: EquilibriumData, beta=2.0, refine=False):
    """E[mu] = (beta/2) [ iint ln|xi-eta| d mu d mu - int V d mu ].

    Direct quadrature: tanh-sinh in the difference variable on the diagonal
    blocks, smooth product rules across cuts.  Returns (value, error_estimate).
    """
    g = eq.spec.genus

    def assemble(n_u, n_x, n_cross, n_v):
        d = 0.0
        for h in range(g + 1):
            d += _log_correlation_same_cut(eq, h, n_u=n_u, n_x=n_x)
        for h1 in range(g + 1):
            for h2 in range(g + 1):
                if h1 != h2:
                    d += _log_correlation_cross(eq, h1, h2, n=n_cross)
        v_int = 0.0
        for h in range(g + 1):
            x, w = _mass_nodes(eq, h, n_v)
            v_int += np.sum(eq.v_values(x).real * w)
        return 0.5 * beta * (d - v_int)

    coarse = assemble(200, 140, 160, 200)
    fine = assemble(280, 200, 220, 280)
    return fine, abs(fine - coarse)


def check_Ef0(eq, frame, beta=2.0):
    """Residual of the equilibrium-energy formula.

    -E = (beta/2) L[V] + (beta^2/8) Q[V, V] + i pi beta eps* . (tau eps* + u(inf-)).
    Returns (residual, imag_part_of_rhs, energy_value, rhs_value).
    """
    e_val, e_err = energy_direct(eq, beta=beta)
    vf = lambda x: eq.v_values(x)
    l_v = functional_l(eq, vf)
    q_vv = functional_q(eq, frame, vf, vf, beta=beta)
    eps = eq.eps_vector.astype(complex)
    lattice = eps @ (frame.tau @ eps + frame.u_inf_minus)
    rhs = 0.5 * beta * l_v + beta**2 / 8.0 * q_vv + 1j * np.pi * beta * lattice
    return abs(-e_val - rhs), abs(rhs.imag), e_val, rhs


def compute_v_eq(eq, frame, beta=2.0):
    """Filling-fraction derivative of the equilibrium entropy, as the real
    vector entering the theta characteristics.

    Closed route: 2 pi (1 - beta/2) [ (g+1)/2 Im u(inf-) + sum_k ( Im u(z_k)
    + (g+1-k)/2 Im tau e_k ) ].  Returns the exact zero vector at beta = 2.
    """
    g = eq.spec.genus
    if g == 0:
        return np.zeros(0)
    if beta == 2.0:
        return np.zeros(g)
    acc = 0.5 * (g + 1) * frame.u_inf_minus.imag.astype(float).copy()
    for k in range(1, g + 1):
        acc = acc + frame.u_real_point(float(eq.z_roots[k - 1])).imag
        acc = acc + 0.5 * (g + 1 - k) * frame.tau[:, k - 1].imag
    return 2.0 * np.pi * (1.0 - 0.5 * beta) * acc


def v_eq_march_route(eq, frame, beta=2.0):
    """Independent assembly of the same vector from quadrature Abel values.

    Uses the real-axis march for every Weierstrass point and gap root, keeping
    the full complex values and dropping the (exactly real) cut increments at
    the end.
    """
    g = eq.spec.genus
    if g == 0:
        return np.zeros(0)
    march = frame.real_axis_march()
    bracket = np.zeros(g, dtype=complex)
    for k in range(1, g + 1):
        term = frame.u_real_point(float(eq.z_roots[k - 1])).astype(complex)
        for l in range(0, k):
            term = term + (march[("a", l)] - march[("b", l)])
        bracket += term
    for k in range(0, g + 1):
        bracket += 0.5 * (march[("a", k)] + march[("b", k)])
    v = 2j * np.pi * (0.5 * beta - 1.0) * 1j * bracket.imag
    return v.real
