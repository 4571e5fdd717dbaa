"""Abel map, prime form, eta form, fundamental bidifferential.

The Abel map is based at the plus point over infinity.  Far from the curve it
is evaluated through the termwise-integrated Laurent series of the normalized
differentials (single-valued there); points are then reached by straight
segments that stay clear of the cuts: a vertical descent for upper-half-plane
points, a vertical corridor through a gap plus a horizontal leg for
lower-half-plane points.  Minus-sheet points go through the involution
identity u(iota(p)) = u(inf_minus) - u(p).

Half-forms are reported against the dX trivialization (the 1/X chart at the
two points over infinity); per-point square-root choices live in an
append-only registry so one evaluation reuses consistent branches.
"""

from dataclasses import dataclass

import numpy as np

from .curve import MINUS, PLUS, CurveSpec, SurfacePoint, involution, s_det
from .laurent import InfinitySeries
from .periods import PeriodData, compute_periods
from .quad import cosine_segment_adaptive, gl_nodes, segment_gl_adaptive, trapezoid_circle
from .theta import ThetaCharacteristic, ThetaContext

__all__ = ["AbelValue", "CurveFrame", "SingularCharacteristic", "PathTooCloseToCut"]


class PathTooCloseToCut(ValueError):
    """Integration path would pass within the safety margin of a cut."""


class SingularCharacteristic(RuntimeError):
    """Odd characteristic with vanishing theta gradient (no usable prime form)."""


class NearDiagonal(ValueError):
    """Bidifferential arguments too close for direct evaluation."""


@dataclass(frozen=True)
class AbelValue:
    u: np.ndarray
    path_record: tuple


def _dist_to_segment(x, lo, hi):
    """Distance from complex x to the real segment [lo, hi]."""
    t = np.clip(x.real, lo, hi)
    return abs(x - t)


class CurveFrame:
    """Curve + periods + theta contexts + Abel and prime-form machinery."""

    def __init__(self, spec: CurveSpec, periods: PeriodData = None, tol=1e-12,
                 odd_e=None, odd_e_prime=None):
        self.spec = spec
        self.periods = periods if periods is not None else compute_periods(spec, tol=tol)
        self.g = spec.genus
        self.tol = tol
        self.series = InfinitySeries(spec.branch_points)
        self.anchor_height = 2.5 * self.series.radius
        self.tau = self.periods.tau
        if self.g >= 1:
            self.ctx = ThetaContext(self.tau)
            self.ctx_half = ThetaContext(self.tau / 2.0)
            self.ctx_double = ThetaContext(2.0 * self.tau)
        else:
            self.ctx = self.ctx_half = self.ctx_double = None
        self._u_cache = {}
        self._sqrt_registry = {}
        self._march = None
        if self.g >= 1:
            self._u_anchor_coeffs()
            self.u_inf_minus = self._compute_u_inf_minus()
            self._pick_odd_characteristic(odd_e, odd_e_prime)

    # ------------------------------------------------------------------ Abel

    def _u_anchor_coeffs(self):
        # u_h(x) = sum_k duc[h,k] * int_inf^x t^k/s dt for |x| beyond the series radius
        self._anchor_valid = 2.2 * self.series.radius

    def _u_anchor(self, x):
        g = self.g
        cols = np.array(
            [self.series.monomial_antiderivative(k, x) for k in range(g)]
        )
        return self.periods.du_coeffs @ cols

    def _du_vec(self, x, sheet=PLUS):
        s = sheet * s_det(self.spec, x)
        return self.periods.du_dx(x, s)

    def _segment_u(self, z0, z1, sheet=PLUS):
        vals = [
            segment_gl_adaptive(
                lambda z, h=h: self._du_vec(z, sheet)[h], z0, z1, tol=self.tol
            )[0]
            for h in range(self.g)
        ]
        return np.array(vals)

    def _min_cut_distance(self, points):
        a = self.spec.a.real
        b = self.spec.b.real
        return min(
            _dist_to_segment(p, a[h], b[h]) for p in points for h in range(self.g + 1)
        )

    def abel_map(self, p: SurfacePoint) -> AbelValue:
        """Abel map based at the plus infinity; canonical paths, recorded."""
        if self.g == 0:
            return AbelValue(np.zeros(0, dtype=complex), ("genus-0",))
        if p.at_infinity:
            if p.sheet == PLUS:
                return AbelValue(np.zeros(self.g, dtype=complex), ("base-point",))
            return AbelValue(self.u_inf_minus.copy(), ("left-axis-path",))
        key = p.key()
        if key in self._u_cache:
            return self._u_cache[key]
        if p.sheet == MINUS:
            plus = self.abel_map(involution(p))
            val = AbelValue(
                self.u_inf_minus - plus.u, ("involution",) + plus.path_record
            )
            self._u_cache[key] = val
            return val
        x = complex(p.x)
        scale = self.spec.scale
        margin = 0.05 * scale
        record = []
        anchor_im = max(self.anchor_height, abs(x))
        if x.imag >= 0.0:
            anchor = complex(x.real, anchor_im)
            segs = [(anchor, x)]
        else:
            if abs(x.imag) < margin and self._min_cut_distance([x]) < margin:
                raise PathTooCloseToCut(
                    "lower-half-plane point too close to the cuts"
                )
            c = self._safe_corridor(x.real)
            anchor = complex(c, anchor_im)
            segs = [(anchor, complex(c, x.imag)), (complex(c, x.imag), x)]
        u = self._u_anchor(np.array([anchor]))[:, 0]
        record.append(("series-anchor", anchor))
        for z0, z1 in segs:
            u = u + self._segment_u(z0, z1)
            record.append(("line", z0, z1))
        val = AbelValue(u, tuple(record))
        self._u_cache[key] = val
        return val

    def _safe_corridor(self, x_re):
        """Real abscissa whose vertical line misses all cuts."""
        a = self.spec.a.real
        b = self.spec.b.real
        pad = 0.02 * self.spec.scale
        candidates = [a[0] - 0.5 * self.spec.scale, b[-1] + 0.5 * self.spec.scale]
        candidates += [0.5 * (b[j] + a[j + 1]) for j in range(self.g)]
        ok = [
            c
            for c in candidates
            if all(not (a[h] - pad < c < b[h] + pad) for h in range(self.g + 1))
        ]
        return min(ok, key=lambda c: abs(c - x_re))

    def abel(self, p: SurfacePoint):
        return self.abel_map(p).u

    def _compute_u_inf_minus(self):
        """u(inf_minus) by the left real-axis path, doubled by the involution."""
        a0 = self.spec.a.real[0]
        far = -max(self.anchor_height, abs(a0) + self.series.radius)
        u = self._u_anchor(np.array([complex(far)]))[:, 0]
        # x = a0 - t^2 absorbs the endpoint square-root singularity at a0
        t_hi = np.sqrt(a0 - far)
        vals = []
        for h in range(self.g):
            def f(t, h=h):
                x = (a0 - t * t).astype(complex)
                return self._du_vec(x)[h] * (-2.0 * t)

            val, _ = segment_gl_adaptive(f, t_hi, 0.0, tol=self.tol)
            vals.append(val)
        return 2.0 * (u + np.array(vals))

    # ------------------------------------------------- real-axis march values

    def real_axis_march(self):
        """Quadrature values of u at every branch point, approached from above.

        Marches along the real axis from the far left: tail, then cut and gap
        segments in order.  Returns {('a', k): u, ('b', k): u}.
        """
        if self._march is not None:
            return self._march
        a = self.spec.a.real
        b = self.spec.b.real
        u_a0 = 0.5 * self._compute_u_inf_minus()
        out = {("a", 0): u_a0}
        cur = u_a0
        for h in range(self.g + 1):
            cur = cur + self._cut_or_gap_u(a[h], b[h], on_cut=True)
            out[("b", h)] = cur.copy()
            if h < self.g:
                cur = cur + self._cut_or_gap_u(b[h], a[h + 1], on_cut=False)
                out[("a", h + 1)] = cur.copy()
        self._march = out
        return out

    def _cut_or_gap_u(self, lo, hi, on_cut):
        side = +1 if on_cut else None
        vals = []
        for h in range(self.g):
            def f(x, h=h):
                s = s_det(self.spec, x, side=side)
                return self.periods.du_dx(x.astype(complex), s)[h]

            val, _ = cosine_segment_adaptive(f, lo, hi, tol=self.tol)
            vals.append(val)
        return np.array(vals)

    def u_real_point(self, xi):
        """March value of u at a real point xi (upper-side determination)."""
        a = self.spec.a.real
        b = self.spec.b.real
        march = self.real_axis_march()
        if xi < a[0]:
            raise ValueError("points left of the support: use the tail path")
        for j in range(self.g):
            if b[j] <= xi <= a[j + 1]:
                start = march[("b", j)]
                vals = []
                t_hi = np.sqrt(xi - b[j])
                for h in range(self.g):
                    def f(t, h=h):
                        x = (b[j] + t * t).astype(complex)
                        return self._du_vec(x)[h] * (2.0 * t)

                    val, _ = segment_gl_adaptive(f, 0.0, t_hi, tol=self.tol)
                    vals.append(val)
                return start + np.array(vals)
        raise ValueError("u_real_point expects a point in a gap between cuts")

    def abel_weierstrass(self, which):
        """Closed-form Abel values at the branch points (lattice arithmetic).

        which = ('a', k) or ('b', k).  Uses u(a_0) = u(inf_minus)/2 and the
        half-lattice increments across cuts and gaps.
        """
        kind, k = which
        g = self.g
        e = np.eye(g, dtype=complex)
        u = 0.5 * self.u_inf_minus.astype(complex)
        if kind == "a" and k == 0:
            return u
        tau_part = 0.5 * np.sum(self.tau[:, :k], axis=1)
        if kind == "a":
            # u(a_k) = (u(inf-) + sum_{l>=k} e_l + sum_{l<=k} tau e_l) / 2
            return u + 0.5 * np.sum(e[:, k - 1 :], axis=1) + tau_part
        # u(b_k) = (u(inf-) + sum_{l>=k+1} e_l + sum_{l<=k} tau e_l) / 2
        e_part = 0.5 * np.sum(e[:, k:], axis=1) if k <= g - 1 else np.zeros(g)
        return u + e_part + tau_part

    # --------------------------------------------------------- prime form etc.

    def _pick_odd_characteristic(self, odd_e, odd_e_prime):
        g = self.g
        candidates = []
        if odd_e is not None:
            candidates.append((np.asarray(odd_e), np.asarray(odd_e_prime)))
        else:
            base = np.zeros(g, dtype=int)
            first = base.copy()
            first[0] = 1
            candidates.append((first.copy(), first.copy()))
            for i in range(g):
                for j in range(g):
                    e = base.copy()
                    ep = base.copy()
                    e[i] = 1
                    ep[j] = 1
                    if int(e @ ep) % 2 == 1:
                        candidates.append((e, ep))
            import itertools as it

            for e in it.product((0, 1), repeat=g):
                for ep in it.product((0, 1), repeat=g):
                    if int(np.dot(e, ep)) % 2 == 1:
                        candidates.append((np.array(e), np.array(ep)))
        scale = abs(self.theta_plain(np.zeros(self.g)))
        for e, ep in candidates:
            if int(np.dot(e, ep)) % 2 != 1:
                continue
            char = ThetaCharacteristic.half(ep, e)
            val, grad, _ = self.ctx.eval(char, np.zeros(g), order=1)
            if abs(val) < 1e-8 * scale and np.linalg.norm(grad) > 1e-6 * scale:
                self.odd_e = np.asarray(e, dtype=int)
                self.odd_e_prime = np.asarray(ep, dtype=int)
                self.char_odd = char
                self.grad_odd = grad
                return
        raise SingularCharacteristic("no nonsingular odd half-integer characteristic found")

    def theta_plain(self, z, ctx=None):
        ctx = ctx or self.ctx
        val, _, _ = ctx.eval(ThetaCharacteristic.zero(self.g), z, order=0)
        return val

    def theta_odd(self, v):
        """Odd-characteristic theta at v (vanishes at v = 0, exactly odd)."""
        val, _, _ = self.ctx.eval(self.char_odd, v, order=0)
        return val

    def omega_hat(self, p: SurfacePoint):
        """omega_c / dX at p (1/X-chart value at the infinities)."""
        if p.at_infinity:
            ctop = self.periods.du_coeffs[:, self.g - 1]
            return -p.sheet * (self.grad_odd @ ctop)
        q = self.periods.du_dx(np.array([p.x]), np.array([p.s]))[:, 0]
        return self.grad_odd @ q

    def sqrt_omega(self, p: SurfacePoint):
        key = p.key()
        if key not in self._sqrt_registry:
            self._sqrt_registry[key] = np.sqrt(complex(self.omega_hat(p)))
        return self._sqrt_registry[key]

    def flip_sqrt(self, p: SurfacePoint):
        """Flip the registered square-root branch at p (invariance testing)."""
        key = p.key()
        self._sqrt_registry[key] = -self.sqrt_omega(p)

    def prime_form(self, p1: SurfacePoint, p2: SurfacePoint):
        """E(p1, p2) sqrt(dX(p1)) sqrt(dX(p2)) (1/X chart at infinities).

        Normalized so that E(p1, p2)/(X(p1) - X(p2)) -> +-1 on the diagonal;
        exactly antisymmetric for a consistent registry.
        """
        u1 = self.abel(p1)
        u2 = self.abel(p2)
        return self.theta_odd(u1 - u2) / (self.sqrt_omega(p1) * self.sqrt_omega(p2))

    def eta_hat(self, p: SurfacePoint):
        """eta(p)/dX: E(inf+, inf-)/(E(p, inf+) E(p, inf-)) trivialized."""
        ip = SurfacePoint.infinity(PLUS)
        im = SurfacePoint.infinity(MINUS)
        return self.prime_form(ip, im) / (
            self.prime_form(p, ip) * self.prime_form(p, im)
        )

    def infinity_constant(self):
        """Normalization constant -1/E(inf+, inf-)^2 entering the identities."""
        ip = SurfacePoint.infinity(PLUS)
        im = SurfacePoint.infinity(MINUS)
        return -1.0 / self.prime_form(ip, im) ** 2

    # ------------------------------------------------------ second/third kind

    def _log_theta_grad(self, v):
        val, grad, _ = self.ctx.eval(self.char_odd, v, order=1)
        return grad / val

    def _log_theta_hess(self, v):
        val, grad, hess = self.ctx.eval(self.char_odd, v, order=2)
        return hess / val - np.outer(grad, grad) / val**2

    def bidifferential(self, z: SurfacePoint, w: SurfacePoint, diag_threshold=1e-3):
        """B(z, w) against dX dX; NearDiagonal below the X-distance threshold."""
        if (not z.at_infinity) and (not w.at_infinity):
            if abs(z.x - w.x) < diag_threshold * self.spec.scale and z.sheet == w.sheet:
                raise NearDiagonal("use the diagonal expansion path")
        uz = self.abel(z)
        uw = self.abel(w)
        lhess = self._log_theta_hess(uz - uw)
        qz = self._du_dx_point(z)
        qw = self._du_dx_point(w)
        return -qz @ lhess @ qw

    def _du_dx_point(self, p: SurfacePoint):
        if p.at_infinity:
            raise ValueError("bidifferential slots must be finite points here")
        return self.periods.du_dx(np.array([p.x]), np.array([p.s]))[:, 0]

    def ds_third_kind(self, p: SurfacePoint, q: SurfacePoint, z: SurfacePoint):
        """dS_{p,q}(z)/dX(z): third-kind form, residues -1 at p and +1 at q."""
        uz = self.abel(z)
        gq = self._log_theta_grad(uz - self.abel(q))
        gp = self._log_theta_grad(uz - self.abel(p))
        return (gq - gp) @ self._du_dx_point(z)

    def db_second_kind(self, k, z: SurfacePoint, pole_sheet=MINUS, n_circle=64):
        """dB_{inf_pole, k}(z)/dX(z) = Res_{z'=inf} zeta^{-k} B(z', z)."""
        r = 1.0 / (3.0 * self.series.radius)
        uz = self.abel(z)
        qz = self._du_dx_point(z)
        u_inf = self.u_inf_minus if pole_sheet == MINUS else np.zeros(self.g)

        def f(w):
            zeta = r * w
            out = np.empty_like(w)
            for i, zt in enumerate(zeta):
                xp = 1.0 / zt
                spt = SurfacePoint.from_x(self.spec, xp, sheet=pole_sheet)
                up = u_inf - self._u_anchor(np.array([xp]))[:, 0] if pole_sheet == MINUS \
                    else self._u_anchor(np.array([xp]))[:, 0]
                lhess = self._log_theta_hess(up - uz)
                qp = self.periods.du_dx(np.array([xp]), np.array([spt.s]))[:, 0]
                bval = -qp @ lhess @ qz
                out[i] = zt ** (-k) * bval * (-zt**-2)
            return out

        return r * trapezoid_circle(f, n=n_circle)

    def db_primitive(self, k, z: SurfacePoint, n_circle=64):
        """int_{inf_+}^{z} dB_{inf_-, k}: primitive of the second-kind form."""
        return self.db_primitive_sum({k: 1.0}, z, n_circle=n_circle)

    def db_primitive_sum(self, coeffs, z: SurfacePoint, n_circle=64):
        """sum_k coeffs[k] * int_{inf_+}^{z} dB_{inf_-, k} in one circle pass."""
        r = 1.0 / (3.0 * self.series.radius)
        uz = self.abel(z)
        th = 2.0 * np.pi * np.arange(n_circle) / n_circle
        w = np.exp(1j * th)
        zeta = r * w
        dvals = np.empty(n_circle, dtype=complex)
        for i, zt in enumerate(zeta):
            xp = 1.0 / zt
            up = self.u_inf_minus - self._u_anchor(np.array([xp]))[:, 0]
            g1 = self._log_theta_grad(up - uz)
            g0 = self._log_theta_grad(up)
            s_minus = -s_det(self.spec, np.array([xp]))[0]
            qp = self.periods.du_dx(np.array([xp]), np.array([s_minus]))[:, 0]
            dvals[i] = (g1 - g0) @ qp * (-zt**-2)
        total = 0.0 + 0.0j
        for k, ck in coeffs.items():
            total += ck * r * np.sum(zeta ** (-k) * dvals * w) / n_circle
        return total
