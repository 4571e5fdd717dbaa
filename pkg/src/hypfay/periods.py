"""Homology representatives and period integrals.

A-cycles are counterclockwise stadium contours around the cuts in the plus
sheet.  B-periods reduce to twice the real-axis gap integrals between the
cuts: the return leg on the minus sheet doubles the gap contributions
(the basis differentials are odd under the involution) and kills the over-cut
pieces, so the matrix of periods comes out purely imaginary for real branch
points.  The normalized basis du_h is solved from the A-period matrix of the
monomial differentials x^k dx / s.
"""

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .curve import CurveSpec, s_det
from .quad import cosine_segment_adaptive, gl_nodes, segment_gl_adaptive

__all__ = [
    "CyclePath",
    "PeriodData",
    "integrate_differential",
    "compute_periods",
    "boutroux_check",
    "a_cycle",
]


class IllConditionedQ(RuntimeError):
    """A-period matrix of the monomial basis is numerically singular."""


class PathHitsSingularity(ValueError):
    """A path node fell on a cut or a branch point."""


@dataclass(frozen=True)
class CyclePath:
    """Closed piecewise path; segments are (z0, z1, kind) with kind in
    {'line', 'arc'}; arcs store (center, radius, th0, th1) instead."""

    kind: str
    index: int
    segments: tuple
    sheet: int = +1

    def nodes(self, n_per_piece):
        """Sample points and dx-weights piece by piece (Gauss-Legendre)."""
        xg, wg = gl_nodes(n_per_piece)
        t = 0.5 * (xg + 1.0)
        pts, wts = [], []
        for seg in self.segments:
            if seg[0] == "line":
                _, z0, z1 = seg
                pts.append(z0 + (z1 - z0) * t)
                wts.append(np.full(n_per_piece, 0.5 * (z1 - z0)) * wg)
            else:
                _, c, r, th0, th1 = seg
                th = th0 + (th1 - th0) * t
                z = c + r * np.exp(1j * th)
                pts.append(z)
                wts.append(0.5 * (th1 - th0) * 1j * r * np.exp(1j * th) * wg)
        return np.concatenate(pts), np.concatenate(wts)


def a_cycle(spec: CurveSpec, h, inflate=1.0):
    """Counterclockwise stadium around cut S_h at distance
    0.25 * inflate * (min gap to the adjacent branch points)."""
    a = spec.a.real
    b = spec.b.real
    g = spec.genus
    gaps = []
    if h > 0:
        gaps.append(a[h] - b[h - 1])
    if h < g:
        gaps.append(a[h + 1] - b[h])
    if not gaps:  # genus 0: single cut, no neighbours
        gaps.append(b[h] - a[h])
    d = 0.25 * inflate * min(gaps)
    lo, hi = a[h], b[h]
    segments = (
        ("line", lo - 1j * d, hi - 1j * d),
        ("arc", hi + 0j, d, -0.5 * np.pi, 0.5 * np.pi),
        ("line", hi + 1j * d, lo + 1j * d),
        ("arc", lo + 0j, d, 0.5 * np.pi, 1.5 * np.pi),
    )
    return CyclePath(kind="A", index=h, segments=segments)


def integrate_differential(spec: CurveSpec, path: CyclePath, integrand,
                           tol=1e-12, n0=32, n_max=512):
    """Adaptive path integral of `integrand(x, s)` dx along `path`.

    `integrand` receives the x samples and the sheet-resolved s values.
    Returns (value, error_estimate); refinement doubles the per-piece order.
    """
    n = n0
    prev = None
    while n <= n_max:
        x, w = path.nodes(n)
        if np.min(np.abs(spec.sigma(x))) < 1e-28:
            raise PathHitsSingularity("path node on a branch point")
        s = path.sheet * s_det(spec, x)
        cur = np.sum(integrand(x, s) * w)
        if prev is not None:
            err = abs(cur - prev)
            if err < tol * max(1.0, abs(cur)):
                return cur, err
        prev = cur
        n *= 2
    from .quad import QuadratureNoConvergence

    raise QuadratureNoConvergence(
        f"cycle integral stalled at order {n}", achieved=abs(cur - prev)
    )


@dataclass(frozen=True)
class PeriodData:
    """A-period matrix Q of the monomials, normalized coefficients, tau."""

    spec: CurveSpec
    q_matrix: np.ndarray      # Q[k, h] = A_h-period of x^k dx / s, h = 1..g
    du_coeffs: np.ndarray     # du_h = sum_k du_coeffs[h, k] x^k dx / s
    tau: np.ndarray
    cond_q: float

    @property
    def genus(self):
        return self.spec.genus

    def du_dx(self, x, s):
        """Values of all du_h against dx at surface points (x, s): shape (g, ...)."""
        x = np.asarray(x, dtype=complex)
        powers = np.array([x**k for k in range(self.genus)])
        return (self.du_coeffs @ powers.reshape(self.genus, -1)).reshape(
            (self.genus,) + x.shape
        ) / s

    def to_json_dict(self):
        def c2p(m):
            return [[[v.real, v.imag] for v in row] for row in np.atleast_2d(m)]

        return {
            "schema": "hypfay/1",
            "genus": self.genus,
            "branch_points": [[p.real, p.imag] for p in self.spec.branch_points],
            "Q": c2p(self.q_matrix),
            "du_coeffs": c2p(self.du_coeffs),
            "tau": c2p(self.tau),
            "cond_Q": self.cond_q,
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)


def _gap_integral(spec, du_row_coeffs, lo, hi, tol):
    """int over the gap [lo, hi] of (sum_k c_k x^k) / s dx, real-axis values."""

    def f(x):
        s = s_det(spec, x.astype(complex))
        poly = np.zeros_like(s)
        for k in range(len(du_row_coeffs) - 1, -1, -1):
            poly = poly * x + du_row_coeffs[k]
        return poly / s

    val, _ = cosine_segment_adaptive(f, lo, hi, tol=tol)
    return val


def compute_periods(spec: CurveSpec, tol=1e-12, cond_threshold=1e12) -> PeriodData:
    """A-periods, normalized basis and matrix of periods for a real-mode curve."""
    g = spec.genus
    if g < 1:
        return PeriodData(
            spec=spec,
            q_matrix=np.zeros((0, 0), dtype=complex),
            du_coeffs=np.zeros((0, 0), dtype=complex),
            tau=np.zeros((0, 0), dtype=complex),
            cond_q=1.0,
        )
    if spec.mode != "real":
        raise NotImplementedError("period computation requires a real-mode curve")

    q = np.empty((g, g), dtype=complex)
    for h in range(1, g + 1):
        path = a_cycle(spec, h)
        for k in range(g):
            q[k, h - 1], _ = integrate_differential(
                spec, path, lambda x, s, k=k: x**k / s, tol=tol
            )
    cond_q = float(np.linalg.cond(q))
    if cond_q > cond_threshold:
        raise IllConditionedQ(f"cond(Q) = {cond_q:.3e} exceeds {cond_threshold:.1e}")
    # du_coeffs @ Q = identity, solved through pivoted QR for stability
    qr_q, qr_r, piv = scipy.linalg.qr(q, pivoting=True)
    eye = np.eye(g, dtype=complex)
    sol = scipy.linalg.solve_triangular(qr_r, qr_q.conj().T @ eye)
    duc = np.zeros((g, g), dtype=complex)
    duc[piv, :] = sol
    duc = duc.T  # rows index du_h, columns the monomial degree

    a = spec.a.real
    b = spec.b.real
    gap_ints = np.empty((g, g), dtype=complex)  # [j-1, k] = int_gap_j du_k
    for j in range(1, g + 1):
        for k in range(g):
            gap_ints[j - 1, k] = _gap_integral(spec, duc[k], b[j - 1], a[j], tol)
    tau = 2.0 * np.cumsum(gap_ints, axis=0)
    return PeriodData(spec=spec, q_matrix=q, du_coeffs=duc, tau=tau, cond_q=cond_q)


def boutroux_check(spec: CurveSpec, periods: PeriodData, eq, tol=1e-10):
    """Cycle-integral diagnostics of phi = W_1 dX for an equilibrium datum.

    Reports |oint_{A_h} phi - 2 i pi eps*_h| and |oint_{B_h} phi| for each h;
    the B-periods reduce to the cumulative gap integrals of M s (they vanish
    exactly at the unconstrained equilibrium).
    """
    g = spec.genus
    report = {"A": [], "B": [], "max_residual": 0.0}
    if g == 0:
        return report
    a = spec.a.real
    b = spec.b.real
    for h in range(1, g + 1):
        path = a_cycle(spec, h)
        val, _ = integrate_differential(
            spec, path, lambda x, s: eq.w1_values(x, s), tol=tol * 1e-2
        )
        res_a = abs(val - 2j * np.pi * eq.eps_star[h])
        report["A"].append(res_a)

        # B-period: - sum_{j<=h} int_gap_j M s dx
        acc = 0.0
        for j in range(1, h + 1):
            def f(x):
                return eq.m_values(x) * s_det(spec, x.astype(complex))

            seg, _ = cosine_segment_adaptive(f, b[j - 1], a[j], tol=tol * 1e-2)
            acc += seg
        report["B"].append(abs(acc))
    report["max_residual"] = max(report["A"] + report["B"])
    return report
