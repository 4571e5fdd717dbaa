"""Series expansions of the curve data at x = infinity.

The square-root branch s(x) ~ x^{g+1} admits a Laurent expansion whose
coefficients come from a binomial/convolution calculus on the defining
polynomial.  These series give exact polynomial parts (needed for the
potential construction) and spectrally accurate far-field antiderivatives of
the holomorphic differentials (needed for Abel-map anchors).
"""

import numpy as np


def poly_product_series(branch_points, n_terms):
    """Coefficients p_m of sigma(x)/x^{2g+2} = sum_m p_m x^{-m}, p_0 = 1."""
    p = np.zeros(n_terms, dtype=complex)
    p[0] = 1.0
    pts = np.asarray(branch_points, dtype=complex)
    for j in range(0, len(pts), 2):
        ah, bh = pts[j], pts[j + 1]
        f = np.zeros(3, dtype=complex)
        f[0], f[1], f[2] = 1.0, -(ah + bh), ah * bh
        q = np.zeros(n_terms, dtype=complex)
        for i in range(n_terms):
            if p[i] == 0:
                continue
            top = min(3, n_terms - i)
            q[i : i + top] += p[i] * f[:top]
        p = q
    return p


def series_sqrt(p):
    """t with t*t = p as formal power series, t_0 = 1 (requires p_0 = 1)."""
    n = len(p)
    t = np.zeros(n, dtype=complex)
    t[0] = 1.0
    for m in range(1, n):
        acc = p[m] - np.dot(t[1:m], t[m - 1 : 0 : -1])
        t[m] = 0.5 * acc
    return t


def series_inverse(t):
    """r with r*t = 1 as formal power series (requires t_0 = 1)."""
    n = len(t)
    r = np.zeros(n, dtype=complex)
    r[0] = 1.0
    for m in range(1, n):
        r[m] = -np.dot(t[1:m + 1], r[m - 1 :: -1][: m])
    return r


class InfinitySeries:
    """Far-field expansions s(x)/x^{g+1} and x^{g+1}/s(x) for a curve.

    Valid for |x| > max |branch point|; used with a safety factor >= 2.
    """

    def __init__(self, branch_points, n_terms=48):
        self.branch_points = np.asarray(branch_points, dtype=complex)
        self.genus = len(branch_points) // 2 - 1
        self.n_terms = n_terms
        self.radius = float(np.max(np.abs(self.branch_points)))
        p = poly_product_series(self.branch_points, n_terms)
        self.s_over_xg1 = series_sqrt(p)          # s(x) = x^{g+1} * sum_m c_m x^-m
        self.inv = series_inverse(self.s_over_xg1)  # 1/s = x^{-(g+1)} * sum_m r_m x^-m

    def s_tail(self, x):
        """s(x) from the series; |x| must exceed ~2x the branch radius."""
        x = np.asarray(x, dtype=complex)
        xi = 1.0 / x
        acc = np.zeros_like(x)
        for m in range(self.n_terms - 1, -1, -1):
            acc = acc * xi + self.s_over_xg1[m]
        return acc * x ** (self.genus + 1)

    def monomial_antiderivative(self, k, x):
        """int_inf^x  t^k / s(t) dt along any far-field path, for 0 <= k <= g-1.

        Single-valued for |x| above the series radius because t^k/s has no
        residue at infinity in this range of k.
        """
        g = self.genus
        x = np.asarray(x, dtype=complex)
        xi = 1.0 / x
        acc = np.zeros_like(x)
        # t^k / s = sum_m r_m t^{k - g - 1 - m}; exponent = k-g-1-m <= -2
        for m in range(self.n_terms):
            e = k - g - 1 - m
            acc = acc + self.inv[m] * x ** (e + 1) / (e + 1)
        return acc

    def polynomial_part_m_s(self, m_coeffs):
        """Polynomial part of M(x) * s(x) for a polynomial M (ascending coeffs).

        Exact: convolves M with the s-series and keeps the nonnegative powers.
        """
        m_coeffs = np.asarray(m_coeffs, dtype=complex)
        deg_m = len(m_coeffs) - 1
        g = self.genus
        top = deg_m + g + 1
        out = np.zeros(top + 1, dtype=complex)
        # M(x) s(x) = sum_j m_j x^j * x^{g+1} sum_l c_l x^-l
        for j, mj in enumerate(m_coeffs):
            if mj == 0:
                continue
            for l in range(self.n_terms):
                e = j + g + 1 - l
                if e < 0:
                    break
                if e <= top:
                    out[e] += mj * self.s_over_xg1[l]
        return out
