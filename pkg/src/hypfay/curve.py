"""Hyperelliptic surface core.

The curve is s^2 = sigma(x) with sigma a monic polynomial of degree 2g+2.
In real mode the branch points are strictly increasing reals
a_0 < b_0 < ... < a_g < b_g and the cuts are the segments S_h = [a_h, b_h];
`s_det` is the unique holomorphic determination on C minus the cuts with
s(x) ~ x^{g+1} at infinity.  Complex branch configurations are handled by
continuation along a straight-line homotopy from a real configuration.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .laurent import InfinitySeries


class PointOnCut(ValueError):
    """x lies on a cut and no side flag was supplied."""


class OutOfChart(ValueError):
    """Point outside a local chart's validity disc."""


PLUS, MINUS = +1, -1


@dataclass(frozen=True)
class CurveSpec:
    """Branch data of the curve s^2 = prod (x - a_h)(x - b_h)."""

    branch_points: tuple
    mode: str = "real"
    base_points: tuple = None  # real configuration the complex one deforms from

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.branch_points)
        if len(pts) < 2 or len(pts) % 2 != 0:
            raise ValueError("need an even number (>= 2) of branch points")
        if len(set(pts)) != len(pts):
            raise ValueError("branch points must be pairwise distinct")
        if self.mode == "real":
            reals = [p.real for p in pts]
            if any(abs(p.imag) > 0 for p in pts):
                raise ValueError("real mode requires real branch points")
            if any(reals[i] >= reals[i + 1] for i in range(len(reals) - 1)):
                raise ValueError("real mode requires strictly increasing branch points")
        elif self.mode == "complex":
            base = self.base_points
            if base is None:
                base = tuple(sorted(p.real for p in pts))
                if len(set(base)) != len(base):
                    raise ValueError("complex mode needs distinct real parts or explicit base_points")
            object.__setattr__(self, "base_points", tuple(float(x) for x in base))
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "branch_points", pts)

    @property
    def genus(self):
        return len(self.branch_points) // 2 - 1

    @property
    def a(self):
        return np.asarray(self.branch_points[0::2])

    @property
    def b(self):
        return np.asarray(self.branch_points[1::2])

    @property
    def scale(self):
        return float(np.max(np.abs(np.asarray(self.branch_points))))

    def sigma(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.ones_like(x)
        for p in self.branch_points:
            out = out * (x - p)
        return out


def sigma_eval(spec: CurveSpec, x):
    """Monic product over all branch points."""
    return spec.sigma(x)


def _pair_root_real(a, b, x):
    """sqrt((x-a)(x-b)) cut along [a,b], ~ x at infinity, for real a < b."""
    return np.sqrt(x - a) * np.sqrt(x - b)


def s_det(spec: CurveSpec, x, side=None):
    """Canonical determination of sqrt(sigma) on C minus the cuts.

    Real mode: product of per-pair roots sqrt(x-a_h)*sqrt(x-b_h) (principal
    branches), which is holomorphic off the cuts and ~ x^{g+1} at infinity.
    Points on a cut need side=+1 or -1 (value of s(x +/- i0)).

    Complex mode: the determination continued from the real base configuration
    along the straight-line homotopy of branch points; only the global sign is
    ambiguous at each step and is tracked by continuity.
    """
    if spec.mode == "complex":
        return _s_det_homotopy(spec, x)
    x_arr = np.asarray(x, dtype=complex)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    on_cut = np.zeros(x_arr.shape, dtype=bool)
    real_mask = x_arr.imag == 0
    if real_mask.any():
        xr = x_arr.real
        for ah, bh in zip(spec.a.real, spec.b.real):
            on_cut |= real_mask & (xr > ah) & (xr < bh)
    if on_cut.any() and side is None:
        raise PointOnCut("point on a cut: pass side=+1 or side=-1 for s(x +/- i0)")
    out = np.ones(x_arr.shape, dtype=complex)
    for ah, bh in zip(spec.a.real, spec.b.real):
        r = _pair_root_real(ah, bh, x_arr)
        if on_cut.any():
            xr = x_arr.real
            here = on_cut & (xr > ah) & (xr < bh)
            if here.any():
                mag = np.sqrt((xr[here] - ah) * (bh - xr[here]))
                r[here] = 1j * side * mag
        out *= r
    return out[0] if scalar else out


def _s_det_homotopy(spec: CurveSpec, x, steps=24):
    """Continuation of s along pts(t) = (1-t)*base + t*pts, sign-tracked in t."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=complex))
    scalar = np.asarray(x, dtype=complex).ndim == 0
    base = np.asarray(spec.base_points, dtype=complex)
    target = np.asarray(spec.branch_points, dtype=complex)

    def raw(pts_t):
        out = np.ones(x_arr.shape, dtype=complex)
        for j in range(0, len(pts_t), 2):
            out = out * np.sqrt(x_arr - pts_t[j]) * np.sqrt(x_arr - pts_t[j + 1])
        return out

    base_spec = CurveSpec(tuple(base.real), mode="real")
    prev = s_det(base_spec, x_arr)
    sign = np.ones(x_arr.shape)
    # fix the sign at t=0 against the raw principal product
    r0 = raw(base)
    sign = np.where(np.abs(prev - r0) <= np.abs(prev + r0), 1.0, -1.0)
    prev = sign * r0
    for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
        pts_t = (1.0 - t) * base + t * target
        r = sign * raw(pts_t)
        flip = np.abs(r - prev) > np.abs(r + prev)
        sign = np.where(flip, -sign, sign)
        prev = np.where(flip, -r, r)
    return prev[0] if scalar else prev


_INF = object()


@dataclass(frozen=True)
class SurfacePoint:
    """Point of the two-sheeted surface: projection x, sheet tag, cached s."""

    x: complex
    sheet: int
    s: complex
    at_infinity: bool = False

    @classmethod
    def from_x(cls, spec: CurveSpec, x, sheet=PLUS, side=None):
        s = s_det(spec, x, side=side)
        return cls(x=complex(x), sheet=sheet, s=sheet * complex(s))

    @classmethod
    def infinity(cls, sheet=PLUS):
        return cls(x=None, sheet=sheet, s=None, at_infinity=True)

    def __post_init__(self):
        if self.sheet not in (PLUS, MINUS):
            raise ValueError("sheet must be +1 or -1")

    def key(self):
        if self.at_infinity:
            return ("inf", self.sheet)
        return (round(self.x.real, 12), round(self.x.imag, 12), self.sheet)


def involution(p: SurfacePoint) -> SurfacePoint:
    """Hyperelliptic involution: same x, flipped sheet, negated s."""
    if p.at_infinity:
        return SurfacePoint.infinity(-p.sheet)
    return SurfacePoint(x=p.x, sheet=-p.sheet, s=-p.s)


@dataclass(frozen=True)
class LocalChart:
    """Chart data: zeta = sqrt(X - X(p)) at ramification points, 1/X at
    infinity, X - X(p) elsewhere."""

    center: SurfacePoint
    kind: str
    radius: float = np.inf
    branch_sign: int = +1

    @classmethod
    def at(cls, spec: CurveSpec, center: SurfacePoint, branch_sign=+1):
        if center.at_infinity:
            return cls(center=center, kind="infinity", radius=1.0 / (2.0 * spec.scale))
        pts = np.asarray(spec.branch_points)
        dists = np.abs(pts - center.x)
        if np.min(dists) < 1e-12 * spec.scale:
            others = dists[dists > 1e-12 * spec.scale]
            return cls(center=center, kind="ramification",
                       radius=0.5 * float(np.min(others)), branch_sign=branch_sign)
        return cls(center=center, kind="regular", radius=0.5 * float(np.min(dists)))


def local_coordinate(chart: LocalChart, z: SurfacePoint):
    """zeta_p(z) per the chart kind; OutOfChart outside the validity disc."""
    if chart.kind == "infinity":
        if z.at_infinity:
            if z.sheet != chart.center.sheet:
                raise OutOfChart("opposite infinity is not in this chart")
            return 0.0 + 0.0j
        zeta = 1.0 / z.x
        if abs(zeta) > chart.radius:
            raise OutOfChart("point too far from infinity for the 1/X chart")
        return zeta
    if z.at_infinity:
        raise OutOfChart("infinity is not in a finite chart")
    dx = z.x - chart.center.x
    if abs(dx) > chart.radius:
        raise OutOfChart("point outside chart validity disc")
    if chart.kind == "regular":
        return dx
    return chart.branch_sign * np.sqrt(complex(dx))


def load_curve_file(path):
    """Read a curve spec from JSON: {"branch_points": [...], "mode": ...}.

    Entries may be numbers or [re, im] pairs (complex mode).
    """
    with open(path) as fh:
        doc = json.load(fh)
    return curve_from_dict(doc)


def curve_from_dict(doc):
    if "branch_points" not in doc:
        raise ValueError("curve file missing field 'branch_points'")
    raw = doc["branch_points"]
    pts = []
    for entry in raw:
        if isinstance(entry, (list, tuple)):
            if len(entry) != 2:
                raise ValueError(f"branch point entry {entry!r} is not [re, im]")
            pts.append(complex(entry[0], entry[1]))
        else:
            pts.append(complex(entry))
    mode = doc.get("mode", "real")
    base = doc.get("base_points")
    if base is not None:
        base = tuple(float(v) for v in base)
    return CurveSpec(tuple(pts), mode=mode, base_points=base)
