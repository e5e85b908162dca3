"""Adaptive 1D quadrature, dyadic tail classification, sphere and ball rules.

Integrands are vectorised: they receive a 1D array of abscissae (or an
``(m, n)`` array of points) and return an array of the same leading length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, QuadratureError
from .geometry import BallRegion, RegionKind

# Kronrod 15-point extension of the 7-point Gauss rule (QUADPACK qk15 tables).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _mirror(half):
    return np.concatenate([half[:-1], half[::-1]])


NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = _mirror(_WGK)
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1::2] = _mirror(_WG)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and rule sizes.

    ``tail_cutoff`` is the largest abscissa (or inverse shell radius ratio)
    examined before a dyadic tail is classified.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 500
    tail_cutoff: float = 2.0 ** 40
    sphere_theta: int = 64
    sphere_phi: int = 128
    sphere_refinements: int = 2
    ball_theta: int = 16
    ball_phi: int = 32

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        if not self.tail_cutoff > 1:
            raise DomainError("tail_cutoff must exceed 1")
        for name in ("sphere_theta", "sphere_phi", "ball_theta", "ball_phi"):
            if getattr(self, name) < 2:
                raise DomainError(f"{name} must be at least 2")

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True

    def require(self, what="integral"):
        """Return the value, raising ``QuadratureError`` if convergence failed."""
        if not self.converged:
            raise QuadratureError(
                f"{what} did not converge (estimate {self.value!r}, error {self.error_estimate:.3g})",
                partial=self,
            )
        return self.value

    def __add__(self, other):
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.evaluations + other.evaluations,
            self.converged and other.converged,
        )

    def scaled(self, c):
        return QuadratureResult(c * self.value, abs(c) * self.error_estimate, self.evaluations, self.converged)


def _evaluate(f, x):
    y = np.asarray(f(x), dtype=float)
    y = np.broadcast_to(y, x.shape[:1] if x.ndim > 1 else x.shape)
    if not np.all(np.isfinite(y)):
        bad = np.flatnonzero(~np.isfinite(y.ravel()))[0]
        where = x.reshape(len(y), -1)[bad] if x.ndim > 1 else x.ravel()[bad]
        raise DomainError(f"integrand is not finite at {where}")
    return y


def _gk_panels(f, lefts, rights):
    centers = 0.5 * (lefts + rights)
    halves = 0.5 * (rights - lefts)
    x = centers[:, None] + halves[:, None] * NODES[None, :]
    y = _evaluate(f, x.ravel()).reshape(x.shape)
    kron = halves * (y @ KRONROD_WEIGHTS)
    gauss = halves * (y @ GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss)


def integrate_1d(f, a, b, cfg=None, breakpoints: Sequence[float] = ()):
    """Adaptive Gauss-Kronrod (7/15) quadrature of a vectorised ``f`` over [a, b].

    Interior ``breakpoints`` start the subdivision so that jumps of the
    integrand fall on panel edges.  Endpoints are never evaluated, which
    accommodates integrable endpoint singularities.  The error estimate is
    the sum of the per-panel |Kronrod - Gauss| differences.
    """
    cfg = cfg or DEFAULT_CONFIG
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if a > b:
        raise DomainError("need a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1, True)
    cuts = sorted({a, b, *(float(p) for p in breakpoints if a < p < b)})
    lefts = np.array(cuts[:-1])
    rights = np.array(cuts[1:])
    vals, errs = _gk_panels(f, lefts, rights)
    evaluations = 15 * len(lefts)
    while True:
        total = math.fsum(vals)
        err = math.fsum(errs)
        tol = cfg.tolerance(total)
        if err <= tol:
            return QuadratureResult(total, err, evaluations, True)
        count = len(lefts)
        room = cfg.max_subdivisions - count
        if room <= 0:
            return QuadratureResult(total, err, evaluations, False)
        order = np.argsort(-errs, kind="stable")
        pick = order[errs[order] > tol / count]
        if len(pick) == 0:
            pick = order[:1]
        pick = pick[:room]
        mids = 0.5 * (lefts[pick] + rights[pick])
        splittable = (mids > lefts[pick]) & (mids < rights[pick])
        if not splittable.any():
            return QuadratureResult(total, err, evaluations, False)
        pick = pick[splittable]
        mids = mids[splittable]
        new_l = np.concatenate([lefts[pick], mids])
        new_r = np.concatenate([mids, rights[pick]])
        new_v, new_e = _gk_panels(f, new_l, new_r)
        evaluations += 15 * len(new_l)
        keep = np.ones(count, dtype=bool)
        keep[pick] = False
        lefts = np.concatenate([lefts[keep], new_l])
        rights = np.concatenate([rights[keep], new_r])
        vals = np.concatenate([vals[keep], new_v])
        errs = np.concatenate([errs[keep], new_e])
        order = np.argsort(lefts, kind="stable")
        lefts, rights, vals, errs = lefts[order], rights[order], vals[order], errs[order]


class TailVerdict(str, Enum):
    CONVERGED = "converged"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TailResult:
    """Outcome of a dyadic block classification.

    ``value`` is the extrapolated sum when converged and the partial sum
    otherwise.
    """

    verdict: TailVerdict
    value: float
    error_estimate: float
    blocks: tuple
    reason: str = ""

    @property
    def converged(self):
        return self.verdict is TailVerdict.CONVERGED


CONTRACTION_RATIO = 0.9
CONTRACTION_STREAK = 3
DIVERGENCE_EXPONENT = 1.1


def classify_blocks(block: Callable[[int], QuadratureResult], max_blocks: int, cfg=None):
    """Sum block integrals B_0, B_1, ... and decide whether the series converges.

    Converged: three consecutive ratios B_{k+1}/B_k below 0.9, after which
    the remainder is extrapolated geometrically.  If the cutoff is reached
    without that, the last half of the blocks is fitted to B_k ~ k^(-p):
    growing blocks or p < 1.1 mean divergent, sign changes mean
    inconclusive, otherwise the power law is summed as a converged estimate.
    """
    cfg = cfg or DEFAULT_CONFIG
    blocks = []
    errors = []
    ratios = []
    streak = 0
    for k in range(max_blocks):
        res = block(k)
        if not res.converged:
            return TailResult(TailVerdict.INCONCLUSIVE, math.fsum(blocks) + res.value,
                              math.fsum(errors) + res.error_estimate, tuple(blocks),
                              f"block {k} quadrature did not converge")
        blocks.append(res.value)
        errors.append(res.error_estimate)
        partial = math.fsum(blocks)
        floor = cfg.tolerance(partial)
        if k >= 1:
            prev = blocks[-2]
            ratio = res.value / prev if prev != 0.0 else math.inf
            ratios.append(ratio)
            streak = streak + 1 if 0.0 <= ratio < CONTRACTION_RATIO else 0
        if streak >= CONTRACTION_STREAK:
            rho = max(ratios[-CONTRACTION_STREAK:])
            remainder = res.value * rho / (1.0 - rho)
            if abs(remainder) <= floor:
                return TailResult(TailVerdict.CONVERGED, partial + remainder,
                                  math.fsum(errors) + abs(remainder), tuple(blocks))
        if len(blocks) >= CONTRACTION_STREAK and all(
                abs(v) <= 1e-3 * floor for v in blocks[-CONTRACTION_STREAK:]) and partial != 0.0:
            return TailResult(TailVerdict.CONVERGED, partial, math.fsum(errors), tuple(blocks))
    partial = math.fsum(blocks)
    err = math.fsum(errors)
    if all(v == 0.0 for v in blocks):
        return TailResult(TailVerdict.CONVERGED, 0.0, err, tuple(blocks))
    if streak >= CONTRACTION_STREAK:
        rho = max(ratios[-CONTRACTION_STREAK:])
        remainder = blocks[-1] * rho / (1.0 - rho)
        return TailResult(TailVerdict.CONVERGED, partial + remainder, err + abs(remainder),
                          tuple(blocks), "geometric extrapolation at cutoff")
    half = np.asarray(blocks[len(blocks) // 2:])
    tiny = cfg.abs_tol * 1e-3
    signs = np.sign(half[np.abs(half) > tiny])
    if signs.size and np.any(signs != signs[0]):
        return TailResult(TailVerdict.INCONCLUSIVE, partial, err, tuple(blocks),
                          "block sums change sign")
    mags = np.abs(half)
    if np.any(mags <= tiny):
        return TailResult(TailVerdict.INCONCLUSIVE, partial, err, tuple(blocks),
                          "block sums are not monotone")
    idx = np.arange(len(blocks) // 2, len(blocks)) + 1.0
    slope = np.polyfit(np.log(idx), np.log(mags), 1)[0]
    p = -float(slope)
    if mags[-1] > mags[0] or p < DIVERGENCE_EXPONENT:
        return TailResult(TailVerdict.DIVERGENT, partial, err, tuple(blocks),
                          f"block sums decay like k^-{p:.3g}")
    last = blocks[-1]
    remainder = last * idx[-1] / (p - 1.0)
    return TailResult(TailVerdict.CONVERGED, partial + remainder, err + abs(remainder),
                      tuple(blocks), f"power-law extrapolation, exponent {p:.3g}")


def integrate_tail(f, a, cfg=None):
    """Classify and sum the improper integral of ``f`` over [a, inf) by dyadic blocks [2^k a, 2^(k+1) a]."""
    cfg = cfg or DEFAULT_CONFIG
    a = float(a)
    if not a > 0:
        raise DomainError("tail integrals need a positive lower limit")
    max_blocks = max(CONTRACTION_STREAK + 1, math.ceil(math.log2(cfg.tail_cutoff / a)))

    def block(k):
        lo = a * 2.0 ** k
        return integrate_1d(f, lo, 2.0 * lo, cfg)

    return classify_blocks(block, max_blocks, cfg)


def _frame(axis, n):
    """Orthonormal frame whose first vector is ``axis``."""
    e = np.zeros(n)
    e[-1] = 1.0
    if axis is not None:
        e = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(e)
        if norm == 0:
            raise DomainError("axis must be non-zero")
        e = e / norm
    if n == 2:
        return e, np.array([-e[1], e[0]])
    helper = np.zeros(n)
    helper[int(np.argmin(np.abs(e)))] = 1.0
    u = helper - (helper @ e) * e
    u /= np.linalg.norm(u)
    v = np.cross(e, u)
    return e, u, v


def _gauss_legendre(m):
    return np.polynomial.legendre.leggauss(m)


def sphere_rule(n, n_theta, n_phi, axis=None, polar_breaks: Sequence[float] = ()):
    """Product rule on S^{n-1} returning ``(points, weights)`` with unnormalised weights.

    Polar angle is measured from ``axis``.  For n = 3 the rule is
    Gauss-Legendre in cos(theta) on each panel between ``polar_breaks``
    times uniform longitude.  For n = 2 without breaks it is the uniform
    (trapezoidal) rule with ``n_phi`` points, and with breaks it is
    Gauss-Legendre in theta on each panel, mirrored to both sides.
    """
    breaks = sorted({float(t) for t in polar_breaks if 0.0 < t < math.pi})
    edges = np.array([0.0, *breaks, math.pi])
    if n == 2:
        e, u = _frame(axis, 2)
        if not breaks:
            phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
            pts = np.cos(phi)[:, None] * e + np.sin(phi)[:, None] * u
            return pts, np.full(n_phi, 2.0 * math.pi / n_phi)
        x, w = _gauss_legendre(n_theta)
        lo, hi = edges[:-1, None], edges[1:, None]
        theta = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel()
        wt = (0.5 * (hi - lo) * w).ravel()
        side = np.concatenate([theta, -theta])
        pts = np.cos(side)[:, None] * e + np.sin(side)[:, None] * u
        return pts, np.concatenate([wt, wt])
    if n != 3:
        raise DomainError("sphere quadrature is implemented for n = 2 and n = 3")
    e, u, v = _frame(axis, 3)
    x, w = _gauss_legendre(n_theta)
    c_hi = np.cos(edges[:-1])[:, None]
    c_lo = np.cos(edges[1:])[:, None]
    c = (0.5 * (c_lo + c_hi) + 0.5 * (c_hi - c_lo) * x).ravel()
    wc = (0.5 * (c_hi - c_lo) * w).ravel()
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    ring = np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
    pts = c[:, None, None] * e + s[:, None, None] * ring[None, :, :]
    weights = np.repeat(wc * (2.0 * math.pi / n_phi), n_phi)
    return pts.reshape(-1, 3), weights


def integrate_sphere(g, n, cfg=None, axis=None, polar_breaks: Sequence[float] = ()):
    """Integral of ``g`` over S^{n-1} against unnormalised surface measure.

    The rule size doubles until two successive estimates agree within
    tolerance, at most ``cfg.sphere_refinements`` times.
    """
    cfg = cfg or DEFAULT_CONFIG
    if n not in (2, 3):
        raise DomainError("sphere quadrature is implemented for n = 2 and n = 3")
    per_panel = _panel_order(cfg.sphere_theta, polar_breaks)
    nt, nph = per_panel, cfg.sphere_phi
    evaluations = 0

    def estimate(t, p):
        pts, w = sphere_rule(n, t, p, axis, polar_breaks)
        return float(w @ _evaluate(g, pts)), len(w)

    coarse, used = estimate(max(2, nt // 2), max(2, nph // 2))
    evaluations += used
    for level in range(cfg.sphere_refinements + 1):
        value, used = estimate(nt, nph)
        evaluations += used
        err = abs(value - coarse)
        if err <= cfg.tolerance(value):
            return QuadratureResult(value, err, evaluations, True)
        if level == cfg.sphere_refinements:
            break
        coarse = value
        nt *= 2
        nph *= 2
    return QuadratureResult(value, err, evaluations, False)


def _panel_order(total, breaks):
    panels = 1 + sum(1 for t in breaks if 0.0 < t < math.pi)
    return max(8, math.ceil(total / panels)) if panels > 1 else total


def cap_indicator_area(zeta0, eps, cfg=None, aligned=True):
    """Area of S^2 inside B(zeta0, eps) by quadrature of the indicator function.

    With ``aligned`` the rule's pole sits at ``zeta0`` and the cap edge is a
    panel break, so the product rule is exact up to rounding.  Without it
    the indicator is integrated on the default pole-at-e3 grid.
    """
    z = np.asarray(zeta0, dtype=float)

    def indicator(t):
        return (np.linalg.norm(t - z, axis=1) < eps).astype(float)

    if aligned:
        theta = 2.0 * math.asin(min(eps / 2.0, 1.0))
        return integrate_sphere(indicator, 3, cfg, axis=z, polar_breaks=(theta,))
    return integrate_sphere(indicator, 3, cfg)


def _region_radial_range(region):
    d = float(np.linalg.norm(region.center))
    big = region.r_outer
    lo = max(0.0, d - big)
    hi = d + big
    if region.kind in (RegionKind.CAP_MINUS, RegionKind.INTERSECT_UNIT_BALL):
        hi = min(hi, 1.0)
    elif region.kind is RegionKind.CAP_PLUS:
        lo = max(lo, 1.0)
    return d, lo, hi


def _cap_cosine(r, d, big):
    """Cosine of the angular radius of the part of S(0, r) inside B(c, big), |c| = d."""
    if d == 0.0:
        return np.where(r < big, -1.0, 1.0)
    return np.clip((r * r + d * d - big * big) / (2.0 * r * d), -1.0, 1.0)


def integrate_ball(g, n, region: BallRegion, cfg=None, breakpoints: Sequence[float] = (),
                   radial=False):
    """Integral of ``g`` over ``region`` by radial slicing.

    Balls and annuli are sliced by spheres about their centre, the inner
    integral using a product rule whose polar panels break where the slice
    crosses the spheres |x| = b for b in ``breakpoints``.  The clipped kinds
    are sliced by spheres about the origin and integrate over the spherical
    cap that lies inside the ball; ``breakpoints`` are then radii |x| handed
    to the outer integrator.  With ``radial=True`` (``g`` depends only on
    |x|, clipped kinds only) the cap integral is done in closed form.
    """
    cfg = cfg or DEFAULT_CONFIG
    if region.dim != n:
        raise DomainError("region dimension does not match n")
    if n not in (2, 3):
        raise DomainError("ball quadrature is implemented for n = 2 and n = 3")
    if region.kind in (RegionKind.BALL, RegionKind.ANNULUS):
        return _integrate_centered(g, n, region, cfg, breakpoints)
    return _integrate_clipped(g, n, region, cfg, breakpoints, radial)


def _integrate_centered(g, n, region, cfg, abs_breaks):
    c = np.asarray(region.center)
    d = float(np.linalg.norm(c))
    axis = c if d > 0 else None
    lo = region.r_inner if region.kind is RegionKind.ANNULUS else 0.0
    hi = region.r_outer
    abs_breaks = np.asarray(sorted(set(float(b) for b in abs_breaks if b > 0)))
    plain = sphere_rule(n, cfg.ball_theta, cfg.ball_phi, axis)

    def shell(rho):
        out = np.empty_like(rho)
        for i, r in enumerate(rho):
            pts, w = plain
            if d > 0 and abs_breaks.size:
                near = abs_breaks[(abs_breaks > abs(d - r)) & (abs_breaks < d + r)]
                if near.size:
                    cosines = np.clip((near * near - d * d - r * r) / (2.0 * r * d), -1.0, 1.0)
                    order = _panel_order(cfg.ball_theta, np.arccos(cosines))
                    pts, w = sphere_rule(n, order, cfg.ball_phi, axis, np.arccos(cosines))
            vals = _evaluate(g, c + r * pts)
            out[i] = r ** (n - 1) * float(w @ vals)
        return out

    outer_breaks = []
    if d > 0:
        outer_breaks = [abs(b - d) for b in abs_breaks] + [b + d for b in abs_breaks]
    return integrate_1d(shell, lo, hi, cfg, outer_breaks)


def _integrate_clipped(g, n, region, cfg, breakpoints, radial):
    c = np.asarray(region.center)
    d, lo, hi = _region_radial_range(region)
    big = region.r_outer
    if lo >= hi:
        return QuadratureResult(0.0, 0.0, 1, True)
    axis = c / d if d > 0 else np.eye(n)[-1]
    frame = _frame(axis, n)
    breaks = list(breakpoints)
    if big > d:
        breaks.append(big - d)
    xt, wt = _gauss_legendre(cfg.ball_theta)
    phi = (np.arange(cfg.ball_phi) + 0.5) * (2.0 * math.pi / cfg.ball_phi)

    def shell(r):
        cmax = _cap_cosine(r, d, big)
        if radial:
            vals = _evaluate(g, r[:, None] * axis[None, :])
            if n == 3:
                cap = 2.0 * math.pi * (1.0 - cmax)
            else:
                cap = 2.0 * np.arccos(cmax)
            return r ** (n - 1) * cap * vals
        if n == 3:
            e, u, v = frame
            cs = cmax[:, None] + 0.5 * (1.0 - cmax[:, None]) * (xt[None, :] + 1.0)
            wc = 0.5 * (1.0 - cmax[:, None]) * wt[None, :]
            s = np.sqrt(np.clip(1.0 - cs * cs, 0.0, None))
            ring = np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
            dirs = cs[:, :, None, None] * e + s[:, :, None, None] * ring[None, None, :, :]
            pts = r[:, None, None, None] * dirs
            vals = _evaluate(g, pts.reshape(-1, 3)).reshape(pts.shape[:3])
            inner = np.einsum("mt,mtp->m", wc, vals) * (2.0 * math.pi / cfg.ball_phi)
            return r * r * inner
        e, u = frame
        tmax = np.arccos(cmax)
        theta = tmax[:, None] * xt[None, :]
        wth = tmax[:, None] * wt[None, :]
        dirs = np.cos(theta)[:, :, None] * e + np.sin(theta)[:, :, None] * u
        pts = r[:, None, None] * dirs
        vals = _evaluate(g, pts.reshape(-1, 2)).reshape(pts.shape[:2])
        return r * np.sum(wth * vals, axis=1)

    return integrate_1d(shell, lo, hi, cfg, breaks)

