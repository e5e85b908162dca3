"""Mean-value conditions on the dilatation bound Q and Hölder exponent estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError
from .geometry import BallRegion, ConstantsN, as_point, inversion, random_unit_vectors
from .maps import DifferentiableMap
from .profiles import StepProfile
from .quadrature import DEFAULT_CONFIG, integrate_1d, integrate_ball, integrate_sphere

EPS_FLOOR = 1e-5
POINTS_PER_DECADE = 40
UNBOUNDED_THRESHOLD = 50.0
_TINY_Q = 1e-300


@dataclass(frozen=True)
class QField:
    """A non-negative function Q on the unit ball.

    ``base`` extends Q by zero outside the ball and ``reflected`` extends it
    by Q*(x) = Q(x/|x|^2).  ``radial`` (a function of |x|) and ``constant``
    enable closed-form shortcuts; ``breaks`` lists radii in (0, 1) where Q
    jumps.
    """

    evaluator: Callable
    dim: int
    label: str = "Q"
    radial: Callable | None = None
    constant: float | None = None
    breaks: tuple = ()

    @classmethod
    def constant_field(cls, c, n):
        if c < 0:
            raise DomainError("Q must be non-negative")
        c = float(c)
        return cls(lambda x: np.full(len(x), c), n, f"Q={c:g}",
                   radial=lambda r: np.full(np.shape(r), c), constant=c)

    @classmethod
    def from_profile(cls, profile: StepProfile, n):
        def radial(r):
            return profile(np.clip(r, 1e-300, 1.0))

        return cls(lambda x: radial(np.linalg.norm(x, axis=1)), n,
                   f"beta-{profile.scheme.value}", radial=radial,
                   breaks=tuple(float(b) for b in profile.breakpoints))

    @classmethod
    def from_callable(cls, fn, n, label="Q"):
        return cls(fn, n, label)

    def base(self, x):
        x = np.atleast_2d(x)
        r = np.linalg.norm(x, axis=1)
        out = np.zeros(len(x))
        inside = r <= 1.0
        if inside.any():
            out[inside] = self.evaluator(x[inside])
        return out

    def reflected(self, x):
        x = np.atleast_2d(x)
        r = np.linalg.norm(x, axis=1)
        out = np.empty(len(x))
        inside = r <= 1.0
        if inside.any():
            out[inside] = self.evaluator(x[inside])
        if (~inside).any():
            out[~inside] = self.evaluator(inversion(x[~inside]))
        return out

    def radial_reflected(self, s):
        s = np.asarray(s, dtype=float)
        return self.radial(np.where(s <= 1.0, s, 1.0 / np.maximum(s, 1.0)))

    @property
    def reflected_breaks(self):
        return tuple(sorted(set(self.breaks) | {1.0 / b for b in self.breaks if b > 0} | {1.0}))


def _region_integral(Q: QField, region, cfg, reflected_part=False):
    n = Q.dim
    if Q.radial is not None:
        if reflected_part:
            return integrate_ball(lambda x: Q.radial(1.0 / np.linalg.norm(x, axis=1)), n, region, cfg,
                                  [1.0 / b for b in Q.breaks if b > 0], radial=True)
        return integrate_ball(lambda x: Q.radial(np.linalg.norm(x, axis=1)), n, region, cfg,
                              Q.breaks, radial=True)
    fn = Q.reflected if reflected_part else Q.base
    breaks = [1.0 / b for b in Q.breaks if b > 0] if reflected_part else Q.breaks
    return integrate_ball(fn, n, region, cfg, breaks)


def ball_mean(Q: QField, zeta, eps, cfg=None) -> float:
    """Mean of Q over B(zeta, eps) inside the unit ball, normalised by the full ball volume."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    cfg = cfg or DEFAULT_CONFIG
    z = as_point(zeta, Q.dim)
    res = _region_integral(Q, BallRegion.inside_unit_ball(z, eps), cfg)
    return res.require("ball mean") / (ConstantsN.of(Q.dim).Omega * eps ** Q.dim)


def log_grid(lo, hi, per_decade=POINTS_PER_DECADE):
    """Log-spaced grid from ``lo`` to ``hi`` inclusive with ``per_decade`` points per decade."""
    if not 0 < lo < hi:
        raise DomainError("need 0 < lo < hi")
    count = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), count)


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: float
    eps: tuple
    values: tuple


def sup_ball_mean(Q: QField, zeta, eps0, eps_min=EPS_FLOOR, per_decade=POINTS_PER_DECADE, cfg=None):
    """Largest ball mean over a log-spaced eps grid in [eps_min, eps0]."""
    if not 0 < eps0 < 1:
        raise DomainError("eps0 must lie in (0, 1)")
    grid = log_grid(max(eps_min, EPS_FLOOR), eps0, per_decade)
    vals = [ball_mean(Q, zeta, e, cfg) for e in grid]
    i = int(np.argmax(vals))
    return SupResult(float(vals[i]), float(grid[i]), tuple(grid.tolist()), tuple(vals))


def _sphere_breaks(x0, r, radii):
    """Polar angles (from the direction of x0) where S(x0, r) meets the spheres |x| = b."""
    d = float(np.linalg.norm(x0))
    if d == 0.0:
        return ()
    radii = np.asarray(radii, dtype=float)
    radii = radii[(radii > abs(d - r)) & (radii < d + r)]
    return tuple(np.arccos(np.clip((radii ** 2 - d * d - r * r) / (2.0 * r * d), -1.0, 1.0)))


def spherical_mean(Q: QField, x0, r, reflected=False, cfg=None) -> float:
    """Average of Q (or Q*) over the sphere |x - x0| = r."""
    if not r > 0:
        raise DomainError("r must be positive")
    cfg = cfg or DEFAULT_CONFIG
    x0 = as_point(x0, Q.dim)
    if reflected and Q.constant is not None:
        return Q.constant
    if Q.radial is not None and not np.any(x0):
        if r <= 1.0:
            return float(Q.radial(np.array(r)))
        return float(Q.radial_reflected(np.array(r))) if reflected else 0.0
    fn = Q.reflected if reflected else Q.base
    radii = Q.reflected_breaks if reflected else tuple(Q.breaks) + (1.0,)
    axis = x0 if np.any(x0) else None
    res = integrate_sphere(lambda u: fn(x0 + r * u), Q.dim, cfg, axis, _sphere_breaks(x0, r, radii))
    return res.require("spherical mean") / ConstantsN.of(Q.dim).omega


def _q_values(Q, x0, rs, reflected, cfg):
    if Q.radial is not None and not np.any(x0):
        rs = np.asarray(rs, dtype=float)
        inside = Q.radial(np.minimum(rs, 1.0))
        if reflected:
            return np.where(rs <= 1.0, inside, Q.radial_reflected(rs))
        return np.where(rs <= 1.0, inside, 0.0)
    if reflected and Q.constant is not None:
        return np.full(np.shape(rs), Q.constant)
    return np.array([spherical_mean(Q, x0, float(r), reflected, cfg) for r in np.ravel(rs)])


class LimsupVerdict(str, Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LimsupResult:
    verdict: LimsupVerdict
    bound_estimate: float
    t: tuple = field(repr=False)
    values: tuple = field(repr=False)
    reason: str = ""


def limsup_integral(Q: QField, x0, alpha, eps0, t, cfg=None) -> float:
    """Integral of (alpha - q*(r)^(-1/(n-1))) dr/r over [t, eps0]."""
    cfg = cfg or DEFAULT_CONFIG
    x0 = as_point(x0, Q.dim)
    expo = 1.0 / (Q.dim - 1)
    breaks = _limsup_breaks(Q, x0)

    def integrand(r):
        q = np.maximum(_q_values(Q, x0, r, True, cfg), _TINY_Q)
        return (alpha - q ** (-expo)) / r

    return integrate_1d(integrand, t, eps0, cfg, breaks).require("limsup integral")


def _limsup_breaks(Q, x0):
    if Q.radial is not None and not np.any(x0):
        return Q.reflected_breaks
    return ()


def limsup_condition(Q: QField, x0, alpha, eps0, t_grid=None, cfg=None) -> LimsupResult:
    """Track V(t) = integral of (alpha - q*^(-1/(n-1))) dr/r over [t, eps0] as t decreases.

    Unbounded when V exceeds 50 while still rising, or when the increase
    over the last decade of t is positive and at least half the increase
    over the decade before (no geometric slowdown).  Otherwise bounded,
    with the maximum plus a geometric extrapolation of the last decade as
    the bound.
    """
    if not 0 < eps0 < 0.5:
        raise DomainError("eps0 must lie in (0, 1/2)")
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    cfg = cfg or DEFAULT_CONFIG
    x0 = as_point(x0, Q.dim)
    if t_grid is None:
        t_grid = log_grid(EPS_FLOOR, eps0)[::-1]
    t = np.sort(np.asarray(t_grid, dtype=float))[::-1]
    if t[0] > eps0 or t[-1] <= 0:
        raise DomainError("t grid must lie in (0, eps0]")
    expo = 1.0 / (Q.dim - 1)
    breaks = _limsup_breaks(Q, x0)

    def integrand(r):
        q = np.maximum(_q_values(Q, x0, r, True, cfg), _TINY_Q)
        return (alpha - q ** (-expo)) / r

    values = []
    total = 0.0
    upper = eps0
    for tk in t:
        if tk < upper:
            total += integrate_1d(integrand, tk, upper, cfg, breaks).require("limsup integral")
        values.append(total)
        upper = min(upper, tk)
    values = np.asarray(values)
    per_decade = _points_per_decade(t)
    verdict, bound, reason = _trend_verdict(values, per_decade)
    return LimsupResult(verdict, bound, tuple(t.tolist()), tuple(values.tolist()), reason)


def _points_per_decade(t):
    span = math.log10(t[0] / t[-1])
    return max(1, int(round((len(t) - 1) / span))) if span > 0 else len(t)


def _trend_verdict(values, per_decade):
    top = float(np.max(values))
    if len(values) <= per_decade:
        return LimsupVerdict.INCONCLUSIVE, top, "grid spans less than one decade"
    last = float(values[-1] - values[-1 - per_decade])
    prev = float(values[-1 - per_decade] - values[-1 - 2 * per_decade]) if len(values) > 2 * per_decade else last
    if top > UNBOUNDED_THRESHOLD and last > 0:
        return LimsupVerdict.UNBOUNDED, math.inf, f"exceeds {UNBOUNDED_THRESHOLD:g} while rising"
    if last > 1e-9 and last >= 0.5 * prev:
        return LimsupVerdict.UNBOUNDED, math.inf, f"rises by {last:.3g} per decade without slowing"
    extra = 0.0
    if last > 0 and prev > 0:
        rho = last / prev
        extra = last * rho / (1.0 - rho)
    return LimsupVerdict.BOUNDED, max(top, float(values[-1]) + extra), ""


@dataclass(frozen=True)
class ReflectionBound:
    lhs: float
    rhs: float
    passed: bool


def reflection_factor_bound(Q: QField, zeta0, r, cfg=None) -> ReflectionBound:
    """Compare the integral of Q* over B(zeta0, r) with (4^n + 1) times that of Q inside the ball."""
    if not 0 < r < 0.5:
        raise DomainError("r must lie in (0, 1/2)")
    cfg = cfg or DEFAULT_CONFIG
    z = as_point(zeta0, Q.dim)
    inner = _region_integral(Q, BallRegion.cap_minus(z, r), cfg).require("inner integral")
    outer = _region_integral(Q, BallRegion.cap_plus(z, r), cfg, reflected_part=True).require("outer integral")
    lhs = inner + outer
    rhs = (4 ** Q.dim + 1) * inner
    return ReflectionBound(lhs, rhs, bool(lhs <= rhs * (1 + 1e-6)))


def _zonal_band_kernel(s, d, eps, eps0):
    """Integral of |x - x0|^-3 over the part of S(0, s) with eps < |x - x0| < eps0, |x0| = d > 0."""
    lo = np.maximum(eps * eps, (s - d) ** 2)
    hi = np.minimum(eps0 * eps0, (s + d) ** 2)
    val = (2.0 * math.pi * s / d) * (1.0 / np.sqrt(lo) - 1.0 / np.sqrt(hi))
    return np.where(lo < hi, val, 0.0)


def annulus_integral(Q: QField, x0, eps, eps0, cfg=None) -> float:
    """Integral of Q*(x)/|x - x0|^n over the annulus eps < |x - x0| < eps0."""
    if not 0 < eps < eps0:
        raise DomainError("need 0 < eps < eps0")
    cfg = cfg or DEFAULT_CONFIG
    x0 = as_point(x0, Q.dim)
    d = float(np.linalg.norm(x0))
    if Q.radial is not None and Q.dim == 3 and d > 0:
        breaks = list(Q.reflected_breaks) + [d - eps, d + eps, d - eps0, d + eps0]

        def integrand(s):
            return Q.radial_reflected(s) * _zonal_band_kernel(s, d, eps, eps0)

        return integrate_1d(integrand, max(0.0, d - eps0), d + eps0, cfg, breaks).require("annulus integral")
    n = Q.dim

    def g(x):
        return Q.reflected(x) / np.linalg.norm(x - x0, axis=1) ** n

    region = BallRegion.annulus(x0, eps, eps0)
    return integrate_ball(g, n, region, cfg, Q.reflected_breaks).require("annulus integral")


def annulus_log_bound(Q: QField, x0, eps, eps0, cfg=None) -> float:
    """Annulus integral divided by log(1/eps)."""
    if not eps < 1:
        raise DomainError("eps must be below 1")
    return annulus_integral(Q, x0, eps, eps0, cfg) / math.log(1.0 / eps)


def holder_exponent_theorem1(C, n) -> float:
    """alpha = (omega_{n-1} log 2 / (Omega_n (4^n + 1) 2^(n+1) C))^(1/(n-1))."""
    if not C > 0:
        raise DomainError("C must be positive")
    if n < 3:
        raise DomainError("n must be at least 3")
    k = ConstantsN.of(n)
    return (k.omega * math.log(2.0) / (k.Omega * (4 ** n + 1) * 2 ** (n + 1) * C)) ** (1.0 / (n - 1))


@dataclass(frozen=True)
class HolderCertificate:
    alpha: float
    constant: float
    eps0: float
    delta0: float
    center: tuple

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")


def theorem1_certificate(mean_bound_C, n, eps0, center, constant=math.nan) -> HolderCertificate:
    """Exponent and radii produced by the mean-bound path; the constant is left to the caller."""
    alpha = holder_exponent_theorem1(mean_bound_C, n)
    return HolderCertificate(alpha, constant, eps0, min(0.5, eps0 ** 2), tuple(as_point(center, n)))


@dataclass(frozen=True)
class HolderEstimate:
    constant: float
    fitted_exponent: float
    samples: int


def empirical_holder(f: DifferentiableMap, center, alpha, radius, pairs, seed, all_pairs=False,
                     min_fraction=1e-4) -> HolderEstimate:
    """Sampled Hölder constant and fitted exponent of ``f`` at ``center``.

    Sample distances from the centre are log-uniform in
    [min_fraction * radius, radius] so the log-log fit sees several decades.
    With ``all_pairs`` the constant is taken over all sample pairs instead
    of pairs with the centre.
    """
    if pairs < 100:
        raise DomainError("need at least 100 pairs")
    c = as_point(center, f.dim)
    rng = np.random.default_rng(seed)
    fc = f.evaluate(c)
    pts = []
    while len(pts) < pairs:
        u = random_unit_vectors(rng, pairs, f.dim)
        rad = radius * min_fraction ** rng.random(pairs)
        cand = c + rad[:, None] * u
        pts.extend(cand[f.contains(cand)][: pairs - len(pts)])
    pts = np.asarray(pts)
    vals = f.evaluate(pts)
    dist = np.linalg.norm(pts - c, axis=1)
    gap = np.linalg.norm(vals - fc, axis=1)
    if all_pairs:
        i, j = np.triu_indices(len(pts), k=1)
        pd = np.linalg.norm(pts[i] - pts[j], axis=1)
        keep = pd > 0
        constant = float(np.max(np.linalg.norm(vals[i] - vals[j], axis=1)[keep] / pd[keep] ** alpha))
    else:
        constant = float(np.max(gap / dist ** alpha))
    pos = gap > 0
    if pos.sum() >= 2:
        slope = float(np.polyfit(np.log(dist[pos]), np.log(gap[pos]), 1)[0])
    else:
        slope = math.nan
    return HolderEstimate(constant, slope, len(pts))
