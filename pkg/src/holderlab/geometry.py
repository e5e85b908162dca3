"""Points, regions, inversion, chordal metric and spherical caps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .errors import DomainError

SPHERE_TOL = 1e-12


def as_point(x, dim=None):
    """Return ``x`` as a finite float vector, checking the dimension if given."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError(f"expected a point with at least 2 coordinates, got shape {p.shape}")
    if dim is not None and p.size != dim:
        raise DomainError(f"expected a point in R^{dim}, got R^{p.size}")
    if not np.all(np.isfinite(p)):
        raise DomainError("point has non-finite coordinates")
    return p


def on_unit_sphere(x, tol=SPHERE_TOL):
    return abs(float(np.linalg.norm(x)) - 1.0) < tol


def sphere_area(n):
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n):
    """Lebesgue measure of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class ConstantsN:
    n: int
    omega: float
    Omega: float

    @classmethod
    def of(cls, n):
        if n < 2:
            raise DomainError("dimension must be at least 2")
        return cls(n, sphere_area(n), ball_volume(n))


class RegionKind(Enum):
    BALL = "ball"
    ANNULUS = "annulus"
    CAP_PLUS = "cap_plus"
    CAP_MINUS = "cap_minus"
    INTERSECT_UNIT_BALL = "intersect_unit_ball"


@dataclass(frozen=True)
class BallRegion:
    """A ball or annulus about ``center``, optionally clipped by the unit sphere.

    ``CAP_PLUS`` is the part of ``B(center, r_outer)`` outside the unit ball,
    ``CAP_MINUS`` and ``INTERSECT_UNIT_BALL`` the part inside it.
    """

    kind: RegionKind
    center: tuple
    r_outer: float
    r_inner: float = 0.0

    def __post_init__(self):
        c = as_point(self.center)
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        if not self.r_outer > 0:
            raise DomainError("r_outer must be positive")
        if self.r_inner < 0:
            raise DomainError("r_inner must be non-negative")
        if self.kind is RegionKind.ANNULUS and not self.r_inner < self.r_outer:
            raise DomainError("annulus needs r_inner < r_outer")
        if self.kind in (RegionKind.CAP_PLUS, RegionKind.CAP_MINUS) and not on_unit_sphere(c):
            raise DomainError("cap regions need a center on the unit sphere")

    @property
    def dim(self):
        return len(self.center)

    @classmethod
    def ball(cls, center, radius):
        return cls(RegionKind.BALL, tuple(center), radius)

    @classmethod
    def annulus(cls, center, r_inner, r_outer):
        return cls(RegionKind.ANNULUS, tuple(center), r_outer, r_inner)

    @classmethod
    def cap_plus(cls, center, radius):
        return cls(RegionKind.CAP_PLUS, tuple(center), radius)

    @classmethod
    def cap_minus(cls, center, radius):
        return cls(RegionKind.CAP_MINUS, tuple(center), radius)

    @classmethod
    def inside_unit_ball(cls, center, radius):
        return cls(RegionKind.INTERSECT_UNIT_BALL, tuple(center), radius)

    def contains(self, x):
        """Vectorised membership test for points stacked along the last axis."""
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center)
        d = np.linalg.norm(x - c, axis=-1)
        inside = d < self.r_outer
        if self.kind is RegionKind.ANNULUS:
            inside &= d > self.r_inner
        norm = np.linalg.norm(x, axis=-1)
        if self.kind is RegionKind.CAP_PLUS:
            inside &= norm > 1.0
        elif self.kind in (RegionKind.CAP_MINUS, RegionKind.INTERSECT_UNIT_BALL):
            inside &= norm < 1.0
        return inside


def inversion(x):
    """Reflection in the unit sphere, x -> x/|x|^2 (vectorised over rows)."""
    x = np.asarray(x, dtype=float)
    sq = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(sq == 0.0):
        raise DomainError("inversion is undefined at the origin")
    return x / sq


def chordal_distance(x, y):
    """Chordal distance on the one-point compactification; ``None`` or ``inf`` is the point at infinity."""
    x_inf = _is_infinity(x)
    y_inf = _is_infinity(y)
    if x_inf and y_inf:
        return 0.0
    if x_inf or y_inf:
        p = np.asarray(y if x_inf else x, dtype=float)
        return 1.0 / math.sqrt(1.0 + float(p @ p))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = float(np.linalg.norm(x - y))
    return diff / (math.sqrt(1.0 + float(x @ x)) * math.sqrt(1.0 + float(y @ y)))


def _is_infinity(p):
    if p is None:
        return True
    return np.isscalar(p) and math.isinf(p)


def _sin_power_integral(phi, m):
    """Integral of sin^m over [0, phi] for phi in [0, pi]."""
    full = special.beta((m + 1) / 2, 0.5)
    if phi <= math.pi / 2:
        return 0.5 * full * special.betainc((m + 1) / 2, 0.5, math.sin(phi) ** 2)
    return full - _sin_power_integral(math.pi - phi, m)


def cap_area(phi, n):
    """Surface measure of the polar cap of angular radius ``phi`` on the unit sphere in R^n.

    The measure is omega_{n-2} times the integral of sin^{n-2}, so that
    ``cap_area(pi, n)`` is the full sphere.
    """
    if not 0.0 <= phi <= math.pi:
        raise DomainError("cap angle must lie in [0, pi]")
    if n == 2:
        return 2.0 * phi
    if n == 3:
        return 2.0 * math.pi * (1.0 - math.cos(phi))
    return sphere_area(n - 1) * _sin_power_integral(phi, n - 2)


def chord_to_angle(eps):
    """Angular radius of the cap cut from the unit sphere by a ball of radius ``eps`` centred on it."""
    if not 0.0 < eps < 2.0:
        raise DomainError("chordal radius must lie in (0, 2)")
    return 2.0 * math.asin(eps / 2.0)


def cap_ball_intersection_area(eps, n=3):
    """H^{n-1} of S^{n-1} inside B(zeta, eps) for zeta on the sphere; equals pi*eps^2 when n = 3."""
    return cap_area(chord_to_angle(eps), n)


def random_unit_vectors(rng, count, n):
    v = rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_region(region, count, rng, batch=4096):
    """Uniform samples from ``region`` by rejection from its bounding ball."""
    n = region.dim
    c = np.asarray(region.center)
    out = []
    have = 0
    for _ in range(10_000):
        if have >= count:
            break
        u = random_unit_vectors(rng, batch, n)
        rad = region.r_outer * rng.random(batch) ** (1.0 / n)
        pts = c + rad[:, None] * u
        pts = pts[region.contains(pts)]
        out.append(pts)
        have += len(pts)
    else:
        raise DomainError("rejection sampling failed; region is too thin")
    return np.concatenate(out)[:count]


@dataclass(frozen=True)
class SampledVerdict:
    passed: bool
    samples: int
    extreme: float
    counterexample: tuple | None = None


def inclusion_plus_minus(zeta0, eps, samples, seed):
    """Check by sampling that inversion maps B+(zeta0, eps) into B-(zeta0, eps).

    ``extreme`` is the largest observed |psi(x) - zeta0| / eps.
    """
    z = as_point(zeta0)
    if not on_unit_sphere(z):
        raise DomainError("zeta0 must lie on the unit sphere")
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    pts = sample_region(BallRegion.cap_plus(z, eps), samples, rng)
    img = inversion(pts)
    ok = BallRegion.cap_minus(z, eps).contains(img)
    worst = float(np.max(np.linalg.norm(img - z, axis=1)) / eps)
    if ok.all():
        return SampledVerdict(True, len(pts), worst)
    bad = int(np.argmin(ok))
    return SampledVerdict(False, len(pts), worst, tuple(pts[bad]))


def lower_norm_bound(zeta0, r, samples, seed):
    """Check by sampling that |y| >= 1/2 on B(zeta0, r) inside the unit ball.

    ``extreme`` is the smallest observed |y|.
    """
    z = as_point(zeta0)
    if not on_unit_sphere(z):
        raise DomainError("zeta0 must lie on the unit sphere")
    if not 0.0 < r < 0.5:
        raise DomainError("r must lie in (0, 1/2)")
    rng = np.random.default_rng(seed)
    pts = sample_region(BallRegion.inside_unit_ball(z, r), samples, rng)
    norms = np.linalg.norm(pts, axis=1)
    ok = norms >= 0.5
    if ok.all():
        return SampledVerdict(True, len(pts), float(norms.min()))
    bad = int(np.argmin(ok))
    return SampledVerdict(False, len(pts), float(norms.min()), tuple(pts[bad]))
