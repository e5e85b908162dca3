"""Poisson extension on the unit ball, zonal integrals and boundary gradient growth.

The Poisson kernel is P(x, eta) = (1 - |x|^2)/|x - eta|^n, integrated
against the normalised surface measure sigma (total mass 1), so P[1] = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureError
from .geometry import as_point, sphere_area
from .quadrature import DEFAULT_CONFIG, _frame, _gauss_legendre, integrate_1d

GRADING_LEVELS = 40
PANEL_ORDER = 16
AZIMUTH_POINTS = 64
R_LIMIT = 0.999


@dataclass(frozen=True)
class BoundaryData:
    """Boundary function on S^{n-1}, optionally Hölder with exponent ``alpha`` and constant ``M`` at ``x0``."""

    evaluator: Callable
    dim: int
    label: str = "g"
    alpha: float | None = None
    M: float | None = None
    x0: tuple | None = None

    def __call__(self, t):
        return np.asarray(self.evaluator(np.atleast_2d(t)), dtype=float)

    @classmethod
    def constant(cls, c, n):
        return cls(lambda t: np.full(len(t), float(c)), n, f"const {c:g}")

    @classmethod
    def coordinate(cls, k, n):
        return cls(lambda t: t[:, k], n, f"t{k + 1}", alpha=1.0, M=1.0,
                   x0=tuple(np.eye(n)[-1]))

    @classmethod
    def holder_cusp(cls, alpha=0.5, n=3):
        """|e_n - t|^alpha, Hölder with exponent alpha and constant 1 at e_n."""
        pole = np.eye(n)[-1]
        return cls(lambda t: np.linalg.norm(t - pole, axis=1) ** alpha, n,
                   f"|e{n}-t|^{alpha:g}", alpha=alpha, M=1.0, x0=tuple(pole))

    @classmethod
    def dilogarithm_real_part(cls):
        """Boundary values of Re Li_2 on the circle, Lipschitz at 1.

        Re Li_2(e^{i phi}) = pi^2/6 - pi|phi|/2 + phi^2/4 for |phi| <= pi.
        Its harmonic extension has |grad| = -log(1 - r)/r on the segment [0, 1).
        """
        def g(t):
            phi = np.abs(np.arctan2(t[:, 1], t[:, 0]))
            return math.pi ** 2 / 6 - math.pi * phi / 2 + phi * phi / 4

        return cls(g, 2, "Re Li2", alpha=1.0, M=math.pi / 2, x0=(1.0, 0.0))


def poisson_kernel(x, eta):
    """P(x, eta) for |x| < 1 and unit vectors ``eta`` (stacked along rows)."""
    x = as_point(x)
    if float(x @ x) >= 1.0:
        raise DomainError("the Poisson kernel needs |x| < 1")
    eta = np.asarray(eta, dtype=float)
    n = len(x)
    diff = np.linalg.norm(x - eta, axis=-1)
    return (1.0 - float(x @ x)) / diff ** n


def poisson_kernel_gradient(x, eta):
    """Gradient in x of P(x, eta): -(2x/|x-eta|^n + d n (x - eta)/|x-eta|^(n+2)), d = 1 - |x|^2."""
    x = as_point(x)
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    n = len(x)
    d = 1.0 - float(x @ x)
    diff = x - eta
    dist = np.linalg.norm(diff, axis=1)[:, None]
    return -(2.0 * x / dist ** n + d * n * diff / dist ** (n + 2))


def _graded_edges(delta):
    """Polar panel edges in [0, pi] refined geometrically toward 0 at scale ``delta``."""
    edges = [delta * 2.0 ** (-k) for k in range(GRADING_LEVELS, 0, -1)]
    t = delta
    while t < math.pi:
        edges.append(t)
        t *= 2.0
    return np.array([0.0] + [e for e in edges if e < math.pi] + [math.pi])


def graded_sphere_rule(n, axis, delta, order=PANEL_ORDER, n_phi=AZIMUTH_POINTS):
    """Points and normalised weights on S^{n-1}, graded toward ``axis`` at angular scale ``delta``."""
    edges = _graded_edges(delta)
    xg, wg = _gauss_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    theta = (0.5 * (lo + hi) + 0.5 * (hi - lo) * xg).ravel()
    wt = (0.5 * (hi - lo) * wg).ravel()
    frame = _frame(axis, n)
    if n == 2:
        e, u = frame
        both = np.concatenate([theta, -theta])
        pts = np.cos(both)[:, None] * e + np.sin(both)[:, None] * u
        return pts, np.concatenate([wt, wt]) / (2.0 * math.pi)
    if n != 3:
        raise DomainError("Poisson quadrature is implemented for n = 2 and n = 3")
    e, u, v = frame
    phi = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    ring = np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
    pts = np.cos(theta)[:, None, None] * e + np.sin(theta)[:, None, None] * ring[None]
    w = np.repeat(wt * np.sin(theta) * (2.0 * math.pi / n_phi), n_phi)
    return pts.reshape(-1, 3), w / (4.0 * math.pi)


def _axis_and_scale(x):
    r = float(np.linalg.norm(x))
    axis = x / r if r > 0 else None
    return axis, max(1.0 - r, 1e-12)


def _check_interior(x, g):
    x = as_point(x, g.dim)
    if float(np.linalg.norm(x)) >= 1.0:
        raise DomainError("Poisson integrals need |x| < 1")
    return x


def _two_level(compute, x, g, cfg, what):
    axis, delta = _axis_and_scale(x)
    fine = compute(*graded_sphere_rule(g.dim, axis, delta))
    coarse = compute(*graded_sphere_rule(g.dim, axis, delta, PANEL_ORDER // 2, AZIMUTH_POINTS // 2))
    err = float(np.max(np.abs(np.asarray(fine) - np.asarray(coarse))))
    scale = float(np.max(np.abs(fine)))
    if err > max(cfg.abs_tol, cfg.rel_tol * scale):
        raise QuadratureError(f"{what} at {x} did not converge (error {err:.3g})", partial=fine)
    return fine


def poisson_extend(g: BoundaryData, x, cfg=None) -> float:
    """Harmonic extension h(x) = integral of P(x, eta) g(eta) d sigma(eta)."""
    cfg = cfg or DEFAULT_CONFIG
    x = _check_interior(x, g)

    def compute(pts, w):
        return float(w @ (poisson_kernel(x, pts) * g(pts)))

    return _two_level(compute, x, g, cfg, "Poisson extension")


def poisson_gradient(g: BoundaryData, x, cfg=None):
    """Gradient of the harmonic extension, differentiating the kernel under the integral.

    The value of g in the direction of x is subtracted first; this changes
    nothing because the kernel gradient integrates to zero, but it removes
    the large cancelling contributions near the boundary.
    """
    cfg = cfg or DEFAULT_CONFIG
    x = _check_interior(x, g)
    axis, _ = _axis_and_scale(x)
    pole = axis if axis is not None else np.eye(g.dim)[-1]
    ref = float(g(pole)[0])

    def compute(pts, w):
        return w @ (poisson_kernel_gradient(x, pts) * (g(pts) - ref)[:, None])

    return np.asarray(_two_level(compute, x, g, cfg, "Poisson gradient"))


def zonal_integral(g, n, normalized=True, cfg=None, breakpoints=()) -> float:
    """Integral over S^{n-1} of a function of the polar angle.

    Unnormalised: omega_{n-2} times the integral of g(theta) sin^{n-2}(theta)
    over [0, pi].  Normalised: divided by the area of S^{n-1}.
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    cfg = cfg or DEFAULT_CONFIG
    res = integrate_1d(lambda th: g(th) * np.sin(th) ** (n - 2), 0.0, math.pi, cfg, breakpoints)
    value = sphere_area(n - 1) * res.require("zonal integral")
    return value / sphere_area(n) if normalized else value


def i_alpha(r, alpha, n=3, cfg=None) -> float:
    """Normalised integral of |e_n - t|^alpha / |r e_n - t|^n over the sphere."""
    if not 0.0 <= r < 1.0:
        raise DomainError("r must lie in [0, 1)")
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha must lie in (0, 1]")
    scale = max(1.0 - r, 1e-12)
    breaks = [scale * 2.0 ** k for k in range(-6, 12) if scale * 2.0 ** k < math.pi]

    def g(theta):
        half = np.sin(theta / 2.0)
        dist_sq = (1.0 - r) ** 2 + 4.0 * r * half * half
        return (2.0 * half) ** alpha / dist_sq ** (n / 2.0)

    return zonal_integral(g, n, True, cfg, breaks)


def i_alpha_at_center(alpha, n=3):
    """Closed form of I_alpha(0) for n = 3: 2^(alpha+1)/(alpha+2)."""
    if n != 3:
        raise DomainError("closed form available for n = 3")
    return 2.0 ** (alpha + 1.0) / (alpha + 2.0)


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(x)), np.log(np.asarray(y)), 1)[0])


def default_r_grid():
    return [1.0 - 2.0 ** (-j) for j in range(1, 11)]


@dataclass(frozen=True)
class PrivalovResult:
    r: tuple
    gradient_norm: tuple
    scaled: tuple
    sup_scaled: float
    slope: float
    log_slope: float
    decade_ratio: float
    truncated: tuple = field(default=())


def privalov_check(g: BoundaryData, r_grid=None, cfg=None, fit_from=0.9) -> PrivalovResult:
    """Gradient growth of the harmonic extension along the radius toward ``g.x0``.

    ``scaled`` is (1 - r)^(1 - alpha) |grad h(r x0)|.  ``slope`` is the
    log-log slope of |grad h| against 1 - r and ``log_slope`` the slope of
    |grad h| against log(1/(1 - r)), both fitted over grid points with
    r >= fit_from.  ``decade_ratio`` is max/min of ``scaled`` over the last
    decade of 1 - r.  Grid points above 0.999 are dropped with a warning.
    """
    if g.alpha is None or g.x0 is None:
        raise DomainError("boundary data needs a Hölder exponent and a marked point")
    cfg = cfg or DEFAULT_CONFIG
    grid = sorted(default_r_grid() if r_grid is None else r_grid)
    dropped = tuple(r for r in grid if r > R_LIMIT)
    if dropped:
        warnings.warn(f"radii above {R_LIMIT} dropped from the grid: {dropped}", RuntimeWarning, stacklevel=2)
    rs = np.array([r for r in grid if 0.0 <= r <= R_LIMIT])
    x0 = np.asarray(g.x0, dtype=float)
    grads = np.array([np.linalg.norm(poisson_gradient(g, r * x0, cfg)) for r in rs])
    gap = 1.0 - rs
    scaled = gap ** (1.0 - g.alpha) * grads
    fit = rs >= fit_from
    if fit.sum() < 2:
        fit = np.ones_like(rs, dtype=bool)
    slope = loglog_slope(gap[fit], grads[fit])
    log_slope = float(np.polyfit(np.log(1.0 / gap[fit]), grads[fit], 1)[0])
    last = gap <= 10.0 * gap.min()
    ratio = float(scaled[last].max() / scaled[last].min())
    return PrivalovResult(tuple(rs.tolist()), tuple(grads.tolist()), tuple(scaled.tolist()),
                          float(scaled.max()), slope, log_slope, ratio, dropped)
