"""Mappings of the ball with analytic or finite-difference Jacobians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import as_point, inversion
from .profiles import StepProfile

BREAKPOINT_GUARD = 1e-9
SHRINK_ATTEMPTS = 4


def default_step(x):
    """Central-difference step used when a map does not set its own."""
    return 1e-5 * max(1.0, float(np.linalg.norm(x)))


def guard_band(h):
    """Radial exclusion band around profile breakpoints for a stencil of step ``h``."""
    return max(BREAKPOINT_GUARD, 4.0 * h)


def _rows(x):
    x = np.asarray(x, dtype=float)
    return np.atleast_2d(x), x.ndim == 1


class DifferentiableMap:
    """A map from (part of) R^n to R^n.

    Subclasses implement ``_evaluate_rows`` on an ``(m, n)`` array and may
    override ``analytic_jacobian`` and ``contains``.
    """

    dim: int = 2
    label: str = "map"
    step: float | None = None
    singular_radii: tuple = ()

    def _evaluate_rows(self, x):
        raise NotImplementedError

    def evaluate(self, x):
        rows, single = _rows(x)
        if rows.shape[1] != self.dim:
            raise DomainError(f"{self.label} expects points in R^{self.dim}")
        out = self._evaluate_rows(rows)
        return out[0] if single else out

    __call__ = evaluate

    def analytic_jacobian(self, x):
        return None

    @property
    def has_analytic_jacobian(self):
        return type(self).analytic_jacobian is not DifferentiableMap.analytic_jacobian

    def contains(self, x):
        rows, _ = _rows(x)
        return np.ones(len(rows), dtype=bool)

    def jacobian(self, x, numeric=False, h=None):
        """Analytic Jacobian when available (and not ``numeric``), else central differences."""
        if not numeric and self.has_analytic_jacobian:
            return self.analytic_jacobian(as_point(x, self.dim))
        return numeric_jacobian(self, x, h)


class FunctionMap(DifferentiableMap):
    """Wraps a vectorised callable acting on ``(m, n)`` arrays."""

    def __init__(self, fn, dim, label="function", jacobian=None, domain=None, step=None):
        self.fn = fn
        self.dim = dim
        self.label = label
        self._jac = jacobian
        self._domain = domain
        self.step = step

    def _evaluate_rows(self, x):
        return np.asarray(self.fn(x), dtype=float)

    def analytic_jacobian(self, x):
        if self._jac is None:
            return numeric_jacobian(self, x)
        return np.asarray(self._jac(x), dtype=float)

    @property
    def has_analytic_jacobian(self):
        return self._jac is not None

    def contains(self, x):
        rows, _ = _rows(x)
        if self._domain is None:
            return np.ones(len(rows), dtype=bool)
        return np.asarray(self._domain(rows), dtype=bool)


class LinearMap(DifferentiableMap):
    def __init__(self, matrix, label=None):
        self.matrix = np.array(matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise DomainError("linear map needs a square matrix")
        self.dim = self.matrix.shape[0]
        self.label = label or f"linear{self.dim}"

    def _evaluate_rows(self, x):
        return x @ self.matrix.T

    def analytic_jacobian(self, x):
        return self.matrix.copy()


def identity_map(n):
    return LinearMap(np.eye(n), label=f"identity{n}")


class RadialStretchMap(DifferentiableMap):
    """x -> (x/|x|) exp(integral of beta(t)/t from 1 to |x|) on the closed unit ball.

    With S(r) the integral of (beta - 1)/t over [r, 1] the map is
    x exp(-S(|x|)), which needs no division at the origin.
    """

    def __init__(self, profile: StepProfile, dim=3, label=None):
        if dim not in (2, 3):
            raise DomainError("radial maps are provided for n = 2 and n = 3")
        self.profile = profile
        self.dim = dim
        self.label = label or f"radial-{profile.scheme.value}-{dim}d"
        self.singular_radii = tuple(profile.breakpoints)

    def scale(self, r):
        """|f(x)|/|x| as a function of r = |x|."""
        return np.exp(-self.profile.log_excess(r))

    def modulus(self, r):
        r = np.asarray(r, dtype=float)
        return r * self.scale(r)

    def contains(self, x):
        rows, _ = _rows(x)
        return np.linalg.norm(rows, axis=1) <= 1.0 + 1e-12

    def _evaluate_rows(self, x):
        r = np.linalg.norm(x, axis=1)
        if np.any(r > 1.0 + 1e-12):
            raise DomainError("radial stretch maps are defined on the closed unit ball")
        r = np.minimum(r, 1.0)
        return x * self.scale(r)[:, None]

    def analytic_jacobian(self, x):
        r = float(np.linalg.norm(x))
        if r > 1.0 + 1e-12:
            raise DomainError("radial stretch maps are defined on the closed unit ball")
        s = float(self.scale(min(r, 1.0)))
        if r == 0.0:
            return s * np.eye(self.dim)
        u = x / r
        b = float(self.profile(min(r, 1.0)))
        return s * (np.eye(self.dim) + (b - 1.0) * np.outer(u, u))


@dataclass(frozen=True)
class RadialDilatations:
    delta_tau: float
    delta_r: float
    op_norm: float
    k_inner: float
    at_breakpoint: bool = False
    one_sided: tuple | None = None


def _radial_quantities(s, b, n):
    tau = s
    rad = s * b
    small = min(tau, rad)
    jac = rad * tau ** (n - 1)
    return tau, rad, max(tau, rad), jac / small ** n


def radial_dilatations(m: RadialStretchMap, x, band=BREAKPOINT_GUARD) -> RadialDilatations:
    """Tangential and radial stretching, operator norm and inner dilatation.

    delta_tau = |f(x)|/|x| and delta_r = d|f|/d|x|.  At a profile breakpoint
    the one-sided pairs ``(delta_r, K_I)`` from the left and the right are
    reported and the main fields use the left limit.
    """
    x = as_point(x, m.dim)
    r = float(np.linalg.norm(x))
    if not 0.0 < r < 1.0:
        raise DomainError("radial dilatations need 0 < |x| < 1")
    s = float(m.scale(r))
    n = m.dim
    if bool(m.profile.near_breakpoint(r, band)):
        left, right = m.profile.one_sided(r)
        ql = _radial_quantities(s, left, n)
        qr = _radial_quantities(s, right, n)
        return RadialDilatations(*ql, at_breakpoint=True,
                                 one_sided=((ql[1], ql[3]), (qr[1], qr[3])))
    return RadialDilatations(*_radial_quantities(s, float(m.profile(r)), n))


class PowerMap(DifferentiableMap):
    """Planar map z -> z |z|^(1/K - 1)."""

    def __init__(self, K):
        if not K >= 1:
            raise DomainError("K must be at least 1")
        self.K = float(K)
        self.dim = 2
        self.label = f"power-K{K:g}"

    def _evaluate_rows(self, x):
        r = np.linalg.norm(x, axis=1)
        with np.errstate(divide="ignore"):
            scale = np.where(r > 0, r ** (1.0 / self.K - 1.0), 0.0)
        return x * scale[:, None]

    def analytic_jacobian(self, x):
        r = float(np.linalg.norm(x))
        if r == 0.0:
            if self.K == 1.0:
                return np.eye(2)
            raise DomainError("the power map is not differentiable at 0")
        u = x / r
        return r ** (1.0 / self.K - 1.0) * (np.eye(2) + (1.0 / self.K - 1.0) * np.outer(u, u))


def power_map(K):
    return PowerMap(K)


def _inversion_derivative(y):
    sq = float(y @ y)
    u = y / np.sqrt(sq)
    return (np.eye(len(y)) - 2.0 * np.outer(u, u)) / sq


class InversionExtension(DifferentiableMap):
    """F = f inside the unit ball and psi o f o psi outside it."""

    def __init__(self, inner: DifferentiableMap):
        self.inner = inner
        self.dim = inner.dim
        self.label = f"extension({inner.label})"
        self.step = inner.step
        radii = set(inner.singular_radii)
        radii |= {1.0 / b for b in inner.singular_radii if b > 0}
        self.singular_radii = tuple(sorted(radii | {1.0}))

    def _evaluate_rows(self, x):
        r = np.linalg.norm(x, axis=1)
        out = np.empty_like(x)
        inside = r < 1.0
        if inside.any():
            out[inside] = self.inner.evaluate(x[inside])
        if (~inside).any():
            fy = self.inner.evaluate(inversion(x[~inside]))
            if np.any(np.linalg.norm(fy, axis=1) == 0.0):
                raise DomainError("f(psi(x)) = 0, the extension is undefined there")
            out[~inside] = inversion(fy)
        return out

    @property
    def has_analytic_jacobian(self):
        return self.inner.has_analytic_jacobian

    def analytic_jacobian(self, x):
        if float(np.linalg.norm(x)) < 1.0:
            return self.inner.jacobian(x)
        y = inversion(x)
        fy = self.inner.evaluate(y)
        return _inversion_derivative(fy) @ self.inner.jacobian(y) @ _inversion_derivative(x)


def inversion_extension(f: DifferentiableMap) -> InversionExtension:
    return InversionExtension(f)


def numeric_jacobian(f: DifferentiableMap, x, h=None):
    """Central-difference Jacobian; the step shrinks tenfold (up to 4 times) until the stencil fits the domain."""
    x = as_point(x, f.dim)
    n = f.dim
    step = h or f.step or default_step(x)
    eye = np.eye(n)
    for _ in range(SHRINK_ATTEMPTS + 1):
        stencil = np.concatenate([x + step * eye, x - step * eye])
        if f.contains(stencil).all():
            vals = f.evaluate(stencil)
            return ((vals[:n] - vals[n:]) / (2.0 * step)).T
        step /= 10.0
    raise DomainError(f"finite-difference stencil leaves the domain of {f.label} at {x}")
