"""Jacobian determinant, singular values and the inner and outer dilatations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import inversion, random_unit_vectors
from .maps import DifferentiableMap, default_step, guard_band, inversion_extension

ZERO_JACOBIAN_RTOL = 1e-14


def singular_values(M, sweeps=60):
    """Singular values of a small square matrix, largest first (one-sided Jacobi)."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("expected a square matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    n = A.shape[1]
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = A[:, p] @ A[:, p]
                beta = A[:, q] @ A[:, q]
                gamma = A[:, p] @ A[:, q]
                if abs(gamma) <= 1e-15 * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                cp = A[:, p].copy()
                A[:, p] = c * cp - s * A[:, q]
                A[:, q] = s * cp + c * A[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(A, axis=0))[::-1]


@dataclass(frozen=True)
class DistortionSample:
    jacobian_det: float
    smallest_distortion: float
    op_norm: float
    k_inner: float
    k_outer: float
    point: tuple | None = None
    valid: bool = True
    error: str = ""

    @property
    def sense_preserving(self):
        return self.valid and self.jacobian_det > 0


def distortion_from_jacobian(M, x=None) -> DistortionSample:
    """Distortion data of a derivative matrix.

    K_I = |J|/l^n and K_O = |f'|^n/|J| are formed as products of singular
    value ratios, so for 2x2 matrices both equal sigma_1/sigma_2 exactly.
    The zero matrix has K_I = K_O = 1; a singular non-zero matrix has both
    infinite.
    """
    M = np.asarray(M, dtype=float)
    sig = singular_values(M)
    n = len(sig)
    det = float(np.linalg.det(M))
    top, low = float(sig[0]), float(sig[-1])
    point = None if x is None else tuple(float(v) for v in np.asarray(x).ravel())
    if top == 0.0:
        return DistortionSample(0.0, 0.0, 0.0, 1.0, 1.0, point)
    if low <= ZERO_JACOBIAN_RTOL * top:
        return DistortionSample(det, low, top, math.inf, math.inf, point)
    k_inner = float(np.prod(sig / low))
    k_outer = float(np.prod(top / sig))
    return DistortionSample(det, low, top, k_inner, k_outer, point)


def k_i_field(f: DifferentiableMap, points, numeric=False, h=None):
    """Distortion samples of ``f`` at each point; failures give invalid samples."""
    out = []
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        try:
            M = f.jacobian(x, numeric=numeric, h=h)
            out.append(distortion_from_jacobian(M, x))
        except DomainError as exc:
            nan = math.nan
            out.append(DistortionSample(nan, nan, nan, nan, nan, tuple(x), False, str(exc)))
    return out


@dataclass(frozen=True)
class FieldStatistics:
    count: int
    max_k_inner: float
    mean_k_inner: float
    infinite: int
    invalid: int
    orientation_reversing: int


def field_statistics(samples) -> FieldStatistics:
    """Summary of finite K_I values; infinite and invalid samples are only counted."""
    finite = [s.k_inner for s in samples if s.valid and math.isfinite(s.k_inner)]
    infinite = sum(1 for s in samples if s.valid and math.isinf(s.k_inner))
    invalid = sum(1 for s in samples if not s.valid)
    reversing = sum(1 for s in samples if s.valid and s.jacobian_det < 0)
    return FieldStatistics(
        len(finite),
        max(finite) if finite else math.nan,
        math.fsum(finite) / len(finite) if finite else math.nan,
        infinite,
        invalid,
        reversing,
    )


def _clear_of(radii, values, band):
    if not len(radii):
        return np.ones(len(values), dtype=bool)
    radii = np.asarray(radii)
    return np.min(np.abs(values[:, None] - radii[None, :]), axis=1) > band


def conformal_invariance_check(f: DifferentiableMap, samples, seed) -> float:
    """Largest relative gap between K_I(x, F) and K_I(psi(x), f) over 1 < |x| < 2.

    F is the inversion extension of ``f``; both Jacobians are taken by
    central differences.  Sample radii whose images fall within the
    stencil guard band of a singular radius of ``f`` are redrawn.
    """
    rng = np.random.default_rng(seed)
    F = inversion_extension(f)
    band = guard_band(default_step(np.full(f.dim, 2.0 / math.sqrt(f.dim))))
    xs = []
    while len(xs) < samples:
        u = random_unit_vectors(rng, samples, f.dim)
        r = 1.0 + rng.random(samples)
        ok = (r > 1.0 + band) & _clear_of(f.singular_radii, 1.0 / r, band)
        xs.extend((r[ok, None] * u[ok])[: samples - len(xs)])
    worst = 0.0
    for x in xs:
        outer = distortion_from_jacobian(F.jacobian(x, numeric=True), x).k_inner
        y = inversion(x)
        inner = distortion_from_jacobian(f.jacobian(y, numeric=True), y).k_inner
        worst = max(worst, abs(outer - inner) / inner)
    return worst
