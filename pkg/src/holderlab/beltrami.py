"""Planar maps: Wirtinger derivatives, complex dilatation and regularity tests.

Fractional powers use the principal branch, built from the modulus and
``atan2`` so the cut along the negative real axis is explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DegeneratePointError, DomainError
from .quadrature import DEFAULT_CONFIG, TailVerdict, classify_blocks, integrate_1d

DEGENERATE_FZ = 1e-12
SHRINK_ATTEMPTS = 4


def principal_power(w, s):
    """w^s with arg w in (-pi, pi]; 0^s = 0 for s > 0."""
    w = np.asarray(w, dtype=complex)
    rad = np.abs(w)
    ang = np.arctan2(w.imag, w.real)
    with np.errstate(divide="ignore"):
        mag = np.where(rad > 0, rad ** s, 0.0)
    return mag * (np.cos(s * ang) + 1j * np.sin(s * ang))


@dataclass(frozen=True)
class PlanarMap:
    """A map of (part of) the complex plane, vectorised over complex arrays."""

    evaluator: Callable
    label: str = "f"
    wirtinger_pair: Callable | None = None
    domain: Callable | None = None

    def __call__(self, z):
        return np.asarray(self.evaluator(np.asarray(z, dtype=complex)), dtype=complex)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        if self.domain is None:
            return np.ones(z.shape, dtype=bool)
        return np.asarray(self.domain(z), dtype=bool)


def affine_map(a=1.0, b=0.0):
    """z -> a z + b conj(z)."""
    a, b = complex(a), complex(b)
    return PlanarMap(lambda z: a * z + b * np.conj(z), f"{a}z+{b}zbar",
                     lambda z: (np.full_like(z, a), np.full_like(z, b)))


def identity_planar():
    return affine_map(1.0, 0.0)


def conjugation():
    return affine_map(0.0, 1.0)


def square_map():
    return PlanarMap(lambda z: z * z, "z^2", lambda z: (2 * z, np.zeros_like(z)))


def _punctured(z):
    return np.asarray(z) != 0


def ex1_map():
    """f(z) = -z log|z|^2, with f_z = -1 - log|z|^2 and f_zbar = -z/conj(z)."""
    def f(z):
        return -z * np.log(np.abs(z) ** 2)

    def pair(z):
        return -1.0 - np.log(np.abs(z) ** 2), -z / np.conj(z)

    return PlanarMap(f, "ex1", pair, _punctured)


def ex1_mu(z):
    """Complex dilatation of ``ex1_map``: (z/conj z)/(1 + log|z|^2)."""
    z = np.asarray(z, dtype=complex)
    return (z / np.conj(z)) / (1.0 + np.log(np.abs(z) ** 2))


def ex2_map():
    """f0(z) = z/log|z|^2 on the punctured unit disk."""
    def f(z):
        return z / np.log(np.abs(z) ** 2)

    def inside(z):
        r = np.abs(z)
        return (r > 0) & (r < 1)

    return PlanarMap(f, "ex2", domain=inside)


def ex3_map(alpha, beta, k):
    """g(w) = w^(alpha+1)/(alpha+1) + k conj(w)^(beta+1)/(beta+1) off the cut (-inf, 0]."""
    if not 0 <= k < 1:
        raise DomainError("k must lie in [0, 1)")

    def g(w):
        return principal_power(w, alpha + 1) / (alpha + 1) + k * principal_power(np.conj(w), beta + 1) / (beta + 1)

    def pair(w):
        return principal_power(w, alpha), k * principal_power(np.conj(w), beta)

    def off_cut(w):
        w = np.asarray(w, dtype=complex)
        return ~((w.real <= 0) & (w.imag == 0))

    return PlanarMap(g, f"ex3(a={alpha:g},b={beta:g},k={k:g})", pair, off_cut)


def ex3_mu(w, alpha, beta, k):
    """k conj(w)^beta / w^alpha."""
    w = np.asarray(w, dtype=complex)
    return k * principal_power(np.conj(w), beta) / principal_power(w, alpha)


def default_step(z):
    return 1e-6 * max(1.0, abs(z))


def wirtinger(f: PlanarMap, z, h=None, use_analytic=True):
    """(f_z, f_zbar) at ``z``: the analytic pair when present, else central differences."""
    z = complex(z)
    if use_analytic and f.wirtinger_pair is not None:
        fz, fzb = f.wirtinger_pair(np.array([z]))
        return complex(np.ravel(fz)[0]), complex(np.ravel(fzb)[0])
    step = h or default_step(z)
    for _ in range(SHRINK_ATTEMPTS + 1):
        stencil = z + step * np.array([1, -1, 1j, -1j])
        if f.contains(stencil).all():
            v = f(stencil)
            fx = (v[0] - v[1]) / (2 * step)
            fy = (v[2] - v[3]) / (2 * step)
            return complex((fx - 1j * fy) / 2), complex((fx + 1j * fy) / 2)
        step /= 10.0
    raise DomainError(f"Wirtinger stencil leaves the domain of {f.label} at {z}")


def k_of_mu(mu):
    """(1 + |mu|)/(1 - |mu|), infinite for |mu| >= 1."""
    m = abs(mu)
    return math.inf if m >= 1 else (1 + m) / (1 - m)


@dataclass(frozen=True)
class ComplexDilatation:
    mu: complex
    nu: complex
    k_bound: float
    f_z: complex
    f_zbar: complex

    @property
    def K(self):
        return k_of_mu(self.mu)


def complex_dilatation(f: PlanarMap, z, h=None, use_analytic=True) -> ComplexDilatation:
    """mu = f_zbar/f_z and the second dilatation nu = mu f_z/conj(f_z)."""
    fz, fzb = wirtinger(f, z, h, use_analytic)
    if abs(fz) < DEGENERATE_FZ:
        raise DegeneratePointError(f"f_z vanishes at {z}")
    mu = fzb / fz
    nu = mu * fz / fz.conjugate()
    return ComplexDilatation(mu, nu, abs(mu), fz, fzb)


def _disk_samples(rng, center, radius, count):
    ang = rng.random(count) * 2 * math.pi
    rad = radius * np.sqrt(rng.random(count))
    return complex(center) + rad * np.exp(1j * ang)


def _domain_samples(f, rng, center, radius, count):
    out = []
    for _ in range(1000):
        if len(out) >= count:
            break
        z = _disk_samples(rng, center, radius, count)
        out.extend(z[f.contains(z)][: count - len(out)])
    return np.asarray(out)


@dataclass(frozen=True)
class HolderModulus:
    constant: float
    used: int
    skipped: int


def holder_modulus_of_mu(f: PlanarMap, center, radius, alpha, pairs, seed, h=None, use_analytic=True):
    """Largest |mu(z1) - mu(z2)|/|z1 - z2|^alpha over random pairs in the disk; degenerate points are skipped."""
    rng = np.random.default_rng(seed)
    z1 = _domain_samples(f, rng, center, radius, pairs)
    z2 = _domain_samples(f, rng, center, radius, pairs)
    best = 0.0
    used = skipped = 0
    for a, b in zip(z1, z2):
        if a == b:
            skipped += 1
            continue
        try:
            ma = complex_dilatation(f, a, h, use_analytic).mu
            mb = complex_dilatation(f, b, h, use_analytic).mu
        except DomainError:
            skipped += 1
            continue
        used += 1
        best = max(best, abs(ma - mb) / abs(a - b) ** alpha)
    return HolderModulus(best, used, skipped)


@dataclass(frozen=True)
class BilipschitzEstimate:
    l_est: float
    L_est: float
    used: int


def bilipschitz_estimate(f: PlanarMap, center, radius, pairs, seed) -> BilipschitzEstimate:
    """Smallest and largest difference quotient of ``f`` over random pairs in the disk."""
    if pairs < 100:
        raise DomainError("need at least 100 pairs")
    rng = np.random.default_rng(seed)
    z1 = _domain_samples(f, rng, center, radius, pairs)
    z2 = _domain_samples(f, rng, center, radius, pairs)
    keep = z1 != z2
    q = np.abs(f(z1[keep]) - f(z2[keep])) / np.abs(z1[keep] - z2[keep])
    return BilipschitzEstimate(float(q.min()), float(q.max()), int(keep.sum()))


class GrowthVerdict(str, Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GrowthResult:
    verdict: GrowthVerdict
    value: float
    shells: tuple
    reason: str = ""


def integral_growth_check(mu, z0, mu0, r0, cfg=None, n_theta=64) -> GrowthResult:
    """Classify the integral of |mu(z) - mu0|/|z - z0|^2 over the disk B(z0, r0).

    The disk is split into dyadic shells r0 2^-(k+1) < |z - z0| < r0 2^-k;
    each shell is integrated in polar coordinates (adaptive in the radius,
    ``n_theta``-point periodic rule in the angle) and the shell sums are
    classified with the same contraction rule as improper tails.
    """
    if not r0 > 0:
        raise DomainError("r0 must be positive")
    cfg = cfg or DEFAULT_CONFIG
    z0 = complex(z0)
    mu0 = complex(mu0)
    theta = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
    ring = np.exp(1j * theta)

    def radial(rho):
        z = z0 + rho[:, None] * ring[None, :]
        vals = np.abs(np.asarray(mu(z.ravel())).reshape(z.shape) - mu0)
        return vals.mean(axis=1) * (2 * math.pi) / rho

    def shell(k):
        hi = r0 * 2.0 ** (-k)
        return integrate_1d(radial, hi / 2, hi, cfg)

    max_shells = max(4, math.ceil(math.log2(cfg.tail_cutoff)))
    res = classify_blocks(shell, max_shells, cfg)
    verdict = {
        TailVerdict.CONVERGED: GrowthVerdict.FINITE,
        TailVerdict.DIVERGENT: GrowthVerdict.DIVERGENT,
        TailVerdict.INCONCLUSIVE: GrowthVerdict.INCONCLUSIVE,
    }[res.verdict]
    return GrowthResult(verdict, res.value, res.blocks, res.reason)
