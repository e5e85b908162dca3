"""Step profiles beta and Orlicz functions phi.

A step profile equals 1 except on finitely many open "spikes" where it
takes a constant value.  Spike endpoints are kept as exact fractions, so
integrals of beta^p against 1, t or t^2 are computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError
from .quadrature import DEFAULT_CONFIG, TailVerdict, integrate_tail


class Scheme(str, Enum):
    EXAMPLE1 = "example1"
    EXAMPLE4 = "example4"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Spike:
    lo: Fraction
    hi: Fraction
    value: Fraction


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


def _example1_spikes(k_max):
    for k in range(1, k_max + 1):
        hi = Fraction(k + 1, k + 2)
        yield Spike(hi - Fraction(1, 2 ** (4 * k + 1)), hi, Fraction(2 ** k))


def _example4_spikes(k_max):
    for k in range(2, k_max + 1):
        hi = Fraction(1, k)
        yield Spike(hi - Fraction(1, 2 ** (4 * k + 1)), hi, Fraction(2 ** (k - 1)))


@dataclass(frozen=True)
class StepProfile:
    """Piecewise-constant profile on (0, 1].

    Spikes are open intervals; every other point, including spike endpoints,
    has value 1.  Spikes with index above ``k_max`` are dropped.
    """

    scheme: Scheme
    k_max: int = 40
    custom: tuple = ()
    spikes: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k_max < 0:
            raise DomainError("k_max must be non-negative")
        if self.scheme is Scheme.EXAMPLE1:
            spikes = list(_example1_spikes(self.k_max))
        elif self.scheme is Scheme.EXAMPLE4:
            spikes = list(_example4_spikes(self.k_max))
        else:
            spikes = [Spike(*map(_as_fraction, piece)) for piece in self.custom]
        spikes = sorted((s for s in spikes if s.value != 1), key=lambda s: s.lo)
        for s in spikes:
            if not (0 <= s.lo < s.hi <= 1):
                raise DomainError(f"spike ({s.lo}, {s.hi}) is not inside [0, 1]")
            if s.value < 1:
                raise DomainError("profile values must be at least 1")
        for left, right in zip(spikes, spikes[1:]):
            if right.lo < left.hi:
                raise DomainError("spikes overlap")
        object.__setattr__(self, "spikes", tuple(spikes))
        lo = np.array([float(s.lo) for s in spikes])
        hi = np.array([float(s.hi) for s in spikes])
        val = np.array([float(s.value) for s in spikes])
        # log(hi/lo) via log1p of the exact width keeps thin spikes accurate
        full = np.array([
            float(s.value - 1) * math.log1p(float(s.hi - s.lo) / float(s.lo)) if s.lo > 0 else math.inf
            for s in spikes
        ])
        suffix = np.concatenate([np.cumsum(full[::-1])[::-1], [0.0]])
        object.__setattr__(self, "_arrays", (lo, hi, val, suffix))

    @classmethod
    def example1(cls, k_max=40):
        return cls(Scheme.EXAMPLE1, k_max)

    @classmethod
    def example4(cls, k_max=40):
        return cls(Scheme.EXAMPLE4, k_max)

    @classmethod
    def from_steps(cls, breakpoints, values):
        """Profile with ``values[i]`` on the open interval ``(breakpoints[i], breakpoints[i+1])``."""
        if len(breakpoints) != len(values) + 1:
            raise DomainError("need one more breakpoint than values")
        b = [_as_fraction(x) for x in breakpoints]
        if any(x >= y for x, y in zip(b, b[1:])):
            raise DomainError("breakpoints must increase")
        pieces = tuple((lo, hi, _as_fraction(v)) for lo, hi, v in zip(b, b[1:], values))
        return cls(Scheme.CUSTOM, 0, pieces)

    @classmethod
    def identity(cls):
        return cls(Scheme.CUSTOM, 0, ())

    @property
    def breakpoints(self):
        """Sorted float endpoints of all spikes that lie in (0, 1)."""
        lo, hi, _, _ = self._arrays
        pts = np.unique(np.concatenate([lo, hi]))
        return pts[(pts > 0) & (pts < 1)]

    def _locate(self, t):
        lo, hi, val, _ = self._arrays
        idx = np.searchsorted(lo, t, side="right") - 1
        safe = np.clip(idx, 0, max(len(lo) - 1, 0))
        if len(lo) == 0:
            return np.zeros_like(t, dtype=bool), safe
        inside = (idx >= 0) & (t > lo[safe]) & (t < hi[safe])
        return inside, safe

    def __call__(self, t):
        return beta_eval(self, t)

    def one_sided(self, t):
        """Left and right limits of beta at ``t``."""
        t = float(t)
        left = right = 1.0
        for s in self.spikes:
            if float(s.lo) < t <= float(s.hi):
                left = float(s.value)
            if float(s.lo) <= t < float(s.hi):
                right = float(s.value)
        return left, right

    def near_breakpoint(self, t, band):
        """Boolean mask of points within ``band`` of a spike endpoint."""
        t = np.asarray(t, dtype=float)
        pts = self.breakpoints
        if pts.size == 0:
            return np.zeros(t.shape, dtype=bool)
        idx = np.clip(np.searchsorted(pts, t), 1, len(pts) - 1) if len(pts) > 1 else np.zeros(t.shape, int)
        near = np.abs(t - pts[idx]) <= band
        if len(pts) > 1:
            near |= np.abs(t - pts[idx - 1]) <= band
        return near

    def log_excess(self, r):
        """Integral of (beta(t) - 1)/t over [r, 1], vectorised in r > 0."""
        r = np.asarray(r, dtype=float)
        lo, hi, val, suffix = self._arrays
        if len(lo) == 0:
            return np.zeros_like(r)
        above = np.searchsorted(lo, r, side="right")
        total = suffix[above]
        owner = np.clip(above - 1, 0, len(lo) - 1)
        partial = (above >= 1) & (r < hi[owner])
        with np.errstate(divide="ignore", invalid="ignore"):
            piece = (val[owner] - 1.0) * np.log1p((hi[owner] - r) / r)
        return total + np.where(partial, piece, 0.0)

    def log_integral(self, r):
        """Integral of beta(t)/t from 1 to r (non-positive for r <= 1)."""
        r = np.asarray(r, dtype=float)
        return np.log(r) - self.log_excess(r)


def beta_eval(profile: StepProfile, t):
    """Value of the profile at ``t`` in (0, 1]; vectorised."""
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr > 1):
        raise DomainError("profile argument must lie in (0, 1]")
    _, _, val, _ = profile._arrays
    inside, idx = profile._locate(arr)
    if len(val) == 0:
        out = np.ones_like(arr)
    else:
        out = np.where(inside, val[idx], 1.0)
    return float(out) if np.ndim(t) == 0 else out


_WEIGHT_ANTIDERIVATIVES = {
    0: lambda x: x,
    1: lambda x: x * x / 2,
    2: lambda x: x * x * x / 3,
}


def integrate_beta_power(profile: StepProfile, power: int, weight: int, a, b) -> Fraction:
    """Exact integral of beta(t)^power * t^weight over [a, b], weight in {0, 1, 2}.

    ``a`` and ``b`` are converted to fractions exactly (floats keep their
    binary value), and the result is an exact ``Fraction``.
    """
    if power < 1 or int(power) != power:
        raise DomainError("power must be a positive integer")
    try:
        W = _WEIGHT_ANTIDERIVATIVES[weight]
    except KeyError:
        raise DomainError("weight exponent must be 0, 1 or 2") from None
    a = _as_fraction(a)
    b = _as_fraction(b)
    if not (0 <= a <= b <= 1):
        raise DomainError("need 0 <= a <= b <= 1")
    total = W(b) - W(a)
    for s in profile.spikes:
        lo = max(s.lo, a)
        hi = min(s.hi, b)
        if lo < hi:
            total += (s.value ** power - 1) * (W(hi) - W(lo))
    return total


@dataclass(frozen=True)
class OrliczFunction:
    evaluator: Callable
    label: str = "phi"

    def __call__(self, t):
        with np.errstate(over="ignore"):
            return np.asarray(self.evaluator(np.asarray(t, dtype=float)), dtype=float)

    @classmethod
    def power(cls, p):
        return cls(lambda t: t ** p, f"t^{p:g}")

    @classmethod
    def power_log(cls, p):
        return cls(lambda t: t ** p * np.log(math.e + t), f"t^{p:g} log(e+t)")

    @classmethod
    def exponential(cls):
        return cls(np.exp, "exp(t)")


class CalderonVerdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CalderonResult:
    verdict: CalderonVerdict
    value: float
    reason: str = ""


def calderon_check(phi: OrliczFunction, n: int, cfg=None) -> CalderonResult:
    """Classify convergence of the integral of (t/phi(t))^(1/(n-2)) over [1, inf)."""
    if n < 3:
        raise DomainError("the Calderon integral needs n >= 3")
    cfg = cfg or DEFAULT_CONFIG
    expo = 1.0 / (n - 2)

    def integrand(t):
        with np.errstate(divide="ignore", over="ignore"):
            return (t / phi(t)) ** expo

    try:
        tail = integrate_tail(integrand, 1.0, cfg)
    except DomainError as exc:
        return CalderonResult(CalderonVerdict.VIOLATED, math.inf, f"phi vanishes where needed: {exc}")
    verdict = {
        TailVerdict.CONVERGED: CalderonVerdict.SATISFIED,
        TailVerdict.DIVERGENT: CalderonVerdict.VIOLATED,
        TailVerdict.INCONCLUSIVE: CalderonVerdict.INCONCLUSIVE,
    }[tail.verdict]
    return CalderonResult(verdict, tail.value, tail.reason)


@dataclass(frozen=True)
class DoublingResult:
    holds: bool
    constant: float
    t_star: float | None = None


def doubling_check(phi: OrliczFunction, T=1.0, grid=200) -> DoublingResult:
    """Estimate sup phi(2t)/phi(t) over log-spaced t in [T, 2^20 T].

    Fails at the first grid point where the ratio is undefined, or at the
    last one when the ratio is still climbing there after more than
    doubling across the grid.
    """
    if not T > 0:
        raise DomainError("T must be positive")
    t = T * np.logspace(0.0, 20.0, grid, base=2.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lower = phi(t)
        ratio = phi(2.0 * t) / lower
    bad = ~np.isfinite(ratio) | (lower <= 0)
    if bad.any():
        i = int(np.argmax(bad))
        return DoublingResult(False, math.inf, float(t[i]))
    top = float(ratio.max())
    if ratio[-1] >= top * (1 - 1e-12) and ratio[-1] > 2.0 * ratio[0]:
        return DoublingResult(False, top, float(t[-1]))
    return DoublingResult(True, top)


@dataclass(frozen=True)
class SobolevReport:
    liminf_estimate: float
    in_w1p: bool
    calderon: CalderonVerdict | None
    in_w1_n_minus_1: bool | None
    morrey_exponent: float | None


def sobolev_inclusion_report(phi: OrliczFunction, n: int, p: float, cfg=None) -> SobolevReport:
    """Inclusions of W^{1,phi} implied by the growth of phi.

    ``liminf phi(t)/t^p > 0`` is judged on t in [1, 2^40]: the ratio must be
    positive and its log-log slope over the upper half of the grid must not
    fall below -0.01 (a decaying power or log factor sends it to 0).
    """
    if not p > 1:
        raise DomainError("p must exceed 1")
    t = np.logspace(0.0, 40.0, 400, base=2.0)
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = phi(t) / t ** p
    upper = slice(len(t) // 2, None)
    est = float(np.min(ratio[upper]))
    positive = bool(np.all(np.isfinite(ratio)) and est > 0)
    if positive:
        slope = np.polyfit(np.log(t[upper]), np.log(ratio[upper]), 1)[0]
        positive = bool(slope >= -0.01)
    if not positive:
        est = 0.0 if not np.isfinite(est) else est
    calderon = calderon_check(phi, n, cfg).verdict if n >= 3 else None
    in_lower = None if calderon is None else calderon is CalderonVerdict.SATISFIED
    morrey = 1.0 - n / p if (positive and p > n) else None
    return SobolevReport(est if positive else 0.0, positive, calderon, in_lower, morrey)
