import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab.errors import DomainError, QuadratureError
from holderlab.geometry import BallRegion
from holderlab.harmonic import zonal_integral
from holderlab.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureConfig,
    TailVerdict,
    cap_indicator_area,
    integrate_1d,
    integrate_ball,
    integrate_sphere,
    integrate_tail,
)


def test_kronrod_tables_integrate_polynomials_exactly():
    assert math.isclose(KRONROD_WEIGHTS.sum(), 2.0, rel_tol=1e-14)
    assert math.isclose(GAUSS_WEIGHTS.sum(), 2.0, rel_tol=1e-14)
    # the 15-point Kronrod rule is exact through degree 22
    for deg in (2, 10, 22):
        assert math.isclose(KRONROD_WEIGHTS @ NODES ** deg, 2.0 / (deg + 1), rel_tol=1e-13)


@pytest.mark.parametrize("f, a, b, exact", [
    (lambda t: t, 0.0, 1.0, 0.5),
    (np.sin, 0.0, math.pi, 2.0),
    (lambda t: t ** -0.5, 0.0, 1.0, 2.0),
])
def test_integrate_1d_examples(f, a, b, exact):
    res = integrate_1d(f, a, b)
    assert res.converged
    assert abs(res.value - exact) < 1e-9


def test_integrate_1d_empty_interval_and_reversed():
    assert integrate_1d(np.exp, 0.3, 0.3).value == 0.0
    with pytest.raises(DomainError):
        integrate_1d(np.exp, 1.0, 0.0)


def test_breakpoints_handle_jumps():
    step = lambda t: np.where(t < 1 / 3, 0.0, 1.0)
    res = integrate_1d(step, 0.0, 1.0, breakpoints=[1 / 3])
    assert abs(res.value - 2 / 3) < 1e-14


def test_non_finite_integrand_is_domain_error():
    with pytest.raises(DomainError):
        integrate_1d(lambda t: np.where(t > 0.5, np.nan, 1.0), 0.0, 1.0)


def test_exhausted_budget_reports_unconverged():
    cfg = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=2)
    res = integrate_1d(lambda t: np.sin(40 * t) ** 2 / np.sqrt(t + 1e-9), 0.0, 3.0, cfg)
    assert not res.converged
    with pytest.raises(QuadratureError) as info:
        res.require("oscillatory")
    assert info.value.partial is res


def test_tail_examples():
    one = integrate_tail(lambda t: t ** -2.0, 1.0)
    assert one.verdict is TailVerdict.CONVERGED and abs(one.value - 1.0) < 1e-8
    assert integrate_tail(lambda t: 1.0 / t, 1.0).verdict is TailVerdict.DIVERGENT
    calderon = integrate_tail(lambda t: t / t ** 3, 1.0)
    assert calderon.converged and abs(calderon.value - 1.0) < 1e-8


def test_tail_slow_power_is_divergent_and_oscillation_inconclusive():
    assert integrate_tail(lambda t: t ** -1.05, 1.0).verdict is TailVerdict.DIVERGENT
    assert integrate_tail(lambda t: np.sin(t) / t, 1.0).verdict is TailVerdict.INCONCLUSIVE


def test_tail_needs_positive_start():
    with pytest.raises(DomainError):
        integrate_tail(lambda t: t ** -2, 0.0)


@pytest.mark.parametrize("g, exact", [
    (lambda t: np.ones(len(t)), 4 * math.pi),
    (lambda t: t[:, 2] ** 2, 4 * math.pi / 3),
    (lambda t: (t[:, 2] > 0).astype(float), 2 * math.pi),
])
def test_sphere_examples(g, exact):
    res = integrate_sphere(g, 3, polar_breaks=(math.pi / 2,))
    assert abs(res.value - exact) < 1e-10 * exact


def test_circle_rule():
    assert abs(integrate_sphere(lambda t: t[:, 0] ** 2, 2).value - math.pi) < 1e-12


@pytest.mark.parametrize("g, region, exact", [
    (lambda x: np.ones(len(x)), BallRegion.ball((0, 0, 0), 1.0), 4 * math.pi / 3),
    (lambda x: np.ones(len(x)), BallRegion.annulus((0, 0, 0), 0.5, 1.0), 4 * math.pi / 3 * (1 - 1 / 8)),
    (lambda x: 1.0 / np.sum(x * x, axis=1), BallRegion.ball((0, 0, 0), 1.0), 4 * math.pi),
])
def test_ball_examples(g, region, exact):
    res = integrate_ball(g, 3, region)
    assert res.converged
    assert abs(res.value - exact) < 1e-9 * exact


def test_ball_off_centre_volume():
    region = BallRegion.inside_unit_ball((0.0, 0.0, 1.0), 0.5)
    res = integrate_ball(lambda x: np.ones(len(x)), 3, region, radial=True)
    # lens volume of two balls of radii 1 and 0.5 at distance 1
    R, r, d = 1.0, 0.5, 1.0
    lens = math.pi * (R + r - d) ** 2 * (d * d + 2 * d * r - 3 * r * r + 2 * d * R + 6 * r * R - 3 * R * R) / (12 * d)
    assert abs(res.value - lens) < 1e-9


def test_aligned_cap_indicator_is_exact():
    z = np.array([0.0, 0.6, 0.8])
    for eps in (0.1, 0.5, 1.0):
        area = cap_indicator_area(z, eps).require()
        assert abs(area - math.pi * eps * eps) < 1e-12


def test_zonal_integrand_matches_zonal_integral():
    g = lambda th: np.exp(np.cos(th)) * (1 + np.cos(th) ** 2)
    sphere = integrate_sphere(lambda t: g(np.arccos(np.clip(t[:, 2], -1, 1))), 3).value
    zonal = zonal_integral(g, 3, normalized=False)
    assert abs(sphere - zonal) < 1e-8 * abs(zonal)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 0.95))
def test_linearity_and_additivity(alpha, beta, c):
    f = lambda t: np.exp(t) * np.sin(3 * t)
    g = lambda t: np.sqrt(t)
    a, b = 0.0, 1.0
    lhs = integrate_1d(lambda t: alpha * f(t) + beta * g(t), a, b)
    rf, rg = integrate_1d(f, a, b), integrate_1d(g, a, b)
    tol = lhs.error_estimate + abs(alpha) * rf.error_estimate + abs(beta) * rg.error_estimate + 1e-12
    assert abs(lhs.value - alpha * rf.value - beta * rg.value) <= max(tol, 1e-10)
    left, right = integrate_1d(g, a, c), integrate_1d(g, c, b)
    slack = rg.error_estimate + left.error_estimate + right.error_estimate + 1e-13
    assert abs(rg.value - left.value - right.value) <= slack


def test_bit_identical_repeats():
    f = lambda t: np.log1p(t) / (t + 0.1)
    first = integrate_1d(f, 0.0, 5.0)
    assert integrate_1d(f, 0.0, 5.0) == first
    g = lambda t: np.exp(t[:, 0]) * t[:, 2] ** 2
    assert integrate_sphere(g, 3) == integrate_sphere(g, 3)


def test_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(tail_cutoff=1.0)
