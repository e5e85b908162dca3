import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderlab.errors import DomainError
from holderlab.harmonic import (
    BoundaryData,
    default_r_grid,
    i_alpha,
    i_alpha_at_center,
    loglog_slope,
    poisson_extend,
    poisson_gradient,
    poisson_kernel,
    poisson_kernel_gradient,
    privalov_check,
    zonal_integral,
)
from holderlab.quadrature import integrate_sphere

E3 = np.array([0.0, 0.0, 1.0])
CUSP = BoundaryData.holder_cusp(0.5)


def radial_derivative_oracle(r, alpha=0.5):
    """d/dr of the extension of |e3 - t|^alpha at r e3, as a 1D zonal integral in half-angle form."""
    d = (1 - r) * (1 + r)

    def f(th):
        h = np.sin(th / 2)
        D2 = (1 - r) ** 2 + 4 * r * h * h
        kern = -(2 * r / D2 ** 1.5 + 3 * d * (2 * h * h - (1 - r)) / D2 ** 2.5)
        return kern * (2 * h) ** alpha

    s = 1 - r
    breaks = [s * 2.0 ** k for k in range(-6, 30) if s * 2.0 ** k < math.pi]
    return zonal_integral(f, 3, True, None, breaks)


# kernel

def test_kernel_at_center_is_one():
    rng = np.random.default_rng(1)
    eta = rng.normal(size=(10, 3))
    eta /= np.linalg.norm(eta, axis=1)[:, None]
    assert np.allclose(poisson_kernel(np.zeros(3), eta), 1.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_kernel_on_axis(r):
    assert poisson_kernel(r * E3, E3) == pytest.approx((1 + r) / (1 - r) ** 2, rel=1e-13)


def test_kernel_outside_ball_rejected():
    with pytest.raises(DomainError):
        poisson_kernel(np.array([0.0, 0.0, 1.0]), E3)


def test_kernel_normalization_near_boundary():
    h = poisson_extend(BoundaryData.constant(1.0, 3), 0.9 * E3)
    assert abs(h - 1.0) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-0.6, 0.6), min_size=3, max_size=3),
       st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_kernel_gradient_bound(x, eta):
    x = np.array(x)
    eta = np.array(eta) / np.linalg.norm(eta)
    n = 3
    grad = poisson_kernel_gradient(x, eta)[0]
    dist = np.linalg.norm(x - eta)
    assert np.linalg.norm(grad) <= (2 + n) / dist ** n * (1 + 1e-12)


def test_kernel_gradient_matches_finite_difference():
    x = np.array([0.2, -0.1, 0.4])
    eta = np.array([[0.0, 0.6, 0.8]])
    h = 1e-6
    fd = np.array([(poisson_kernel(x + h * e, eta) - poisson_kernel(x - h * e, eta))[0] / (2 * h)
                   for e in np.eye(3)])
    assert np.allclose(poisson_kernel_gradient(x, eta)[0], fd, rtol=1e-7)


# extension

@pytest.mark.parametrize("c", [-2.0, 0.0, 3.5])
def test_constant_data_extends_to_constant(c):
    for x in ([0, 0, 0], [0.3, 0.2, -0.5], [0, 0.95, 0]):
        assert poisson_extend(BoundaryData.constant(c, 3), x) == pytest.approx(c, abs=1e-8)


def test_linear_data_extends_to_itself():
    rng = np.random.default_rng(7)
    g = BoundaryData.coordinate(2, 3)
    for _ in range(20):
        v = rng.normal(size=3)
        x = v / np.linalg.norm(v) * rng.random() ** (1 / 3) * 0.95
        assert abs(poisson_extend(g, x) - x[2]) < 1e-6


def test_second_order_solid_harmonic():
    g = BoundaryData(lambda t: t[:, 2] ** 2 - 1 / 3, 3)
    assert poisson_extend(g, 0.5 * E3) == pytest.approx(0.25 * 2 / 3, abs=1e-6)


def test_planar_extension_of_coordinate():
    g = BoundaryData.coordinate(0, 2)
    assert poisson_extend(g, [0.6, 0.3]) == pytest.approx(0.6, abs=1e-8)


def test_extension_rejects_boundary_points():
    with pytest.raises(DomainError):
        poisson_extend(CUSP, E3)


# gradient

@pytest.mark.parametrize("x", [np.zeros(3), 0.7 * E3])
def test_gradient_of_coordinate(x):
    assert np.allclose(poisson_gradient(BoundaryData.coordinate(2, 3), x), E3, atol=1e-8)


def test_gradient_of_constant_is_zero():
    assert np.allclose(poisson_gradient(BoundaryData.constant(2.0, 3), [0.1, 0.2, 0.3]), 0.0, atol=1e-10)


def test_gradient_matches_central_difference():
    x = 0.5 * E3
    h = 1e-4
    fd = (poisson_extend(CUSP, x + h * E3) - poisson_extend(CUSP, x - h * E3)) / (2 * h)
    assert abs(poisson_gradient(CUSP, x)[2] - fd) < 1e-4


@pytest.mark.parametrize("r", [0.5, 0.9, 0.99])
def test_gradient_matches_zonal_oracle(r):
    assert poisson_gradient(CUSP, r * E3)[2] == pytest.approx(radial_derivative_oracle(r), rel=1e-8)


# zonal integrals

def test_zonal_constant_and_odd():
    assert zonal_integral(lambda t: np.ones_like(t), 3) == pytest.approx(1.0, abs=1e-12)
    assert abs(zonal_integral(np.cos, 3)) < 1e-12
    assert zonal_integral(lambda t: np.ones_like(t), 3, normalized=False) == pytest.approx(4 * math.pi)
    assert zonal_integral(lambda t: np.ones_like(t), 2, normalized=False) == pytest.approx(2 * math.pi)


def test_zonal_matches_sphere_rule():
    g = lambda t: np.exp(np.cos(t)) * (1 + np.sin(t) ** 2)  # noqa: E731
    z = zonal_integral(g, 3, normalized=False)
    s = integrate_sphere(lambda u: g(np.arccos(np.clip(u[:, 2], -1, 1))), 3).value
    assert abs(z - s) < 1e-8


def test_zonal_cap_closed_form():
    a = 0.4
    cap = zonal_integral(lambda t: (t < a).astype(float), 3, normalized=False, breakpoints=[a])
    assert cap == pytest.approx(2 * math.pi * (1 - math.cos(a)), rel=1e-12)


def test_zonal_rejects_low_dimension():
    with pytest.raises(DomainError):
        zonal_integral(np.cos, 1)


# I_alpha

@pytest.mark.parametrize("alpha,value", [(1.0, 4 / 3), (0.5, 2 ** 1.5 / 2.5)])
def test_i_alpha_at_center(alpha, value):
    assert i_alpha(0.0, alpha) == pytest.approx(value, abs=1e-10)
    assert i_alpha_at_center(alpha) == pytest.approx(value, abs=1e-15)


def test_i_alpha_half_value():
    assert i_alpha(0.0, 0.5) == pytest.approx(1.13137, abs=1e-5)


def test_i_alpha_is_increasing_toward_boundary():
    vals = [i_alpha(r, 0.5) for r in (0.5, 0.6, 0.8, 0.9, 0.99, 0.999)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_i_alpha_scaled_is_bounded():
    rs = np.linspace(0.5, 0.999, 25)
    scaled = [i_alpha(r, 0.5) * (1 - r) ** 0.5 for r in rs]
    assert max(scaled) / min(scaled) < 10


def test_i_alpha_domain():
    with pytest.raises(DomainError):
        i_alpha(1.0, 0.5)
    with pytest.raises(DomainError):
        i_alpha(0.5, 0.0)


def test_loglog_slope_of_power():
    x = np.array([1e-3, 1e-2, 1e-1])
    assert loglog_slope(x, 3 * x ** -0.7) == pytest.approx(-0.7, abs=1e-12)


# Privalov

def test_cusp_gradient_growth_is_scaled_bounded():
    grid = [0.5, 0.75, 0.875, 0.9375, 0.96875, 0.984375, 0.9921875, 0.995]
    res = privalov_check(CUSP, grid)
    assert math.isfinite(res.sup_scaled) and res.sup_scaled < 1.0
    assert res.decade_ratio < 3


def test_cusp_slope_on_example_grid():
    grid = [r for r in [0.0] + default_r_grid() if r <= 0.995] + [0.995]
    res = privalov_check(CUSP, grid, fit_from=0.0)
    assert abs(res.slope + 0.5) <= 0.05, res.slope


def test_cusp_asymptotic_slope_from_oracle():
    deltas = np.array([1e-6, 2e-6, 5e-6, 1e-5])
    vals = [abs(radial_derivative_oracle(1 - d)) for d in deltas]
    assert abs(loglog_slope(deltas, vals) + 0.5) < 0.05


@pytest.mark.parametrize("delta", [0.2, 0.1])
def test_lipschitz_data_has_constant_gradient(delta):
    g = BoundaryData(lambda t: t[:, 2], 3, alpha=1 - delta, M=1.0, x0=tuple(E3))
    res = privalov_check(g, [0.5, 0.9, 0.99, 0.999])
    assert np.allclose(res.gradient_norm, 1.0, atol=1e-8)
    assert np.allclose(res.scaled, (1 - np.array(res.r)) ** delta, atol=1e-8)
    assert res.sup_scaled <= 1.0


def test_planar_counterexample_log_growth():
    g = BoundaryData.dilogarithm_real_part()
    res = privalov_check(g, [0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999])
    assert abs(res.log_slope - 1.0) < 0.1
    for r, grad in zip(res.r, res.gradient_norm):
        assert grad == pytest.approx(-math.log(1 - r) / r, rel=1e-6)


def test_grid_above_limit_is_truncated_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = privalov_check(CUSP, [0.5, 0.9, 0.9995])
    assert res.truncated == (0.9995,)
    assert max(res.r) == 0.9
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_privalov_needs_modulus():
    with pytest.raises(DomainError):
        privalov_check(BoundaryData.constant(1.0, 3))
