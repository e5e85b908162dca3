import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderlab.beltrami import (
    GrowthVerdict,
    PlanarMap,
    affine_map,
    bilipschitz_estimate,
    complex_dilatation,
    conjugation,
    ex1_map,
    ex1_mu,
    ex2_map,
    ex3_map,
    ex3_mu,
    holder_modulus_of_mu,
    identity_planar,
    integral_growth_check,
    k_of_mu,
    principal_power,
    square_map,
    wirtinger,
)
from holderlab.errors import DegeneratePointError, DomainError


# Wirtinger derivatives

@pytest.mark.parametrize("analytic", [True, False])
def test_wirtinger_of_z_and_zbar(analytic):
    z = 0.3 - 0.2j
    fz, fzb = wirtinger(identity_planar(), z, use_analytic=analytic)
    assert abs(fz - 1) < 1e-9 and abs(fzb) < 1e-9
    fz, fzb = wirtinger(conjugation(), z, use_analytic=analytic)
    assert abs(fz) < 1e-9 and abs(fzb - 1) < 1e-9


def test_ex1_wirtinger_values():
    z = 0.1
    fz, fzb = wirtinger(ex1_map(), z)
    assert fz == pytest.approx(-1 - math.log(0.01))
    assert fzb == pytest.approx(-1.0)
    num = wirtinger(ex1_map(), z, use_analytic=False)
    assert abs(num[0] - fz) < 1e-6 and abs(num[1] - fzb) < 1e-6


@pytest.mark.parametrize("z", [0.1, 0.05 + 0.05j, -0.2 + 0.1j, -0.3j, 0.4 + 0.25j])
def test_ex1_mu_finite_difference_matches_formula(z):
    mu = complex_dilatation(ex1_map(), z, use_analytic=False).mu
    assert abs(mu - complex(ex1_mu(z))) < 1e-6


def test_finite_difference_is_second_order():
    f = PlanarMap(lambda z: z * z * np.conj(z))
    z = 0.2 + 0.1j
    exact = 2 * z * np.conj(z)
    e1 = abs(wirtinger(f, z, h=1e-2)[0] - exact)
    e2 = abs(wirtinger(f, z, h=5e-3)[0] - exact)
    assert 3.5 < e1 / e2 < 4.5


def test_stencil_shrinks_near_domain_edge():
    f = ex2_map()
    fz, _ = wirtinger(f, 1 - 3e-7, use_analytic=False)
    assert math.isfinite(abs(fz))


def test_stencil_outside_domain_raises():
    with pytest.raises(DomainError):
        wirtinger(ex2_map(), 1.5, use_analytic=False)


# dilatation

def test_affine_dilatation():
    d = complex_dilatation(affine_map(1.0, 0.3), 0.5 + 0.5j)
    assert d.mu == pytest.approx(0.3)
    assert d.K == pytest.approx(13 / 7)
    assert d.k_bound == pytest.approx(0.3)


def test_k_of_mu_values():
    assert k_of_mu(1 / 3) == pytest.approx(2.0)
    assert k_of_mu(0) == 1.0
    assert k_of_mu(1.0) == math.inf


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.99), st.floats(0, 0.99))
def test_k_of_mu_is_monotone(a, b):
    lo, hi = sorted((a, b))
    assert k_of_mu(lo) <= k_of_mu(hi)


def test_holomorphic_map_has_zero_mu():
    for z in (0.5, 0.2 - 0.7j, -1 + 1j):
        assert abs(complex_dilatation(square_map(), z, use_analytic=False).mu) < 1e-8


def test_second_dilatation_has_same_modulus():
    d = complex_dilatation(ex1_map(), 0.2 + 0.3j)
    assert abs(d.nu) == pytest.approx(abs(d.mu))


def test_degenerate_point():
    with pytest.raises(DegeneratePointError):
        complex_dilatation(square_map(), 0.0)


def test_ex3_requires_k_below_one():
    with pytest.raises(DomainError):
        ex3_map(0.3, 0.6, 1.0)


def test_ex3_mu_bounded_by_k():
    f = ex3_map(0.3, 0.6, 0.5)
    rng = np.random.default_rng(3)
    z = np.sqrt(rng.random(1000)) * np.exp(1j * (rng.random(1000) * 2 - 1) * (math.pi - 0.05))
    for w in z:
        d = complex_dilatation(f, w)
        assert abs(d.mu) <= 0.5 + 1e-6
        assert abs(d.mu - complex(ex3_mu(w, 0.3, 0.6, 0.5))) < 1e-12


def test_ex3_numeric_matches_analytic_pair():
    f = ex3_map(0.3, 0.6, 0.5)
    w = 0.4 + 0.3j
    a = wirtinger(f, w)
    b = wirtinger(f, w, use_analytic=False)
    assert abs(a[0] - b[0]) < 1e-7 and abs(a[1] - b[1]) < 1e-7


def test_principal_power_branch():
    assert principal_power(-1 + 0j, 0.5) == pytest.approx(1j)
    assert principal_power(0j, 0.5) == 0
    assert principal_power(4.0, 0.5) == pytest.approx(2.0)


# Hölder modulus and bi-Lipschitz estimates

def test_affine_modulus_is_zero():
    res = holder_modulus_of_mu(affine_map(1.0, 0.2), 0.3, 0.1, 0.5, 200, seed=1)
    assert res.constant < 1e-12 and res.used == 200


def test_ex1_modulus_grows_near_origin():
    wide = holder_modulus_of_mu(ex1_map(), 0.0, 1e-2, 0.5, 300, seed=2).constant
    narrow = holder_modulus_of_mu(ex1_map(), 0.0, 1e-5, 0.5, 300, seed=2).constant
    assert narrow > 5 * wide


def test_ex3_equal_exponents_modulus_blows_up():
    f = ex3_map(0.4, 0.4, 0.5)
    big = holder_modulus_of_mu(f, 0.0, 0.1, 0.5, 300, seed=4).constant
    small = holder_modulus_of_mu(f, 0.0, 0.001, 0.5, 300, seed=4).constant
    assert small > 5 * big


def test_modulus_is_reproducible():
    a = holder_modulus_of_mu(ex1_map(), 0.2, 0.1, 0.5, 100, seed=9)
    b = holder_modulus_of_mu(ex1_map(), 0.2, 0.1, 0.5, 100, seed=9)
    assert a == b


def test_bilipschitz_identity_and_stretch():
    ident = bilipschitz_estimate(identity_planar(), 0, 1, 200, seed=5)
    assert ident.l_est == pytest.approx(1.0) and ident.L_est == pytest.approx(1.0)
    stretch = bilipschitz_estimate(PlanarMap(lambda z: 2 * z.real + 1j * z.imag), 0, 1, 500, seed=5)
    assert 1.0 - 1e-12 <= stretch.l_est and stretch.L_est <= 2.0 + 1e-12
    assert stretch.L_est > 1.9 and stretch.l_est < 1.1


def test_ex2_contracts_near_origin():
    res = bilipschitz_estimate(ex2_map(), 0, 0.01, 500, seed=6)
    assert res.L_est < 0.2


def test_bilipschitz_needs_enough_pairs():
    with pytest.raises(DomainError):
        bilipschitz_estimate(identity_planar(), 0, 1, 99, seed=0)


# integral growth

def test_constant_mu_has_zero_integral():
    res = integral_growth_check(lambda z: np.full(z.shape, 0.2 + 0j), 0, 0.2, 0.1)
    assert res.verdict is GrowthVerdict.FINITE and res.value == 0.0


def test_ex1_growth_diverges():
    res = integral_growth_check(ex1_mu, 0, 0, 0.1)
    assert res.verdict is GrowthVerdict.DIVERGENT


def test_holder_chi_growth_is_finite():
    res = integral_growth_check(lambda z: 0.3 * np.abs(z) ** 0.5, 0, 0, 0.1)
    assert res.verdict is GrowthVerdict.FINITE
    assert res.value == pytest.approx(2 * math.pi * 0.3 * 0.1 ** 0.5 / 0.5, rel=1e-4)


def test_growth_radius_must_be_positive():
    with pytest.raises(DomainError):
        integral_growth_check(ex1_mu, 0, 0, 0.0)
