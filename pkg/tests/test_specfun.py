import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_lab import DomainError
from nodal_lab import specfun

mpmath.mp.dps = 30

MP = {
    (0, "first"): mpmath.besselj,
    (1, "first"): mpmath.besselj,
    (0, "second"): mpmath.bessely,
    (1, "second"): mpmath.bessely,
}


def oracle(order, kind, x):
    return float(MP[(order, kind)](order, x))


@pytest.mark.parametrize("order", [0, 1])
@pytest.mark.parametrize("kind", ["first", "second"])
def test_bessel_matches_mpmath(order, kind):
    xs = np.concatenate([np.linspace(0.05, 20, 120), np.linspace(20, 60, 40)])
    for x in xs:
        got = specfun.bessel(order, kind, x)
        ref = oracle(order, kind, x)
        # relative error, scaled near zeros by the local envelope sqrt(2/(pi x))
        scale = max(abs(ref), min(1.0, math.sqrt(2 / (math.pi * x))))
        assert abs(got - ref) <= 1e-10 * scale, (order, kind, x)


@given(st.floats(0.01, 80.0))
@settings(max_examples=200, deadline=None)
def test_bessel_property_against_mpmath(x):
    for order in (0, 1):
        for kind in ("first", "second"):
            ref = oracle(order, kind, x)
            scale = max(abs(ref), min(1.0, math.sqrt(2 / (math.pi * x))))
            assert abs(specfun.bessel(order, kind, x) - ref) <= 1e-10 * scale


def test_trivial_values():
    assert specfun.bessel(0, "first", 0.0) == 1.0
    assert specfun.bessel(1, "first", 0.0) == 0.0
    assert abs(specfun.bessel(0, "first", 2.405)) < 1e-3


def test_first_kind_parity():
    for x in (0.3, 4.0, 17.5):
        assert specfun.bessel(0, "first", -x) == specfun.bessel(0, "first", x)
        assert specfun.bessel(1, "first", -x) == -specfun.bessel(1, "first", x)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_second_kind_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        specfun.bessel(0, "second", x)


def test_bad_order_and_kind():
    with pytest.raises(DomainError):
        specfun.bessel(2, "first", 1.0)
    with pytest.raises(DomainError):
        specfun.bessel(0, "third", 1.0)
    with pytest.raises(DomainError):
        specfun.bessel(0, "first", math.inf)


def test_second_kind_diverges_at_origin():
    vals = [specfun.bessel(0, "second", x) for x in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < -10


def test_j0_bounded_by_one():
    assert np.all(np.abs(specfun.j0(np.linspace(0, 40, 400))) <= 1.0)


def test_branches_agree_in_overlap_band():
    for x in np.linspace(11.0, 13.0, 41):
        for order in (0, 1):
            for kind in ("first", "second"):
                s = specfun.series_branch(order, kind, x)
                a = specfun.asymptotic_branch(order, kind, x)
                assert abs(s - a) <= 1e-10


def test_wronskian_identity():
    xs = np.linspace(0.1, 50.0, 500)
    lhs = specfun.j1(xs) * specfun.y0(xs) - specfun.j0(xs) * specfun.y1(xs)
    rhs = 2 / (np.pi * xs)
    assert np.max(np.abs(lhs - rhs) / rhs) <= 1e-8


def test_first_zeros_against_tables():
    # 2.405 and 3.832 to the printed digits
    z0, z1 = specfun.bessel_first_zero(0), specfun.bessel_first_zero(1)
    assert abs(z0 - 2.405) < 1e-3
    assert abs(z1 - 3.832) < 1e-3
    assert abs(z0 - float(mpmath.besseljzero(0, 1))) < 1e-6
    assert abs(z1 - float(mpmath.besseljzero(1, 1))) < 1e-6


@pytest.mark.parametrize("order", [0, 1])
def test_zero_is_a_sign_change(order):
    z = specfun.bessel_first_zero(order)
    assert specfun.bessel(order, "first", z - 1e-5) * specfun.bessel(order, "first", z + 1e-5) < 0


def test_bessel_value_record():
    v = specfun.bessel_value(1, "second", 2.0)
    assert v.order == 1 and v.kind == "second" and v.argument == 2.0
    assert v.value == specfun.bessel(1, "second", 2.0)


@pytest.mark.parametrize("r, mu", [(2.0, 3.123), (5 / 3, 4.697), (2.5, 2.073)])
def test_cross_product_roots_against_tables(r, mu):
    root = specfun.cross_product_mu(r)
    assert abs(root.mu - mu) <= 1e-2
    assert abs(root.residual) <= 1e-8


def mp_cross(lam, r):
    lam = mpmath.mpf(lam)
    return mpmath.besselj(0, lam) * mpmath.bessely(0, lam * r) - mpmath.besselj(0, lam * r) * mpmath.bessely(0, lam)


# least roots from mpmath.findroot seeded inside the bracket of the first sign change
MU_FROZEN = {2.0: 3.1230309196, 5 / 3: 4.6970640883, 2.5: 2.0732288491}


@pytest.mark.parametrize("r", sorted(MU_FROZEN))
def test_cross_product_roots_frozen(r):
    ref = float(mpmath.findroot(lambda t: mp_cross(t, r), MU_FROZEN[r]))
    assert abs(ref - MU_FROZEN[r]) < 1e-9
    assert abs(specfun.cross_product_mu(r).mu - ref) < 1e-8


def test_least_root_property():
    for r in (1.2, 2.0, 4.0):
        root = specfun.cross_product_mu(r)
        grid = np.linspace(1e-3, root.mu - 1e-6, 2000)
        vals = np.array([specfun.cross_product(t, r) for t in grid])
        assert np.all(np.sign(vals) == np.sign(vals[0]))


def test_mu_strictly_decreasing():
    rs = np.arange(1.2, 4.0001, 0.2)
    mus = [specfun.cross_product_mu(r).mu for r in rs]
    assert np.all(np.diff(mus) < 0)
    for r, m in zip(rs, mus):
        assert abs(specfun.cross_product(m, r)) <= 1e-8


def test_mu_rejects_r_at_most_one():
    with pytest.raises(DomainError):
        specfun.cross_product_mu(1.0)
