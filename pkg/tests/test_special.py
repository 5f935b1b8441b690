import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from heunpot.errors import ArgumentOnCut, ParameterOutOfRange, PoleAtGamma
from heunpot.special import (
    agm,
    ellipf,
    ellipk,
    gauss_2f1,
    hyp2f1_series,
    jacobi_sn,
)

# 2F1(0.5, 1.5; 2; 0.25) from a 200-term partial sum in exact rationals
HYP_ORACLE = 1.111732395853362071
# sn(1 | 0.5) by bisection on phi of a quadrature of F(phi | 0.5) = 1
SN_ORACLE = 0.803001824895644


def test_binomial_identity():
    assert_allclose(gauss_2f1(0.5, 1.7, 1.7, 0.3), 0.7 ** -0.5, rtol=1e-14)


def test_log_identity():
    z = 0.4
    assert_allclose(gauss_2f1(1, 1, 2, z), -math.log(1 - z) / z, rtol=1e-14)


def test_rational_partial_sum_oracle():
    assert_allclose(gauss_2f1(0.5, 1.5, 2, 0.25).real, HYP_ORACLE, rtol=1e-14)
    assert_allclose(hyp2f1_series(0.5, 1.5, 2, 0.25).real, HYP_ORACLE, rtol=1e-14)


def test_terminating_polynomial():
    # 2F1(-2, b; c; z) = 1 - 2 b z / c + b (b+1) z^2 / (c (c+1))
    b, c, z = 0.3, 1.9, 7.5
    want = 1 - 2 * b * z / c + b * (b + 1) * z * z / (c * (c + 1))
    assert_allclose(gauss_2f1(-2, b, c, z), want, rtol=1e-14)
    # a non-positive c is allowed when the series stops first
    assert_allclose(gauss_2f1(-1, 2.0, -3, 0.5), 1 + 2.0 * 0.5 / 3, rtol=1e-14)


def test_gauss_sum_at_one():
    a, b, c = 0.3, 0.4, 1.9
    want = math.gamma(c) * math.gamma(c - a - b) / (math.gamma(c - a) * math.gamma(c - b))
    assert_allclose(gauss_2f1(a, b, c, 1.0, side=1), want, rtol=1e-13)


def test_errors():
    with pytest.raises(PoleAtGamma):
        gauss_2f1(0.5, 0.5, -2, 0.1)
    with pytest.raises(ArgumentOnCut):
        gauss_2f1(0.5, 0.3, 1.2, 1.5)
    with pytest.raises(ParameterOutOfRange):
        jacobi_sn(0.3, 1.5)
    with pytest.raises(ParameterOutOfRange):
        ellipk(1.0)


def contiguous(a, b, c, z):
    fm = gauss_2f1(a, b, c - 1, z)
    f0 = gauss_2f1(a, b, c, z)
    fp = gauss_2f1(a, b, c + 1, z)
    terms = (c * (c - 1) * (z - 1) * fm,
             c * (c - 1 - (2 * c - a - b - 1) * z) * f0,
             (c - a) * (c - b) * z * fp)
    return abs(sum(terms)) / max(abs(t) for t in terms)


def test_contiguous_relation_random():
    rng = np.random.default_rng(11)
    for _ in range(40):
        a, b = rng.uniform(-2, 2, 2)
        c = rng.uniform(1.2, 3.5)
        r, th = rng.uniform(0, 3), rng.uniform(-np.pi, np.pi)
        z = r * np.exp(1j * th)
        if abs(z.imag) < 1e-3 and z.real >= 1:
            continue
        assert contiguous(a, b, c, z) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5), st.floats(0.3, 3.0),
       st.floats(0.0, 2.5), st.floats(-math.pi, math.pi))
def test_against_mpmath(a, b, c, r, th):
    z = r * complex(math.cos(th), math.sin(th))
    if abs(z.imag) < 1e-6 and z.real >= 1 - 1e-6:
        return
    if min(abs(c - a - b - k) for k in range(-6, 7)) < 1e-3:
        return
    if min(abs(a - b - k) for k in range(-6, 7)) < 1e-3:
        return
    want = complex(mp.hyp2f1(a, b, c, z))
    got = gauss_2f1(a, b, c, z)
    # compare with the scale of the largest series term, which bounds cancellation
    scale = max(abs(want), 1e-3)
    assert abs(got - want) <= 1e-9 * scale


@pytest.mark.parametrize("x", [1.3, 2.0, 5.5])
@pytest.mark.parametrize("side", [1, -1])
def test_cut_limits(x, side):
    a, b, c = 0.3, -0.6, 1.45
    want = complex(mp.hyp2f1(a, b, c, mp.mpc(x, side * 1e-40)))
    assert_allclose(gauss_2f1(a, b, c, x, side=side), want, rtol=1e-11)


@pytest.mark.parametrize("d", [1e-3, 1e-7, 1e-11])
def test_exact_complement_near_one(d):
    # z = 1 + d on the cut, with 1 - z supplied exactly
    a, b, c = 0.4 - 0.2j, 0.9 + 1.8j, 2.7
    z = 1 + d
    with mp.workdps(40):
        want = complex(mp.hyp2f1(a, b, c, mp.mpc(1 + mp.mpf(d), 1e-45)))
    got = gauss_2f1(a, b, c, z, side=1, one_minus_z=-d)
    assert_allclose(got, want, rtol=1e-13)


def test_near_unit_circle_sixth_roots():
    z = complex(math.cos(math.pi / 3), math.sin(math.pi / 3)) * 0.999
    want = complex(mp.hyp2f1(0.37, 1.21, 2.3, z))
    assert_allclose(gauss_2f1(0.37, 1.21, 2.3, z), want, rtol=1e-11)


def test_ellipk_and_agm():
    assert_allclose(ellipk(0.0), math.pi / 2, rtol=1e-15)
    assert_allclose(ellipk(0.5), 1.8540746773013719, rtol=1e-14)
    assert_allclose(agm(1.0, 2.0 ** 0.5), 1.1981402347355922, rtol=1e-15)
    assert_allclose(ellipf(math.pi / 2, 0.5), ellipk(0.5), rtol=1e-14)


def test_sn_degenerate_limits():
    u = np.linspace(-3, 3, 13)
    assert_allclose(jacobi_sn(u, 0.0), np.sin(u), atol=1e-15)
    assert_allclose(jacobi_sn(u, 1.0), np.tanh(u), atol=1e-15)


def test_sn_quadrature_oracle():
    assert_allclose(jacobi_sn(1.0, 0.5), SN_ORACLE, atol=1e-14)


@given(st.floats(-10, 10), st.floats(0, 0.999))
def test_sn_period_and_parity(u, m):
    K = ellipk(m)
    assert abs(jacobi_sn(u + 4 * K, m) - jacobi_sn(u, m)) < 1e-12
    assert jacobi_sn(-u, m) == -jacobi_sn(u, m)


def test_sn_inverts_incomplete_integral():
    phi = np.linspace(-1.5, 1.5, 9)
    for m in (0.1, 0.5, 0.9):
        assert_allclose(jacobi_sn(ellipf(phi, m), m), np.sin(phi), atol=1e-14)
