import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmoments.errors import InvalidInput, PoleError
from lmoments.special import (
    PrecisionConfig,
    ShiftTuple,
    VWeight,
    g_weight,
    hurwitz_zeta,
    log_gamma,
    riemann_zeta,
    v_weight,
    x_factor,
    zeta_q,
)

mp.mp.dps = 30


def mpc(z):
    return complex(z)


# ---- Hurwitz and Riemann zeta


def test_hurwitz_examples():
    assert abs(hurwitz_zeta(2, 1) - math.pi**2 / 6) < 1e-12
    assert abs(hurwitz_zeta(2, 0.5) - math.pi**2 / 2) < 1e-12
    assert abs(hurwitz_zeta(0.5, 0.2) - mpc(mp.zeta(0.5, 0.2))) < 1e-12


def test_hurwitz_pole():
    with pytest.raises(PoleError):
        hurwitz_zeta(1, 0.3)
    with pytest.raises(PoleError):
        zeta_q(1, 6)


def test_hurwitz_direct_sum_at_re_3():
    # independent oracle: plain partial sum plus an integral tail, no Euler-Maclaurin corrections needed at 1e-10
    s, x = 3 + 2j, 0.2
    n = np.arange(0, 200000)
    direct = np.sum((n + x) ** (-s)) + (200000 - 0.5 + x) ** (1 - s) / (s - 1)
    assert abs(hurwitz_zeta(s, x) - direct) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 4), st.floats(-50, 50), st.floats(0.01, 1.0))
def test_hurwitz_against_mpmath(re, im, x):
    s = complex(re, im)
    if abs(s - 1) < 1e-3:
        return
    ref = mpc(mp.zeta(s, x))
    assert abs(hurwitz_zeta(s, x) - ref) <= 1e-11 * max(1.0, abs(ref))


def test_zeta_equals_hurwitz_at_one():
    for re in np.linspace(-3, 4, 15):
        for im in (-50, -7.5, 0.0, 3.3, 50):
            s = complex(re, im)
            if abs(s - 1) < 1e-9:
                continue
            ref = mpc(mp.zeta(s))
            got = riemann_zeta(s)
            assert abs(got - hurwitz_zeta(s, 1.0)) <= 1e-12 * max(1.0, abs(ref))
            # at Re s < 0 |zeta| grows like |t|^{1/2 - Re s}: compare relatively there
            assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


@given(st.floats(-2, 3), st.floats(-20, 20), st.floats(0.05, 0.95))
def test_hurwitz_recursion(re, im, x):
    s = complex(re, im)
    if abs(s - 1) < 1e-3:
        return
    lhs = hurwitz_zeta(s, x)
    rhs = x ** (-s) + hurwitz_zeta(s, x + 1)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(x ** (-s)))


@pytest.mark.parametrize("x", [1 / 3, 1 / 5, 2 / 7])
@pytest.mark.parametrize("s", [1.5 + 0.5j, 2.2 - 1j, 3.0 + 0j])
def test_hurwitz_functional_equation(s, x):
    # zeta(1 - s, x) = Gamma(s)/(2 pi)^s [e^{-i pi s/2} F(s, x) + e^{i pi s/2} F(s, -x)], F(s,x) = sum e(nx) n^{-s}
    F = lambda y: mpc(mp.polylog(s, mp.exp(2j * mp.pi * y)))
    rhs = mpc(mp.gamma(s)) / (2 * math.pi) ** s * (cmath.exp(-1j * math.pi * s / 2) * F(x) + cmath.exp(1j * math.pi * s / 2) * F(-x))
    assert abs(hurwitz_zeta(1 - s, x) - rhs) < 1e-9


@given(st.floats(-2, 3), st.floats(0.5, 30), st.floats(0.05, 1.0))
def test_hurwitz_conjugate_symmetry(re, im, x):
    s = complex(re, im)
    a, b = hurwitz_zeta(s.conjugate(), x), hurwitz_zeta(s, x).conjugate()
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_zeta_q_examples():
    assert abs(zeta_q(2, 1) - 1.6449340668482264) < 1e-12
    assert abs(zeta_q(2, 2) - math.pi**2 / 8) < 1e-12
    for eps in (1e-4, -1e-4j):
        assert abs(eps * zeta_q(1 + eps, 6) - 1 / 3) < 1e-3
    # the residue exactly, as a contour mean
    th = 2 * np.pi * (np.arange(32) + 0.5) / 32
    r = 0.01 * np.exp(1j * th)
    res = np.mean([zeta_q(1 + z, 6) * z for z in r])
    assert abs(res - 1 / 3) < 1e-12


# ---- log Gamma


def test_log_gamma_examples():
    assert abs(log_gamma(1)) < 1e-15
    assert abs(log_gamma(0.5) - 0.5723649429247001) < 1e-12
    # recursion oracle: log Gamma(s) = log Gamma(s + 8) - sum log(s + k)
    s = 3 + 4j
    rec = log_gamma(s + 8) - sum(cmath.log(s + k) for k in range(8))
    assert abs(cmath.exp(log_gamma(s)) - cmath.exp(rec)) < 1e-12 * abs(cmath.exp(rec))
    assert abs(log_gamma(s) - mpc(mp.loggamma(s))) < 1e-12


def test_log_gamma_poles():
    for z in (0, -1, -7):
        with pytest.raises(PoleError):
            log_gamma(z)


@given(st.floats(-50, 50, allow_subnormal=False), st.floats(-1e4, 1e4, allow_subnormal=False))
def test_log_gamma_against_mpmath(re, im):
    s = complex(re, im)
    if abs(im) < 1e-6 and re <= 0:
        return
    ref = mpc(mp.loggamma(s))
    # values reach ~1e5 here, beyond what an absolute 1e-12 can mean in double precision
    assert abs(log_gamma(s) - ref) <= 1e-12 * max(1.0, abs(ref))


# ---- X, g, V


def test_x_factor_examples():
    for q in (3, 17, 1000):
        assert abs(x_factor(0, q, 0) - 1) < 1e-15
    a = 0.1 + 0.2j
    assert abs(x_factor(a, 17, 0) * x_factor(-a, 17, 0) - 1) < 1e-12
    ref = (3 / mp.pi) ** (-0.1) * mp.gamma((0.5 - 0.1 + 1) / 2) / mp.gamma((0.5 + 0.1 + 1) / 2)
    assert abs(x_factor(0.1, 3, 1) - mpc(ref)) < 1e-12


@given(st.complex_numbers(max_magnitude=0.4), st.integers(1, 10**6), st.sampled_from([0, 1]))
def test_x_factor_inverse_pair(a, q, par):
    assert abs(x_factor(a, q, par) * x_factor(-a, q, par) - 1) < 1e-12


def test_x_factor_bad_parity():
    with pytest.raises(InvalidInput):
        x_factor(0.1, 5, 2)


def test_g_weight_examples():
    sh = ShiftTuple(0.01j, 0.03j, 0.05j, 0.07j)
    for par in (0, 1):
        assert abs(g_weight(0, sh, par) - 1) < 1e-15
        s = 0.3
        ref = (math.gamma((0.5 + s + par) / 2) / math.gamma((0.5 + par) / 2)) ** 4 * math.pi ** (-2 * s)
        assert abs(g_weight(s, ShiftTuple(), par) - ref) < 1e-12
    ref = mp.pi ** (-0.5)
    for v in sh.as_tuple():
        ref *= mp.gamma((0.5 + v + 0.25) / 2) / mp.gamma((0.5 + v) / 2)
    assert abs(g_weight(0.25, sh, 0) - mpc(ref)) < 1e-12


def test_shift_tuple_bounds():
    with pytest.raises(InvalidInput):
        ShiftTuple(0.5, 0, 0, 0)
    with pytest.raises(InvalidInput):
        ShiftTuple.from_seq([0.1, 0.2])
    sh = ShiftTuple(0.1, 0.2j, -0.1, 0.3)
    assert sh.dual().as_tuple() == (0.1, -0.3, -0.1, -0.2j)


def test_v_weight_limits():
    # g has a fourth-order pole at s = -1/2 - a, so V(x) - 1 ~ x^{1/2+a} log^3 x: slow but sure
    # below ~1e-24 the factor x^{-c} on the contour costs more digits than the gap itself
    xs = 10.0 ** -np.arange(4, 25, 4)
    gaps = np.abs(v_weight(xs) - 1)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-7
    # odd parity: the pole moves to -3/2 and the gap drops to the rounding floor
    odd = np.abs(v_weight(xs, ShiftTuple(0.01j, 0.02j, 0.03j, 0.05j), 1) - 1)
    assert odd[1] < 1e-6 and np.all(odd[2:] < 1e-9)
    assert abs(v_weight(1e6)) < 1e-8


def test_v_weight_small_x_against_quadrature():
    # independent oracle: mpmath quadrature on the line Re s = 1
    f = lambda t, x: (mp.exp((1 + 1j * t) ** 2) * (mp.gamma((1.5 + 1j * t) / 2) / mp.gamma(0.25)) ** 4
                      * mp.pi ** (-2 * (1 + 1j * t)) * mp.mpf(x) ** (-(1 + 1j * t)) / (1 + 1j * t))
    for x in (1e-7, 1e-3, 2.0):
        ref = mp.quad(lambda t: f(t, x), [-30, -5, 0, 5, 30]) / (2 * mp.pi)
        assert abs(v_weight(x) - mpc(ref)) < 1e-12


def test_v_weight_contour_height_and_line():
    base = v_weight(1.0)
    tall = v_weight(1.0, prec=PrecisionConfig(quadrature_nodes=4001, contour_height=60.0))
    assert abs(base - tall) < 1e-9
    for par in (0, 1):
        vals = [VWeight(ShiftTuple(0.01j, 0.02j, 0.03j, 0.05j), par, c=c)(np.array([1e-3, 0.5, 1.0, 20.0]))
                for c in (0.5, 1.0, 2.0)]
        assert np.max(np.abs(vals[0] - vals[1])) < 1e-9
        assert np.max(np.abs(vals[1] - vals[2])) < 1e-9


def test_v_weight_bulk_interpolation():
    V = VWeight(ShiftTuple(0.1, 0.2, 0.05j, -0.1j), 1)
    x = np.geomspace(1e-5, 1e3, 777)
    assert np.max(np.abs(V.bulk(x) - V(x))) < 1e-12


def test_v_weight_real_shifts_conjugate():
    V = VWeight()
    x = np.geomspace(1e-3, 10, 9)
    assert np.max(np.abs(V(x).imag)) < 1e-13


def test_precision_config_validation():
    with pytest.raises(InvalidInput):
        PrecisionConfig(target_abs_error=0)
    with pytest.raises(InvalidInput):
        PrecisionConfig(euler_maclaurin_shift=5)
    with pytest.raises(InvalidInput):
        PrecisionConfig(bernoulli_terms=30)
    t = PrecisionConfig().tightened()
    assert t.target_abs_error < PrecisionConfig().target_abs_error


def test_tightened_precision_agrees():
    s = 0.5 + 14.1j
    assert abs(hurwitz_zeta(s, 0.3) - hurwitz_zeta(s, 0.3, PrecisionConfig().tightened())) < 1e-12
