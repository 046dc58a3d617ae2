import cmath

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from gridcert import (DegenerateFeedback, EvaluationAtPole, FrequencyGrid, InvalidParameter,
                      NotInvertible, Polynomial, RationalTF, default_grid, freq_response, poles,
                      relative_degree, s, tf_add, tf_eval, tf_feedback, tf_inv, tf_mul, zeros)

lag = RationalTF((1.0,), (0.1, 1.0))     # 1/(s + 0.1)


# -- Polynomial ----------------------------------------------------------------------

def test_polynomial_trims_and_reports_degree():
    p = Polynomial((1.0, 2.0, 0.0, 0.0))
    assert p.coeffs == (1.0, 2.0)
    assert p.degree == 1
    assert Polynomial((0.0, 0.0)).coeffs == (0.0,)
    assert Polynomial((0.0,)).is_zero()


def test_polynomial_arithmetic_matches_numpy():
    a, b = Polynomial((1.0, -2.0, 3.0)), Polynomial((0.5, 4.0))
    np.testing.assert_allclose((a * b).coeffs, np.polynomial.polynomial.polymul(a.coeffs, b.coeffs))
    np.testing.assert_allclose((a + b).coeffs, [1.5, 2.0, 3.0])
    np.testing.assert_allclose((a - a).coeffs, [0.0])


def test_polynomial_shift():
    p = Polynomial((1.0, 1.0))        # s + 1
    assert p.shift(2.0)(0.0) == pytest.approx(-1.0)   # (s - 2) + 1 at 0


def test_polynomial_rejects_nonfinite():
    with pytest.raises(InvalidParameter):
        Polynomial((1.0, np.nan))


# -- evaluation ----------------------------------------------------------------------

def test_eval_dc_of_lag():
    assert tf_eval(lag, 0) == pytest.approx(10.0)


def test_eval_cancels_identical_factors():
    g = RationalTF((1.0, 1.0), (1.0, 1.0))
    assert g.num.coeffs == (1.0,) and g.den.coeffs == (1.0,)
    assert tf_eval(g, 5 + 2j) == pytest.approx(1.0)


def test_eval_against_hand_complex_division():
    # 1/(0.1 + j) = (0.1 - j)/(0.01 + 1)
    expected = complex(0.1, -1.0) / 1.01
    assert abs(tf_eval(lag, 1j) - expected) < 1e-15


def test_eval_at_pole_raises():
    with pytest.raises(EvaluationAtPole):
        tf_eval(lag, -0.1)
    with pytest.raises(EvaluationAtPole):
        tf_eval(RationalTF((1.0,), (0.0, 1.0)), 0.0)


# -- frequency response --------------------------------------------------------------

def test_freq_response_constant():
    grid = FrequencyGrid.log(1e-2, 1e2, 50)
    np.testing.assert_array_equal(freq_response(RationalTF((2.0,)), grid), np.full(50, 2 + 0j))


def test_freq_response_magnitude_at_corner():
    g = freq_response(lag, FrequencyGrid([0.1]))
    assert abs(g[0]) == pytest.approx(1 / (0.1 * np.sqrt(2)), rel=1e-14)


def test_freq_response_integrator_phase():
    grid = FrequencyGrid([0.5, 1.0, 4.0])
    out = freq_response(RationalTF((1.0,), (0.0, 1.0)), grid)
    np.testing.assert_allclose(out, -1j / grid.omegas, rtol=1e-15)


def test_freq_response_reports_pole_frequency():
    with pytest.raises(EvaluationAtPole) as info:
        freq_response(RationalTF((1.0,), (1.0, 0.0, 1.0)), FrequencyGrid([0.5, 1.0, 2.0]))
    assert info.value.s == pytest.approx(1j)


def test_default_grid():
    g = default_grid()
    assert len(g) == 2000 and g.wmin == pytest.approx(1e-4) and g.wmax == pytest.approx(1e5)


@pytest.mark.parametrize("omegas", [[], [1.0, 1.0], [2.0, 1.0], [0.0, 1.0], [1.0, np.inf]])
def test_grid_validation(omegas):
    with pytest.raises(InvalidParameter):
        FrequencyGrid(omegas)


# -- algebra -------------------------------------------------------------------------

def test_feedback_with_static_gain():
    K = 0.7
    g = tf_feedback(lag, RationalTF((K,)))
    assert g.isclose(RationalTF((1.0,), (0.1 + K, 1.0)))


def test_multiplicative_identity():
    assert tf_mul(lag, RationalTF((1.0,))).isclose(lag)


def test_add_doubles():
    g = RationalTF((1.0,), (1.0, 1.0))
    assert tf_add(g, g).isclose(RationalTF((2.0,), (1.0, 1.0)))


def test_inverse_errors():
    with pytest.raises(NotInvertible):
        tf_inv(RationalTF((0.0,)))
    with pytest.raises(DegenerateFeedback):
        tf_feedback(RationalTF((1.0,)), RationalTF((-1.0,)))


def test_laplace_variable_builds_rational_functions():
    h = 1 / (s / 30 + 1)
    assert relative_degree(h) == 1
    assert tf_eval(h, 30j) == pytest.approx(1 / (1 + 1j))


def test_zero_denominator_rejected():
    with pytest.raises(InvalidParameter):
        RationalTF((1.0,), (0.0,))


# -- poles and relative degree ---------------------------------------------------------

def test_poles_of_lag():
    np.testing.assert_allclose(poles(lag), [-0.1])


def test_poles_match_quadratic_formula():
    pl = poles(RationalTF((1.0,), (2.0, 1.1, 1.0)))
    disc = cmath.sqrt(1.1 ** 2 - 8.0)
    expected = sorted([(-1.1 + disc) / 2, (-1.1 - disc) / 2], key=lambda z: z.imag)
    got = sorted(pl, key=lambda z: z.imag)
    np.testing.assert_allclose(got, expected, atol=1e-14)
    assert got[0] == pytest.approx(np.conj(got[1]))


def test_constant_has_no_poles_or_zeros():
    assert poles(RationalTF((5.0,))).size == 0
    assert zeros(RationalTF((5.0,))).size == 0


def test_relative_degree_examples():
    assert relative_degree(RationalTF((1.0,), (1.0, 1 / 30))) == 1
    assert relative_degree(RationalTF((8 * 0.65, 1.3), (8.0, 1.0))) == 0
    assert relative_degree(RationalTF((1.0, 2.0))) == -1


# -- properties ----------------------------------------------------------------------

coef = st.floats(-5, 5, allow_nan=False).filter(lambda x: abs(x) > 1e-3)
poly = st.lists(coef, min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(num=poly, den=poly, w=st.floats(1e-3, 1e3))
def test_conjugate_symmetry(num, den, w):
    g = RationalTF(num, den)
    try:
        a, b = tf_eval(g, 1j * w), tf_eval(g, -1j * w)
    except EvaluationAtPole:
        return
    assert b == pytest.approx(np.conj(a), rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(n1=poly, d1=poly, n2=poly, d2=poly, seed=st.integers(0, 2 ** 32 - 1))
@example(n1=[1.0] * 4, d1=[1.0], n2=[1.0], d2=[1.0] * 4, seed=0)    # squared factor cancels
def test_feedback_matches_pointwise_formula(n1, d1, n2, d2, seed):
    a, b = RationalTF(n1, d1), RationalTF(n2, d2)
    try:
        fb = tf_feedback(a, b)
    except DegenerateFeedback:
        return
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=100) + 1j * rng.normal(size=100)
    checked = 0
    for z in pts:
        try:
            av, bv, fv = tf_eval(a, z), tf_eval(b, z), tf_eval(fb, z)
        except EvaluationAtPole:
            continue
        denom = 1 + av * bv
        if abs(denom) < 1e-6 or abs(fv) > 1e6:
            continue
        direct = av / denom
        assert abs(fv - direct) <= 1e-9 * max(1.0, abs(direct))
        checked += 1
    assert checked > 50


@settings(max_examples=60, deadline=None)
@given(den=st.lists(coef, min_size=2, max_size=6))
def test_reported_poles_are_roots(den):
    g = RationalTF((1.0,), den)
    d = g.den
    for p in poles(g):
        assert abs(d(p)) < 1e-6 * (1 + abs(p)) ** d.degree


@settings(max_examples=60, deadline=None)
@given(num=poly, den=poly)
def test_double_inverse_is_identity(num, den):
    g = RationalTF(num, den)
    if g.num.is_zero():
        return
    assert tf_inv(tf_inv(g)).isclose(g)
