import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ffsummatory.curve import curve_l_polynomial, genus0_l_polynomial, inverse_zeros, parse_curve, synthetic_weil_polynomial
from ffsummatory.errors import NonConstantResidualError, NonSimpleZerosError, OutOfRangeError
from ffsummatory.explicit import (
    bound_kfree,
    bound_residue_class,
    bound_totient,
    build_model,
    empirical_sup,
    exact_remainder,
    global_normalizations,
    main_term,
    normalized_error,
    oscillatory_sum,
    residual_constant,
)
from ffsummatory.rmt import frobenius_angles, phi
from ffsummatory.series import SummatoryTable, summatory_kfree, summatory_totient

SIMPLE_CURVES = [
    "q=5;f=0,1,0,1",
    "q=3;f=1,2,0,1",
    "q=7;f=1,2,0,3,0,1",
    "q=9;f=4,1,0,0,0,1",
    "q=5;f=1,2,0,0,0,1",
]


def L_of(text):
    return curve_l_polynomial(parse_curve(text))


def test_main_term_worked_example():
    L = L_of("q=5;f=0,1,0,1")
    assert main_term(L, "kfree", 2).d == Fraction(6, 29)
    mt = main_term(L, "totient")
    assert mt.d == Fraction(1, 29) and mt.base == 25
    with pytest.raises(OutOfRangeError):
        main_term(L, "kfree", 1)


@pytest.mark.parametrize("text", SIMPLE_CURVES)
def test_main_term_is_leading_asymptotic(text):
    # T(X) / base^X converges to d; the error decays like q^{-X (1 - 1/2k)}
    L = L_of(text)
    X = 80
    for k in (2, 3):
        T = summatory_kfree(L, k, X)
        d = main_term(L, "kfree", k).d
        assert abs(Fraction(T.value(X), L.q**X) - d) < Fraction(1, 10**12)
    T = summatory_totient(L, X)
    d = main_term(L, "totient").d
    assert abs(Fraction(T.value(X), L.q ** (2 * X)) - d) < Fraction(1, 10**12)


@pytest.mark.parametrize("q", [2, 3, 5, 9])
def test_genus0_remainder_constant(q):
    L = genus0_l_polynomial(q)
    for k in (2, 3):
        T = summatory_kfree(L, k, 30)
        mt = main_term(L, "kfree", k)
        # the numerator has degree 2k, so small X see the polynomial part
        assert {exact_remainder(T, mt, X) for X in range(2 * k, 31)} == {k}
    T = summatory_totient(L, 30)
    mt = main_term(L, "totient")
    assert {exact_remainder(T, mt, X) for X in range(1, 31)} == {0}


@pytest.mark.parametrize("text", SIMPLE_CURVES)
def test_residual_constants(text):
    L = L_of(text)
    for k in (2, 3):
        m = build_model(L, kind="kfree", k=k)
        res = residual_constant(summatory_kfree(L, k, 40), m.mt, m)
        assert abs(res["epsilon"] - k) < 1e-12
        assert res["max_dev"] <= 1e-6 * abs(res["epsilon"]) + 1e-9
    m = build_model(L, kind="totient")
    res = residual_constant(summatory_totient(L, 40), m.mt, m)
    assert abs(res["epsilon"]) < 1e-12


def test_residual_detects_corruption():
    L = L_of("q=5;f=0,1,0,1")
    m = build_model(L, kind="kfree", k=2)
    T = summatory_kfree(L, 2, 40)
    vals = list(T.values)
    vals[20] += 1
    with pytest.raises(NonConstantResidualError):
        residual_constant(SummatoryTable(T.kind, T.k, tuple(vals)), m.mt, m)


@pytest.mark.parametrize("text", SIMPLE_CURVES)
def test_model_matches_exact_normalized_error(text):
    # R(X)/q^{X/2k} = E_M(X) + eps / q^{X/2k}
    L = L_of(text)
    for k in (2, 3):
        m = build_model(L, kind="kfree", k=k)
        T = summatory_kfree(L, k, 60)
        for X in range(20, 61):
            diff = normalized_error(T, m.mt, X).r_tilde - m.evaluate([X])[0]
            assert abs(diff - k / L.q ** (X / (2 * k))) < 1e-9


@pytest.mark.parametrize("text", SIMPLE_CURVES)
def test_sigma_consistency(text):
    L = L_of(text)
    for k in (2, 3, 4):
        m = build_model(L, kind="kfree", k=k)
        # summing sigma over residue classes keeps only l = 0
        assert np.allclose(m.sigma.sum(axis=0), k * m.amplitudes[:, 0])
        # the defining double sum and the sigma form agree
        X = np.arange(1, 200)
        assert np.allclose(m.evaluate(X), [oscillatory_sum(m, x) for x in X], atol=1e-10)
        # sigma_{a,j} = c_{j,a} gamma_j / Z'(1/gamma_j) up to the phase of gamma_j^{a/k}-type factors
        w = np.abs(m.gamma / m.zprime)
        assert np.allclose(np.abs(m.c) * w[:, None], np.abs(m.sigma.T))


@pytest.mark.parametrize("text", SIMPLE_CURVES[:3])
def test_double_precision_amplitudes_match_mpmath(text):
    L = L_of(text)
    m = build_model(L, kind="kfree", k=3)
    A = m.mp_data(40)["A"]
    for j in range(2 * L.g):
        for ell in range(3):
            ref = complex(A[j][ell])
            assert abs(m.amplitudes[j, ell] - ref) < 1e-10 * max(1.0, abs(ref))
    mt = build_model(L, kind="totient")
    T = mt.mp_data(40)["T"]
    assert np.allclose(mt.amplitudes, [complex(t) for t in T], rtol=1e-10)


@given(st.sampled_from(SIMPLE_CURVES), st.integers(2, 5), st.integers(1, 10**9))
def test_real_and_bounded(text, k, X0):
    L = L_of(text)
    m = build_model(L, kind="kfree", k=k)
    X = np.arange(X0, X0 + 500)
    vals = m.evaluate(X)
    tri = np.abs(m.sigma).sum(axis=1)
    assert np.all(np.abs(vals) <= tri[X % k] + 1e-9)
    # the residue-class bound uses only the primary half; the conjugate half doubles it
    Ba = bound_kfree(m)["B"]
    assert np.max(np.abs(vals)) <= 2 * Ba + 1e-9


def test_totient_bound_and_sup():
    L = L_of("q=7;f=1,2,0,3,0,1")
    m = build_model(L, kind="totient")
    B = bound_totient(m)
    assert B == pytest.approx(np.abs(m.amplitudes).sum())
    assert empirical_sup(m, 20000) <= B + 1e-9
    # over a long range the sup gets close to the bound for generic angles
    assert empirical_sup(m, 20000) > 0.9 * B


def test_non_simple_rejected():
    L = synthetic_weil_polynomial(5, [2, 2])
    with pytest.raises(NonSimpleZerosError):
        build_model(L, kind="kfree", k=2)
    with pytest.raises(NonSimpleZerosError):
        build_model(L_of("q=7;f=0,1,0,0,0,1"), kind="totient")


@pytest.mark.parametrize("q", [10007, 1000003, 100000007])
@pytest.mark.parametrize("shape", [[37], [50, -90], [11, -120, 70]])
def test_large_q_bounds_approach_phi(q, shape):
    traces = [int(t * math.sqrt(q) / 100) for t in shape]
    L = synthetic_weil_polynomial(q, traces)
    zs = inverse_zeros(L)
    g = L.g
    p = phi(frobenius_angles(zs))
    tol = 4 * g / math.sqrt(q)
    for k in (2, 3):
        m = build_model(L, zs, "kfree", k)
        a = bound_kfree(m)["argmax_a"]
        assert a == (2 * g) % k
        r = bound_residue_class(m, a)
        assert r["normalized"] and r["b"] == 0
        assert abs(r["B_a_normalized"] / p - 1) < tol
        assert abs(global_normalizations(m)["Btilde_kfree"] / p - 1) < tol
    m = build_model(L, zs, "totient")
    assert abs(global_normalizations(m)["Btilde_totient"] / p - 1) < tol


def test_residue_class_range():
    m = build_model(L_of("q=5;f=0,1,0,1"), kind="kfree", k=3)
    with pytest.raises(OutOfRangeError):
        bound_residue_class(m, 3)
    r = bound_residue_class(m, (2 * 1 + 2) % 3)
    assert not r["normalized"] and r["B_a_normalized"] is None
