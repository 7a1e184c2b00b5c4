import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ffsummatory.curve import LPolynomial, curve_l_polynomial, genus0_l_polynomial, parse_curve, synthetic_weil_polynomial
from ffsummatory.errors import NonIntegralError, OutOfRangeError
from ffsummatory.series import (
    IntegerSeries,
    genus0_kfree,
    genus0_kfree_full,
    genus0_totient,
    genus0_totient_full,
    oracle_kfree,
    oracle_totient,
    places_from_l,
    prime_counts,
    rational_series,
    series_power,
    summatory_kfree,
    summatory_totient,
    zeta_series,
)

ORACLE_CURVES = [
    "q=5;f=0,1,0,1",
    "q=3;f=1,2,0,1",
    "q=7;f=1,2,0,3,0,1",
    "q=9;f=4,1,0,0,0,1",
    "q=3;f=0,1,0,0,0,1",
    "q=5;f=1,1,0,0,0,1",
]

ints = st.integers(-50, 50)


# --- brute force over F_p[x] ---------------------------------------------------------

def monic(p, d):
    for tail in itertools.product(range(p), repeat=d):
        yield tuple(tail) + (1,)


def pmod(a, b, p):
    a = list(a)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        s = len(a) - len(b)
        for i, y in enumerate(b):
            a[s + i] = (a[s + i] - c * y) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def pmul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return tuple(out)


def is_kfree(f, p, k):
    for d in range(1, (len(f) - 1) // k + 1):
        for P in monic(p, d):
            Pk = (1,)
            for _ in range(k):
                Pk = pmul(Pk, P, p)
            if not pmod(f, Pk, p):
                return False
    return True


def pgcd_is_one(a, b, p):
    while b:
        a, b = b, pmod(a, b, p)
    return len(a) == 1


def totient(f, p):
    d = len(f) - 1
    if d == 0:
        return 1
    count = 0
    for g in itertools.product(range(p), repeat=d):
        g = list(g)
        while g and g[-1] == 0:
            g.pop()
        if g and pgcd_is_one(list(f), g, p):
            count += 1
    return count


@pytest.mark.parametrize("p,k", [(3, 2), (3, 3), (5, 2), (2, 2)])
def test_genus0_kfree_brute(p, k):
    for X in range(1, 6):
        brute = sum(1 for d in range(X) for f in monic(p, d) if is_kfree(f, p, k))
        assert genus0_kfree(p, k, X) == brute


@pytest.mark.parametrize("p", [2, 3])
def test_genus0_totient_brute(p):
    for X in range(1, 5):
        brute = sum(totient(f, p) for d in range(X) for f in monic(p, d))
        assert genus0_totient(p, X) == brute


@pytest.mark.parametrize("q", [2, 3, 5, 9, 11])
def test_genus0_full_matches_l_equals_one(q):
    L = genus0_l_polynomial(q)
    for k in (2, 3):
        T = summatory_kfree(L, k, 20)
        assert [genus0_kfree_full(q, k, X) for X in range(1, 21)] == list(T.values)
    T = summatory_totient(L, 20)
    assert [genus0_totient_full(q, X) for X in range(1, 21)] == list(T.values)


# --- series arithmetic -------------------------------------------------------------------

@given(st.lists(ints, min_size=1, max_size=8), st.lists(ints, min_size=1, max_size=8))
def test_series_mul_matches_numpy(a, b):
    N = 10
    prod = IntegerSeries.from_poly(a, N) * IntegerSeries.from_poly(b, N)
    ref = np.polynomial.polynomial.polymul(np.array(a, dtype=object), np.array(b, dtype=object))
    ref = list(ref) + [0] * (N + 1)
    assert list(prod.coeffs) == [int(x) for x in ref[: N + 1]]


@given(st.lists(ints, min_size=0, max_size=8), st.sampled_from([1, -1]))
def test_series_inverse(tail, a0):
    s = IntegerSeries.from_poly([a0] + tail, 12)
    one = s * s.inverse()
    assert one.coeffs == (1,) + (0,) * 12


def test_series_inverse_needs_unit():
    with pytest.raises(NonIntegralError):
        IntegerSeries.from_poly([2, 1], 4).inverse()


@given(st.lists(ints, min_size=1, max_size=6), st.lists(ints, min_size=0, max_size=5))
def test_rational_series_identity(num, den_tail):
    den = [1] + den_tail
    N = 15
    s = rational_series(num, den, N)
    back = s * IntegerSeries.from_poly(den, N)
    assert back.coeffs == IntegerSeries.from_poly(num, N).coeffs


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5), st.integers(0, 6))
def test_series_power_matches_repeated_product(tail, P):
    a = [1] + tail
    N = 10
    ref = IntegerSeries.from_poly([1], N)
    for _ in range(P):
        ref = ref * IntegerSeries.from_poly(a, N)
    assert series_power(a, P, N) == list(ref.coeffs)


def test_prime_counts_examples():
    # P^1 over F_q: q + 1 places of degree 1, (q^2 - q)/2 of degree 2
    q = 5
    assert prime_counts([q**m + 1 for m in range(1, 5)]) == [6, 10, 40, 150]
    assert places_from_l(curve_l_polynomial(parse_curve("q=5;f=0,1,0,1")), 2) == [4, 14]
    with pytest.raises(NonIntegralError):
        prime_counts([4, 33])


# --- summatory tables --------------------------------------------------------------------

def test_zeta_series_divisor_counts():
    for text in ORACLE_CURVES:
        L = curve_l_polynomial(parse_curve(text))
        q, g, h = L.q, L.g, L.class_number()
        c = zeta_series(L, 30).coeffs
        for n in range(2 * g - 1, 31):
            assert c[n] == h * (q ** (n + 1 - g) - 1) // (q - 1)


@pytest.mark.parametrize("text", ORACLE_CURVES)
def test_oracle_equivalence(text):
    L = curve_l_polynomial(parse_curve(text))
    X = 40
    places = places_from_l(L, X)
    for k in (2, 3, 4):
        assert summatory_kfree(L, k, X).values == oracle_kfree(places, k, X).values
    assert summatory_totient(L, X).values == oracle_totient(places, L.q, X).values


@given(st.sampled_from([5, 7, 11]), st.lists(st.integers(-4, 4), min_size=1, max_size=3))
def test_oracle_equivalence_synthetic(q, traces):
    L = synthetic_weil_polynomial(q, traces)
    try:
        places = places_from_l(L, 25)
    except NonIntegralError:
        return
    if min(places) < 0:
        return
    assert summatory_kfree(L, 2, 25).values == oracle_kfree(places, 2, 25).values
    assert summatory_totient(L, 25).values == oracle_totient(places, q, 25).values


@pytest.mark.parametrize("text", ORACLE_CURVES)
def test_tables_monotone_and_positive(text):
    L = curve_l_polynomial(parse_curve(text))
    for T in (summatory_kfree(L, 2, 60), summatory_totient(L, 60)):
        v = T.values
        assert v[0] == 1
        assert all(b >= a for a, b in zip(v, v[1:]))


def test_table_range_and_formats():
    L = curve_l_polynomial(parse_curve("q=5;f=0,1,0,1"))
    T = summatory_kfree(L, 2, 5, "c")
    with pytest.raises(OutOfRangeError):
        T.value(6)
    with pytest.raises(OutOfRangeError):
        summatory_kfree(L, 2, 0)
    with pytest.raises(OutOfRangeError):
        summatory_kfree(L, 1, 5)
    assert T.to_csv().splitlines()[0] == "X,value"
    assert T.to_json()["values"][0] == "1"
