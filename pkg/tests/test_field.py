import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ffsummatory.errors import (
    DivisionByZeroError,
    EvenCharacteristicError,
    FieldMismatchError,
    FieldOverflowError,
    NonPrimeError,
)
from ffsummatory.field import (
    construct_field,
    field_arith,
    field_table,
    is_irreducible,
    is_prime,
    parse_field,
    quadratic_character,
)

FIELDS = [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3), (2, 3), (3, 4)]


def has_no_factor(f, p):
    """Irreducibility by exhaustive division by every monic factor of degree <= n/2."""
    n = len(f) - 1
    for d in range(1, n // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            g = list(tail) + [1]
            r = list(f)
            for i in range(len(r) - 1, d - 1, -1):
                c = r[i]
                for j in range(d + 1):
                    r[i - d + j] = (r[i - d + j] - c * g[j]) % p
            if not any(r[:d]):
                return False
    return True


def test_construct_examples():
    assert construct_field(3, 2).modulus == (1, 0, 1)
    assert construct_field(5, 1).q == 5
    with pytest.raises(NonPrimeError):
        construct_field(4, 1)
    with pytest.raises(FieldOverflowError):
        construct_field(3, 40)
    assert str(construct_field(3, 2)) == "3^2"


def test_modulus_is_lex_first_irreducible():
    for p, n in [(3, 2), (5, 2), (7, 2), (2, 3), (3, 3), (2, 4), (3, 4)]:
        spec = construct_field(p, n)
        first = None
        for tail in itertools.product(range(p), repeat=n):
            cand = list(tail) + [1]
            if has_no_factor(cand, p):
                first = tuple(cand)
                break
        assert spec.modulus == first


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (5, 2), (3, 3), (2, 5)])
def test_rabin_agrees_with_trial_division(p, n):
    for tail in itertools.product(range(p), repeat=n):
        cand = list(tail) + [1]
        assert is_irreducible(cand, p) == has_no_factor(cand, p)


def test_deterministic():
    construct_field.cache_clear()
    a = construct_field(5, 3)
    construct_field.cache_clear()
    b = construct_field(5, 3)
    assert a == b


def test_is_prime():
    small = [n for n in range(2, 2000) if all(n % d for d in range(2, int(n**0.5) + 1))]
    assert [n for n in range(2000) if is_prime(n)] == small
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)


def test_arith_examples():
    F5 = construct_field(5)
    assert field_arith(F5.element(2), None, "pow", 3) == F5.element(3)
    F9 = construct_field(3, 2)
    x = F9.generator()
    assert x * x == F9.element(2)
    with pytest.raises(DivisionByZeroError):
        F9.zero().inv()
    with pytest.raises(FieldMismatchError):
        F5.one() + F9.one()


@pytest.mark.parametrize("p,n", FIELDS)
def test_field_laws_exhaustive_inverse(p, n):
    F = construct_field(p, n)
    one = F.one()
    for a in F.elements():
        if a:
            assert a * a.inv() == one
            assert a ** (F.q - 1) == one


@given(st.sampled_from(FIELDS), st.data())
def test_field_axioms(pn, data):
    F = construct_field(*pn)
    a, b, c = (F.element(data.draw(st.integers(0, F.q - 1))) for _ in range(3))
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == F.zero()
    e = data.draw(st.integers(0, 3 * F.q))
    naive = F.one()
    for _ in range(e):
        naive = naive * a
    assert a**e == naive


def test_quadratic_character_examples():
    F5 = construct_field(5)
    assert quadratic_character(F5.element(4)) == 1
    assert quadratic_character(F5.element(2)) == -1
    assert quadratic_character(F5.element(0)) == 0
    with pytest.raises(EvenCharacteristicError):
        quadratic_character(construct_field(2, 2).one())


@pytest.mark.parametrize("p,n", [(3, 1), (5, 1), (3, 2), (5, 2), (7, 2), (3, 3), (3, 4)])
def test_character_exhaustive(p, n):
    F = construct_field(p, n)
    els = list(F.elements())
    chi = {a.code: quadratic_character(a) for a in els}
    squares = {(a * a).code for a in els if a}
    assert sum(1 for v in chi.values() if v == 1) == (F.q - 1) // 2
    assert all((chi[c] == 1) == (c in squares) for c in chi if c)
    for a in els[1:]:
        for b in els[1:]:
            assert chi[(a * b).code] == chi[a.code] * chi[b.code]


@pytest.mark.parametrize("p,n", [(3, 1), (5, 1), (3, 2), (5, 2), (3, 3), (2, 3)])
def test_table_matches_scalar(p, n):
    F = construct_field(p, n)
    T = field_table(p, n)
    a, b = np.meshgrid(np.arange(F.q), np.arange(F.q))
    prod = T.mul(a, b)
    summ = T.add(a, b)
    for x, y in zip(a.ravel(), b.ravel()):
        assert prod[y, x] == (F.element(int(x)) * F.element(int(y))).code
        assert summ[y, x] == (F.element(int(x)) + F.element(int(y))).code
    if p != 2:
        assert all(T.chi[c] == quadratic_character(F.element(c)) for c in range(F.q))


@pytest.mark.parametrize("small,big", [((3, 1), (3, 2)), ((3, 2), (3, 4)), ((5, 1), (5, 2)), ((3, 1), (3, 3))])
def test_embedding_is_homomorphism(small, big):
    S = construct_field(*small)
    T = field_table(*big)
    e = T.embedding(S)
    assert len(set(e.tolist())) == S.q
    for a in range(S.q):
        for b in range(S.q):
            A, B = S.element(a), S.element(b)
            assert T.mul(e[a], e[b]) == e[(A * B).code]
            assert T.add(e[a], e[b]) == e[(A + B).code]


def test_parse_field():
    assert parse_field("3^2") == construct_field(3, 2)
    assert parse_field("9") == construct_field(3, 2)
    assert parse_field("7") == construct_field(7)
    with pytest.raises(NonPrimeError):
        parse_field("6")
