"""Finite fields F_{p^n}.

Two layers live here.  ``FieldSpec``/``FieldElement`` are small immutable
value types with scalar arithmetic (used for parsing, tests and anything that
touches a handful of elements).  ``FieldTable`` is the vectorised layer used
for point counting: elements are integer codes sum(c_i p^i), multiplication
goes through discrete log / exp tables and addition through digit arithmetic,
so a whole field can be pushed through a polynomial with a few numpy calls.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DivisionByZeroError,
    EvenCharacteristicError,
    FieldMismatchError,
    FieldOverflowError,
    FieldTooLargeError,
    NonPrimeError,
)

MAX_Q = 2**63
# largest field for which FieldTable builds log/exp tables
MAX_TABLE_Q = 1 << 22


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for s in small:
        if n % s == 0:
            return n == s
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomials over F_p, ascending coefficient lists ----------------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a, m, p):
    """Remainder of a modulo m over F_p (m need not be monic)."""
    a = [x % p for x in a]
    m = _trim([x % p for x in m])
    dm = len(m) - 1
    inv_lead = pow(m[-1], -1, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] * inv_lead % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return _trim(a[:dm]) if dm > 0 else []


def poly_mulmod(a, b, m, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return poly_mod(out, m, p)


def poly_powmod(a, e, m, p):
    result, base = [1], poly_mod(a, m, p)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, m, p)
        base = poly_mulmod(base, base, m, p)
        e >>= 1
    return result


def poly_gcd(a, b, p):
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        a, b = b, poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def is_irreducible(f, p) -> bool:
    """Rabin's test for a monic polynomial f over F_p."""
    f = _trim([x % p for x in f])
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    if poly_sub(poly_powmod(x, p**n, f, p), x, p):
        return False
    for r in prime_factors(n):
        h = poly_sub(poly_powmod(x, p ** (n // r), f, p), x, p)
        if len(poly_gcd(f, h, p)) != 1:
            return False
    return True


# --- scalar layer ------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    p: int
    n: int
    modulus: tuple
    q: int

    def __str__(self):
        return f"{self.p}^{self.n}"

    @property
    def odd(self) -> bool:
        return self.p != 2

    def element(self, value) -> "FieldElement":
        """Element from an integer code sum(c_i p^i) or a coefficient sequence."""
        if isinstance(value, FieldElement):
            if value.spec != self:
                raise FieldMismatchError(f"element of F_{value.spec} used in F_{self}")
            return value
        if isinstance(value, (int, np.integer)):
            if self.n == 1:
                return FieldElement(self, (int(value) % self.p,))
            v = int(value) % self.q
            digits = []
            for _ in range(self.n):
                v, d = divmod(v, self.p)
                digits.append(d)
            return FieldElement(self, tuple(digits))
        coeffs = [int(c) % self.p for c in value]
        if len(coeffs) > self.n:
            coeffs = poly_mod(coeffs, self.modulus, self.p) if self.n > 1 else [sum(coeffs) % self.p]
        coeffs = coeffs + [0] * (self.n - len(coeffs))
        return FieldElement(self, tuple(coeffs))

    def zero(self):
        return self.element(0)

    def one(self):
        return self.element(1)

    def generator(self):
        """The class of x (for n = 1 this is just 0, the root of the modulus)."""
        return self.element([0, 1]) if self.n > 1 else self.zero()

    def elements(self):
        for c in range(self.q):
            yield self.element(c)


@lru_cache(maxsize=None)
def construct_field(p: int, n: int = 1) -> FieldSpec:
    """F_{p^n} with the lexicographically first monic irreducible modulus.

    Candidates c_0 + c_1 x + ... + x^n are scanned in lexicographic order of
    (c_0, ..., c_{n-1}).  For n = 1 the modulus is x and arithmetic is plain
    arithmetic mod p.
    """
    p, n = int(p), int(n)
    if not is_prime(p):
        raise NonPrimeError(f"{p} is not prime")
    if n < 1:
        raise FieldOverflowError(f"extension degree must be >= 1, got {n}")
    if p**n > MAX_Q:
        raise FieldOverflowError(f"{p}^{n} exceeds 2^63")
    if n == 1:
        return FieldSpec(p, 1, (0, 1), p)
    for tail in itertools.product(range(p), repeat=n):
        if tail[0] == 0:
            continue
        cand = list(tail) + [1]
        if is_irreducible(cand, p):
            return FieldSpec(p, n, tuple(cand), p**n)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


def parse_field(text: str) -> FieldSpec:
    """Parse "p" or "p^n"."""
    text = text.strip()
    if "^" in text:
        a, b = text.split("^", 1)
        return construct_field(int(a), int(b))
    value = int(text)
    if is_prime(value):
        return construct_field(value, 1)
    for p in prime_factors(value)[:1]:
        n, v = 0, value
        while v % p == 0:
            v //= p
            n += 1
        if v == 1:
            return construct_field(p, n)
    raise NonPrimeError(f"{value} is not a prime power")


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    coeffs: tuple

    def _check(self, other):
        if isinstance(other, (int, np.integer)):
            # plain integers act through the prime field
            return self.spec.element(int(other) % self.spec.p)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise FieldMismatchError(f"F_{self.spec} and F_{other.spec} elements mixed")
        return other

    @property
    def code(self) -> int:
        return sum(c * self.spec.p**i for i, c in enumerate(self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.spec.p
        return FieldElement(self.spec, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.spec.p
        return FieldElement(self.spec, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        s = self.spec
        if s.n == 1:
            return FieldElement(s, ((self.coeffs[0] * other.coeffs[0]) % s.p,))
        prod = poly_mulmod(list(self.coeffs), list(other.coeffs), s.modulus, s.p)
        return s.element(prod)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inv() ** (-e)
        result, base = self.spec.one(), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inv(self):
        if self.is_zero():
            raise DivisionByZeroError(f"0 has no inverse in F_{self.spec}")
        return self ** (self.spec.q - 2)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def __repr__(self):
        return f"F{self.spec}({list(self.coeffs)})"


def field_arith(a: FieldElement, b: FieldElement | None, op: str, e: int | None = None) -> FieldElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inv()
    if op == "pow":
        return a ** e
    raise ValueError(f"unknown operation {op!r}")


def quadratic_character(a: FieldElement) -> int:
    s = a.spec
    if not s.odd:
        raise EvenCharacteristicError(f"quadratic character needs odd characteristic, got F_{s}")
    if a.is_zero():
        return 0
    r = a ** ((s.q - 1) // 2)
    return 1 if r == s.one() else -1


# --- vectorised layer --------------------------------------------------------

class FieldTable:
    """Whole-field lookup tables for F_q with q <= MAX_TABLE_Q.

    Elements are int64 codes.  ``log[0]`` is unused; ``exp`` has length
    2(q-1) so that log sums need no reduction.
    """

    def __init__(self, spec: FieldSpec):
        if spec.q > MAX_TABLE_Q:
            raise FieldTooLargeError(f"F_{spec} too large for table arithmetic")
        self.spec = spec
        p, n, q = spec.p, spec.n, spec.q
        self.p, self.n, self.q = p, n, q
        self.powers = p ** np.arange(n, dtype=np.int64)
        codes = np.arange(q, dtype=np.int64)
        self.digits = (codes[:, None] // self.powers[None, :]) % p
        self.exp, self.log = self._log_tables()
        # log parity is the quadratic character for odd q
        chi = np.zeros(q, dtype=np.int8)
        if p != 2:
            chi[1:] = np.where(self.log[1:] % 2 == 0, 1, -1)
        else:
            chi[1:] = 1
        self.chi = chi
        self.neg_codes = self.encode((-self.digits) % p)

    def encode(self, digits):
        return (np.asarray(digits, dtype=np.int64) * self.powers).sum(axis=-1)

    def _mul_by_x(self, d):
        """Multiply the digit vector d (length n) by x modulo the modulus."""
        p, n = self.p, self.n
        if n == 1:
            return d
        top = d[-1]
        out = np.empty_like(d)
        out[0] = 0
        out[1:] = d[:-1]
        mod = np.asarray(self.spec.modulus[:n], dtype=np.int64)
        return (out - top * mod) % p

    def _log_tables(self):
        p, n, q = self.p, self.n, self.q
        order = q - 1
        if order == 0:
            return np.array([0, 0], dtype=np.int64), np.zeros(q, dtype=np.int64)
        factors = prime_factors(order)
        spec = self.spec
        gen = None
        for c in range(1, q):
            el = spec.element(c)
            if all(el ** (order // r) != spec.one() for r in factors):
                gen = el
                break
        # build exp table by repeated multiplication by gen, vectorised over digits
        exp = np.empty(2 * order, dtype=np.int64)
        if n == 1:
            g = gen.coeffs[0]
            v = 1
            for i in range(order):
                exp[i] = v
                v = v * g % p
        else:
            # multiplication-by-gen matrix on digit vectors
            mat = np.zeros((n, n), dtype=np.int64)
            basis = np.eye(n, dtype=np.int64)
            gd = np.asarray(gen.coeffs, dtype=np.int64)
            for col in range(n):
                # gen * x^col
                v = gd.copy()
                for _ in range(col):
                    v = self._mul_by_x(v)
                mat[:, col] = v
            del basis
            v = np.zeros(n, dtype=np.int64)
            v[0] = 1
            pw = self.powers
            for i in range(order):
                exp[i] = int(v @ pw)
                v = (mat @ v) % p
        exp[order:] = exp[:order]
        log = np.zeros(q, dtype=np.int64)
        log[exp[:order]] = np.arange(order, dtype=np.int64)
        return exp, log

    # arithmetic on code arrays
    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.n == 1:
            return (a + b) % self.p
        return self.encode((self.digits[a] + self.digits[b]) % self.p)

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.n == 1:
            return (a * b) % self.p
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def horner(self, coeffs, xs):
        """Evaluate polynomials at xs.

        coeffs: (B, d+1) codes, ascending degree; xs: (Q,) codes.
        Returns (B, Q) codes.
        """
        coeffs = np.asarray(coeffs, dtype=np.int64)
        xs = np.asarray(xs, dtype=np.int64)
        B, d1 = coeffs.shape
        acc = np.broadcast_to(coeffs[:, -1:], (B, xs.size)).copy()
        for i in range(d1 - 2, -1, -1):
            acc = self.add(self.mul(acc, xs[None, :]), coeffs[:, i:i + 1])
        return acc

    def embedding(self, small: FieldSpec) -> np.ndarray:
        """Codes in this field of the elements of a subfield ``small``.

        The subfield generator is sent to the smallest-code root of its
        modulus, so the map is deterministic.
        """
        if small.p != self.p or self.n % small.n:
            raise FieldMismatchError(f"F_{small} is not a subfield of F_{self.spec}")
        if small.n == 1:
            return np.arange(small.q, dtype=np.int64)
        all_codes = np.arange(self.q, dtype=np.int64)
        mod = np.asarray(small.modulus, dtype=np.int64)[None, :]
        vals = self.horner(mod, all_codes)[0]
        alpha = int(np.flatnonzero(vals == 0)[0])
        # powers of alpha
        pw = [1]
        for _ in range(small.n - 1):
            pw.append(int(self.mul(pw[-1], alpha)))
        out = np.zeros(small.q, dtype=np.int64)
        dig = (np.arange(small.q)[:, None] // (small.p ** np.arange(small.n))[None, :]) % small.p
        for i in range(small.n):
            term = self.mul(dig[:, i], pw[i])
            out = self.add(out, term)
        return out


@lru_cache(maxsize=16)
def field_table(p: int, n: int) -> FieldTable:
    return FieldTable(construct_field(p, n))
