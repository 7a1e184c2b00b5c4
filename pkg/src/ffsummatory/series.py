"""Exact power series for divisor counting functions.

Two independent routes to the summatory functions

    Q_k(X)   = sum over effective D with deg D < X of mu_k(D)
    F_Phi(X) = sum over effective D with deg D < X of Phi(D)

are provided.  The main route expands the Dirichlet series as a rational
function of u built from L(u):

    sum mu_k(D) u^deg D = Z(u) / Z(u^k)
    sum Phi(D) u^deg D  = Z(qu) / Z(u)

The oracle route multiplies local Euler factors over places, with the place
counts P_d obtained by Moebius inversion of the point counts.  The only data
shared by the two routes are the point counts N_m.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from .curve import LPolynomial
from .errors import NonIntegralError, OutOfRangeError

MAX_XMAX = 4096


@dataclass(frozen=True)
class IntegerSeries:
    """a_0 + a_1 u + ... + a_N u^N with arbitrary precision integer coefficients."""

    coeffs: tuple

    @classmethod
    def from_poly(cls, poly: Sequence[int], order: int) -> "IntegerSeries":
        c = [int(x) for x in poly[: order + 1]]
        return cls(tuple(c + [0] * (order + 1 - len(c))))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def __add__(self, other: "IntegerSeries") -> "IntegerSeries":
        n = min(self.order, other.order) + 1
        return IntegerSeries(tuple(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])))

    def __mul__(self, other: "IntegerSeries") -> "IntegerSeries":
        N = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [0] * (N + 1)
        nz_b = [(j, y) for j, y in enumerate(b[: N + 1]) if y]
        for i in range(N + 1):
            x = a[i]
            if not x:
                continue
            for j, y in nz_b:
                if i + j > N:
                    break
                out[i + j] += x * y
        return IntegerSeries(tuple(out))

    def inverse(self) -> "IntegerSeries":
        """Multiplicative inverse; requires a_0 = +-1."""
        a = self.coeffs
        if a[0] not in (1, -1):
            raise NonIntegralError(f"series with constant term {a[0]} has no integer inverse")
        N = self.order
        nz = [(i, x) for i, x in enumerate(a) if i and x]
        out = [0] * (N + 1)
        out[0] = a[0]
        for n in range(1, N + 1):
            s = 0
            for i, x in nz:
                if i > n:
                    break
                s += x * out[n - i]
            out[n] = -s * a[0]
        return IntegerSeries(tuple(out))

    def substitute(self, k: int) -> "IntegerSeries":
        """f(u^k), same truncation order."""
        out = [0] * (self.order + 1)
        for i, x in enumerate(self.coeffs):
            if i * k > self.order:
                break
            out[i * k] = x
        return IntegerSeries(tuple(out))

    def scale(self, c: int) -> "IntegerSeries":
        """f(cu)."""
        return IntegerSeries(tuple(x * c**i for i, x in enumerate(self.coeffs)))

    def prefix_sums(self) -> list[int]:
        out, s = [], 0
        for x in self.coeffs:
            s += x
            out.append(s)
        return out


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def rational_series(num: Sequence[int], den: Sequence[int], order: int) -> IntegerSeries:
    """Expansion of num(u)/den(u) to u^order for integer polynomials, den(0) = 1.

    Uses the linear recurrence c_n = num_n - sum_{i>=1} den_i c_{n-i}, which
    costs O(order * deg den) big-integer operations.
    """
    if den[0] != 1:
        raise NonIntegralError("denominator must have constant term 1")
    dnz = [(i, int(x)) for i, x in enumerate(den) if i and x]
    out = [0] * (order + 1)
    for n in range(order + 1):
        s = int(num[n]) if n < len(num) else 0
        for i, x in dnz:
            if i > n:
                break
            s -= x * out[n - i]
        out[n] = s
    return IntegerSeries(tuple(out))


def _substitute_poly(p: Sequence[int], k: int) -> list[int]:
    out = [0] * (k * (len(p) - 1) + 1)
    for i, x in enumerate(p):
        out[i * k] = x
    return out


def _scale_poly(p: Sequence[int], c: int) -> list[int]:
    return [x * c**i for i, x in enumerate(p)]


@dataclass(frozen=True)
class SummatoryTable:
    """values[X-1] = T(X) for X = 1..Xmax."""

    kind: str  # "kfree" or "totient"
    k: int | None
    values: tuple
    curve_id: str = ""

    @property
    def xmax(self) -> int:
        return len(self.values)

    def value(self, X: int) -> int:
        if not 1 <= X <= self.xmax:
            raise OutOfRangeError(f"X = {X} outside 1..{self.xmax}")
        return self.values[X - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["X", "value"])
        for X, v in enumerate(self.values, start=1):
            w.writerow([X, str(v)])
        return buf.getvalue()

    def to_json(self):
        return {
            "kind": self.kind,
            "k": self.k,
            "curve": self.curve_id,
            "xmax": self.xmax,
            "values": [str(v) for v in self.values],
        }


def _check_xmax(Xmax):
    if not 1 <= Xmax <= MAX_XMAX:
        raise OutOfRangeError(f"Xmax must be in 1..{MAX_XMAX}, got {Xmax}")


def _table(kind, k, series: IntegerSeries, curve_id) -> SummatoryTable:
    return SummatoryTable(kind, k, tuple(series.prefix_sums()), curve_id)


# --- main route -----------------------------------------------------------------

def zeta_series(L: LPolynomial, Xmax: int) -> IntegerSeries:
    """Z(u) to u^Xmax; coefficient n counts effective divisors of degree n."""
    den = poly_mul([1, -1], [1, -L.q])
    return rational_series(L.b, den, Xmax)


def kfree_series(L: LPolynomial, k: int, order: int) -> IntegerSeries:
    """Z(u)/Z(u^k) = L(u)(1-u^k)(1-qu^k) / ((1-u)(1-qu)L(u^k))."""
    if k < 2:
        raise OutOfRangeError(f"k must be >= 2, got {k}")
    q = L.q
    num = poly_mul(L.b, poly_mul(_substitute_poly([1, -1], k), _substitute_poly([1, -q], k)))
    den = poly_mul(poly_mul([1, -1], [1, -q]), _substitute_poly(L.b, k))
    return rational_series(num, den, order)


def totient_series(L: LPolynomial, order: int) -> IntegerSeries:
    """Z(qu)/Z(u) = L(qu)(1-u) / ((1-q^2 u)L(u))."""
    q = L.q
    num = poly_mul(_scale_poly(L.b, q), [1, -1])
    den = poly_mul([1, -q * q], L.b)
    return rational_series(num, den, order)


def summatory_kfree(L: LPolynomial, k: int, Xmax: int, curve_id: str = "") -> SummatoryTable:
    _check_xmax(Xmax)
    return _table("kfree", k, kfree_series(L, k, Xmax - 1), curve_id)


def summatory_totient(L: LPolynomial, Xmax: int, curve_id: str = "") -> SummatoryTable:
    _check_xmax(Xmax)
    return _table("totient", None, totient_series(L, Xmax - 1), curve_id)


# --- genus 0 closed forms ----------------------------------------------------------

def genus0_kfree(q: int, k: int, X: int) -> int:
    """Number of k-free monic polynomials over F_q of degree < X."""
    if X < 1 or k < 2:
        raise OutOfRangeError("need X >= 1 and k >= 2")
    total = (q**X - 1) // (q - 1)
    if X > k:
        total -= q * (q ** (X - k) - 1) // (q - 1)
    return total


def genus0_totient(q: int, X: int) -> int:
    """Sum of Phi over monic polynomials over F_q of degree < X."""
    if X < 1:
        raise OutOfRangeError("need X >= 1")
    num = q ** (2 * X - 1) + 1
    assert num % (q + 1) == 0
    return num // (q + 1)


def genus0_kfree_full(q: int, k: int, X: int) -> int:
    """Q_k(X) on P^1 (all places) from the finite-place closed form."""
    return sum(genus0_kfree(q, k, X - i) for i in range(k) if X - i >= 1)


def genus0_totient_full(q: int, X: int) -> int:
    """F_Phi(X) on P^1: the finite part convolved with the infinite place.

    The place at infinity has degree 1 and local factor
    1 + sum_{m>=1} (q^m - q^{m-1}) u^m.
    """
    total = 0
    for m in range(X):
        weight = 1 if m == 0 else q**m - q ** (m - 1)
        total += weight * genus0_totient(q, X - m)
    return total


# --- oracle route -------------------------------------------------------------------

def _mobius(n: int) -> int:
    res, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            res = -res
        d += 1
    if n > 1:
        res = -res
    return res


def prime_counts(counts: Sequence[int], dmax: int | None = None) -> list[int]:
    """P_d = (1/d) sum_{e | d} mu(e) N_{d/e}, for d = 1..dmax."""
    dmax = len(counts) if dmax is None else dmax
    if len(counts) < dmax:
        raise OutOfRangeError(f"need N_1..N_{dmax}")
    out = []
    for d in range(1, dmax + 1):
        s = sum(_mobius(e) * counts[d // e - 1] for e in range(1, d + 1) if d % e == 0)
        if s % d:
            raise NonIntegralError(f"place count P_{d} = {s}/{d} is not an integer")
        out.append(s // d)
    return out


def series_power(a: Sequence[int], P: int, order: int) -> list[int]:
    """A(v)^P to v^order for a_0 = 1, by the J.C.P. Miller recurrence.

    n f_n = sum_{i=1}^{n} ((P + 1) i - n) a_i f_{n-i}; the division is exact.
    """
    f = [0] * (order + 1)
    f[0] = 1
    nz = [(i, int(x)) for i, x in enumerate(a) if i and x and i <= order]
    for n in range(1, order + 1):
        s = 0
        for i, x in nz:
            if i > n:
                break
            s += ((P + 1) * i - n) * x * f[n - i]
        if s % n:
            raise NonIntegralError("inexact division in series power")  # pragma: no cover
        f[n] = s // n
    return f


def _euler_product(places: Sequence[int], local, order: int) -> IntegerSeries:
    """prod over degrees d of local(d, order // d)^{P_d}, in u = v^d."""
    total = IntegerSeries.from_poly([1], order)
    for d, P in enumerate(places, start=1):
        if d > order or P == 0:
            continue
        m = order // d
        pw = series_power(local(d, m), P, m)
        spread = [0] * (order + 1)
        for i, x in enumerate(pw):
            spread[i * d] = x
        total = total * IntegerSeries(tuple(spread))
    return total


def oracle_kfree(places: Sequence[int], k: int, Xmax: int, curve_id: str = "") -> SummatoryTable:
    """Euler product of (1 + v + ... + v^{k-1})^{P_d}, v = u^d."""
    order = Xmax - 1
    if len(places) < order:
        raise OutOfRangeError(f"need place counts up to degree {order}")

    def local(d, m):
        return [1 if i < k else 0 for i in range(m + 1)]

    return _table("kfree", k, _euler_product(places, local, order), curve_id)


def oracle_totient(places: Sequence[int], q: int, Xmax: int, curve_id: str = "") -> SummatoryTable:
    """Euler product of (1 + sum_m (q^{dm} - q^{d(m-1)}) v^m)^{P_d}, v = u^d."""
    order = Xmax - 1
    if len(places) < order:
        raise OutOfRangeError(f"need place counts up to degree {order}")

    def local(d, m):
        return [1] + [q ** (d * j) - q ** (d * (j - 1)) for j in range(1, m + 1)]

    return _table("totient", None, _euler_product(places, local, order), curve_id)


def places_from_l(L: LPolynomial, dmax: int) -> list[int]:
    return prime_counts(L.point_counts(dmax), dmax)
