"""Hyperelliptic curves y^2 = f(x), their point counts and zeta functions.

Z(u) = L(u) / ((1 - u)(1 - qu)) with L an integer polynomial of degree 2g.
L is recovered exactly from N_1..N_g through Newton's identities and the
functional equation; the inverse zeros gamma_j (L(u) = prod(1 - gamma_j u))
are computed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import polyroots
from .errors import (
    CurveSpecError,
    EvenCharacteristicError,
    FieldTooLargeError,
    NonIntegralError,
    PoleError,
    RHViolationError,
    SingularCurveError,
)
from .field import MAX_TABLE_Q, FieldSpec, field_table, parse_field

RH_TOL = 1e-6
POLE_EPS = 1e-12


# --- polynomial helpers over F_q (lists of FieldElement) ----------------------

def _fq_trim(a):
    a = list(a)
    while a and a[-1].is_zero():
        a.pop()
    return a


def _fq_mod(a, m):
    a = list(a)
    m = _fq_trim(m)
    dm = len(m) - 1
    inv_lead = m[-1].inv()
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] * inv_lead
        if not c.is_zero():
            for j in range(dm + 1):
                a[i - dm + j] = a[i - dm + j] - c * m[j]
    return _fq_trim(a[:dm])


def fq_is_squarefree(f) -> bool:
    """gcd(f, f') == 1 for f given as FieldElements (ascending)."""
    f = _fq_trim(f)
    df = _fq_trim([f[i] * i for i in range(1, len(f))])
    if not df:
        return False
    a, b = f, df
    while b:
        a, b = b, _fq_mod(a, b)
    return len(a) == 1


# --- curves --------------------------------------------------------------------

@dataclass(frozen=True)
class HyperellipticCurve:
    """y^2 = f(x), f monic squarefree of odd degree 2g+1 over F_q.

    f holds integer codes of the coefficients (ascending); in F_{p^n} the
    code of c_0 + c_1 t + ... is c_0 + c_1 p + ...
    """

    field: FieldSpec
    f: tuple
    check: bool = dc_field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(int(c) % self.field.q for c in self.f))
        if not self.check:
            return
        if not self.field.odd:
            raise EvenCharacteristicError("hyperelliptic models need odd characteristic")
        f = list(self.f)
        while f and f[-1] == 0:
            f.pop()
        if len(f) != len(self.f):
            raise CurveSpecError("leading coefficient of f must be nonzero")
        deg = len(f) - 1
        if deg < 3 or deg % 2 == 0:
            raise CurveSpecError(f"deg f must be odd and >= 3, got {deg}")
        if f[-1] != 1:
            raise CurveSpecError("f must be monic")
        if not fq_is_squarefree([self.field.element(c) for c in f]):
            raise SingularCurveError(f"f = {list(f)} is not squarefree; y^2 = f(x) is singular")

    @property
    def genus(self) -> int:
        return (len(self.f) - 2) // 2

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def id(self) -> str:
        return f"q={self.field.q};f=" + ",".join(str(c) for c in self.f)

    def __str__(self):
        return self.id


def parse_curve(text: str) -> HyperellipticCurve:
    """Parse "q=<p>[^n];f=c0,c1,...".

    Coefficients are integers; over F_{p^n} with n > 1 they are read as
    codes (base-p digit expansions of the coefficient vector).
    """
    parts = {}
    for chunk in text.replace(" ", "").split(";"):
        if not chunk:
            continue
        if "=" not in chunk:
            raise CurveSpecError(f"malformed curve spec {text!r}")
        key, val = chunk.split("=", 1)
        parts[key.strip().lower()] = val
    if "q" not in parts or "f" not in parts:
        raise CurveSpecError(f"curve spec needs q= and f=: {text!r}")
    try:
        spec = parse_field(parts["q"])
        coeffs = [int(c) for c in parts["f"].split(",") if c != ""]
    except ValueError as exc:
        raise CurveSpecError(f"malformed curve spec {text!r}: {exc}") from None
    return HyperellipticCurve(spec, tuple(coeffs))


def count_points(curve: HyperellipticCurve, m: int = 1) -> int:
    """#C(F_{q^m}): one point at infinity plus sum over x of 1 + chi(f(x))."""
    return int(count_points_batch(curve.field, [curve.f], m)[0])


def count_points_batch(spec: FieldSpec, fs, m: int = 1) -> np.ndarray:
    """Point counts over F_{q^m} for many f over the same F_q (object ints)."""
    if not spec.odd:
        raise EvenCharacteristicError("point counting needs odd characteristic")
    if spec.q**m > MAX_TABLE_Q:
        raise FieldTooLargeError(f"F_{spec.q}^{m} too large for exhaustive counting")
    big = field_table(spec.p, spec.n * m)
    emb = big.embedding(spec)
    fs = np.asarray(fs, dtype=np.int64)
    coeffs = emb[fs]
    xs = np.arange(big.q, dtype=np.int64)
    out = np.empty(len(fs), dtype=np.int64)
    # keep the (B, Q) work array around a few million entries
    step = max(1, 4_000_000 // big.q)
    for s in range(0, len(fs), step):
        vals = big.horner(coeffs[s:s + step], xs)
        out[s:s + step] = 1 + big.q + big.chi[vals].sum(axis=1, dtype=np.int64)
    return out


def point_counts(curve: HyperellipticCurve, mmax: int | None = None) -> list[int]:
    mmax = curve.genus if mmax is None else mmax
    return [count_points(curve, m) for m in range(1, mmax + 1)]


# --- L-polynomials ---------------------------------------------------------------

@dataclass(frozen=True)
class LPolynomial:
    """L(u) = sum b_i u^i.  Construction does not validate; see ``validate``."""

    q: int
    g: int
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if len(self.b) != 2 * self.g + 1:
            raise CurveSpecError(f"L needs {2 * self.g + 1} coefficients, got {len(self.b)}")

    def functional_equation_ok(self) -> bool:
        q, g, b = self.q, self.g, self.b
        return all(b[2 * g - i] == q ** (g - i) * b[i] for i in range(g + 1))

    def validate(self):
        if self.b[0] != 1:
            raise NonIntegralError(f"L(0) = {self.b[0]} != 1")
        if not self.functional_equation_ok():
            raise NonIntegralError("L violates the functional equation")
        if self.class_number() <= 0:
            raise NonIntegralError("L(1) <= 0")
        return self

    def class_number(self) -> int:
        return sum(self.b)

    def __call__(self, u):
        return poly_eval(self.b, u)

    def derivative(self, u):
        return poly_eval([i * self.b[i] for i in range(1, len(self.b))], u) if self.g else 0 * u

    def reciprocal(self) -> list[int]:
        """Coefficients (ascending) of z^{2g} L(1/z), whose roots are the gamma_j."""
        return list(reversed(self.b))

    def power_sums(self, mmax: int) -> list[int]:
        """S_m = sum_j gamma_j^m for m = 1..mmax, exact."""
        b = list(self.b) + [0] * max(0, mmax + 1 - len(self.b))
        S = [0] * (mmax + 1)
        for m in range(1, mmax + 1):
            S[m] = -m * b[m] - sum(b[i] * S[m - i] for i in range(1, m))
        return S[1:]

    def point_counts(self, mmax: int) -> list[int]:
        """N_m = q^m + 1 - S_m for m = 1..mmax."""
        S = self.power_sums(mmax)
        return [self.q**m + 1 - S[m - 1] for m in range(1, mmax + 1)]

    def to_json(self):
        return {"q": self.q, "g": self.g, "b": [str(x) for x in self.b], "h": str(self.class_number())}


def class_number(L: LPolynomial) -> int:
    """h = L(1)."""
    return L.class_number()


def genus0_l_polynomial(q: int) -> LPolynomial:
    return LPolynomial(q, 0, (1,))


def l_polynomial(counts: Sequence[int], q: int, g: int) -> LPolynomial:
    """L from N_1..N_g via Newton's identities and the functional equation."""
    if len(counts) < g:
        raise CurveSpecError(f"need {g} point counts, got {len(counts)}")
    S = [q**m + 1 - int(counts[m - 1]) for m in range(1, g + 1)]
    b = [1] + [0] * (2 * g)
    for i in range(1, g + 1):
        num = -sum(S[m - 1] * b[i - m] for m in range(1, i + 1))
        if num % i:
            raise NonIntegralError(
                f"Newton recursion gives b_{i} = {Fraction(num, i)}; point counts are inconsistent"
            )
        b[i] = num // i
    for i in range(g):
        b[2 * g - i] = q ** (g - i) * b[i]
    return LPolynomial(q, g, tuple(b))


def curve_l_polynomial(curve: HyperellipticCurve) -> LPolynomial:
    return l_polynomial(point_counts(curve), curve.q, curve.genus)


def synthetic_weil_polynomial(q: int, traces: Sequence[int]) -> LPolynomial:
    """prod_j (1 - a_j u + q u^2) for integers |a_j| < 2 sqrt(q).

    An integer polynomial with the shape of an L-polynomial and angles
    arccos(a_j / (2 sqrt q)); used to probe large-q behaviour without a curve.
    """
    b = [1]
    for a in traces:
        if a * a >= 4 * q:
            raise CurveSpecError(f"|a| = {abs(a)} must be < 2 sqrt(q)")
        fac = [1, -int(a), q]
        out = [0] * (len(b) + 2)
        for i, x in enumerate(b):
            for j, y in enumerate(fac):
                out[i + j] += x * y
        b = out
    return LPolynomial(q, len(traces), tuple(b))


# --- evaluation --------------------------------------------------------------------

def poly_eval(coeffs, u):
    acc = 0 * u
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc


def _is_exact(u):
    return isinstance(u, (int, Fraction))


def _check_pole(q, u):
    if _is_exact(u):
        u = Fraction(u)
        if u == 1 or u == Fraction(1, q):
            raise PoleError(str(u))
        return u
    if isinstance(u, (mpmath.mpc, mpmath.mpf)):
        near = min(abs(u - 1), abs(u - mpmath.mpf(1) / q))
    else:
        near = min(abs(u - 1), abs(u - 1 / q))
    if near <= POLE_EPS:
        raise PoleError(str(u))
    return u


def zeta_eval(L: LPolynomial, u):
    """Z(u) = L(u)/((1-u)(1-qu)); exact for int/Fraction input."""
    u = _check_pole(L.q, u)
    return L(u) / ((1 - u) * (1 - L.q * u))


def zeta_derivative_at(L: LPolynomial, u):
    """Z'(u) by the quotient rule with D(u) = 1 - (1+q)u + qu^2."""
    u = _check_pole(L.q, u)
    q = L.q
    D = 1 - (1 + q) * u + q * u * u
    dD = -(1 + q) + 2 * q * u
    return (L.derivative(u) * D - L(u) * dD) / (D * D)


# --- inverse zeros -------------------------------------------------------------------

@dataclass(eq=False)
class InverseZeroSet:
    """gamma_j with L(u) = prod(1 - gamma_j u).

    Entries 0..g-1 are the primary half sorted by ascending theta in [0, pi];
    entry j + g is the conjugate of entry j and theta[j + g] = -theta[j].
    ``multiplicity`` is per entry (a double zero fills two entries).
    """

    q: int
    g: int
    gamma: np.ndarray
    theta: np.ndarray
    multiplicity: tuple
    simple: bool

    def max_rh_deviation(self) -> float:
        if self.g == 0:
            return 0.0
        return float(np.max(np.abs(np.abs(self.gamma) - math.sqrt(self.q))))

    def to_json(self):
        return [
            {"re": float(z.real), "im": float(z.imag), "theta": float(t), "multiplicity": int(m)}
            for z, t, m in zip(self.gamma, self.theta, self.multiplicity)
        ]


def _arrange(q, g, roots, mults):
    """Order distinct roots (with multiplicities) into the primary/conjugate layout.

    A real root +-sqrt(q) of multiplicity m contributes m/2 primary entries
    (its multiplicity is always even for an L-polynomial).
    """
    sq = math.sqrt(q)
    primary = []
    for z, m in zip(roots, mults):
        if abs(z.imag) <= 1e-7 * sq:
            if m % 2:
                raise RHViolationError(f"real inverse zero {z.real} has odd multiplicity {m}")
            primary.extend([(complex(z.real, 0.0), m)] * (m // 2))
        elif z.imag > 0:
            primary.extend([(z, m)] * m)
    if len(primary) != g:
        raise RHViolationError(f"inverse zeros do not pair into conjugates: {list(roots)}")
    primary.sort(key=lambda zm: math.atan2(max(zm[0].imag, 0.0), zm[0].real))
    zp = np.array([z for z, _ in primary], dtype=complex)
    theta_p = np.array([math.atan2(max(z.imag, 0.0), z.real) for z in zp])
    gamma = np.concatenate([zp, np.conj(zp)])
    theta = np.concatenate([theta_p, -theta_p])
    mult = tuple(m for _, m in primary) * 2
    return gamma, theta, mult


def inverse_zeros(L: LPolynomial, rh_tol: float = RH_TOL) -> InverseZeroSet:
    q, g = L.q, L.g
    if g == 0:
        e = np.zeros(0)
        return InverseZeroSet(q, 0, e.astype(complex), e, (), True)
    roots, mults = polyroots.roots_with_multiplicity(L.reciprocal(), radius=math.sqrt(q))
    gamma, theta, mult = _arrange(q, g, roots, mults)
    zs = InverseZeroSet(q, g, gamma, theta, mult, all(m == 1 for m in mult))
    dev = zs.max_rh_deviation()
    if dev > rh_tol:
        raise RHViolationError(f"max | |gamma| - sqrt(q) | = {dev:.3e} exceeds {rh_tol}")
    return zs


def inverse_zeros_batch(Ls: Sequence[LPolynomial]) -> list[InverseZeroSet]:
    """inverse_zeros for many L of one (q, g); simple ones share one batched iteration."""
    if not Ls:
        return []
    q, g = Ls[0].q, Ls[0].g
    out: list = [None] * len(Ls)
    simple_idx = []
    for i, L in enumerate(Ls):
        if polyroots.discriminant_is_zero(L.reciprocal()):
            out[i] = inverse_zeros(L)
        else:
            simple_idx.append(i)
    if simple_idx:
        coeffs = np.array([Ls[i].reciprocal() for i in simple_idx], dtype=float)
        roots, _ = polyroots.durand_kerner(coeffs, radius=math.sqrt(q))
        roots = polyroots.newton_polish(coeffs, roots)
        for row, i in enumerate(simple_idx):
            gamma, theta, mult = _arrange(q, g, roots[row], [1] * (2 * g))
            zs = InverseZeroSet(q, g, gamma, theta, mult, True)
            dev = zs.max_rh_deviation()
            if dev > RH_TOL:
                raise RHViolationError(f"max | |gamma| - sqrt(q) | = {dev:.3e} for L = {Ls[i].b}")
            out[i] = zs
    return out


def refine_zeros(L: LPolynomial, zeros: InverseZeroSet, dps: int):
    """Newton-polish simple inverse zeros to ``dps`` digits with mpmath.

    Returns a list of mpc values in the same order as ``zeros.gamma``.
    """
    coeffs = L.reciprocal()
    dcoeffs = [i * coeffs[i] for i in range(1, len(coeffs))]
    out = []
    with mpmath.workdps(dps + 10):
        tol = mpmath.mpf(10) ** (-(dps + 5)) * mpmath.sqrt(L.q)
        for z0 in zeros.gamma:
            z = mpmath.mpc(z0.real, z0.imag)
            for _ in range(200):
                step = poly_eval(coeffs, z) / poly_eval(dcoeffs, z)
                z -= step
                if abs(step) < tol:
                    break
            out.append(z)
    return out
