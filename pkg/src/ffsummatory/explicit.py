"""Main terms, oscillatory error terms and their bounds.

For a curve with simple zeros the summatory functions split as

    Q_k(X)   = d_k q^X      - sum_{j,l} A_{j,l} gamma_{j,l}^X + eps_k
    F_Phi(X) = d_Phi q^{2X} - sum_j T_j gamma_j^X            + eps_Phi

where gamma_{j,l} = q^{1/2k} exp(i(theta_j + 2 pi l)/k) runs over the k-th
roots of gamma_j and eps is a constant.  After dividing by q^{X/2k}
(resp. q^{X/2}) the oscillating part is

    E_k(X)   = -sum_j sigma_{X mod k, j} exp(i X theta_j / k)
    E_Phi(X) = -sum_j T_j exp(i X theta_j)

``ErrorTermModel`` stores these coefficients in complex doubles for fast
sampling and recomputes them with mpmath at any requested precision for the
exact residual check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .curve import (
    InverseZeroSet,
    LPolynomial,
    inverse_zeros,
    refine_zeros,
    zeta_derivative_at,
    zeta_eval,
)
from .errors import (
    ImaginaryResidueError,
    NonConstantResidualError,
    NonSimpleZerosError,
    OutOfRangeError,
)
from .series import SummatoryTable

IMAG_TOL = 1e-9
RESIDUAL_REL_TOL = 1e-6
RESIDUAL_ABS_TOL = 1e-9


# --- main terms ------------------------------------------------------------------

@dataclass(frozen=True)
class MainTermConstants:
    kind: str
    k: int | None
    d: Fraction
    base: int

    def value(self, X: int) -> Fraction:
        return self.d * self.base**X

    def to_json(self):
        return {"kind": self.kind, "k": self.k, "d": str(self.d), "d_float": float(self.d), "base": self.base}


def main_term(L: LPolynomial, kind: str, k: int | None = None) -> MainTermConstants:
    """kfree: d = q^{1-g} h / (zeta(k) (q-1)^2), base q.
    totient: d = q^{-g} h / (zeta(2) (1 - 1/q)(q^2 - 1)), base q^2.
    zeta(s) means Z(q^{-s}), evaluated exactly.
    """
    q, g, h = L.q, L.g, L.class_number()
    if kind == "kfree":
        if k is None or k < 2:
            raise OutOfRangeError(f"k must be >= 2, got {k}")
        zk = zeta_eval(L, Fraction(1, q**k))
        d = Fraction(q) ** (1 - g) * h / (zk * (q - 1) ** 2)
        return MainTermConstants("kfree", k, d, q)
    if kind == "totient":
        z2 = zeta_eval(L, Fraction(1, q * q))
        d = Fraction(q) ** (-g) * h / (z2 * (1 - Fraction(1, q)) * (q * q - 1))
        return MainTermConstants("totient", None, d, q * q)
    raise OutOfRangeError(f"unknown kind {kind!r}")


# --- amplitudes (vectorised doubles) ---------------------------------------------

def _polyval(coeffs, u):
    """coeffs (B, n) ascending, u (B, ...) -> (B, ...)."""
    coeffs = np.asarray(coeffs)
    acc = np.zeros_like(u, dtype=complex)
    extra = (slice(None),) + (None,) * (u.ndim - 1)
    for i in range(coeffs.shape[1] - 1, -1, -1):
        acc = acc * u + coeffs[:, i][extra]
    return acc


def _zeta_np(q, b, u):
    return _polyval(b, u) / ((1 - u) * (1 - q * u))


def _zeta_prime_np(q, b, u):
    db = b[:, 1:] * np.arange(1, b.shape[1])[None, :]
    D = 1 - (1 + q) * u + q * u * u
    dD = -(1 + q) + 2 * q * u
    return (_polyval(db, u) * D - _polyval(b, u) * dD) / (D * D)


def kfree_coefficients_np(q, b, gamma, theta, k):
    """Batched kfree coefficients.

    b: (B, 2g+1) L coefficients; gamma, theta: (B, 2g).  Returns a dict with
    grid (B, 2g, k), A (B, 2g, k), c (B, 2g, k), sigma (B, k, 2g), zprime (B, 2g).
    """
    b = np.asarray(b, dtype=float)
    ell = np.arange(k)
    grid = q ** (1 / (2 * k)) * np.exp(1j * (theta[:, :, None] + 2 * np.pi * ell[None, None, :]) / k)
    zp = _zeta_prime_np(q, b, 1 / gamma)
    zg = _zeta_np(q, b, 1 / grid)
    A = zg / (k * grid ** (1 - k) * zp[:, :, None]) * grid / (grid - 1)
    roots = np.exp(2j * np.pi * np.outer(ell, ell) / k)  # [l, t]
    base = zg / (grid - 1)
    c = np.einsum("bjl,la->bja", base, roots) / k
    sigma = np.einsum("bjl,lt->btj", A, roots)
    return {"grid": grid, "A": A, "c": c, "sigma": sigma, "zprime": zp}


def totient_coefficients_np(q, b, gamma):
    b = np.asarray(b, dtype=float)
    zp = _zeta_prime_np(q, b, 1 / gamma)
    T = _zeta_np(q, b, q / gamma) / zp * gamma / (gamma - 1)
    return {"T": T, "zprime": zp}


def normalized_bounds_np(q, g, b, gamma, theta, k):
    """(Btilde_kfree, Btilde_totient) for a batch of curves with simple zeros."""
    kc = kfree_coefficients_np(q, b, gamma, theta, k)
    Bk = np.abs(kc["sigma"]).sum(axis=2).max(axis=1)
    tc = totient_coefficients_np(q, b, gamma)
    Bphi = np.abs(tc["T"]).sum(axis=1)
    return Bk / q ** (g - g / k - 0.5), Bphi / q ** (2 * g - 2)


# --- the model ------------------------------------------------------------------------

@dataclass(eq=False)
class ErrorTermModel:
    kind: str
    k: int | None
    L: LPolynomial
    zeros: InverseZeroSet
    mt: MainTermConstants
    gamma: np.ndarray
    theta: np.ndarray
    zprime: np.ndarray
    # kfree: grid/A/c are (2g, k); totient: T is (2g,)
    grid: np.ndarray | None
    amplitudes: np.ndarray
    c: np.ndarray | None
    # unified evaluation data: E(X) = -sum_j sigma[X mod kk, j] exp(i X omega_j)
    sigma: np.ndarray
    omega: np.ndarray
    _mp_cache: dict = field(default_factory=dict, repr=False)

    @property
    def q(self):
        return self.L.q

    @property
    def g(self):
        return self.L.g

    @property
    def period(self) -> int:
        return self.k if self.kind == "kfree" else 1

    @property
    def scale_exponent(self) -> Fraction:
        """R(X) is normalised by q^{X * scale_exponent}."""
        return Fraction(1, 2 * self.k) if self.kind == "kfree" else Fraction(1, 2)

    def total_amplitude(self) -> float:
        return float(np.abs(self.amplitudes).sum())

    def evaluate(self, X) -> np.ndarray:
        """E_M at integer X (array), via sigma; real part after the symmetry check."""
        X = np.atleast_1d(np.asarray(X, dtype=np.int64))
        out = np.empty(X.shape, dtype=float)
        step = 1 << 16
        tol = IMAG_TOL * max(1.0, self.total_amplitude())
        kk = self.period
        for s in range(0, X.size, step):
            x = X.ravel()[s:s + step]
            ph = np.exp(1j * np.outer(x.astype(float), self.omega))
            val = -(self.sigma[x % kk] * ph).sum(axis=1)
            if val.size and np.max(np.abs(val.imag)) >= tol:
                raise ImaginaryResidueError(f"|Im E_M| = {np.max(np.abs(val.imag)):.3e}")
            out.ravel()[s:s + step] = val.real
        return out

    # -- high precision data
    def mp_data(self, dps: int):
        key = int(dps)
        if key in self._mp_cache:
            return self._mp_cache[key]
        q, g = self.q, self.g
        with mpmath.workdps(dps + 10):
            gam = refine_zeros(self.L, self.zeros, dps) if g else []
            data = {"gamma": gam}
            zp = [zeta_derivative_at(self.L, 1 / z) for z in gam]
            data["zprime"] = zp
            if self.kind == "kfree":
                k = self.k
                r = mpmath.mpf(q) ** (mpmath.mpf(1) / (2 * k))
                grid, amps = [], []
                for z, d in zip(gam, zp):
                    th = mpmath.arg(z)
                    row_g, row_a = [], []
                    for ell in range(k):
                        w = r * mpmath.expj((th + 2 * mpmath.pi * ell) / k)
                        a = zeta_eval(self.L, 1 / w) / (k * w ** (1 - k) * d) * w / (w - 1)
                        row_g.append(w)
                        row_a.append(a)
                    grid.append(row_g)
                    amps.append(row_a)
                data["grid"], data["A"] = grid, amps
            else:
                data["T"] = [zeta_eval(self.L, q / z) / d * z / (z - 1) for z, d in zip(gam, zp)]
        self._mp_cache[key] = data
        return data

    def unnormalized_sum_mp(self, X: int, dps: int):
        """sum A_{j,l} gamma_{j,l}^X (kfree) or sum T_j gamma_j^X, as mpc."""
        data = self.mp_data(dps)
        with mpmath.workdps(dps + 10):
            s = mpmath.mpc(0)
            if self.kind == "kfree":
                for row_g, row_a in zip(data["grid"], data["A"]):
                    for w, a in zip(row_g, row_a):
                        s += a * w**X
            else:
                for z, t in zip(data["gamma"], data["T"]):
                    s += t * z**X
        return s

    def to_json(self):
        def cx(a):
            a = np.asarray(a)
            return {"re": a.real.tolist(), "im": a.imag.tolist()}

        out = {
            "kind": self.kind,
            "k": self.k,
            "q": self.q,
            "g": self.g,
            "main_term": self.mt.to_json(),
            "gamma": cx(self.gamma),
            "theta": self.theta.tolist(),
            "zeta_prime": cx(self.zprime),
            "amplitudes": cx(self.amplitudes),
            "sigma": cx(self.sigma),
        }
        if self.kind == "kfree":
            out["grid"] = cx(self.grid)
            out["c"] = cx(self.c)
        return out


def build_model(L: LPolynomial, zeros: InverseZeroSet | None = None, kind: str = "kfree", k: int | None = None) -> ErrorTermModel:
    if zeros is None:
        zeros = inverse_zeros(L)
    if not zeros.simple:
        raise NonSimpleZerosError(zeros.multiplicity)
    mt = main_term(L, kind, k)
    q, g = L.q, L.g
    gamma = zeros.gamma.astype(complex)
    theta = zeros.theta.astype(float)
    b = np.array([L.b], dtype=float)
    if kind == "kfree":
        cf = kfree_coefficients_np(q, b, gamma[None, :], theta[None, :], k)
        return ErrorTermModel(
            kind, k, L, zeros, mt, gamma, theta, cf["zprime"][0], cf["grid"][0], cf["A"][0],
            cf["c"][0], cf["sigma"][0], theta / k,
        )
    cf = totient_coefficients_np(q, b, gamma[None, :])
    T = cf["T"][0]
    return ErrorTermModel(
        kind, None, L, zeros, mt, gamma, theta, cf["zprime"][0], None, T, None, T[None, :], theta.copy(),
    )


# --- evaluation ----------------------------------------------------------------------

def oscillatory_sum(model: ErrorTermModel, X: int) -> float:
    """E_M(X) from the defining double sum (not via sigma)."""
    X = int(X)
    if model.kind == "kfree":
        k = model.k
        ell = np.arange(k)
        phase = X * model.theta[:, None] / k + 2 * np.pi * ((X * ell) % k)[None, :] / k
        val = -(model.amplitudes * np.exp(1j * phase)).sum()
    else:
        val = -(model.amplitudes * np.exp(1j * ((X * model.theta) % (2 * np.pi)))).sum()
    tol = IMAG_TOL * max(1.0, model.total_amplitude())
    if abs(val.imag) >= tol:
        raise ImaginaryResidueError(f"|Im E_M({X})| = {abs(val.imag):.3e}")
    return float(val.real)


@dataclass(frozen=True)
class NormalizedErrorSample:
    X: int
    r_tilde: float
    source: str


def exact_remainder(table: SummatoryTable, mt: MainTermConstants, X: int) -> Fraction:
    return table.value(X) - mt.value(X)


def _scale_exponent(table: SummatoryTable) -> Fraction:
    return Fraction(1, 2 * table.k) if table.kind == "kfree" else Fraction(1, 2)


def normalized_error(table: SummatoryTable, mt: MainTermConstants, X: int) -> NormalizedErrorSample:
    """R(X) exactly, then divided by q^{X/2k} (or q^{X/2}) in extended precision."""
    if not 1 <= X <= table.xmax:
        raise OutOfRangeError(f"X = {X} outside 1..{table.xmax}")
    R = exact_remainder(table, mt, X)
    q = mt.base if mt.kind == "kfree" else math.isqrt(mt.base)
    e = _scale_exponent(table)
    with mpmath.workdps(40):
        val = mpmath.mpf(R.numerator) / R.denominator / mpmath.power(q, mpmath.mpf(X * e.numerator) / e.denominator)
        return NormalizedErrorSample(X, float(val), "exact")


def residual_constant(table: SummatoryTable, mt: MainTermConstants, model: ErrorTermModel, Xrange=(2, 40)):
    """eps(X) = R(X) + sum A gamma^X over X in Xrange (inclusive).

    Returns {"epsilon", "max_dev", "values", "dps"}; raises
    NonConstantResidualError if max_dev > 1e-6 |eps| + 1e-9.
    """
    lo, hi = Xrange
    if lo < 1 or hi > table.xmax:
        raise OutOfRangeError(f"X range {Xrange} outside table 1..{table.xmax}")
    mag = max(abs(exact_remainder(table, mt, X)) for X in range(lo, hi + 1))
    digits = len(str(int(mag) + 1))
    dps = 30 + digits
    vals = []
    with mpmath.workdps(dps):
        for X in range(lo, hi + 1):
            R = exact_remainder(table, mt, X)
            s = model.unnormalized_sum_mp(X, dps)
            eps = mpmath.mpf(R.numerator) / R.denominator + s
            if abs(eps.imag) > mpmath.mpf(10) ** (-(dps // 2)) * max(1, abs(s)):
                raise ImaginaryResidueError(f"residual at X = {X} has imaginary part {mpmath.nstr(eps.imag, 5)}")
            vals.append(eps.real)
        mean = mpmath.fsum(vals) / len(vals)
        dev = max(abs(v - mean) for v in vals)
        out = {
            "epsilon": float(mean),
            "max_dev": float(dev),
            "values": [float(v) for v in vals],
            "dps": dps,
            "Xrange": [lo, hi],
        }
    if out["max_dev"] > RESIDUAL_REL_TOL * abs(out["epsilon"]) + RESIDUAL_ABS_TOL:
        raise NonConstantResidualError(
            f"residual varies by {out['max_dev']:.3e} around {out['epsilon']:.6g} over X in {Xrange}"
        )
    return out


# --- bounds -------------------------------------------------------------------------

def _require_simple(model):
    if not model.zeros.simple:
        raise NonSimpleZerosError(model.zeros.multiplicity)


def residue_class_bounds(model: ErrorTermModel) -> np.ndarray:
    """B_k(C, a) = sum_j |c_{j,a} gamma_j / Z'(1/gamma_j)| for a = 0..k-1."""
    w = np.abs(model.gamma / model.zprime)
    return (np.abs(model.c) * w[:, None]).sum(axis=0)


def bound_kfree(model: ErrorTermModel):
    _require_simple(model)
    if model.kind != "kfree":
        raise OutOfRangeError("bound_kfree needs a kfree model")
    Ba = residue_class_bounds(model)
    a = int(np.argmax(Ba))
    return {"B": float(Ba[a]), "argmax_a": a}


def bound_totient(model: ErrorTermModel) -> float:
    _require_simple(model)
    if model.kind != "totient":
        raise OutOfRangeError("bound_totient needs a totient model")
    return float(np.abs(model.amplitudes).sum())


def bound_residue_class(model: ErrorTermModel, a: int):
    """B_k(C, a) and, when a - 2g = b mod k with b <= k-2, its normalisation
    B_a / ((b+1) q^{g - g/k - 1/2 - b/2k})."""
    _require_simple(model)
    k, g, q = model.k, model.g, model.q
    if model.kind != "kfree":
        raise OutOfRangeError("residue classes apply to kfree models")
    if not 0 <= a < k:
        raise OutOfRangeError(f"a must be in 0..{k - 1}")
    Ba = float(residue_class_bounds(model)[a])
    b = (a - 2 * g) % k
    if b <= k - 2:
        norm = Ba / ((b + 1) * q ** (g - g / k - 0.5 - b / (2 * k)))
        return {"a": a, "b": b, "B_a": Ba, "B_a_normalized": norm, "normalized": True}
    return {"a": a, "b": b, "B_a": Ba, "B_a_normalized": None, "normalized": False}


def global_normalizations(model: ErrorTermModel, k: int | None = None):
    """Btilde_k = B_k / q^{g-g/k-1/2} and Btilde_Phi = B_Phi / q^{2g-2}.

    Both kinds are computed from the model's zeros; k defaults to the
    model's k (or 2 for a totient model).
    """
    _require_simple(model)
    kk = k or model.k or 2
    q, g = model.q, model.g
    Bk_tilde, Bphi_tilde = normalized_bounds_np(
        q, g, np.array([model.L.b], dtype=float), model.gamma[None, :], model.theta[None, :], kk
    )
    return {"k": kk, "Btilde_kfree": float(Bk_tilde[0]), "Btilde_totient": float(Bphi_tilde[0])}


def empirical_sup(model: ErrorTermModel, N: int, residue: int | None = None) -> float:
    """max |E_M(X)| over 1 <= X <= N, optionally restricted to X = residue mod k."""
    if residue is None:
        X = np.arange(1, N + 1)
    else:
        start = residue if residue >= 1 else model.period
        X = np.arange(start, N + 1, model.period)
    best = 0.0
    step = 1 << 18
    for s in range(0, X.size, step):
        best = max(best, float(np.max(np.abs(model.evaluate(X[s:s + step])))))
    return best
