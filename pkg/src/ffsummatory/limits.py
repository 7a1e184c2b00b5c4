"""Limiting distributions of the normalised error terms.

Under linear independence of the angles, E_M(X) is distributed like

    (1/k) sum_t law of  sum_j 2 |sigma_{t,j}| cos(phi_j),  phi uniform on the g-torus

(one torus for the totient case).  This module estimates natural densities
of {|E| <= beta} by Monte Carlo on the torus, evaluates the Bessel-product
Fourier transforms, and builds empirical distributions from the model or
the exact tables for comparison.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from .curve import zeta_eval
from .errors import DomainTooLargeError, NonSimpleZerosError, OutOfRangeError, VerificationError
from .explicit import ErrorTermModel, normalized_error
from .series import SummatoryTable

CHUNK = 1 << 16
BESSEL_MAX_Z = 60.0


def _map_chunks(fn, n_chunks, threads):
    """fn(i) for i in range(n_chunks), in order; optionally on a thread pool."""
    if threads <= 1 or n_chunks <= 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_chunks)))


def _torus_values(amps_t, n, seed, stream, threads=1):
    """n draws of sum_j 2 a_j cos(phi_j), phi uniform; chunk c uses rng([seed, stream, c])."""
    g = len(amps_t)
    a2 = 2.0 * np.asarray(amps_t, dtype=float)
    n_chunks = -(-n // CHUNK)

    def one(c):
        m = min(CHUNK, n - c * CHUNK)
        rng = np.random.default_rng([seed, stream, c])
        phi = rng.uniform(0.0, 2 * np.pi, size=(m, g))
        return np.cos(phi) @ a2

    parts = _map_chunks(one, n_chunks, threads)
    return np.concatenate(parts) if parts else np.zeros(0)


@dataclass(frozen=True)
class TorusDensityEstimate:
    kind: str
    beta: float
    delta: float
    stderr: float
    samples: int
    seed: int
    per_torus: tuple = ()

    def to_json(self):
        return {
            "kind": self.kind,
            "beta": self.beta,
            "delta": self.delta,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "per_torus": list(self.per_torus),
        }


def torus_density(amps, beta, samples, seed, kind="torus", threads=1) -> TorusDensityEstimate:
    """(1/T) sum_t m(|sum_j 2 amps[t,j] cos phi_j| <= beta) by Monte Carlo.

    ``samples`` draws per torus.  The reported stderr is that of the
    stratified mean, sqrt(sum_t p_t(1-p_t)/samples)/T.
    """
    if beta <= 0:
        raise OutOfRangeError("beta must be positive")
    amps = np.atleast_2d(np.asarray(amps, dtype=float))
    T = amps.shape[0]
    fr = []
    for t in range(T):
        vals = _torus_values(amps[t], samples, seed, t, threads)
        fr.append(int(np.count_nonzero(np.abs(vals) <= beta)) / samples)
    delta = sum(fr) / T
    stderr = math.sqrt(sum(p * (1 - p) for p in fr) / samples) / T
    return TorusDensityEstimate(kind, float(beta), delta, stderr, samples, seed, tuple(fr))


def arcsine_density(amps, beta) -> float:
    """Exact density for g = 1: (1/T) sum_t (2/pi) asin(min(1, beta / (2 a_t)))."""
    amps = np.asarray(amps, dtype=float).reshape(-1)
    vals = [1.0 if a == 0 else (2 / math.pi) * math.asin(min(1.0, beta / (2 * a))) for a in amps]
    return sum(vals) / len(vals)


def _require_simple(model):
    if not model.zeros.simple:
        raise NonSimpleZerosError(model.zeros.multiplicity)


def torus_amplitudes(model: ErrorTermModel) -> np.ndarray:
    """(T, g) array of |sigma_{t,j}| (kfree) or |T_j| (totient) over the primary half."""
    g = model.g
    if model.kind == "kfree":
        return np.abs(model.sigma[:, :g])
    return np.abs(totient_statement_amplitudes(model))[None, :]


def totient_statement_amplitudes(model: ErrorTermModel, rtol=1e-10) -> np.ndarray:
    """Z(conj gamma_j)/Z'(1/gamma_j) * gamma_j/(gamma_j - 1) for the primary half.

    conj(gamma) = q/gamma because |gamma|^2 = q; the equality of Z at both
    points is checked rather than assumed.
    """
    L, g, q = model.L, model.g, model.q
    out = []
    for j in range(g):
        z = complex(model.gamma[j])
        a = zeta_eval(L, z.conjugate())
        b = zeta_eval(L, q / z)
        if abs(a - b) > rtol * max(1.0, abs(b)):
            raise VerificationError(f"Z(conj gamma) != Z(q/gamma) at gamma = {z}")
        out.append(a / model.zprime[j] * z / (z - 1))
    return np.array(out, dtype=complex)


def density_kfree(model, beta, samples, seed, threads=1) -> TorusDensityEstimate:
    _require_simple(model)
    if model.kind != "kfree":
        raise OutOfRangeError("density_kfree needs a kfree model")
    return torus_density(torus_amplitudes(model), beta, samples, seed, "kfree", threads)


def density_totient(model, beta, samples, seed, threads=1) -> TorusDensityEstimate:
    _require_simple(model)
    if model.kind != "totient":
        raise OutOfRangeError("density_totient needs a totient model")
    return torus_density(torus_amplitudes(model), beta, samples, seed, "totient", threads)


def exact_density(model, beta) -> float | None:
    """Closed form for g = 1, else None."""
    if model.g != 1:
        return None
    return arcsine_density(torus_amplitudes(model)[:, 0], beta)


# --- empirical distributions ------------------------------------------------------

@dataclass(eq=False)
class EmpiricalDistribution:
    samples: np.ndarray
    source: str

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))

    @property
    def size(self) -> int:
        return int(self.samples.size)

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.size


def empirical_distribution(model: ErrorTermModel, N: int) -> EmpiricalDistribution:
    """E_M(X) for X = 1..N."""
    if N < 1:
        raise OutOfRangeError("N must be >= 1")
    return EmpiricalDistribution(model.evaluate(np.arange(1, N + 1)), f"model(X<={N})")


def exact_distribution(table: SummatoryTable, mt, Xmin: int = 1, Xmax: int | None = None) -> EmpiricalDistribution:
    Xmax = table.xmax if Xmax is None else Xmax
    vals = [normalized_error(table, mt, X).r_tilde for X in range(Xmin, Xmax + 1)]
    return EmpiricalDistribution(np.array(vals), f"exact(X<={Xmax})")


def torus_distribution(model: ErrorTermModel, samples: int, seed: int, threads=1) -> EmpiricalDistribution:
    """Draws from the limiting measure; torus t gets every T-th draw."""
    amps = torus_amplitudes(model)
    T = amps.shape[0]
    per = [samples // T + (1 if t < samples % T else 0) for t in range(T)]
    parts = [_torus_values(amps[t], per[t], seed, t, threads) for t in range(T)]
    return EmpiricalDistribution(np.concatenate(parts), f"torus(n={samples},seed={seed})")


def sign_densities(edf: EmpiricalDistribution):
    if edf.size == 0:
        raise OutOfRangeError("empty distribution")
    s = edf.samples
    return {"plus": float(np.count_nonzero(s > 0) / s.size), "minus": float(np.count_nonzero(s < 0) / s.size)}


def kolmogorov_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """sup_x |F_a(x) - F_b(x)|; the sup is attained at a sample point."""
    if a.size == 0 or b.size == 0:
        raise OutOfRangeError("empty distribution")
    pts = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.cdf(pts) - b.cdf(pts))))


# --- Bessel products ------------------------------------------------------------------

def bessel_j0(z: float) -> float:
    """J_0 from its power series sum (-1)^m (z/2)^{2m} / (m!)^2.

    The alternating series cancels catastrophically for large |z| (terms
    reach ~e^{|z|}), so it is summed in extended precision with enough
    guard digits to cover the largest term; summation stops once
    |term| < 1e-17 |partial sum|.
    """
    z = float(z)
    if not math.isfinite(z) or abs(z) > BESSEL_MAX_Z:
        raise DomainTooLargeError(f"|z| = {abs(z)} exceeds {BESSEL_MAX_Z}")
    guard = int(abs(z) / math.log(10)) + 25
    with mpmath.workdps(guard):
        x = mpmath.mpf(z) / 2
        x2 = -x * x
        term = mpmath.mpf(1)
        total = mpmath.mpf(1)
        m = 0
        eps = mpmath.mpf("1e-17")
        while True:
            m += 1
            term = term * x2 / (m * m)
            total += term
            if abs(term) < eps * abs(total) and m > abs(x):
                break
        return float(total)


def fourier_transform(model: ErrorTermModel, y: float) -> float:
    """(1/T) sum_t prod_j J_0(2 |a_{t,j}| y) over the torus amplitudes."""
    amps = torus_amplitudes(model)
    vals = [math.prod(bessel_j0(2 * a * y) for a in row) for row in amps]
    return sum(vals) / len(vals)


def empirical_cf(edf: EmpiricalDistribution, y: float) -> float:
    """(1/N) sum cos(y x); the imaginary part vanishes for symmetric laws."""
    return float(np.mean(np.cos(y * edf.samples)))
