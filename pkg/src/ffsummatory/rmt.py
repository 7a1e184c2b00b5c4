"""USp(2g) eigenangle statistics and sweeps over hyperelliptic families.

A conjugacy class in USp(2g) is a point theta in [0, pi]^g; its full
spectrum is {+-theta_j}.  phi(U) = sum over the 2g eigenangles of
1 / prod_{m != j} |1 - e^{i(theta_m - theta_j)}| is the functional that the
normalised error bounds approach for large q.  Haar statistics of phi are
estimated by rejection sampling from the Weyl density and compared with the
unitarised Frobenius classes of every curve y^2 = f(x) in a family.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curve import LPolynomial, count_points_batch, inverse_zeros_batch, l_polynomial
from .errors import FamilyTooLargeError, GenusTooLargeError, OutOfRangeError, RepeatedAngleError
from .explicit import normalized_bounds_np
from .field import field_table, parse_field
from .limits import _map_chunks

HAAR_CHUNK = 1 << 16
MAX_HAAR_G = 4
MAX_FAMILY = 10**7


# --- Weyl density and Haar sampling -------------------------------------------------

def weyl_constant(g: int) -> float:
    return 2 ** (g * g) / (math.factorial(g) * math.pi**g)


def weyl_density(angles) -> np.ndarray | float:
    """(2^{g^2}/(g! pi^g)) prod_{m<n} (cos t_n - cos t_m)^2 prod sin^2 t_l."""
    a = np.asarray(angles, dtype=float)
    scalar = a.ndim == 1
    a = np.atleast_2d(a)
    g = a.shape[1]
    c = np.cos(a)
    dens = np.prod(np.sin(a) ** 2, axis=1)
    for m, n in itertools.combinations(range(g), 2):
        dens = dens * (c[:, n] - c[:, m]) ** 2
    dens = weyl_constant(g) * dens
    return float(dens[0]) if scalar else dens


def rejection_bound(g: int) -> float:
    """Upper bound for the Weyl density: each squared cosine gap <= 4, sin^2 <= 1."""
    return weyl_constant(g) * 4.0 ** (g * (g - 1) / 2)


@dataclass(frozen=True)
class AngleSpectrum:
    theta: tuple
    origin: str = "haar_sample"
    flagged: bool = False

    @property
    def g(self):
        return len(self.theta)

    def full(self) -> np.ndarray:
        t = np.asarray(self.theta, dtype=float)
        return np.concatenate([t, -t])


def sample_haar_batch(g: int, n: int, seed: int, threads: int = 1) -> np.ndarray:
    """n Haar-distributed angle tuples (n, g) by rejection from the uniform law.

    Proposals come in fixed chunks with generator default_rng([seed, 0, c]);
    accepted points are concatenated in chunk order, so the output depends
    only on (g, n, seed).
    """
    if not 1 <= g <= MAX_HAAR_G:
        raise GenusTooLargeError(f"rejection sampling supports 1 <= g <= {MAX_HAAR_G}, got {g}")
    M = rejection_bound(g)
    accept_rate = 1.0 / (M * math.pi**g)

    def one(c):
        rng = np.random.default_rng([seed, 0, c])
        prop = rng.uniform(0.0, math.pi, size=(HAAR_CHUNK, g))
        u = rng.uniform(0.0, 1.0, size=HAAR_CHUNK)
        return prop[u * M < weyl_density(prop)]

    out, have, c = [], 0, 0
    batch = max(1, threads)
    while have < n:
        # guess how many chunks remain so a pool can work on them together
        need = max(1, math.ceil((n - have) / (HAAR_CHUNK * accept_rate) * 1.1))
        k = min(max(batch, need), 256)
        parts = _map_chunks(lambda i, base=c: one(base + i), k, threads)
        for part in parts:
            if have >= n:
                break
            out.append(part)
            have += len(part)
        c += k
    return np.concatenate(out)[:n]


def sample_haar_angles(g: int, seed: int) -> AngleSpectrum:
    theta = sample_haar_batch(g, 1, seed)[0]
    return AngleSpectrum(tuple(float(t) for t in np.sort(theta)), "haar_sample")


# --- phi and phi* ------------------------------------------------------------------------

def _derivative_abs_full(full: np.ndarray) -> np.ndarray:
    """|Z'_U(theta_j)| for each angle of a (B, 2g) full spectrum."""
    diff = full[:, None, :] - full[:, :, None]
    fac = 2.0 * np.abs(np.sin(diff / 2))
    n = full.shape[1]
    fac[:, np.arange(n), np.arange(n)] = 1.0
    return fac.prod(axis=2)


def char_poly_derivative_abs(spec: AngleSpectrum, j: int) -> float:
    full = spec.full()
    if not 0 <= j < full.size:
        raise OutOfRangeError(f"index {j} outside 0..{full.size - 1}")
    val = float(_derivative_abs_full(full[None, :])[0, j])
    if val == 0.0:
        raise RepeatedAngleError(f"angle {full[j]} is repeated in the spectrum")
    return val


def phi_batch(theta) -> np.ndarray:
    """phi for a (B, g) array of angles; +inf where an angle repeats."""
    t = np.atleast_2d(np.asarray(theta, dtype=float))
    full = np.concatenate([t, -t], axis=1)
    d = _derivative_abs_full(full)
    with np.errstate(divide="ignore"):
        return (1.0 / d).sum(axis=1)


def phi(spec: AngleSpectrum) -> float:
    val = float(phi_batch([spec.theta])[0])
    if not math.isfinite(val):
        raise RepeatedAngleError(f"spectrum {spec.theta} has a repeated angle")
    return val


def phi_star(spec: AngleSpectrum, k: int) -> float:
    """sum_j |k - e^{i theta_j} x| / |Z'(theta_j)| with x = sum_m e^{-i theta_m}."""
    full = spec.full()
    d = _derivative_abs_full(full[None, :])[0]
    if np.any(d == 0):
        raise RepeatedAngleError(f"spectrum {spec.theta} has a repeated angle")
    x = np.exp(-1j * full).sum()
    return float((np.abs(k - np.exp(1j * full) * x) / d).sum())


def quantized_angles(g: int) -> tuple:
    """(pi/2g, 3pi/2g, ..., (2g-1)pi/2g), where phi attains its minimum 1."""
    return tuple((2 * j + 1) * math.pi / (2 * g) for j in range(g))


@dataclass(frozen=True)
class HaarEstimate:
    g: int
    beta: float
    mu: float
    stderr: float
    samples: int
    seed: int

    def to_json(self):
        return {"g": self.g, "beta": self.beta, "mu": self.mu, "stderr": self.stderr,
                "samples": self.samples, "seed": self.seed}


_haar_phi_cache: dict = {}


def haar_phi_values(g: int, samples: int, seed: int, threads: int = 1) -> np.ndarray:
    key = (g, samples, seed)
    if key not in _haar_phi_cache:
        _haar_phi_cache.clear()
        _haar_phi_cache[key] = np.sort(phi_batch(sample_haar_batch(g, samples, seed, threads)))
    return _haar_phi_cache[key]


def haar_probability_phi(g: int, beta: float, samples: int, seed: int, threads: int = 1) -> HaarEstimate:
    """Monte Carlo estimate of mu_Haar(phi <= beta)."""
    if beta <= 0:
        raise OutOfRangeError("beta must be positive")
    vals = haar_phi_values(g, samples, seed, threads)
    p = float(np.searchsorted(vals, beta, side="right") / samples)
    return HaarEstimate(g, float(beta), p, math.sqrt(p * (1 - p) / samples), samples, seed)


# --- families -------------------------------------------------------------------------------

def frobenius_angles(zeros, curve_id: str = "") -> AngleSpectrum:
    """theta_j of the primary half of an InverseZeroSet; flagged when zeros repeat."""
    th = tuple(float(t) for t in zeros.theta[: zeros.g])
    return AngleSpectrum(th, f"frobenius({curve_id})", flagged=not zeros.simple)


def _poly_mul_codes(tab, P, Q):
    """All products of rows of P (n1, d1) and Q (n2, d2) over F_q (codes, ascending)."""
    n1, d1 = P.shape
    n2, d2 = Q.shape
    out = np.zeros((n1, n2, d1 + d2 - 1), dtype=np.int64)
    for i in range(d1):
        for j in range(d2):
            term = tab.mul(P[:, i][:, None], Q[:, j][None, :])
            out[:, :, i + j] = tab.add(out[:, :, i + j], term)
    return out.reshape(n1 * n2, d1 + d2 - 1)


def _monic_polys(q, d):
    """All monic degree-d polynomials over F_q as (q^d, d+1) codes, lex order."""
    if d == 0:
        return np.ones((1, 1), dtype=np.int64)
    body = np.array(list(itertools.product(range(q), repeat=d)), dtype=np.int64)
    return np.concatenate([body, np.ones((body.shape[0], 1), dtype=np.int64)], axis=1)


def family_squarefree_mask(q_spec, g: int) -> np.ndarray:
    """Boolean mask over all monic f of degree 2g+1 (lex order): True if squarefree.

    f is not squarefree iff f = A^2 h with A monic of positive degree, so
    the complement is built from all such products.
    """
    q = q_spec.q
    D = 2 * g + 1
    tab = field_table(q_spec.p, q_spec.n)
    mask = np.ones(q**D, dtype=bool)
    weights = q ** np.arange(D - 1, -1, -1, dtype=np.int64)  # c_0 is the slowest digit
    for dA in range(1, D // 2 + 1):
        A = _monic_polys(q, dA)
        A2 = np.stack([_poly_mul_codes(tab, A[i:i + 1], A[i:i + 1])[0] for i in range(A.shape[0])])
        H = _monic_polys(q, D - 2 * dA)
        prods = _poly_mul_codes(tab, A2, H)
        idx = prods[:, :D] @ weights
        mask[idx] = False
    return mask


def enumerate_family(q, g: int):
    """Yield (index, f codes) for monic squarefree f of degree 2g+1 in lex order."""
    spec = parse_field(str(q)) if not hasattr(q, "q") else q
    if spec.q ** (2 * g + 1) > MAX_FAMILY:
        raise FamilyTooLargeError(f"{spec.q}^{2 * g + 1} curves exceeds {MAX_FAMILY}")
    mask = family_squarefree_mask(spec, g)
    for i, body in enumerate(itertools.product(range(spec.q), repeat=2 * g + 1)):
        if mask[i]:
            yield i, body + (1,)


@dataclass(eq=False)
class FamilyReport:
    q: int
    g: int
    kind: str
    k: int | None
    betas: tuple
    total_monic: int
    squarefree: int
    singular_skipped: int
    repeated_zero: int
    simple: int
    distinct_l: int
    max_rh_deviation: float
    fe_ok: bool
    frac_btilde: dict          # beta -> fraction over simple-zero curves
    frac_btilde_squarefree: dict
    frac_btilde_all: dict
    frac_phi: dict
    haar_reference: dict       # beta -> HaarEstimate json
    btilde_range: tuple
    phi_min: float
    seed: int
    haar_samples: int
    rows: list = field(default_factory=list, repr=False)

    def to_json(self):
        def fmt(d):
            return {repr(float(b)): v for b, v in d.items()}

        return {
            "q": self.q, "g": self.g, "kind": self.kind, "k": self.k,
            "betas": [float(b) for b in self.betas],
            "counts": {
                "total_monic": self.total_monic, "squarefree": self.squarefree,
                "singular_skipped": self.singular_skipped, "repeated_zero": self.repeated_zero,
                "simple": self.simple, "distinct_L": self.distinct_l,
            },
            "max_rh_deviation": self.max_rh_deviation,
            "functional_equation_ok": self.fe_ok,
            "fraction_btilde_le_beta": fmt(self.frac_btilde),
            "fraction_btilde_le_beta_over_squarefree": fmt(self.frac_btilde_squarefree),
            "fraction_btilde_le_beta_over_all_monic": fmt(self.frac_btilde_all),
            "fraction_phi_le_beta": fmt(self.frac_phi),
            "haar_reference": fmt(self.haar_reference),
            "btilde_range": list(self.btilde_range),
            "phi_min": self.phi_min,
            "seed": self.seed,
            "haar_samples": self.haar_samples,
        }


def family_sweep(q, g: int, kind: str = "totient", k: int = 2, betas: Sequence[float] = (1.0, 1.2, 1.5, 2.0),
                 haar_samples: int = 10**6, seed: int = 1, threads: int = 1, keep_rows: bool = False) -> FamilyReport:
    """L-polynomials, zeros, Btilde and phi for every curve of H_{2g+1,q}."""
    spec = q if hasattr(q, "q") else parse_field(str(q))
    qq = spec.q
    D = 2 * g + 1
    if qq**D > MAX_FAMILY:
        raise FamilyTooLargeError(f"{qq}^{D} curves exceeds {MAX_FAMILY}")
    if kind not in ("kfree", "totient"):
        raise OutOfRangeError(f"unknown kind {kind!r}")
    mask = family_squarefree_mask(spec, g)
    bodies = np.array(list(itertools.product(range(qq), repeat=D)), dtype=np.int64)[mask]
    fs = np.concatenate([bodies, np.ones((bodies.shape[0], 1), dtype=np.int64)], axis=1)

    counts = [count_points_batch(spec, fs, m) for m in range(1, g + 1)]
    Ls = [l_polynomial([int(c[i]) for c in counts], qq, g) for i in range(fs.shape[0])]
    mult = Counter(L.b for L in Ls)
    uniq = sorted(mult)
    uL = [LPolynomial(qq, g, b) for b in uniq]
    fe_ok = all(L.functional_equation_ok() and L.b[0] == 1 and L.class_number() > 0 for L in uL)

    # chunk unique L over threads; each chunk is deterministic
    step = 512
    chunks = [uL[s:s + step] for s in range(0, len(uL), step)]
    zsets = [z for part in _map_chunks(lambda i: inverse_zeros_batch(chunks[i]), len(chunks), threads) for z in part]
    max_dev = max((z.max_rh_deviation() for z in zsets), default=0.0)

    simple_idx = [i for i, z in enumerate(zsets) if z.simple]
    bt = np.full(len(uL), np.nan)
    ph = np.full(len(uL), np.inf)
    if simple_idx:
        gam = np.array([zsets[i].gamma for i in simple_idx])
        th = np.array([zsets[i].theta for i in simple_idx])
        bb = np.array([uL[i].b for i in simple_idx], dtype=float)
        bk, bphi = normalized_bounds_np(qq, g, bb, gam, th, k)
        bt[simple_idx] = bk if kind == "kfree" else bphi
        ph[simple_idx] = phi_batch(th[:, :g])

    w = np.array([mult[b] for b in uniq], dtype=np.int64)
    simple_mask = np.array([z.simple for z in zsets])
    n_simple = int(w[simple_mask].sum())
    n_sf = int(fs.shape[0])
    total = qq**D
    betas = tuple(float(b) for b in betas)
    fb, fbs, fba, fp, haar = {}, {}, {}, {}, {}
    for beta in betas:
        hit = int(w[simple_mask & (bt <= beta)].sum())
        fb[beta] = hit / n_simple if n_simple else float("nan")
        fbs[beta] = hit / n_sf
        fba[beta] = hit / total
        fp[beta] = int(w[simple_mask & (ph <= beta)].sum()) / n_simple if n_simple else float("nan")
        if haar_samples:
            haar[beta] = haar_probability_phi(g, beta, haar_samples, seed, threads).to_json()

    rows = []
    if keep_rows:
        pos = {b: i for i, b in enumerate(uniq)}
        for f, L in zip(fs, Ls):
            i = pos[L.b]
            rows.append({
                "f": [int(c) for c in f], "h": L.class_number(),
                "theta": [float(t) for t in zsets[i].theta[:g]],
                "simple": bool(zsets[i].simple),
                "btilde": float(bt[i]), "phi": float(ph[i]),
            })
    sb = bt[simple_mask]
    return FamilyReport(
        q=qq, g=g, kind=kind, k=k if kind == "kfree" else None, betas=betas,
        total_monic=total, squarefree=n_sf, singular_skipped=total - n_sf,
        repeated_zero=n_sf - n_simple, simple=n_simple, distinct_l=len(uL),
        max_rh_deviation=max_dev, fe_ok=fe_ok,
        frac_btilde=fb, frac_btilde_squarefree=fbs, frac_btilde_all=fba, frac_phi=fp,
        haar_reference=haar,
        btilde_range=(float(sb.min()), float(sb.max())) if sb.size else (float("nan"), float("nan")),
        phi_min=float(ph[simple_mask].min()) if simple_mask.any() else float("nan"),
        seed=seed, haar_samples=haar_samples, rows=rows,
    )
