"""Root finding for the small integer polynomials that carry inverse zeros.

Roots are computed with batched Durand-Kerner iteration from fixed starting
points.  Multiplicities are decided exactly: the integer polynomial is split
by Yun's squarefree factorisation over Q, and Durand-Kerner is run on each
squarefree part, so a repeated root never has to be recognised from a
cluster of floating point approximations.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import NoConvergenceError

DK_TOL = 1e-12
DK_MAXITER = 500


# --- exact helpers, polynomials as ascending lists ----------------------------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _deriv(a):
    return [i * a[i] for i in range(1, len(a))]


def _divmod(a, b):
    a = [Fraction(x) for x in a]
    b = _trim(b)
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], _trim(a)
    quot = [Fraction(0)] * (len(a) - db)
    lead = Fraction(b[-1])
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] / lead
        quot[i - db] = c
        if c:
            for j in range(db + 1):
                a[i - db + j] -= c * b[j]
    return _trim(quot), _trim(a[:db])


def _sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def _monic(a):
    a = _trim(a)
    lead = Fraction(a[-1])
    return [Fraction(x) / lead for x in a]


def _gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _divmod(a, b)[1]
    return _monic(a)


def squarefree_factorization(poly):
    """Yun's algorithm over Q.

    Returns [(factor, multiplicity), ...] with monic rational factors of
    positive degree whose product (with multiplicities) is poly up to a
    constant.
    """
    a = _monic([Fraction(int(x)) if not isinstance(x, Fraction) else x for x in poly])
    if len(a) <= 1:
        return []
    out = []
    b = _deriv(a)
    c = _gcd(a, b)
    w = _divmod(a, c)[0]
    y = _divmod(b, c)[0]
    i = 1
    while len(w) > 1:
        z = _sub(y, _deriv(w))
        g = _gcd(w, z) if z else _monic(w)
        if len(g) > 1:
            out.append((g, i))
        w = _divmod(w, g)[0]
        y = _divmod(z, g)[0] if z else []
        i += 1
    return out


def discriminant_is_zero(poly) -> bool:
    """Exact test for a repeated root of an integer polynomial (ascending)."""
    a = _trim(poly)
    if len(a) <= 2:
        return False
    return len(_gcd(a, _deriv(a))) > 1


# --- Durand-Kerner -----------------------------------------------------------

def durand_kerner(coeffs, radius=1.0, tol=DK_TOL, maxiter=DK_MAXITER):
    """Roots of a batch of monic polynomials.

    coeffs: (B, n+1) array, ascending, with coeffs[:, n] == 1.  Starting
    points lie on the circle of the given radius (scalar or (B,)), equally
    spaced and rotated off the real axis.  Returns (roots (B, n), iterations).
    Raises NoConvergenceError if any polynomial fails to settle.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    B, n1 = c.shape
    n = n1 - 1
    if n == 0:
        return np.zeros((B, 0), dtype=complex), 0
    r = np.broadcast_to(np.asarray(radius, dtype=float), (B,))
    # rescale z = r w so every root sits near the unit circle
    scale = r[:, None] ** np.arange(n1)[None, :]
    cw = c * scale / (r[:, None] ** n)
    start = np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    z = np.broadcast_to(start, (B, n)).copy()
    active = np.ones(B, dtype=bool)
    it = 0
    for it in range(1, maxiter + 1):
        za = z[active]
        ca = cw[active]
        # Horner for p(z) at all current approximations
        pv = np.ones_like(za)
        for i in range(n - 1, -1, -1):
            pv = pv * za + ca[:, i:i + 1]
        diff = za[:, :, None] - za[:, None, :]
        diff[:, np.arange(n), np.arange(n)] = 1.0
        step = pv / diff.prod(axis=2)
        z[active] = za - step
        done = np.max(np.abs(step), axis=1) < tol
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
    if active.any():
        za, ca = z[active], cw[active]
        pv = np.ones_like(za)
        for i in range(n - 1, -1, -1):
            pv = pv * za + ca[:, i:i + 1]
        res = np.abs(pv).tolist()
        raise NoConvergenceError(
            f"Durand-Kerner did not converge for {int(active.sum())} polynomial(s) in {maxiter} iterations",
            residuals=res,
        )
    return z * r[:, None], it


def newton_polish(coeffs, roots, steps=2):
    """A few Newton steps on simple roots (batched, complex double)."""
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    z = np.atleast_2d(np.asarray(roots, dtype=complex)).copy()
    n = c.shape[1] - 1
    dc = c[:, 1:] * np.arange(1, n + 1)[None, :]
    for _ in range(steps):
        pv = np.zeros_like(z)
        dv = np.zeros_like(z)
        for i in range(n, -1, -1):
            pv = pv * z + c[:, i:i + 1]
        for i in range(n - 1, -1, -1):
            dv = dv * z + dc[:, i:i + 1]
        ok = np.abs(dv) > 0
        z = np.where(ok, z - pv / np.where(ok, dv, 1), z)
    return z


def roots_with_multiplicity(poly, radius=1.0):
    """Roots of an integer polynomial (ascending) with exact multiplicities.

    Returns (roots, multiplicities) where each distinct root appears once.
    """
    roots, mults = [], []
    for factor, m in squarefree_factorization(poly):
        fc = np.array([float(x) for x in factor], dtype=complex)[None, :]
        z, _ = durand_kerner(fc, radius=radius)
        z = newton_polish(fc, z)[0]
        roots.extend(z.tolist())
        mults.extend([m] * len(z))
    return np.array(roots, dtype=complex), mults
