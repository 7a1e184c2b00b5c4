import itertools
import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, strategies as st

from ffsummatory.curve import HyperellipticCurve, curve_l_polynomial, fq_is_squarefree, inverse_zeros, parse_curve
from ffsummatory.errors import FamilyTooLargeError, GenusTooLargeError, OutOfRangeError, RepeatedAngleError
from ffsummatory.field import construct_field
from ffsummatory.rmt import (
    AngleSpectrum,
    char_poly_derivative_abs,
    enumerate_family,
    family_squarefree_mask,
    family_sweep,
    frobenius_angles,
    haar_probability_phi,
    phi,
    phi_batch,
    phi_star,
    quantized_angles,
    rejection_bound,
    sample_haar_batch,
    weyl_density,
)

angles = st.floats(0.01, math.pi - 0.01)


# --- Weyl density ---------------------------------------------------------------------

def test_weyl_normalization():
    val, _ = scipy.integrate.quad(lambda t: weyl_density([t]), 0, math.pi)
    assert val == pytest.approx(1.0, abs=1e-10)
    val2, _ = scipy.integrate.dblquad(lambda b, a: weyl_density([a, b]), 0, math.pi, 0, math.pi)
    assert val2 == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_weyl_normalization_monte_carlo(g):
    rng = np.random.default_rng(g)
    w = weyl_density(rng.uniform(0, math.pi, size=(400_000, g))) * math.pi**g
    assert abs(w.mean() - 1.0) <= 3 * w.std() / math.sqrt(w.size)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_rejection_bound_dominates(g):
    rng = np.random.default_rng(g)
    pts = rng.uniform(0, math.pi, size=(200_000, g))
    assert weyl_density(pts).max() <= rejection_bound(g)


def test_weyl_density_vanishes_on_collisions():
    assert weyl_density([0.7, 0.7]) == 0.0
    assert weyl_density([0.0, 1.0]) == 0.0


# --- Haar sampling ----------------------------------------------------------------------

def test_haar_g1_moments():
    x = sample_haar_batch(1, 10**6, seed=4)[:, 0]
    c = np.cos(x)
    assert abs(c.mean()) < 0.005
    assert abs(c.mean()) <= 3 * c.std() / math.sqrt(c.size)
    c2 = c**2
    assert abs(c2.mean() - 0.25) <= 3 * c2.std() / math.sqrt(c2.size)


def test_haar_g2_against_quadrature():
    x = sample_haar_batch(2, 100_000, seed=5)
    for power in (1, 2):
        f = lambda b, a: (math.cos(a) ** power + math.cos(b) ** power) * weyl_density([a, b])
        ref, _ = scipy.integrate.dblquad(f, 0, math.pi, 0, math.pi)
        vals = (np.cos(x) ** power).sum(axis=1)
        assert abs(vals.mean() - ref) <= 3 * vals.std() / math.sqrt(vals.size)


def test_haar_deterministic_and_thread_invariant():
    a = sample_haar_batch(2, 50_000, seed=9, threads=1)
    b = sample_haar_batch(2, 50_000, seed=9, threads=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_haar_batch(2, 50_000, seed=10))
    with pytest.raises(GenusTooLargeError):
        sample_haar_batch(9, 1, seed=0)


# --- phi ------------------------------------------------------------------------------------

def test_char_poly_derivative_example():
    s = AngleSpectrum((math.pi / 2,))
    # Z_U(t) = (1 - e^{i(pi/2 - t)})(1 - e^{i(-pi/2 - t)}); |Z'| at pi/2 is |1 - e^{-i pi}| = 2
    assert char_poly_derivative_abs(s, 0) == pytest.approx(2.0)
    with pytest.raises(RepeatedAngleError):
        char_poly_derivative_abs(AngleSpectrum((0.5, 0.5)), 0)
    with pytest.raises(OutOfRangeError):
        char_poly_derivative_abs(s, 5)


@pytest.mark.parametrize("g", [1, 2, 3, 4, 6])
def test_phi_minimum_at_quantized_angles(g):
    assert phi(AngleSpectrum(quantized_angles(g))) == pytest.approx(1.0, abs=1e-12)


@given(st.lists(angles, min_size=1, max_size=4, unique=True))
def test_phi_at_least_one(theta):
    t = np.array(theta)
    if np.min(np.abs(np.subtract.outer(t, t)) + np.eye(len(t)) * 9) < 1e-3:
        return
    assert phi(AngleSpectrum(tuple(theta))) >= 1.0 - 1e-9


def test_phi_g1_closed_form():
    # spectrum {t, -t}: each |Z'| is 2 |sin t|, so phi = 1 / sin t
    for t in (0.3, 1.0, 2.0):
        assert phi(AngleSpectrum((t,))) == pytest.approx(1 / math.sin(t))
    with pytest.raises(RepeatedAngleError):
        phi(AngleSpectrum((0.4, 0.4)))


def test_phi_star_example():
    s = AngleSpectrum((math.pi / 2,))
    # x = 0, each term |k| / 2
    assert phi_star(s, 2) == pytest.approx(2.0)
    # as k grows phi*/k tends to phi
    s = AngleSpectrum((0.4, 1.9))
    assert phi_star(s, 10**6) / 10**6 == pytest.approx(phi(s), rel=1e-5)


def test_haar_probability_limits():
    assert haar_probability_phi(1, 1e9, 20_000, seed=1).mu == 1.0
    assert haar_probability_phi(1, 0.999, 20_000, seed=1).mu == 0.0
    # g = 1: phi = 1/sin t <= beta iff sin t >= 1/beta; exact Haar mass by quadrature
    beta = 1.5
    t0 = math.asin(1 / beta)
    ref, _ = scipy.integrate.quad(lambda t: weyl_density([t]), t0, math.pi - t0)
    est = haar_probability_phi(1, beta, 200_000, seed=2)
    assert abs(est.mu - ref) <= 3 * est.stderr


# --- families --------------------------------------------------------------------------------

def test_family_counts():
    assert sum(1 for _ in enumerate_family(5, 1)) == 100
    assert sum(1 for _ in enumerate_family(3, 1)) == 18
    assert sum(1 for _ in enumerate_family(3, 2)) == 3**5 - 3**4


@pytest.mark.parametrize("p,n,g", [(3, 1, 1), (5, 1, 1), (3, 2, 1), (3, 1, 2)])
def test_squarefree_mask_against_gcd(p, n, g):
    spec = construct_field(p, n)
    mask = family_squarefree_mask(spec, g)
    for i, body in enumerate(itertools.product(range(spec.q), repeat=2 * g + 1)):
        f = [spec.element(c) for c in body] + [spec.one()]
        assert mask[i] == fq_is_squarefree(f)


def test_frobenius_angles_flagged():
    zs = inverse_zeros(curve_l_polynomial(parse_curve("q=7;f=0,1,0,0,0,1")))
    assert frobenius_angles(zs).flagged
    zs = inverse_zeros(curve_l_polynomial(parse_curve("q=5;f=0,1,0,1")))
    s = frobenius_angles(zs)
    assert not s.flagged and s.theta[0] == pytest.approx(math.acos(2 / (2 * math.sqrt(5))))


def test_family_sweep_small():
    rep = family_sweep(5, 1, kind="totient", betas=(1.0, 2.0), haar_samples=20_000, seed=1, keep_rows=True)
    assert rep.total_monic == 125 and rep.squarefree == 100
    assert rep.simple + rep.repeated_zero == rep.squarefree
    assert rep.fe_ok and rep.max_rh_deviation < 1e-9
    assert rep.phi_min >= 1.0 - 1e-9
    assert len(rep.rows) == 100
    # g = 1 rows agree with the direct per-curve path
    row = rep.rows[0]
    C = HyperellipticCurve(construct_field(5), tuple(row["f"]))
    L = curve_l_polynomial(C)
    assert row["h"] == L.class_number()
    if row["simple"]:
        assert row["phi"] == pytest.approx(phi(frobenius_angles(inverse_zeros(L))))
    # fractions over the three denominators are consistent
    for b in rep.betas:
        hit = rep.frac_btilde[b] * rep.simple
        assert rep.frac_btilde_squarefree[b] * rep.squarefree == pytest.approx(hit)
        assert rep.frac_btilde_all[b] * rep.total_monic == pytest.approx(hit)
    a = family_sweep(5, 1, kind="kfree", k=2, betas=(1.5,), haar_samples=10_000, seed=3, threads=1).to_json()
    b = family_sweep(5, 1, kind="kfree", k=2, betas=(1.5,), haar_samples=10_000, seed=3, threads=3).to_json()
    assert a == b


def test_btilde_le_one_fraction_shrinks_with_q():
    fr = [family_sweep(q, 2, "totient", betas=(1.0,), haar_samples=0).frac_btilde[1.0] for q in (3, 5, 9)]
    assert fr == sorted(fr, reverse=True)
    assert fr[0] < 0.5


def test_family_limits():
    with pytest.raises(FamilyTooLargeError):
        next(enumerate_family(101, 3))
    with pytest.raises(OutOfRangeError):
        family_sweep(3, 1, kind="bogus")
