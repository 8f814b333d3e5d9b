import math

import numpy as np
import pytest
from hypothesis import assume, given
import hypothesis.strategies as st

from conftest import valid_params
from kscompete import oracles
from kscompete.linear_analysis import (
    CharacteristicCoeffs,
    Classification,
    LossType,
    ModeWavenumber,
    char_coeffs,
    chi_hat,
    chi_tilde,
    classify_equilibrium,
    critical_chi,
    cubic_residual_ok,
    cubic_roots,
    dispersion_table,
    eigenmode,
    linearization_matrix,
    routh_hurwitz_stable,
)
from kscompete.model import SHORT_INTERVAL, WAVEMODE, OSCILLATORY, ModelParams, compute_equilibrium

modes = st.integers(1, 8)


def test_mode_wavenumber():
    m = ModeWavenumber.of(3, 2.0)
    assert m.Lambda == (3 * math.pi / 2.0) ** 2
    with pytest.raises(ValueError):
        ModeWavenumber.of(0, 1.0)


@given(valid_params(), modes)
def test_coefficients_match_the_linearization_matrix(p, k):
    chi = 0.7 * chi_tilde(k, p)
    c = char_coeffs(k, chi, p)
    poly = np.poly(linearization_matrix(k, chi, p))
    scale = np.abs(poly[1:]) + 1.0
    assert np.all(np.abs(poly[1:] - c.as_tuple()) <= 1e-9 * scale * max(1.0, np.max(np.abs(poly))))


@given(valid_params(), modes)
def test_no_chemotaxis_is_stable(p, k):
    c = char_coeffs(k, 0.0, p.with_(xi=0.0))
    assert c.alpha0 > 0 and c.alpha1 > 0 and routh_hurwitz_stable(c)


@given(valid_params(), modes)
def test_alpha0_vanishes_at_chi_tilde(p, k):
    eq = compute_equilibrium(p)
    ct = chi_tilde(k, p, eq)
    a0 = char_coeffs(k, ct, p, eq).alpha0
    slope = abs(char_coeffs(k, ct + 1.0, p, eq).alpha0 - a0)
    assert abs(a0) <= 1e-9 * max(slope * abs(ct), abs(char_coeffs(k, 0.0, p, eq).alpha0))


@given(valid_params(), modes)
def test_thresholds_match_bisection(p, k):
    eq = compute_equilibrium(p)
    assert chi_tilde(k, p, eq) == pytest.approx(oracles.chi_tilde_bisection(k, p, eq), rel=1e-6)
    assert chi_hat(k, p, eq) == pytest.approx(oracles.chi_hat_bisection(k, p, eq), rel=1e-6)


def test_short_interval_alpha0_near_zero_at_reported_threshold():
    c0 = char_coeffs(1, 0.0, SHORT_INTERVAL).alpha0
    assert abs(char_coeffs(1, 61.0, SHORT_INTERVAL).alpha0) < 1e-3 * abs(c0)


@pytest.mark.parametrize("k, ref", [(1, 61.0), (4, 949.2)])
def test_short_interval_chi_tilde(k, ref):
    assert abs(chi_tilde(k, SHORT_INTERVAL) - ref) <= 0.05


@pytest.mark.parametrize("k, ref", [(1, 75.2), (7, 3514.6)])
def test_short_interval_chi_hat(k, ref):
    assert abs(chi_hat(k, SHORT_INTERVAL) - ref) <= 0.05


def test_cubic_with_integer_roots():
    roots = cubic_roots((-6.0, 11.0, -6.0))
    assert np.allclose(np.sort(roots.real), [1, 2, 3], atol=1e-13)
    assert np.allclose(roots.imag, 0, atol=1e-13)


def test_cubic_with_imaginary_pair():
    roots = cubic_roots((0.0, 1.0, 0.0))
    assert sorted(roots, key=lambda z: z.imag) == pytest.approx([-1j, 0, 1j], abs=1e-14)


# Subnormal coefficients carry too few significant bits for a relative bound.
coef = st.floats(-1e3, 1e3, allow_subnormal=False)


@given(coef, coef, coef)
def test_cubic_roots_satisfy_the_polynomial(a2, a1, a0):
    c = (a2, a1, a0)
    roots = cubic_roots(c)
    assert len(roots) == 3
    assert all(cubic_residual_ok(c, s) for s in roots)
    assert np.all(np.diff(roots.real) <= 1e-12 * (1 + np.max(np.abs(roots))))


@pytest.mark.parametrize("L", range(1, 15))
def test_hopf_roots(L):
    p = OSCILLATORY.with_(L=float(L))
    rep = critical_chi(p)
    assert rep.loss_type is LossType.HOPF
    c = char_coeffs(rep.argmin_k, rep.chi0, p)
    roots = cubic_roots(c)
    scale = c.alpha2 + math.sqrt(c.alpha1)
    for w in (-c.alpha2, 1j * math.sqrt(c.alpha1), -1j * math.sqrt(c.alpha1)):
        assert np.min(np.abs(roots - w)) <= 1e-9 * scale


@given(valid_params(), modes, st.floats(-2.0, 3.0))
def test_routh_hurwitz_agrees_with_roots(p, k, frac):
    eq = compute_equilibrium(p)
    ct, ch = chi_tilde(k, p, eq), chi_hat(k, p, eq)
    chi = frac * min(ct, ch) if min(ct, ch) > 0 else frac * 10.0
    assume(min(abs(chi - ct), abs(chi - ch)) > 1e-6 * max(1.0, abs(ct), abs(ch)))
    c = char_coeffs(k, chi, p, eq)
    assert routh_hurwitz_stable(c) == bool(np.all(cubic_roots(c).real < 0))


@given(valid_params(), modes, st.floats(-2.0, 3.0))
def test_alpha1_positive_whenever_other_conditions_hold(p, k, frac):
    eq = compute_equilibrium(p)
    c = char_coeffs(k, frac * chi_tilde(k, p, eq), p, eq)
    if c.alpha0 > 0 and c.hurwitz > 0:
        assert c.alpha1 > 0


@given(valid_params())
def test_alpha1_nonnegative_at_the_hopf_threshold(p):
    rep = critical_chi(p)
    if rep.loss_type is LossType.HOPF:
        assert not rep.alpha1_negative_at_hopf


@given(valid_params(), modes)
def test_eigenmode_identities(p, k):
    eq = compute_equilibrium(p)
    P, Q = eigenmode(k, p, eq)
    lam_k = (k * math.pi / p.L) ** 2
    assert P + Q == pytest.approx(lam_k + p.lam, rel=1e-12)
    M = linearization_matrix(k, chi_tilde(k, p, eq), p, eq)
    r = M @ np.array([P, Q, 1.0])
    row_norms = np.abs(M) @ np.abs(np.array([P, Q, 1.0]))
    assert np.all(np.abs(r) <= 1e-9 * row_norms)


@given(valid_params(), modes)
def test_eigenmode_without_cross_terms(p, k):
    p = p.with_(xi=0.0, a2=0.0)
    P, Q = eigenmode(k, p)
    assert Q == 0.0
    assert P == pytest.approx((k * math.pi / p.L) ** 2 + p.lam, rel=1e-14)


@given(valid_params(L_range=(-0.5, 1.5)))
def test_doubling_kmax_never_changes_chi0(p):
    a, b = critical_chi(p, kmax=200), critical_chi(p, kmax=400)
    assert a.chi0 == b.chi0 and a.argmin_k == b.argmin_k and a.loss_type == b.loss_type


@given(valid_params(), st.floats(0.0, 2.0))
def test_larger_xi_never_raises_chi0(p, extra):
    lo = critical_chi(p)
    hi = critical_chi(p.with_(xi=p.xi + extra))
    assert hi.chi0 <= lo.chi0 * (1 + 1e-12) + 1e-12


@given(valid_params(), modes)
def test_thresholds_grow_without_bound(p, k):
    assert chi_tilde(50 * k, p) > chi_tilde(k, p) or chi_tilde(50 * k, p) > 1e3


def test_classification_examples():
    assert classify_equilibrium(50.0, SHORT_INTERVAL).classification is Classification.STABLE
    rep = classify_equilibrium(100.0, SHORT_INTERVAL)
    assert rep.classification is Classification.UNSTABLE
    assert rep.loss_type is LossType.STEADY_STATE and rep.argmin_k == 1
    rep = classify_equilibrium(80.0, OSCILLATORY)
    assert rep.classification is Classification.UNSTABLE
    assert rep.loss_type is LossType.HOPF and rep.argmin_k == 1
    assert rep.chi0 == pytest.approx(66.5, abs=0.1)


def test_critical_chi_examples():
    rep = critical_chi(WAVEMODE.with_(L=7.0))
    assert rep.argmin_k == 2 and abs(rep.chi0 - 4.4330) <= 5e-4
    rep = critical_chi(WAVEMODE.with_(L=21.0))
    assert rep.argmin_k == 6 and abs(rep.chi0 - 4.4330) <= 5e-4
    rep = critical_chi(OSCILLATORY.with_(L=1.0))
    assert rep.argmin_k == 1 and abs(rep.chi0 - 129.0) <= 0.05 and rep.loss_type is LossType.HOPF
    assert rep.tail_converged


def _blend(t: float) -> ModelParams:
    a, b = SHORT_INTERVAL.with_(L=1.0), OSCILLATORY.with_(L=1.0)
    return ModelParams(**{f: (1 - t) * getattr(a, f) + t * getattr(b, f) for f in ("d1", "d2", "chi", "xi", "mu1", "mu2", "a1", "a2", "lam", "L")})


def test_tie_is_reported_as_degenerate():
    from scipy.optimize import brentq

    def gap(t):
        rep = critical_chi(_blend(t))
        return rep.chi_tilde_min - rep.chi_hat_min

    assert critical_chi(_blend(0.0)).loss_type is LossType.STEADY_STATE
    assert critical_chi(_blend(1.0)).loss_type is LossType.HOPF
    t = brentq(gap, 0.0, 1.0, xtol=1e-16, rtol=1e-15)
    assert critical_chi(_blend(t)).loss_type is LossType.DEGENERATE


def test_dispersion_table_rows():
    rows = dispersion_table(SHORT_INTERVAL, 3, chi=100.0)
    assert [r.mode.k for r in rows] == [1, 2, 3]
    assert rows[0].eigenvalues[0].real > 0
    assert rows[1].eigenvalues[0].real < 0
    assert isinstance(rows[0].coeffs, CharacteristicCoeffs)
