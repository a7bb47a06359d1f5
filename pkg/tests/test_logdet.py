import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from schwarzlab.boundary import closed_form, distribution_function, sample_boundary
from schwarzlab.logdet import (I_f, angular_kernel_identity, companion_identity, identity_record,
                               jensen_check, loglin, max_on_circle, p_power_identity, p_power_lhs,
                               p_power_rhs, p_power_rhs_general, riesz_counting, root_count_oracle,
                               u_f)

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(cplx, cplx)
def test_loglin_matches_quadrature(a, b):
    if abs(a) < 1e-3 and abs(b) < 1e-3:
        return
    exact = quad(lambda s: math.log(max(abs(a + (b - a) * s), 1e-300)), 0, 1, limit=200)[0]
    assert loglin(a, b) == pytest.approx(exact, abs=1e-7)


def test_loglin_through_zero():
    # ∫_0^1 log|2s − 1| ds = −1 − log 2 + log 2 = −1
    assert loglin(-1.0, 1.0) == pytest.approx(-1.0, abs=1e-14)


def atom_u(w, alpha=1.0):
    # 1 − w·α(1+z)/(1−z) = ((1 − αw) − (1 + αw)z)/(1 − z); Jensen gives the circle mean
    return np.log(np.maximum(np.abs(1 - alpha * w), np.abs(1 + alpha * w)))


@pytest.mark.parametrize("name,alpha", [("atom", 1.0), ("half-atom", 0.5)])
def test_u_f_atom_oracle(samples, name, alpha):
    s = samples(name)
    w = np.concatenate([1j * np.geomspace(1e-2, 1e3, 16), np.geomspace(0.1, 10, 5) * np.exp(0.4j)])
    exact = atom_u(w, alpha)
    # O(h²) cell error, h = 2π/N
    assert np.all(np.abs(u_f(s, w) - exact) <= 1e-6 + 1e-6 * np.abs(exact))


def test_u_f_vanishes_at_origin(samples):
    assert u_f(samples("cantor-8"), np.array([0j]))[0] == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.05, 20.0), st.floats(-math.pi, math.pi))
def test_u_f_subharmonic_mean(r, phi):
    # mean over a small circle is at least the centre value
    s = _HALF
    c = r * np.exp(1j * phi)
    ring = c + 0.1 * r * np.exp(2j * math.pi * np.arange(64) / 64)
    assert np.mean(u_f(s, ring)) >= u_f(s, np.array([c]))[0] - 1e-6


_HALF = sample_boundary(closed_form(lambda z: 0.5 * (1 + z) / (1 - z)), 2**12)


def test_riesz_equals_distribution(samples):
    # μ_f(r) = m_f(1/r) structurally, and root counting agrees within 2/N
    for name in ("atom", "cantor-8", "density-cos"):
        s = samples(name)
        r = np.geomspace(0.05, 20, 25)
        mu = riesz_counting(s, r).mu
        assert np.array_equal(mu, distribution_function(s, 1 / r).m)
    s = samples("atom", 2**12)
    r = np.array([0.3, 1.0, 3.0])
    got = root_count_oracle(s.boundary, r)
    assert np.max(np.abs(got - riesz_counting(s, r).mu)) <= 2 / s.n


def test_I_f_atom(samples):
    res = I_f(samples("atom"))
    assert res.value == pytest.approx(1.0, rel=1e-4)
    assert abs(res.near_zero) <= res.near_zero_bound + 1e-12


def test_I_f_requires_imaginary(samples):
    with pytest.raises(ValueError):
        I_f(samples("density-const"))


def test_jensen_chain_atom(samples):
    s = samples("atom")
    rep = jensen_check(s, np.geomspace(0.1, 5, 6), I=1.0, n_theta=128)
    assert rep.ok and rep.witness is None
    assert max_on_circle(s, 1.0, 128) == pytest.approx(0.5 * math.log(5) - 0.5 * math.log(1), rel=0.2)


def test_jensen_detects_violation(samples):
    rep = jensen_check(samples("atom"), np.array([5.0]), I=0.01, n_theta=64)
    assert not rep.ok and rep.witness == 5.0


@given(st.floats(1e-2, 1e2), st.floats(1e-2, 1e2))
def test_angular_identity(r, t):
    lhs, rhs = angular_kernel_identity(r, t)
    assert lhs == pytest.approx(rhs, rel=1e-6)


@given(st.floats(0.1, 5.0), st.floats(0.2, 0.9))
def test_p_power_imaginary(mag, p):
    lhs, rhs = p_power_identity(1j * mag, p)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_p_power_general_lambda():
    # off the imaginary axis the cot form fails; the general closed form holds
    lam = 0.3 + 0.7j
    assert p_power_lhs(lam, 0.6) == pytest.approx(p_power_rhs_general(lam, 0.6), rel=1e-8)
    assert p_power_lhs(lam, 0.6) != pytest.approx(p_power_rhs(lam, 0.6), rel=1e-2)
    with pytest.raises(ValueError):
        p_power_lhs(1j, 1.0)


def test_companion_identity_atom(samples):
    lhs, rhs = companion_identity(samples("atom", 2**16), 0.5)
    # exact: (π/p)cot(πp/2)·sec(πp/2) at p = 1/2
    exact = 2 * math.pi * math.sqrt(2)
    assert rhs == pytest.approx(exact, rel=1e-5)
    assert lhs == pytest.approx(exact, rel=1e-4)


def test_identity_record():
    rec = identity_record(1.0, 1.0 + 1e-7, 1e-6)
    assert rec["pass"] and rec["abs_err"] == pytest.approx(1e-7)
    assert not identity_record(1.0, 2.0, 1e-6)["pass"]
