import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from schwarzlab.boundary import (BLOWUP, CONVERGED, UNDECIDED, DistributionFunction, SamplingError,
                                 boundary_csv_rows, classify, closed_form, distribution_function,
                                 hp_power_mean, hp_quasinorm, layer_cake_power, log_grid,
                                 sample_boundary, smirnov_norm, tail_functional, weak_l1_norm)

CATALAN = 0.915965594177219


def atom_m(t):
    return 2 / math.pi * np.arctan(1 / np.asarray(t))


def test_flags_atom(samples):
    s = samples("atom")
    assert s.n == 2**14
    # exactly the angle of the atom blows up
    assert np.count_nonzero(s.blowup) == 1
    assert s.theta[s.blowup][0] == pytest.approx(0.0)
    assert s.fraction(CONVERGED) == pytest.approx(1 - 1 / s.n)


def test_classify_synthetic():
    v = np.array([[1, 10, 1 + 1j], [1, 100, 1 - 1j], [1, 1000, 1 + 1j]], dtype=complex)
    assert list(classify(v)) == [CONVERGED, BLOWUP, UNDECIDED]


def test_bad_inputs():
    f = closed_form(lambda z: z)
    with pytest.raises(ValueError):
        sample_boundary(f, 1000)
    with pytest.raises(ValueError):
        sample_boundary(f, 1024, ladder=(0.9, 0.99))

    def broken(z):
        raise RuntimeError("nope")

    with pytest.raises(SamplingError):
        sample_boundary(closed_form(broken), 1024)


def test_distribution_oracle_atom(samples):
    s = samples("atom")
    t = log_grid(1e-1, 1e3, 64)
    d = distribution_function(s, t)
    assert np.max(np.abs(d.m - atom_m(t))) <= 2 / s.n + 1e-6


def test_weak_l1_atom(samples):
    s = samples("atom")
    w = weak_l1_norm(distribution_function(s))
    # sampled m_f is within 2/N of the truth, so t·m_f is within 2t/N
    assert abs(w.value - 2 / math.pi) <= 2 * w.t_at / s.n


def test_window_rule():
    d = DistributionFunction(np.array([1.0, 2.0, 3.0]), np.array([0.5, 0.1, 0.0]), 100, 0,
                             np.array([500, 40, 0]))
    t, m = d.window()
    assert list(t) == [1.0]


@given(st.floats(0.2, 0.95))
def test_hp_atom_oracle(p):
    # mean |cot(θ/2)|^p = sec(πp/2)
    s = _ATOM16
    got = hp_power_mean(s, p, pole_correction=True)
    assert got == pytest.approx(1 / math.cos(math.pi * p / 2), rel=1e-5)
    assert hp_quasinorm(s, p, True) == pytest.approx(got ** (1 / p))


_ATOM16 = sample_boundary(closed_form(lambda z: (1 + z) / (1 - z)), 2**16)


def test_smirnov_atom_oracle():
    oracle = quad(lambda th: max(math.log(abs(1 / math.tan(th / 2))), 0.0), 0, math.pi,
                  points=[math.pi / 2], limit=200)[0] / math.pi
    assert oracle == pytest.approx(2 * CATALAN / math.pi, rel=1e-10)
    assert smirnov_norm(_ATOM16) == pytest.approx(oracle, abs=1e-6)


@given(st.floats(0.1, 0.6))
def test_layer_cake(p):
    # ∫|f|^p dm = p∫ t^(p−1) m_f(t) dt for a bounded function
    s = sample_boundary(closed_form(lambda z: 2 + z ** 3), 2**12)
    d = distribution_function(s, log_grid(1e-3, 1e2, 256))
    assert layer_cake_power(d, p) == pytest.approx(hp_power_mean(s, p), rel=2e-3)


@given(st.integers(1, 6))
def test_distribution_nonincreasing(k):
    s = sample_boundary(closed_form(lambda z: (1 + z**k) / (1.2 - z**k)), 2**10)
    d = distribution_function(s)
    assert np.all(np.diff(d.m) <= 0)
    assert np.all((d.m >= 0) & (d.m <= 1))


def test_tail_functional_atom(samples):
    # R∫_R^∞ m(t)/t dt → 2/π for the atom (m ≈ 2/(πt))
    d = distribution_function(samples("atom"))
    tv = tail_functional(d, 10.0)
    assert not tv.divergent
    exact = 10 * quad(lambda t: 2 / math.pi * math.atan(1 / t) / t, 10, math.inf)[0]
    assert tv.value == pytest.approx(exact, rel=2e-2)
    with pytest.raises(ValueError):
        tail_functional(d, 1e9)


def test_csv_rows(samples):
    rows = list(boundary_csv_rows(samples("half-atom")))
    assert len(rows) == 2**14
    assert {r[3] for r in rows} <= {"converged", "blow-up", "undecided"}
