import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schwarzlab.counterexample import (construct_tail_counterexample, gap_tail_values,
                                       log_lp_norm, log_lp_partial_sums, log_tail_functional)


def direct_tail(levels, masses, t):
    # t∫_t^∞ m_h(s)/s ds summed step by step in plain floats
    return t * sum(m * math.log(v / t) for v, m in zip(levels, masses) if v > t)


def test_small_depth_against_floats():
    # depth 2 still fits in floats: v = (e^10, e^300)
    h = construct_tail_counterexample(2)
    v = np.exp(h.log_levels)
    m = np.exp(h.log_masses)
    t = v[0]
    assert log_tail_functional(h, math.log(t)) == pytest.approx(math.log(direct_tail(v, m, t)),
                                                                rel=1e-12)
    assert m.sum() < 1


def test_masses_fit_in_circle():
    h = construct_tail_counterexample(10)
    assert math.exp(np.logaddexp.reduce(h.log_masses)) < 1.0
    iv = h.intervals()
    assert iv[0][0] == pytest.approx(-math.pi)
    assert iv[-1][1] < math.pi


@pytest.mark.parametrize("depth", [6, 8, 12])
def test_gap_bound(depth):
    h = construct_tail_counterexample(depth)
    gaps = gap_tail_values(h)
    j = np.arange(1, h.depth)
    assert np.all(gaps <= -j * math.log(2.0))


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 1.0])
def test_lp_partial_sums_double(p):
    sums = log_lp_partial_sums(construct_tail_counterexample(8), p)
    assert np.all(np.diff(sums) >= math.log(2.0))


@given(st.floats(0.05, 3.0), st.integers(2, 12))
def test_lp_sums_nondecreasing(p, depth):
    h = construct_tail_counterexample(depth)
    assert np.all(np.diff(log_lp_partial_sums(h, p)) >= 0)
    assert log_lp_norm(h, p) == pytest.approx(log_lp_partial_sums(h, p)[-1] / p)


def test_tail_functional_nonnegative_decreasing_above_top():
    h = construct_tail_counterexample(4)
    assert log_tail_functional(h, h.log_levels[-1] + 1) == -math.inf


def test_truncation():
    h = construct_tail_counterexample(500)
    assert h.truncated and h.depth < 500
    assert np.all(np.isfinite(h.log_levels))
    with pytest.raises(ValueError):
        construct_tail_counterexample(1)
    with pytest.raises(ValueError):
        construct_tail_counterexample(4, growth=5.0)
