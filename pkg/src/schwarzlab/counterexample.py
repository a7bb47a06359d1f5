"""A step function h with liminf t∫_t^∞ m_h(s)/s ds = 0 that lies in no L^p, p > 0.

h takes the value v_k on a set of measure m_k (k = 1..K) and 0 elsewhere.
Everything is stored as logarithms, ℓ_k = log v_k and log m_k, because the
levels leave the floating-point range after a few rungs.

With ℓ_k = G·ℓ_(k−1) and m_k = 2^(−k−1) e^(−ℓ_(k−1)) / ℓ_k:

* at the gap probe t_j = v_j only rungs above j contribute, and
  t_j ∫_{t_j}^∞ m_h(s)/s ds = Σ_{i>j} m_i (ℓ_i − ℓ_j) v_j ≤ 2^(−j−1);
* v_k^p m_k = exp((pG − 1) ℓ_(k−1) − log ℓ_k − (k+1) log 2) grows without
  bound as soon as pG > 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

GROWTH = 30.0
FIRST_LEVEL = 10.0
FIRST_MASS = 0.25
# ℓ_k must stay finite, and so must the tail sums built from it.
MAX_LOG_LEVEL = 1e300


@dataclass
class StepFunction:
    log_levels: np.ndarray  # ℓ_k = log v_k
    log_masses: np.ndarray  # log m_k
    growth: float
    requested_depth: int

    @property
    def depth(self) -> int:
        return self.log_levels.size

    @property
    def truncated(self) -> bool:
        return self.depth < self.requested_depth

    @property
    def gap_probes_log(self) -> np.ndarray:
        """log t_j for j = 1..K−1 (t_j = v_j)."""
        return self.log_levels[:-1]

    def intervals(self):
        """(start, end, log value) of each step on (−π, π], laid out from −π."""
        lengths = 2.0 * math.pi * np.exp(self.log_masses)
        starts = -math.pi + np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
        return list(zip(starts, starts + lengths, self.log_levels))


def construct_tail_counterexample(depth: int = 8, growth: float = GROWTH) -> StepFunction:
    if depth < 2:
        raise ValueError("depth must be at least 2")
    if growth <= 10.0:
        raise ValueError("growth must exceed 10 so that p = 0.1 already diverges")
    levels = [FIRST_LEVEL]
    masses = [math.log(FIRST_MASS)]
    for k in range(2, depth + 1):
        lk = growth * levels[-1]
        if not lk < MAX_LOG_LEVEL:
            break
        masses.append(-(k + 1) * math.log(2.0) - levels[-1] - math.log(lk))
        levels.append(lk)
    return StepFunction(np.array(levels), np.array(masses), growth, depth)


def log_tail_functional(h: StepFunction, log_t: float) -> float:
    """log of t∫_t^∞ m_h(s)/s ds = log(t Σ_{v_i > t} m_i log(v_i/t))."""
    sel = h.log_levels > log_t
    if not sel.any():
        return -math.inf
    gaps = h.log_levels[sel] - log_t
    return float(log_t + logsumexp(h.log_masses[sel] + np.log(gaps)))


def gap_tail_values(h: StepFunction) -> np.ndarray:
    """log of t_j ∫_{t_j}^∞ m_h(s)/s ds along the gap probes."""
    return np.array([log_tail_functional(h, lt) for lt in h.gap_probes_log])


def log_lp_partial_sums(h: StepFunction, p: float) -> np.ndarray:
    """log Σ_{k≤K} v_k^p m_k for K = 1..depth."""
    terms = p * h.log_levels + h.log_masses
    return np.logaddexp.accumulate(terms)


def log_lp_norm(h: StepFunction, p: float) -> float:
    """log ‖h‖_p (normalized measure)."""
    return float(log_lp_partial_sums(h, p)[-1] / p)
