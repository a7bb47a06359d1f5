"""Radial boundary sampling of analytic functions and distribution-function functionals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import zeta

from .measure import CircleMeasure, TWO_PI, schwarz_ring, schwarz_values

CONVERGED, BLOWUP, UNDECIDED = 0, 1, 2
FLAG_NAMES = {CONVERGED: "converged", BLOWUP: "blow-up", UNDECIDED: "undecided"}

DEFAULT_LADDER = tuple(1.0 - 10.0 ** (-k) for k in range(1, 13))
MIN_RESOLVED_COUNT = 100


class SamplingError(RuntimeError):
    pass


class DivergenceError(RuntimeError):
    pass


@dataclass
class AnalyticFunction:
    evaluator: Callable[[np.ndarray], np.ndarray]
    tag: str = "closed-form"
    measure: Optional[CircleMeasure] = None
    name: str = ""
    ring: Optional[Callable[[float, int], np.ndarray]] = None

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))

    def ring_values(self, r: float, n: int) -> np.ndarray:
        if self.ring is not None:
            return self.ring(r, n)
        theta = -math.pi + TWO_PI * np.arange(n) / n
        return self(r * np.exp(1j * theta))


def schwarz_function(mu: CircleMeasure, name: str = "") -> AnalyticFunction:
    return AnalyticFunction(lambda z: schwarz_values(mu, z), "schwarz-of-measure", mu,
                            name or mu.label, lambda r, n: schwarz_ring(mu, r, n))


def closed_form(func, name: str = "") -> AnalyticFunction:
    return AnalyticFunction(func, "closed-form", None, name)


@dataclass
class BoundarySamples:
    theta: np.ndarray
    radii: np.ndarray
    values: np.ndarray  # shape (L, N)
    flags: np.ndarray  # shape (N,), CONVERGED / BLOWUP / UNDECIDED
    source: Optional[AnalyticFunction] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def boundary(self) -> np.ndarray:
        return self.values[-1]

    @property
    def blowup(self) -> np.ndarray:
        return self.flags == BLOWUP

    def fraction(self, flag: int) -> float:
        return float(np.mean(self.flags == flag))


def sample_boundary(f: AnalyticFunction, n: int = 2**16, ladder=DEFAULT_LADDER,
                    tol: float = 1e-6) -> BoundarySamples:
    if n < 2**10 or n & (n - 1):
        raise ValueError("N must be a power of two >= 2**10")
    radii = np.asarray(ladder, dtype=float)
    if radii.size < 3 or np.any(np.diff(radii) <= 0) or radii[0] <= 0 or radii[-1] >= 1:
        raise ValueError("ladder must be increasing inside (0, 1) with at least 3 rungs")
    theta = -math.pi + TWO_PI * np.arange(n) / n
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        values = np.empty((radii.size, n), dtype=complex)
        for l, r in enumerate(radii):
            try:
                values[l] = f.ring_values(float(r), n)
            except Exception as exc:
                raise SamplingError(f"evaluator failed on radius {r!r}: {exc}") from exc
        flags = classify(values, tol)
    return BoundarySamples(theta, radii, values, flags, f)


def classify(values: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Per-angle flag from the last rungs of a radial ladder."""
    last, prev, prev2 = values[-1], values[-2], values[-3]
    with np.errstate(invalid="ignore", over="ignore"):
        finite = np.isfinite(last)
        a0, a1, a2 = np.abs(prev2), np.abs(prev), np.abs(last)
        diff = np.abs(last - prev)
        conv = finite & (diff < tol * (1.0 + a2))
        growing = (a2 > a1) & (a1 > a0) & ~conv
    flags = np.full(last.shape, UNDECIDED, dtype=np.int8)
    flags[conv] = CONVERGED
    flags[growing | ~finite] = BLOWUP
    return flags


def log_grid(t_min: float = 1e-2, t_max: float = 1e6, per_decade: int = 512) -> np.ndarray:
    decades = math.log10(t_max / t_min)
    k = int(round(decades * per_decade))
    return t_min * 10.0 ** (np.arange(k + 1) / per_decade)


@dataclass
class DistributionFunction:
    t: np.ndarray
    m: np.ndarray
    n_angles: Optional[int] = None
    n_blowup: int = 0
    counts: Optional[np.ndarray] = None  # finite-valued angles with |f| >= t

    def window(self, min_count: int = MIN_RESOLVED_COUNT):
        """Initial stretch of the grid where the sampled m_f is trustworthy.

        A point is resolved when at least ``min_count`` finite samples exceed t,
        or none do (blow-up angles are then an isolated null set and are dropped).
        """
        if self.counts is None:
            return self.t, self.m
        ok = (self.counts >= min_count) | (self.counts == 0)
        stop = np.argmin(ok) if not ok.all() else ok.size
        m = np.where(self.counts == 0, 0.0, self.m)
        return self.t[:stop], m[:stop]


def distribution_function(s: BoundarySamples, t_grid=None) -> DistributionFunction:
    und = s.fraction(UNDECIDED)
    if und > 0.01:
        raise SamplingError(f"undecided fraction {und:.4f} exceeds 1%: refine the ladder or grid")
    t = log_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    mod = np.sort(np.abs(s.boundary[~s.blowup]))
    counts = mod.size - np.searchsorted(mod, t, side="left")
    nb = int(np.count_nonzero(s.blowup))
    m = (counts + nb) / s.n
    return DistributionFunction(t, m, s.n, nb, counts)


@dataclass
class WeakL1:
    value: float
    t_at: float
    edge: bool


def weak_l1_norm(d: DistributionFunction) -> WeakL1:
    t, m = d.window()
    tm = t * m
    k = int(np.argmax(tm))
    return WeakL1(float(tm[k]), float(t[k]), k == 0 or k == t.size - 1)


@dataclass
class TailValue:
    value: float
    extrapolated: float
    divergent: bool
    exponent: float


def _last_decade(t):
    return t >= t[-1] / 10.0


def tail_fit(t, m):
    """Fit m ≈ c·t^(−β) on the last decade; returns (β, m at the end)."""
    sel = _last_decade(t) & (m > 0)
    if not np.any(sel):
        return math.inf, 0.0
    if np.count_nonzero(sel) < 3:
        return math.inf, float(m[-1])
    beta = -np.polyfit(np.log(t[sel]), np.log(m[sel]), 1)[0]
    return float(beta), float(m[-1])


def tail_functional(d: DistributionFunction, R: float, min_exponent: float = 0.9) -> TailValue:
    """R·∫_R^∞ m_f(t)/t dt with a power-law tail beyond the resolved grid."""
    t, m = d.window()
    if not t[0] <= R <= t[-1]:
        raise ValueError(f"R={R!r} outside the resolved grid [{t[0]}, {t[-1]}]")
    beta, m_end = tail_fit(t, m)
    u = np.log(t)
    lr = math.log(R)
    k = np.searchsorted(u, lr, side="right")
    mR = float(np.interp(lr, u, m))
    uu = np.concatenate([[lr], u[k:]])
    mm = np.concatenate([[mR], m[k:]])
    core = R * float(np.sum(0.5 * (mm[1:] + mm[:-1]) * np.diff(uu)))
    if m_end == 0.0:
        return TailValue(core, 0.0, False, beta)
    if beta < min_exponent:
        return TailValue(math.inf, math.inf, True, beta)
    extra = R * m_end / beta
    return TailValue(core + extra, extra, False, beta)


def probe_grid(d: DistributionFunction, n: int = 8, decades: float = 1.0) -> np.ndarray:
    t, _ = d.window()
    hi = t[-1]
    lo = max(t[0], hi / 10.0**decades)
    return np.geomspace(lo, hi, n)


def liminf_probe(functional: Callable[[float], object], probes) -> tuple[float, float]:
    """Minimum of a functional over a finite probe grid: a proxy, not a limit."""
    best = (math.inf, math.nan)
    seen = False
    for R in probes:
        v = functional(R)
        if isinstance(v, TailValue):
            if v.divergent:
                continue
            v = v.value
        seen = True
        if v < best[0]:
            best = (float(v), float(R))
    if not seen:
        raise DivergenceError("functional diverges at every probe")
    return best


def _check_blowup(s: BoundarySamples):
    frac = s.fraction(BLOWUP)
    if frac > 0.01:
        raise SamplingError(f"blow-up fraction {frac:.4f} exceeds 1%")


def excluded_mass(s: BoundarySamples) -> float:
    return float(np.count_nonzero(s.blowup)) / s.n


def smirnov_norm(s: BoundarySamples) -> float:
    _check_blowup(s)
    v = np.abs(s.boundary[~s.blowup])
    with np.errstate(divide="ignore"):
        out = float(np.sum(np.maximum(np.log(v), 0.0)) / s.n)
    return out + _pole_cells_log(s)


def _pole_cells(s: BoundarySamples, p: float) -> float:
    # |f| ≈ c/|θ−θ0| near an isolated blow-up angle on the grid, c from the two
    # neighbours; the trapezoid sum of |θ|^(−p) over j ≠ 0 falls short of the
    # integral by −2ζ(p)h^(1−p) (generalized Euler-Maclaurin)
    h = TWO_PI / s.n
    total = 0.0
    v = np.abs(s.boundary)
    for j in np.nonzero(s.blowup)[0]:
        nb = [v[(j - 1) % s.n], v[(j + 1) % s.n]]
        nb = [x for x in nb if np.isfinite(x)]
        if not nb:
            continue
        c = float(np.mean(nb)) * h
        total += -2.0 * zeta(p) * c**p * h ** (1.0 - p) / TWO_PI
    return total


def _pole_cells_log(s: BoundarySamples) -> float:
    # same correction for log(c/|θ−θ0|): h·log(2πc/h) per blow-up angle
    h = TWO_PI / s.n
    total = 0.0
    v = np.abs(s.boundary)
    for j in np.nonzero(s.blowup)[0]:
        nb = [x for x in (v[(j - 1) % s.n], v[(j + 1) % s.n]) if np.isfinite(x)]
        if nb:
            c = float(np.mean(nb)) * h
            total += max(h * math.log(TWO_PI * c / h), 0.0) / TWO_PI
    return total


def hp_power_mean(s: BoundarySamples, p: float, pole_correction: bool = False) -> float:
    """∫|f|^p dm from the samples (blow-up angles excluded unless corrected)."""
    if not 0.0 < p:
        raise ValueError("p must be positive")
    _check_blowup(s)
    v = np.abs(s.boundary[~s.blowup])
    out = float(np.sum(v**p) / s.n)
    if pole_correction and p < 1.0:
        out += _pole_cells(s, p)
    return out


def hp_quasinorm(s: BoundarySamples, p: float, pole_correction: bool = False) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return hp_power_mean(s, p, pole_correction) ** (1.0 / p)


def layer_cake_power(d: DistributionFunction, p: float, drop_blowup: bool = True) -> float:
    """p∫ t^(p−1) m_f(t) dt over the grid, m_f taken constant below the first point."""
    t, m = d.t, d.m
    if drop_blowup and d.n_angles:
        m = m - d.n_blowup / d.n_angles
    tp = t**p
    return float(tp[0] * m[0] + np.sum(np.diff(tp) * 0.5 * (m[1:] + m[:-1])))


def boundary_csv_rows(s: BoundarySamples):
    for th, v, fl in zip(s.theta, s.boundary, s.flags):
        yield (th, v.real, v.imag, FLAG_NAMES[int(fl)])
