"""Conditions (i)-(iv), the Kolmogorov and Hruschev-Vinogradov diagnostics, and certificates.

Verdicts are three-valued.  Limit statements (liminf over t or p) are only
ever checked on finite probe grids, and every report says which grid it used.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .boundary import (AnalyticFunction, BoundarySamples, DistributionFunction, SamplingError,
                       DivergenceError, distribution_function, hp_quasinorm, liminf_probe,
                       probe_grid, sample_boundary, tail_functional, weak_l1_norm, BLOWUP)
from .counterexample import (StepFunction, construct_tail_counterexample, gap_tail_values,
                             log_lp_norm, log_lp_partial_sums)
from .measure import CircleMeasure, TWO_PI, total_mass, total_variation

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
SMIRNOV_TOL = 1e-3
F0_TOL = 1e-8
HV_BAND = 0.2
A2_PROBES = (0.9, 0.95, 0.99, 0.995)
# ‖f‖_{1,∞} ≤ 2e·I_f and I_f ≤ 4π·liminf R∫_R^∞ m_f/t dt
C_IMPL = 8.0 * math.pi * math.e
# Per unit of singular mass, lim t·m_f(t) for an atom under dm = dθ/2π.
HV_UNIT = 2.0 / math.pi
HV_UNIT_AS_PRINTED = 1.0 / math.pi


def combine_verdicts(*vs: str) -> str:
    if FAIL in vs:
        return FAIL
    if INCONCLUSIVE in vs:
        return INCONCLUSIVE
    return PASS


# ------------------------------------------------------------------ (i)

@dataclass
class SmirnovResult:
    defect: float
    worst_point: complex
    verdict: str
    probes: list = field(repr=False, default_factory=list)


def default_probes() -> np.ndarray:
    ang = TWO_PI * np.arange(6) / 6 + 0.1
    pts = [0j] + [r * np.exp(1j * a) for r in (0.25, 0.5, 0.75) for a in ang] + [0.9 * np.exp(0.7j)]
    return np.array(pts)


def poisson_log_modulus(s: BoundarySamples, z) -> np.ndarray:
    """∫ log|f| P_z dm with cell averages of log|f| (exact on log-singular cells)."""
    from .logdet import log_modulus_cells

    cells = log_modulus_cells(s)
    mid = s.theta + math.pi / s.n
    zeta = np.exp(1j * mid)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    P = (1.0 - np.abs(z[:, None]) ** 2) / np.abs(zeta[None, :] - z[:, None]) ** 2
    return (P * cells[None, :]).mean(axis=1)


def check_smirnov(f: AnalyticFunction, s: BoundarySamples, probes=None) -> SmirnovResult:
    """max over probes of log|f(z)| − ∫ log|f| P_z dm; pass iff ≤ 1e-3."""
    probes = default_probes() if probes is None else np.asarray(probes, dtype=complex)
    tiny = np.abs(s.boundary) < 1e-300
    if np.mean(tiny & ~s.blowup) > 0.01:
        return SmirnovResult(math.nan, complex("nan"), INCONCLUSIVE, list(probes))
    with np.errstate(divide="ignore"):
        lhs = np.log(np.abs(f(probes)))
    rhs = poisson_log_modulus(s, probes)
    gap = lhs - rhs
    k = int(np.argmax(gap))
    defect = float(gap[k])
    return SmirnovResult(defect, complex(probes[k]), PASS if defect <= SMIRNOV_TOL else FAIL,
                         list(probes))


# ------------------------------------------------------------------ (ii)

@dataclass
class KolmogorovResult:
    constant: float
    sup: float
    t_at: float
    normalized: bool
    edge: bool
    saturated: bool
    verdict: str


def check_kolmogorov(d: DistributionFunction, mu_norm: Optional[float] = None,
                     saturation: float = 0.01) -> KolmogorovResult:
    """sup t·m_f(t) (divided by ‖μ‖ when known).

    A supremum at the top of the resolved window is inconclusive unless t·m_f
    has saturated there (fitted rise below ``saturation`` of its level over the
    last decade).
    """
    w = weak_l1_norm(d)
    saturated = False
    if w.edge and w.t_at > d.t[0]:
        t, m = d.window()
        tm = t * m
        sel = t >= t[-1] / 10.0
        # rise of t·m_f across the last decade from a least-squares line in log t
        slope, level = np.polyfit(np.log10(t[sel]), tm[sel], 1)
        mean = float(np.mean(tm[sel]))
        saturated = bool(mean > 0 and slope <= saturation * mean)
    ok = math.isfinite(w.value) and (not w.edge or saturated)
    const = w.value / mu_norm if mu_norm else w.value
    return KolmogorovResult(const, w.value, w.t_at, bool(mu_norm), w.edge, saturated,
                            PASS if ok else INCONCLUSIVE)


# ------------------------------------------------------------------ (iii)

@dataclass
class HVResult:
    limit: float
    band: float
    t_range: tuple
    predicted: Optional[float]
    predicted_as_printed: Optional[float]
    verdict: str


def hv_limit(d: DistributionFunction, singular_mass: Optional[float] = None,
             band_tol: float = HV_BAND) -> HVResult:
    """Constant fit of t·m_f(t) over the last decade of the resolved window."""
    t, m = d.window()
    sel = t >= t[-1] / 10.0
    tm = t[sel] * m[sel]
    mean = float(np.mean(tm))
    band = float(np.max(np.abs(tm - mean)))
    predicted = None if singular_mass is None else HV_UNIT * singular_mass
    printed = None if singular_mass is None else HV_UNIT_AS_PRINTED * singular_mass
    if band > band_tol * mean and band > 1e-3:
        verdict = INCONCLUSIVE
    elif predicted is None:
        verdict = PASS
    else:
        verdict = PASS if abs(mean - predicted) <= max(band, 0.02 * predicted, 1e-3) else FAIL
    return HVResult(mean, band, (float(t[sel][0]), float(t[-1])), predicted, printed, verdict)


# ------------------------------------------------------------------ (iv)

@dataclass
class ConditionIV:
    re_l1: float
    f0: complex
    verdict: str


def check_condition_iv(f: AnalyticFunction, s: BoundarySamples) -> ConditionIV:
    re = np.abs(s.boundary.real[~s.blowup])
    re_l1 = float(np.sum(re) / s.n) if np.all(np.isfinite(re)) else math.inf
    f0 = complex(np.asarray(f(np.array([0j])))[0])
    ok = math.isfinite(re_l1) and abs(f0.imag) <= F0_TOL
    return ConditionIV(re_l1, f0, PASS if ok else FAIL)


# ------------------------------------------------------------------ §3 split

@dataclass
class Decomposition:
    f1: AnalyticFunction
    f2: AnalyticFunction
    re_f1_l1: float
    f2_tail_tm: np.ndarray  # t·m_{f2}(t) on the last decade of its grid
    f2_boundary: np.ndarray = field(repr=False)


def _samples_schwarz(re_values: np.ndarray):
    """Fourier data of the Schwarz integral of the sampled density."""
    n = re_values.size
    c = np.fft.fft(re_values) / n * (-1.0) ** np.arange(n)  # grid starts at −π
    half = c[: n // 2].copy()
    half[0] = half[0].real
    return half


def decompose(f: AnalyticFunction, s: BoundarySamples):
    """f = f1 + f2, f2 the Schwarz integral of Re f (from samples), Re f1 ≈ 0."""
    re = np.where(s.blowup, 0.0, s.boundary.real)
    if not np.all(np.isfinite(re)):
        raise ValueError("Re f is not integrable on the samples")
    c = _samples_schwarz(re)
    k = np.arange(c.size)

    def f2_eval(z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros(z.shape, dtype=complex)
        for ck in c[:0:-1]:
            acc = (acc + 2.0 * ck) * z
        return acc + c[0]

    n = s.n
    b = np.zeros(n, dtype=complex)
    b[: c.size] = 2.0 * c * (-1.0) ** k
    b[0] = c[0]
    f2_boundary = np.fft.ifft(b) * n
    f2 = AnalyticFunction(f2_eval, "decomposition-part", name="f2")
    f1 = AnalyticFunction(lambda z: f(z) - f2_eval(z), "decomposition-part", name="f1")
    re_f1 = np.where(s.blowup, 0.0, s.boundary.real - f2_boundary.real)
    mod = np.sort(np.abs(f2_boundary))
    t = np.geomspace(1e-2, max(mod[-1], 1e-2) * 1.5, 256)
    m2 = (n - np.searchsorted(mod, t, side="left")) / n
    sel = t >= t[-1] / 10.0
    return Decomposition(f1, f2, float(np.mean(np.abs(re_f1))), t[sel] * m2[sel], f2_boundary)


# ------------------------------------------------------------------ tail and A2

@dataclass
class TailProxy:
    value: float
    R: float
    probes: list
    divergent: bool


def tail_proxy(d: DistributionFunction, n_probes: int = 8) -> TailProxy:
    probes = probe_grid(d, n_probes)
    try:
        v, R = liminf_probe(lambda R: tail_functional(d, R), probes)
        return TailProxy(v, R, list(probes), False)
    except DivergenceError:
        return TailProxy(math.inf, math.nan, list(probes), True)


@dataclass
class A2Result:
    proxy: float
    values: dict
    verdict: str
    bridge: str


def a2_functional(s: BoundarySamples, p_probes=A2_PROBES, tail: Optional[TailProxy] = None) -> A2Result:
    """min over p-probes of (1−p)·‖f‖_{H^p}, with the tail-divergence direction noted."""
    values = {}
    try:
        for p in p_probes:
            values[p] = (1.0 - p) * hp_quasinorm(s, p, pole_correction=True)
    except (SamplingError, FloatingPointError, OverflowError):
        return A2Result(math.nan, values, INCONCLUSIVE, "H^p quadrature failed")
    proxy = min(values.values())
    bridge = ""
    if tail is not None and tail.divergent:
        bridge = "tail functional diverges, so (1−p)‖f‖_p is expected to grow as p ↑ 1"
    return A2Result(proxy, values, PASS if math.isfinite(proxy) else FAIL, bridge)


# ------------------------------------------------------------------ Theorem 2

@dataclass
class Theorem2Certificate:
    verdict: str
    smirnov: str
    condition_iv: str
    re_l1: float
    tail: float
    weak_l1: float
    mu_norm: Optional[float]
    bound: Optional[float]
    a1_ratio: Optional[float]  # (‖μ‖ − ‖Re f‖₁)/‖f‖₁,∞, an empirical lower bound for A1's C
    c_impl: float = C_IMPL


def theorem2_certificate(f: AnalyticFunction, s: BoundarySamples, d: DistributionFunction,
                         mu: Optional[CircleMeasure] = None, smirnov: Optional[SmirnovResult] = None,
                         iv: Optional[ConditionIV] = None,
                         tail: Optional[TailProxy] = None) -> Theorem2Certificate:
    smirnov = smirnov or check_smirnov(f, s)
    iv = iv or check_condition_iv(f, s)
    tail = tail or tail_proxy(d)
    weak = weak_l1_norm(d).value
    parts = [smirnov.verdict, iv.verdict, FAIL if tail.divergent else PASS]
    norm = bound = ratio = None
    if mu is not None:
        norm = total_variation(mu)
        bound = iv.re_l1 + C_IMPL * tail.value
        # equality holds for absolutely continuous μ; sampled ‖Re f‖₁ carries O(h²) error
        parts.append(PASS if norm <= bound * (1 + 1e-6) + 1e-12 else FAIL)
        ratio = (norm - iv.re_l1) / weak if weak > 0 else None
    return Theorem2Certificate(combine_verdicts(*parts), smirnov.verdict, iv.verdict, iv.re_l1,
                               tail.value, weak, norm, bound, ratio)


# ------------------------------------------------------------------ recovery

@dataclass
class RecoveredMeasure:
    radius: float
    theta: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    atoms: list
    total: float
    masses_by_rung: list
    verdict: str

    def as_measure(self) -> CircleMeasure:
        th, rho = self.theta, self.density

        def dens(x):
            return np.interp(np.mod(np.asarray(x) + math.pi, TWO_PI) - math.pi, th, rho,
                             period=TWO_PI)
        return CircleMeasure(density=dens, atoms=tuple(self.atoms), label="recovered")


def _detect_atoms(theta, rho, r, threshold_factor=10.0, width=200.0):
    """Poisson peaks above 10× the median |density|.

    The mass is the window integral above a linear background, divided by the
    share of a Poisson kernel that falls inside the window.
    """
    n = rho.size
    h = TWO_PI / n
    thr = threshold_factor * max(float(np.median(np.abs(rho))), 1e-12)
    w_ang = min(width * (1.0 - r), math.pi / 4.0)
    half = max(int(w_ang / h), 3)
    # Poisson mass of a unit atom inside |θ| <= w_ang
    inside = (2.0 / math.pi) * math.atan((1.0 + r) / (1.0 - r) * math.tan(0.5 * half * h))
    cand = np.nonzero((rho > thr) & (rho >= np.roll(rho, 1)) & (rho >= np.roll(rho, -1)))[0]
    cand = sorted(cand, key=lambda j: -rho[j])
    taken = np.zeros(n, dtype=bool)
    atoms = []
    for j in cand:
        if taken[j]:
            continue
        idx = (j + np.arange(-half, half + 1)) % n
        taken[idx] = True
        lo, hi = rho[idx[0]], rho[idx[-1]]
        background = lo + (hi - lo) * np.linspace(0.0, 1.0, idx.size)
        mass = float(np.sum(rho[idx] - background) / n) / inside
        atoms.append((float(theta[j]), mass, idx, background))
    return atoms


def recover_measure(f: AnalyticFunction, ladder=(0.9, 0.99, 0.999), n: int = 2**16) -> RecoveredMeasure:
    """Read μ off Re f(rζ) dm on the ladder; atoms are Poisson-shaped peaks."""
    theta = -math.pi + TWO_PI * np.arange(n) / n
    rungs = []
    for r in ladder:
        if n * (1.0 - r) < 40:
            raise ValueError(f"radius {r} is not resolved by {n} angles (need n(1−r) >= 40)")
        rho = np.asarray(f.ring_values(r, n)).real
        atoms = _detect_atoms(theta, rho, r)
        rungs.append((r, rho, atoms))
    masses = [sorted(a[1] for a in atoms) for _, _, atoms in rungs]
    r, rho, atoms = rungs[-1]
    dens = rho.copy()
    for _, _, idx, bg in atoms:
        dens[idx] = bg
    verdict = PASS
    if len(rungs) >= 2:
        prev, last = masses[-2], masses[-1]
        if len(prev) != len(last):
            verdict = INCONCLUSIVE
        elif any(abs(a - b) > 0.05 * max(abs(b), 1e-12) for a, b in zip(prev, last)):
            verdict = INCONCLUSIVE
    total = float(np.mean(rho))
    return RecoveredMeasure(r, theta, dens, [(a[0], a[1]) for a in atoms], total,
                            [[float(x) for x in m] for m in masses], verdict)


def mean_value_masses(f: AnalyticFunction, ladder=(0.5, 0.9, 0.99, 0.999), n: int = 2**16):
    """∫ Re f(rζ) dm(ζ) per rung; equals Re f(0) by the mean-value property."""
    return [float(np.mean(np.asarray(f.ring_values(r, n)).real)) for r in ladder]


# ------------------------------------------------------------------ report

@dataclass
class ConditionReport:
    name: str
    n_angles: int
    smirnov_defect: float
    kolmogorov_constant: float
    hv_limit_estimate: float
    hv_band: float
    hv_predicted: Optional[float]
    hv_predicted_as_printed: Optional[float]
    re_f_l1_norm: float
    f0_real: float
    f0_imag: float
    tail_liminf_proxy: float
    tail_probe_R: float
    a2_proxy: float
    a2_values: dict
    mu_norm: Optional[float]
    theorem2_bound: Optional[float]
    a1_ratio: Optional[float]
    recovered_total_mass: Optional[float]
    verdicts: dict
    metadata: dict

    @property
    def overall(self) -> str:
        return combine_verdicts(*(self.verdicts[k] for k in ("i", "ii", "iii", "iv")))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["a2_values"] = {str(k): v for k, v in self.a2_values.items()}
        out["overall"] = self.overall
        return out


def run_conditions(f: AnalyticFunction, name: str = "", mu: Optional[CircleMeasure] = None,
                   n: int = 2**16, s: Optional[BoundarySamples] = None,
                   recover: bool = True) -> ConditionReport:
    """The full condition pipeline on one function."""
    s = s if s is not None else sample_boundary(f, n)
    d = distribution_function(s)
    mu_norm = total_variation(mu) if mu is not None else None
    sm = check_smirnov(f, s)
    ko = check_kolmogorov(d, mu_norm)
    hv = hv_limit(d, mu.singular_mass() if mu is not None else None)
    iv = check_condition_iv(f, s)
    tail = tail_proxy(d)
    a2 = a2_functional(s, tail=tail)
    cert = theorem2_certificate(f, s, d, mu, sm, iv, tail)
    verdicts = {"i": sm.verdict, "ii": ko.verdict, "iii": hv.verdict, "iv": iv.verdict,
                "tail": FAIL if tail.divergent else PASS, "a2": a2.verdict,
                "theorem2": cert.verdict}
    recovered = None
    if recover and mu is not None:
        rec = recover_measure(f)
        recovered = rec.total
        target = float(np.real(total_mass(mu)))
        ok = abs(rec.total - target) <= 0.02 * max(mu_norm, 1e-12)
        verdicts["recovery"] = combine_verdicts(rec.verdict, PASS if ok else FAIL)
    meta = {"n_angles": s.n, "ladder": [float(r) for r in s.radii],
            "undecided_fraction": s.fraction(2), "blowup_fraction": s.fraction(BLOWUP),
            "t_window": [float(d.window()[0][0]), float(d.window()[0][-1])],
            "tail_probes": [float(x) for x in tail.probes], "a2_probes": list(A2_PROBES),
            "hv_t_range": list(hv.t_range), "smirnov_worst_point": [sm.worst_point.real,
                                                                  sm.worst_point.imag],
            "kolmogorov_edge": ko.edge, "kolmogorov_saturated": ko.saturated}
    return ConditionReport(name, s.n, sm.defect, ko.constant, hv.limit, hv.band, hv.predicted,
                           hv.predicted_as_printed, iv.re_l1, iv.f0.real, iv.f0.imag, tail.value,
                           tail.R, a2.proxy, a2.values, mu_norm, cert.bound, cert.a1_ratio,
                           recovered, verdicts, meta)


__all__ = [
    "PASS", "FAIL", "INCONCLUSIVE", "C_IMPL", "HV_UNIT", "check_smirnov", "check_kolmogorov",
    "hv_limit", "check_condition_iv", "decompose", "theorem2_certificate", "a2_functional",
    "recover_measure", "mean_value_masses", "run_conditions", "ConditionReport", "tail_proxy",
    "construct_tail_counterexample", "gap_tail_values", "log_lp_partial_sums", "log_lp_norm",
    "StepFunction",
]
