"""Walk-on-spheres harmonic measure for complements of vertical slits on the imaginary axis.

A slit (a, b) is the segment [ia, ib]; b = inf makes it the half-line [ia, i∞).
Every walk draws its directions from its own counter-based stream (walk index,
step number), so results do not depend on how walks are batched.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


class InsufficientSamplesError(RuntimeError):
    pass


class ConstructionError(RuntimeError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, wrapping uint64 arithmetic
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def stream_keys(seed: int, walk_index: np.ndarray, tag: int = 0) -> np.ndarray:
    """One 64-bit key per walk, derived from (seed, tag, walk index)."""
    with np.errstate(over="ignore"):
        base = _mix(np.uint64(seed & (2**64 - 1)) + _GOLDEN * np.uint64(tag + 1))
        return _mix(base ^ _mix(np.asarray(walk_index, dtype=np.uint64) * _GOLDEN + _GOLDEN))


def uniforms(keys: np.ndarray, step: int) -> np.ndarray:
    """The step-th uniform in [0, 1) of each stream."""
    with np.errstate(over="ignore"):
        x = _mix(keys + np.uint64(step + 1) * _GOLDEN)
    return (x >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class SlitDomain:
    slits: tuple  # ((a, b), ...) with b = inf for a half-line

    def __post_init__(self):
        slits = tuple((float(a), float(b)) for a, b in self.slits)
        if not slits:
            raise ValueError("at least one slit is required")
        for k, (a, b) in enumerate(slits):
            if not 0.0 < a < b:
                raise ValueError(f"slit {k}: need 0 < a < b, got ({a}, {b})")
            if math.isinf(b) and k != len(slits) - 1:
                raise ValueError("only the last slit may be a half-line")
            if k and a < slits[k - 1][1]:
                raise ValueError(f"slits {k - 1} and {k} overlap or are out of order")
        object.__setattr__(self, "slits", slits)

    @classmethod
    def from_radii(cls, radii, halfline: float | None = None) -> "SlitDomain":
        """E = union of [i r_n, 2 i r_n], optionally closed off by [i·halfline, i∞)."""
        slits = [(r, 2.0 * r) for r in radii]
        if halfline is not None:
            slits.append((halfline, math.inf))
        return cls(tuple(slits))

    @property
    def a(self) -> np.ndarray:
        return np.array([s[0] for s in self.slits])

    @property
    def b(self) -> np.ndarray:
        return np.array([s[1] for s in self.slits])

    @property
    def bounded(self) -> bool:
        return not math.isinf(self.slits[-1][1])


def _nearest(z: np.ndarray, d: SlitDomain):
    """Distance to E, index of the nearest slit and height of the nearest point."""
    x = z.real[:, None]
    y = z.imag[:, None]
    a, b = d.a[None, :], d.b[None, :]
    foot = np.clip(y, a, b)
    dist = np.hypot(x, y - foot)
    k = np.argmin(dist, axis=1)
    rows = np.arange(z.size)
    return dist[rows, k], k, foot[rows, k]


def distance_to_domain_boundary(z: complex, d: SlitDomain) -> float:
    return float(_nearest(np.array([complex(z)]), d)[0][0])


@dataclass
class WalkConfig:
    epsilon: float = 1e-4
    max_steps: int = 100_000
    n_walks: int = 100_000
    seed: int | None = None
    far_field_radius: float = 1e6

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.n_walks < 1000:
            raise ValueError("n_walks must be at least 1000")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.seed is None:
            raise ValueError("a seed is required")


@dataclass
class WalkResult:
    """Per-walk outcome: slit index (−1 on timeout), hit height and step count."""
    slit: np.ndarray
    height: np.ndarray
    steps: np.ndarray
    n_far: int
    seed: int
    tag: int
    n_escaped: int = 0  # timeouts whose position left the floating-point range

    @property
    def n_walks(self) -> int:
        return self.slit.size

    @property
    def n_timeouts(self) -> int:
        return int(np.count_nonzero(self.slit < 0))

    @property
    def absorbed(self) -> np.ndarray:
        return self.slit >= 0

    def hit_fractions(self, n_slits: int) -> np.ndarray:
        return np.bincount(self.slit[self.absorbed], minlength=n_slits) / self.n_walks

    def timeout_fraction(self) -> float:
        return self.n_timeouts / self.n_walks


def walk_on_spheres(z0: complex, d: SlitDomain, cfg: WalkConfig, tag: int = 0,
                    walk_index=None) -> WalkResult:
    """Run cfg.n_walks independent walks from z0 (vectorized over walks).

    Walk j uses the stream (cfg.seed, tag, walk_index[j]); a walk that does not
    come within epsilon of E in cfg.max_steps steps is a timeout.
    """
    idx = np.arange(cfg.n_walks) if walk_index is None else np.asarray(walk_index)
    n = idx.size
    keys = stream_keys(cfg.seed, idx, tag)
    slit = np.full(n, -1, dtype=np.int64)
    height = np.full(n, np.nan)
    steps = np.full(n, cfg.max_steps, dtype=np.int64)
    far = np.zeros(n, dtype=bool)
    live = np.arange(n)
    z = np.full(n, complex(z0))
    two_pi = 2.0 * math.pi
    escaped = 0
    for step in range(cfg.max_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            dist, k, foot = _nearest(z, d)
        lost = ~np.isfinite(dist)
        if lost.any():
            escaped += int(np.count_nonzero(lost))
            steps[live[lost]] = step
            live, z, dist, k, foot = live[~lost], z[~lost], dist[~lost], k[~lost], foot[~lost]
        hit = dist < cfg.epsilon
        if hit.any():
            done = live[hit]
            slit[done] = k[hit]
            height[done] = foot[hit]
            steps[done] = step
            keep = ~hit
            live, z, dist = live[keep], z[keep], dist[keep]
        if live.size == 0 or step == cfg.max_steps:
            break
        far[live[np.abs(z) > cfg.far_field_radius]] = True
        phi = two_pi * uniforms(keys[live], step)
        with np.errstate(over="ignore", invalid="ignore"):
            z = z + dist * np.exp(1j * phi)
    return WalkResult(slit, height, steps, int(np.count_nonzero(far)), cfg.seed, tag, escaped)


@dataclass
class MonteCarloEstimate:
    value: float
    standard_error: float
    n_walks: int
    n_timeouts: int
    seed: int
    n_absorbed: int = 0
    note: str = ""

    @property
    def ucb(self) -> float:
        return self.value + 3.0 * self.standard_error

    def to_dict(self) -> dict:
        return asdict(self)


MIN_ABSORBED = 100


def fraction_estimate(indicator: np.ndarray, w: WalkResult, note: str = "") -> MonteCarloEstimate:
    """Fraction of absorbed walks satisfying the indicator; timeouts are left out."""
    n_abs = int(np.count_nonzero(w.absorbed))
    if n_abs < MIN_ABSORBED:
        raise InsufficientSamplesError(f"only {n_abs} absorbed walks (need {MIN_ABSORBED})")
    hits = int(np.count_nonzero(indicator & w.absorbed))
    p = hits / n_abs
    se = math.sqrt(p * (1.0 - p) / n_abs)
    if w.n_timeouts:
        note = (note + "; " if note else "") + (
            f"{w.n_timeouts} timeouts excluded from the denominator (bias at most "
            f"{w.n_timeouts / w.n_walks:.2e})")
    return MonteCarloEstimate(p, se, w.n_walks, w.n_timeouts, w.seed, n_abs, note)


def omega_from_walks(t: float, w: WalkResult) -> MonteCarloEstimate:
    # |z| ≥ t on the imaginary axis is height ≥ t; endpoints count as inside
    return fraction_estimate(np.nan_to_num(w.height, nan=-1.0) >= t, w)


def omega_tail(t: float, d: SlitDomain, cfg: WalkConfig, z0: complex = 0j,
               walks: WalkResult | None = None) -> MonteCarloEstimate:
    """ω(z0, E ∩ {|z| ≥ t}, C \\ E)."""
    if d.bounded and t > d.b.max():
        w = walks if walks is not None else None
        n = cfg.n_walks
        return MonteCarloEstimate(0.0, 0.0, n, 0 if w is None else w.n_timeouts, cfg.seed, n,
                                  "target empty")
    w = walks if walks is not None else walk_on_spheres(z0, d, cfg)
    return omega_from_walks(t, w)


def subsegment_estimate(lo: float, hi: float, w: WalkResult) -> MonteCarloEstimate:
    h = np.nan_to_num(w.height, nan=-1.0)
    return fraction_estimate((h >= lo) & (h <= hi), w)


def _to_segment_plane(z, a, b):
    # affine map taking [ia, ib] onto [−1, 1]
    c = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return (np.asarray(z, dtype=complex) - 1j * c) / (1j * half)


def _joukowski_inverse(zeta):
    w = zeta + np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)
    return np.where(np.abs(w) < 1.0, 1.0 / w, w)


def single_slit_oracle(z0: complex, slit, sub) -> float:
    """Exact harmonic measure at z0 of the part [i·lo, i·hi] of one slit (both sides).

    The complement of the slit goes to |w| > 1 under affine + inverse Joukowski;
    inversion and a Möbius map then send z0 to 0, where harmonic measure is
    normalized arc length.
    """
    a, b = map(float, slit)
    lo, hi = map(float, sub)
    lo, hi = max(lo, a), min(hi, b)
    if hi <= lo:
        return 0.0
    zeta0 = _to_segment_plane(z0, a, b)
    if abs(zeta0.imag) < 1e-15 and -1.0 <= zeta0.real <= 1.0:
        raise ValueError("z0 lies on the slit")
    u0 = 1.0 / np.conj(_joukowski_inverse(zeta0))  # exterior -> interior, conjugated
    x_lo = (lo - 0.5 * (a + b)) / (0.5 * (b - a))
    x_hi = (hi - 0.5 * (a + b)) / (0.5 * (b - a))
    # x = cos φ: the sub-segment is the two arcs φ ∈ [φ1, φ2] and [−φ2, −φ1]
    phi1, phi2 = math.acos(min(1.0, x_hi)), math.acos(max(-1.0, x_lo))
    total = 0.0
    for alpha, beta in ((phi1, phi2), (-phi2, -phi1)):
        # u = 1/conj(w) fixes the circle pointwise, so arcs keep their angles
        e = np.exp(1j * np.array([alpha, beta]))
        tau = (e - u0) / (1.0 - np.conj(u0) * e)
        ang = np.angle(tau)
        total += ((ang[1] - ang[0]) % (2.0 * math.pi)) / (2.0 * math.pi)
    return float(min(1.0, total))


def single_slit_density_oracle(z0: complex, slit, sub) -> float:
    """Same quantity by integrating the harmonic-measure density of a segment.

    For [−1, 1] seen from ζ0 the density (both sides together) is
    Re(√(ζ0²−1)/(ζ0−x)) / (π√(1−x²)); used as an independent cross-check.
    """
    a, b = map(float, slit)
    lo, hi = max(float(sub[0]), a), min(float(sub[1]), b)
    if hi <= lo:
        return 0.0
    zeta0 = complex(_to_segment_plane(z0, a, b))
    root = np.sqrt(zeta0 - 1.0) * np.sqrt(zeta0 + 1.0)
    if abs(zeta0 + root) < 1.0:
        root = -root
    x_lo = (lo - 0.5 * (a + b)) / (0.5 * (b - a))
    x_hi = (hi - 0.5 * (a + b)) / (0.5 * (b - a))
    # x = cos φ removes the endpoint singularity
    g = lambda phi: (root / (zeta0 - math.cos(phi))).real / math.pi
    return quad(g, math.acos(min(1.0, x_hi)), math.acos(max(-1.0, x_lo)),
                epsabs=1e-13, epsrel=1e-12, limit=400)[0]


def h_n_domain(r_n: float) -> SlitDomain:
    return SlitDomain(((1.0, 2.0), (float(r_n), math.inf)))


def h_n_value(r_n: float, cfg: WalkConfig, tag: int = 0) -> MonteCarloEstimate:
    """h_n(0): harmonic measure of [i r_n, i∞) in the complement of [i, 2i] ∪ [i r_n, i∞)."""
    if r_n < 2.0:
        raise ValueError("r_n must be at least 2 so the half-line does not overlap [i, 2i]")
    w = walk_on_spheres(0j, h_n_domain(r_n), cfg, tag=tag)
    return fraction_estimate(w.slit == 1, w)


@dataclass
class RadiusCertificate:
    n: int
    radius: float
    target: float
    estimate: MonteCarloEstimate
    history: list = field(default_factory=list)  # (candidate, value, se) per attempt

    def to_dict(self) -> dict:
        return {"n": self.n, "radius": self.radius, "target": self.target,
                "estimate": self.estimate.to_dict(),
                "history": [list(h) for h in self.history]}


MAX_RADIUS = 1e30


def choose_radii(n_generations: int, cfg: WalkConfig, max_radius: float = MAX_RADIUS,
                 progress=None) -> tuple[list, list]:
    """r_1 = 1 and, for each n, the first candidate 10·r_n·2^k with UCB h_{n+1}(0) ≤ r_n^(−2)."""
    if n_generations < 1:
        raise ValueError("need at least one generation")
    radii = [1.0]
    certs = []
    attempts = []  # (generation, candidate, value, se) over the whole run
    for n in range(1, n_generations):
        r_n = radii[-1]
        target = r_n**-2
        cand = 10.0 * r_n
        history = []
        attempt = 0
        while True:
            if cand > max_radius:
                raise ConstructionError(
                    f"generation {n + 1}: candidate exceeded {max_radius:g} without "
                    f"h(0) + 3σ <= {target:g} (certified so far: {radii})", attempts)
            est = h_n_value(cand, cfg, tag=1000 * n + attempt)
            history.append((cand, est.value, est.standard_error))
            attempts.append((n + 1, cand, est.value, est.standard_error))
            if progress:
                progress(n + 1, cand, est)
            if est.ucb <= target:
                break
            cand *= 2.0
            attempt += 1
        radii.append(cand)
        certs.append(RadiusCertificate(n + 1, cand, target, est, history))
    return radii, certs


@dataclass
class ProbePoint:
    n: int
    t: float
    t_omega: float
    standard_error: float
    bound: float | None


def liminf_t_omega(radii, cfg: WalkConfig, tag: int = 7) -> list[ProbePoint]:
    """t·ω(t) at t = 2 r_n for E = ∪[i r_n, 2 i r_n], one set of walks for all probes."""
    d = SlitDomain.from_radii(radii)
    w = walk_on_spheres(0j, d, cfg, tag=tag)
    out = []
    for n, r in enumerate(radii, start=1):
        t = 2.0 * r
        est = omega_from_walks(t, w)
        bound = 2.0 / radii[n - 2] if n >= 2 else None
        out.append(ProbePoint(n, t, t * est.value, t * est.standard_error, bound))
    return out


@dataclass
class WienerTerm:
    n: int
    length: float
    term: float
    flag: str = ""


def wiener_series_terms(d: SlitDomain, n_blocks: int) -> list[WienerTerm]:
    """n / log(2/c(E_n)) with c = length/4 for E_n = E ∩ {2^n ≤ |z| < 2^(n+1)}."""
    out = []
    for n in range(1, n_blocks + 1):
        lo, hi = 2.0**n, 2.0 ** (n + 1)
        pieces = [min(b, hi) - max(a, lo) for a, b in d.slits if min(b, hi) > max(a, lo)]
        if not pieces:
            out.append(WienerTerm(n, 0.0, 0.0))
            continue
        flag = ""
        if len(pieces) > 1:
            flag = "several pieces: capacity bounded below by the longest"
        L = max(pieces)
        denom = math.log(8.0 / L)
        term = math.inf if denom == 0.0 else n / denom
        out.append(WienerTerm(n, L, term, flag))
    return out
