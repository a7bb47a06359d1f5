"""Logarithmic determinant u_f(w) = ∫ log|1 − w f| dm and the functionals built on it.

Circle averages of log|·| are taken from boundary samples cell by cell.  On a
cell where the sampled function passes close to zero, or where f has an
isolated pole, the integrand is integrated exactly for the linear interpolant
(of 1 − w f, or of 1/f near poles) instead of by the trapezoid rule.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .boundary import BoundarySamples, distribution_function, hp_power_mean

CHUNK = 2**22
SLACK = 0.05


class TailFitError(RuntimeError):
    pass


def loglin(a, b):
    """∫_0^1 log|a + (b − a)s| ds for complex a, b (vectorized)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    B = b - a
    same = np.abs(B) <= 1e-300
    Bs = np.where(same, 1.0, B)
    x1 = b / Bs
    x0 = a / Bs
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(x1 == 0, 0.0, x1 * np.log(np.where(x1 == 0, 1.0, x1)))
        f0 = np.where(x0 == 0, 0.0, x0 * np.log(np.where(x0 == 0, 1.0, x0)))
        out = np.log(np.abs(Bs)) + (f1 - f0).real - 1.0
        # short segments far from 0: the closed form cancels, use the log1p series
        z = B / np.where(a == 0, 1.0, a)
        near = ~same & (a != 0) & (np.abs(z) < 0.05)
        if np.any(near):
            ser = np.zeros_like(z)
            zn = np.ones_like(z)
            for n in range(1, 14):
                zn = zn * z
                ser = ser + (-1) ** (n + 1) * zn / (n * (n + 1))
            out = np.where(near, np.log(np.abs(np.where(a == 0, 1.0, a))) + ser.real, out)
        out = np.where(same, np.log(np.abs(a)), out)
    return out


def cell_logs(num: np.ndarray) -> np.ndarray:
    """Average of log|g| over each periodic cell, g the linear interpolant of ``num``."""
    return loglin(num, np.roll(num, -1, axis=-1))


POLE_BAND = 64


@dataclass
class _PoleData:
    v: np.ndarray
    q: np.ndarray
    use_q: np.ndarray  # per cell: integrate via 1/f
    q_cells: np.ndarray


def _pole_data(s: BoundarySamples) -> _PoleData:
    v = s.boundary.copy()
    blow = s.blowup | ~np.isfinite(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(blow, 0.0, 1.0 / np.where(blow, 1.0, v))
    q1 = np.roll(q, -1)
    b1 = np.roll(blow, -1)
    # 1/f is nearly linear next to a pole but not next to a zero, hence |f| > 1
    with np.errstate(invalid="ignore"):
        big = np.maximum(np.abs(v), np.abs(np.roll(v, -1))) > 1.0
    near = np.minimum(np.abs(q), np.abs(q1)) <= POLE_BAND * np.abs(q1 - q)
    use_q = blow | b1 | (near & big)
    v = np.where(blow, np.nan, v)
    return _PoleData(v, q, use_q, cell_logs(q))


def _cache(s: BoundarySamples) -> _PoleData:
    pd = getattr(s, "_pole", None)
    if pd is None:
        pd = _pole_data(s)
        s._pole = pd
    return pd


def u_f(s: BoundarySamples, w):
    """u_f at one point or an array of points."""
    w_arr = np.atleast_1d(np.asarray(w, dtype=complex))
    pd = _cache(s)
    n = pd.v.size
    out = np.zeros(w_arr.shape, dtype=float)
    flat = w_arr.ravel()
    res = np.zeros(flat.size)
    jq = np.nonzero(pd.use_q)[0]
    jq1 = (jq + 1) % n
    step = max(1, CHUNK // n)
    for k0 in range(0, flat.size, step):
        ww = flat[k0: k0 + step][:, None]
        with np.errstate(invalid="ignore", over="ignore"):
            cells = cell_logs(1.0 - ww * pd.v[None, :])
        if jq.size:
            num0 = pd.q[jq][None, :] - ww
            num1 = pd.q[jq1][None, :] - ww
            stacked = np.stack([num0, num1], axis=-1)
            qc = cell_logs_pairs(stacked) - pd.q_cells[jq][None, :]
            cells[:, jq] = qc
        res[k0: k0 + step] = cells.mean(axis=1)
    res[flat == 0] = 0.0
    out = res.reshape(w_arr.shape)
    return float(out[0]) if np.ndim(w) == 0 else out


def cell_logs_pairs(pairs: np.ndarray) -> np.ndarray:
    """Average of log|linear| over one cell given endpoint values (..., 2)."""
    return loglin(pairs[..., 0], pairs[..., 1])


SUBDIVIDE = 64
ROUGH = 0.1
MAX_REFINED = 1 / 8


def _rough_cells(pd: _PoleData) -> np.ndarray:
    """Cells whose interpolated form (f or 1/f) bends strongly at either end."""
    g = np.where(pd.use_q, pd.q, np.nan_to_num(pd.v))
    with np.errstate(invalid="ignore"):
        d1 = np.abs(np.roll(g, -1) - g)
        d2 = np.abs(np.roll(g, -1) - 2.0 * g + np.roll(g, 1))
        bend = np.maximum(d2, np.roll(d2, -1))
        return bend > ROUGH * np.maximum(d1, 1e-300)


def _sub_log_modulus(values: np.ndarray) -> np.ndarray:
    """Mean of log|f| over each row of sub-nodes (last column closes the cell)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inf = ~np.isfinite(values)
        q = np.where(inf, 0.0, 1.0 / np.where(inf, 1.0, values))
        a, b = values[:, :-1], values[:, 1:]
        qa, qb = q[:, :-1], q[:, 1:]
        use_q = (np.maximum(np.abs(a), np.abs(b)) > 1.0) | inf[:, :-1] | inf[:, 1:]
        out = np.where(use_q, -loglin(qa, qb), loglin(np.where(use_q, 1.0, a), np.where(use_q, 1.0, b)))
    return out.mean(axis=1)


def log_modulus_cells(s: BoundarySamples, refine: bool = True) -> np.ndarray:
    """Per-cell averages of log|f| on the boundary (poles via 1/f).

    With ``refine`` and an evaluator at hand, cells where neither f nor 1/f is
    close to linear are subdivided 64 times and re-evaluated at the last rung.
    """
    pd = _cache(s)
    with np.errstate(invalid="ignore"):
        cells = cell_logs(pd.v)
    cells[pd.use_q] = -pd.q_cells[pd.use_q]
    if refine and s.source is not None:
        rough = np.nonzero(_rough_cells(pd))[0]
        if 0 < rough.size <= MAX_REFINED * s.n:
            h = 2.0 * math.pi / s.n
            frac = np.arange(SUBDIVIDE + 1) / SUBDIVIDE
            r = float(s.radii[-1])
            for chunk in np.array_split(rough, max(1, rough.size * SUBDIVIDE // 2**20)):
                theta = s.theta[chunk][:, None] + h * frac[None, :]
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    vals = np.asarray(s.source(r * np.exp(1j * theta)))
                cells[chunk] = _sub_log_modulus(vals)
    return cells


@dataclass
class LogDetProfile:
    w: np.ndarray
    u: np.ndarray
    source: BoundarySamples = field(repr=False)

    def csv_rows(self):
        for w, u in zip(self.w, self.u):
            yield (w.real, w.imag, u)


def logdet_profile(s: BoundarySamples, w) -> LogDetProfile:
    w = np.asarray(w, dtype=complex)
    return LogDetProfile(w, np.asarray(u_f(s, w)), s)


@dataclass
class IfResult:
    value: float
    core: float
    near_zero: float
    near_zero_bound: float
    far_tail: float
    t_min: float
    t_max: float


def _axis_grid(t_min, t_max, per_decade):
    k = int(round(math.log10(t_max / t_min) * per_decade))
    return t_min * 10.0 ** (np.arange(k + 1) / per_decade)


def _log_fit_tail(t, u, power):
    """Fit u ≈ a log t + b on the last decade and integrate u t^(−1−power) beyond."""
    sel = t >= t[-1] / 10.0
    x = np.log(t[sel])
    a, b = np.polyfit(x, u[sel], 1)
    resid = np.max(np.abs(np.polyval([a, b], x) - u[sel]))
    if a < -1e-9 or resid > 0.05 * max(1.0, np.max(np.abs(u[sel]))):
        raise TailFitError("u_f on the imaginary axis is not of logarithmic growth")
    T = t[-1]
    L = math.log(T)
    return (a * (L / power + 1.0 / power**2) + b / power) * T ** (-power)


def _simpson_uniform(y, dx):
    n = y.size
    if n % 2 == 0:
        return _simpson_uniform(y[:-1], dx) + 0.5 * dx * (y[-2] + y[-1])
    return dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def _require_imaginary(s: BoundarySamples, tol=1e-3):
    v = s.boundary[~s.blowup]
    re = float(np.mean(np.abs(v.real)))
    if re > tol * (1.0 + float(np.mean(np.abs(v)))):
        raise ValueError(f"Re f is not ≈ 0 on the circle (mean |Re f| = {re:.3g})")


def I_f(s: BoundarySamples, t_min: float = 1e-3, t_max: float = 1e6, per_decade: int = 64,
        check: bool = True) -> IfResult:
    """(1/π)∫_R u_f(it)/t² dt with both improper ends bounded analytically."""
    if check:
        _require_imaginary(s)
    t = _axis_grid(t_min, t_max, per_decade)
    up = np.asarray(u_f(s, 1j * t))
    um = np.asarray(u_f(s, -1j * t))
    u = up + um
    dx = math.log(10.0) / per_decade
    core = _simpson_uniform(u / t, dx) / math.pi
    small = t <= 10.0 * t_min
    c_est = u[0] / (2.0 * t_min**2)
    c_max = float(np.max(np.maximum(up[small], um[small]) / t[small] ** 2))
    near = 2.0 * c_est * t_min / math.pi
    near_bound = 2.0 * max(c_max, 0.0) * t_min / math.pi
    far = (_log_fit_tail(t, up, 1.0) + _log_fit_tail(t, um, 1.0)) / math.pi
    return IfResult(core + near + far, core, near, near_bound, far, t_min, t_max)


@dataclass
class RieszCounting:
    r: np.ndarray
    mu: np.ndarray


def riesz_counting(s: BoundarySamples, r_grid) -> RieszCounting:
    """μ_f(r): pushforward of dm under 1/f, i.e. m_f(1/r) from the same samples."""
    r = np.asarray(r_grid, dtype=float)
    with np.errstate(divide="ignore"):
        d = distribution_function(s, 1.0 / r)
    return RieszCounting(r, d.m)


def _winding(v: np.ndarray, r: float, n_arg: int):
    """Winding number of w ↦ 1 − w v around |w| = r and the largest argument step."""
    phi = 2.0 * math.pi * (np.arange(n_arg) + 0.5) / n_arg
    w = r * np.exp(1j * phi)
    ang = np.angle(1.0 - w[:, None] * v[None, :])
    dang = np.diff(np.vstack([ang, ang[:1]]), axis=0)
    dang = (dang + math.pi) % (2.0 * math.pi) - math.pi
    return np.rint(dang.sum(axis=0) / (2.0 * math.pi)), np.max(np.abs(dang), axis=0)


def root_count_oracle(values: np.ndarray, r_grid, n_arg: int = 64, max_arg: int = 2**22) -> np.ndarray:
    """Fraction of samples whose w-root of 1 − w f lies in |w| <= r, by the argument principle.

    Samples whose argument steps reach π/2 are recounted with twice as many
    points on the circle; roots still unresolved at ``max_arg`` points sit on
    the circle to rounding and count as inside.
    """
    v = np.asarray(values, dtype=complex)
    fin = np.isfinite(v)
    vf = v[fin]
    out = []
    for r in np.asarray(r_grid, dtype=float):
        count = np.zeros(vf.size)
        todo = np.arange(vf.size)
        m = n_arg
        while todo.size:
            for lo in range(0, todo.size, max(1, 2**22 // m)):
                idx = todo[lo: lo + max(1, 2**22 // m)]
                wind, step = _winding(vf[idx], float(r), m)
                count[idx] = np.where(step < 0.5 * math.pi, wind, np.nan)
            todo = np.nonzero(np.isnan(count))[0]
            if m >= max_arg:
                count[todo] = 1.0
                break
            m *= 2
        out.append((count.sum() + np.count_nonzero(~fin)) / v.size)
    return np.asarray(out)


def max_on_circle(s: BoundarySamples, r: float, n_theta: int = 1024) -> float:
    if r == 0:
        return 0.0
    phi = -math.pi + 2.0 * math.pi * np.arange(n_theta) / n_theta
    return float(np.max(u_f(s, r * np.exp(1j * phi))))


@dataclass
class JensenReport:
    r: np.ndarray
    mu: np.ndarray
    M_er: np.ndarray
    M_r: np.ndarray
    linear_bound: np.ndarray
    I: float
    ok: bool
    witness: float | None


def jensen_check(s: BoundarySamples, r_grid, I: float | None = None, slack: float = SLACK,
                 n_theta: int = 1024) -> JensenReport:
    r = np.asarray(r_grid, dtype=float)
    if I is None:
        I = I_f(s).value
    mu = riesz_counting(s, r).mu
    M_er = np.array([max_on_circle(s, math.e * x, n_theta) for x in r])
    M_r = np.array([max_on_circle(s, x, n_theta) for x in r])
    lin = 2.0 * I * r
    bad1 = mu > M_er * (1 + slack) + 1e-6
    bad2 = M_r > lin * (1 + slack) + 1e-6
    bad = bad1 | bad2
    witness = float(r[np.argmax(bad)]) if bad.any() else None
    return JensenReport(r, mu, M_er, M_r, lin, I, not bad.any(), witness)


def angular_kernel_identity(r: float, t: float) -> tuple[float, float]:
    """(∫_{−π/2}^{π/2} cos²θ dθ/|re^{iθ} − it|², (π/2)·min(1/t², 1/r²))."""
    if r == 0 and t == 0:
        raise ValueError("r = t = 0 is excluded")
    f = lambda th: math.cos(th) ** 2 / abs(r * complex(math.cos(th), math.sin(th)) - 1j * t) ** 2
    peak = math.copysign(math.pi / 2, t) if t else 0.0
    lhs = 0.0
    for a, b in ((-math.pi / 2, 0.0), (0.0, math.pi / 2)):
        pts = [peak - 1e-3 * math.copysign(1, peak)] if a < peak - 1e-3 * math.copysign(1, peak) < b else None
        lhs += quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=500, points=pts)[0]
    inv_t = math.inf if t == 0 else 1.0 / t**2
    inv_r = math.inf if r == 0 else 1.0 / r**2
    return lhs, 0.5 * math.pi * min(inv_t, inv_r)


def p_power_rhs(lam: complex, p: float) -> float:
    """|λ|^p (π/p) cot(πp/2); the value of the integral for purely imaginary λ."""
    return abs(lam) ** p * math.pi / p / math.tan(math.pi * p / 2.0)


def p_power_rhs_general(lam: complex, p: float) -> float:
    """Closed form for any λ: |λ|^p π/(p sin πp)·(cos pφ₁ + cos pφ₂), φ the angles of ±(−iλ)."""
    if lam == 0:
        return 0.0
    phi1 = abs(math.remainder(math.atan2((-1j * lam).imag, (-1j * lam).real), 2 * math.pi))
    phi2 = math.pi - phi1
    return abs(lam) ** p * math.pi / (p * math.sin(math.pi * p)) * (math.cos(p * phi1) + math.cos(p * phi2))


def p_power_lhs(lam: complex, p: float) -> float:
    """∫_R log|1 − itλ| dt/|t|^{1+p}, folded to ∫_0^∞ log|1 + t²λ²| t^{−1−p} dt, in x = log t."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lam = complex(lam)
    if lam == 0:
        return 0.0
    # u = log(t|λ|): the integral is |λ|^p ∫ log|1 + e^{2u} ε| e^{−pu} du with |ε| = 1,
    # and λ ∈ iR (ε = −1) puts the root of 1 + t²λ² at u = 0.
    eps = lam * lam / abs(lam) ** 2

    def g(u):
        if u < -350.0:
            return 0.0
        if u > 0:
            return (2.0 * u + math.log(abs(eps + math.exp(-2.0 * u)))) * math.exp(-p * u)
        e2 = math.exp(2.0 * u)
        arg = 2.0 * eps.real * e2 + e2 * e2
        if arg <= -1.0:  # the root itself, a null set
            return 0.0
        # log|1 + z| without cancellation for small z
        return 0.5 * math.log1p(arg) * math.exp(-p * u)

    rel = 1e-13 if p < 0.99 else 1e-14
    total = 0.0
    with warnings.catch_warnings():
        # the tolerance sits at roundoff level on purpose; accuracy is checked against closed forms
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in ((-math.inf, 0.0), (0.0, math.inf)):
            total += quad(g, a, b, epsabs=1e-15, epsrel=rel, limit=800)[0]
    return abs(lam) ** p * total


def p_power_identity(lam: complex, p: float) -> tuple[float, float]:
    return p_power_lhs(lam, p), p_power_rhs(lam, p)


def companion_identity(s: BoundarySamples, p: float, t_min: float = 1e-3, t_max: float = 1e6,
                       per_decade: int = 64) -> tuple[float, float]:
    """(∫_R u_f(it)/|t|^{1+p} dt, (π/p)cot(πp/2)·∫|f|^p dm)."""
    t = _axis_grid(t_min, t_max, per_decade)
    up = np.asarray(u_f(s, 1j * t))
    um = np.asarray(u_f(s, -1j * t))
    dx = math.log(10.0) / per_decade
    core = _simpson_uniform((up + um) * t ** (-p), dx)
    c = (up[0] + um[0]) / t_min**2
    near = c * t_min ** (2.0 - p) / (2.0 - p)
    far = _log_fit_tail(t, up, p) + _log_fit_tail(t, um, p)
    rhs = math.pi / p / math.tan(math.pi * p / 2.0) * hp_power_mean(s, p, pole_correction=True)
    return core + near + far, rhs


def identity_record(lhs: float, rhs: float, tol: float) -> dict:
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / abs(rhs) if rhs else abs_err
    return {"lhs": lhs, "rhs": rhs, "abs_err": abs_err, "rel_err": rel_err,
            "pass": bool(rel_err <= tol)}
