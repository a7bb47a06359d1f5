"""Measures on the unit circle and the Schwarz, Poisson and Cauchy integrals they generate.

A measure is a density with respect to normalized arclength ``dm = dθ/2π`` plus
finitely many atoms plus an optional generation-``depth`` Cantor part.  The
Cantor part is evaluated as point masses at the centers of its pieces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ATOM_TOL = 1e-14
DISC_TOL = 1e-12
MAX_NODES = 2**20
QUAD_RTOL = 1e-10


class QuadratureError(RuntimeError):
    """Grid refinement cap reached before successive estimates agreed."""

    def __init__(self, message: str, estimates: tuple):
        super().__init__(f"{message}; last two estimates {estimates[0]!r}, {estimates[1]!r}")
        self.estimates = estimates


class BoundaryEvaluationError(ValueError):
    pass


def wrap_angle(theta):
    """Map angles into (-π, π]."""
    t = np.mod(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi
    t = np.where(t == -math.pi, math.pi, t)
    return float(t) if np.ndim(t) == 0 else t


@dataclass(frozen=True)
class CantorPart:
    depth: int
    mass: float
    arc: tuple = (0.0, TWO_PI / 3.0)

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("Cantor depth must be >= 1")
        if self.depth > 30:
            raise ValueError("Cantor depth > 30 would produce more than 2**30 atoms")
        if not self.arc[1] > self.arc[0]:
            raise ValueError("Cantor arc must have positive length")


def cantor_part_as_atoms(singular: CantorPart) -> list[tuple[float, float]]:
    """Midpoints of the 2**depth generation pieces, each carrying mass/2**depth."""
    a, b = singular.arc
    lefts = np.array([a], dtype=float)
    length = b - a
    for _ in range(singular.depth):
        length /= 3.0
        lefts = np.concatenate([lefts, lefts + 2.0 * length])
    lefts.sort()
    mids = lefts + 0.5 * length
    mass = singular.mass / 2.0**singular.depth
    return [(float(wrap_angle(t)), mass) for t in mids]


@dataclass(frozen=True)
class CircleMeasure:
    density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    atoms: tuple = ()
    singular: Optional[CantorPart] = None
    real: bool = True
    label: str = ""
    # Fourier coefficients of the density are cached on first use.
    _coef: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple((float(wrap_angle(a)), m) for a, m in self.atoms)
        angles = sorted(a for a, _ in atoms)
        for u, v in zip(angles, angles[1:]):
            if v - u <= ATOM_TOL:
                raise ValueError(f"atom angles collide at {u!r}")
        if len(angles) > 1 and angles[0] + TWO_PI - angles[-1] <= ATOM_TOL:
            raise ValueError("atom angles collide across ±π")
        if self.real:
            for _, m in atoms:
                if isinstance(m, complex) and m.imag != 0:
                    raise ValueError("real measure with complex atom mass")
        object.__setattr__(self, "atoms", atoms)

    def all_atoms(self) -> list[tuple[float, complex]]:
        out = list(self.atoms)
        if self.singular is not None:
            out += cantor_part_as_atoms(self.singular)
        return out

    def singular_mass(self) -> float:
        """Total variation of the singular part (atoms plus Cantor part)."""
        s = sum(abs(m) for _, m in self.atoms)
        if self.singular is not None:
            s += abs(self.singular.mass)
        return s

    def scaled(self, alpha: float) -> "CircleMeasure":
        dens = None
        if self.density is not None:
            d = self.density
            dens = lambda th: alpha * d(th)
        sing = None
        if self.singular is not None:
            s = self.singular
            sing = CantorPart(s.depth, alpha * s.mass, s.arc)
        return CircleMeasure(dens, tuple((a, alpha * m) for a, m in self.atoms), sing,
                             self.real, f"{alpha}*{self.label}")


def combine(mu1: CircleMeasure, mu2: CircleMeasure, a: float = 1.0, b: float = 1.0) -> CircleMeasure:
    """The measure a·mu1 + b·mu2 (Cantor parts become atoms if both are present)."""
    m1, m2 = mu1.scaled(a), mu2.scaled(b)
    d1, d2 = m1.density, m2.density
    if d1 is None and d2 is None:
        dens = None
    elif d1 is None:
        dens = d2
    elif d2 is None:
        dens = d1
    else:
        dens = lambda th: d1(th) + d2(th)
    atoms: dict[float, complex] = {}
    sing = None
    extra = []
    if m1.singular is not None and m2.singular is not None:
        extra = m1.all_atoms()[len(m1.atoms):] + m2.all_atoms()[len(m2.atoms):]
    else:
        sing = m1.singular or m2.singular
    for ang, m in list(m1.atoms) + list(m2.atoms) + extra:
        key = next((k for k in atoms if abs(k - ang) <= ATOM_TOL), ang)
        atoms[key] = atoms.get(key, 0.0) + m
    return CircleMeasure(dens, tuple(atoms.items()), sing, m1.real and m2.real,
                         f"{m1.label}+{m2.label}")


# ---------------------------------------------------------------- quadrature

def _grid(n: int) -> np.ndarray:
    return -math.pi + TWO_PI * np.arange(n) / n


def _trapezoid_mean(func: Callable[[np.ndarray], np.ndarray], z: Optional[complex] = None):
    """Mean of a 2π-periodic integrand by trapezoid doubling.

    Near the circle (|z| > 0.99) nodes are added at 64x density in a window of
    width 8(1-|z|) centered at arg z.
    """
    refine = z is not None and abs(z) > 0.99
    prev = None
    n = 64
    while True:
        if refine:
            est = _refined_mean(func, n, z)
        else:
            est = complex(np.mean(func(_grid(n))))
        if prev is not None:
            scale = max(abs(est), abs(prev), 1e-300)
            if abs(est - prev) <= QUAD_RTOL * scale or abs(est - prev) < 1e-15:
                return est
        if n >= MAX_NODES:
            raise QuadratureError("density quadrature did not converge", (prev, est))
        prev = est
        n *= 2


def _refined_mean(func, n, z):
    # Nodes clustered around arg z by θ = c + 2·atan(κ·tan((u−c)/2)); the map is
    # periodic and analytic, so the trapezoid rule in u stays spectrally accurate.
    # Node density near c is 1/κ times the uniform one (at most 64).
    center = math.atan2(z.imag, z.real)
    kappa = min(1.0, max(1.0 / 64.0, 4.0 * (1.0 - abs(z))))
    u = _grid(n) + math.pi / n
    tu = np.tan(0.5 * (u - center))
    theta = center + 2.0 * np.arctan(kappa * tu)
    jac = kappa * (1.0 + tu**2) / (1.0 + (kappa * tu) ** 2)
    return complex(np.mean(func(theta) * jac))


def _check_disc(z: complex):
    if abs(z) >= 1.0 - DISC_TOL:
        raise BoundaryEvaluationError(f"point {z!r} is not inside the disc (|z| >= 1 - 1e-12)")


def _atom_kernel(kind: str, phi: float, z):
    zeta = np.exp(1j * phi)
    if kind == "schwarz":
        return (zeta + z) / (zeta - z)
    if kind == "poisson":
        return ((zeta + z) / (zeta - z)).real
    if kind == "cauchy":
        return 1.0 / (zeta - z)
    if kind == "zeta":
        return zeta / (zeta - z)
    raise ValueError(kind)


def _evaluate(mu: CircleMeasure, z: complex, kind: str):
    z = complex(z)
    _check_disc(z)
    total = 0.0 + 0.0j
    for phi, m in mu.all_atoms():
        total += m * _atom_kernel(kind, phi, z)
    if mu.density is not None:
        dens = mu.density
        total += _trapezoid_mean(lambda th: dens(th) * _atom_kernel(kind, th, z), z)
    return total


def eval_schwarz(mu: CircleMeasure, z: complex) -> complex:
    """∫ (ζ+z)/(ζ−z) dμ(ζ)."""
    return _evaluate(mu, z, "schwarz")


def eval_poisson(mu: CircleMeasure, z: complex) -> float:
    v = _evaluate(mu, z, "poisson")
    return v.real if mu.real else v


def eval_cauchy(mu: CircleMeasure, z: complex) -> complex:
    """∫ dμ(ζ)/(ζ−z)."""
    return _evaluate(mu, z, "cauchy")


def eval_zeta_kernel(mu: CircleMeasure, z: complex) -> complex:
    """∫ ζ/(ζ−z) dμ(ζ); the Schwarz integral is twice this minus the total mass."""
    return _evaluate(mu, z, "zeta")


def density_integral(mu: CircleMeasure, func=lambda v: v) -> complex:
    if mu.density is None:
        return 0.0
    d = mu.density
    return _trapezoid_mean(lambda th: func(d(th)))


def total_mass(mu: CircleMeasure) -> complex:
    s = sum(m for _, m in mu.all_atoms())
    return s + density_integral(mu)


def total_variation(mu: CircleMeasure) -> float:
    return float(density_integral(mu, np.abs).real) + mu.singular_mass()


# ------------------------------------------------------------ fast evaluator

def density_coefficients(mu: CircleMeasure) -> np.ndarray:
    """Fourier coefficients c_k = ∫ ρ ζ̄^k dm, k >= 0, trimmed to significance."""
    if mu._coef:
        return mu._coef[0]
    if mu.density is None:
        coef = np.zeros(1, dtype=complex)
    else:
        n = 64
        while True:
            theta = _grid(n)
            c = np.fft.fft(mu.density(theta) * np.ones(n)) / n
            c = c * np.exp(-1j * math.pi * np.arange(n)) ** -1  # grid starts at -π
            scale = np.max(np.abs(c))
            tail = np.max(np.abs(c[n // 4: 3 * n // 4])) if n >= 8 else scale
            if tail <= 1e-14 * max(scale, 1e-300):
                break
            if n >= MAX_NODES:
                raise QuadratureError("density Fourier series did not converge",
                                      (float(tail), float(scale)))
            n *= 2
        pos = c[: n // 2]
        keep = np.nonzero(np.abs(pos) > 1e-15 * max(scale, 1e-300))[0]
        coef = pos[: (keep.max() + 1 if keep.size else 1)]
        if mu.real:
            coef = coef.copy()
            coef[0] = coef[0].real
    mu._coef.append(coef)
    return coef


def _atom_schwarz_polar(m, phi, r, theta):
    """m·(ζ+z)/(ζ−z) for z = r e^{iθ}, ζ = e^{iφ}, written to keep precision near ζ."""
    d = theta - phi
    s = np.sin(d)
    den_re = (1.0 - r) + 2.0 * r * np.sin(0.5 * d) ** 2
    den = den_re - 1j * r * s
    num = (1.0 + r * np.cos(d)) + 1j * r * s
    return m * num / den


def schwarz_values(mu: CircleMeasure, z) -> np.ndarray:
    """Vectorized Schwarz integral at disc points (density via its Fourier series)."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    theta = np.angle(z)
    out = np.zeros(z.shape, dtype=complex)
    for phi, m in mu.all_atoms():
        out += _atom_schwarz_polar(m, phi, r, theta)
    if mu.density is not None:
        c = density_coefficients(mu)
        acc = np.zeros(z.shape, dtype=complex)
        for ck in c[:0:-1]:
            acc = (acc + 2.0 * ck) * z
        out += acc + c[0]
    return out


def schwarz_ring(mu: CircleMeasure, r: float, n: int) -> np.ndarray:
    """Schwarz integral on r·e^{iθ_j}, θ_j = −π + 2πj/n."""
    theta = _grid(n)
    out = np.zeros(n, dtype=complex)
    for phi, m in mu.all_atoms():
        out += _atom_schwarz_polar(m, phi, r, theta)
    if mu.density is not None:
        c = density_coefficients(mu)
        k = np.arange(len(c))
        if len(c) < n:
            b = np.zeros(n, dtype=complex)
            b[: len(c)] = 2.0 * c * r**k
            b[0] = c[0]
            b[: len(c)] *= (-1.0) ** k
            out += np.fft.ifft(b) * n
        else:
            out += schwarz_values(CircleMeasure(mu.density, real=mu.real, _coef=[c]),
                                  r * np.exp(1j * theta))
    return out
