import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schwarzlab.measure import (BoundaryEvaluationError, CantorPart, CircleMeasure,
                                cantor_part_as_atoms, combine, eval_cauchy, eval_poisson,
                                eval_schwarz, eval_zeta_kernel, schwarz_ring, schwarz_values,
                                total_mass, total_variation, wrap_angle)

disc = st.builds(lambda r, a: r * cmath.exp(1j * a),
                 st.floats(0.0, 0.95), st.floats(-math.pi, math.pi))
angle = st.floats(-math.pi, math.pi)

ATOM = CircleMeasure(atoms=((0.0, 1.0),))
COS = CircleMeasure(density=np.cos)


def test_atom_schwarz_closed_form():
    for z in (0j, 0.5, -0.3 + 0.4j, 0.999):
        assert eval_schwarz(ATOM, z) == pytest.approx((1 + z) / (1 - z), rel=1e-13)


def test_density_cos_is_identity():
    # ρ = cos θ has Schwarz integral z and Poisson integral r cos θ
    for z in (0.1j, 0.5 - 0.2j, 0.995 * cmath.exp(2j)):
        assert abs(eval_schwarz(COS, z) - z) < 1e-9
        assert eval_poisson(COS, z) == pytest.approx(z.real, abs=1e-9)


def test_constant_density():
    one = CircleMeasure(density=lambda th: np.ones_like(th))
    assert eval_schwarz(one, 0.7j) == pytest.approx(1.0)
    assert total_mass(one) == pytest.approx(1.0)


def test_boundary_points_rejected():
    with pytest.raises(BoundaryEvaluationError):
        eval_schwarz(ATOM, 1.0)
    with pytest.raises(BoundaryEvaluationError):
        eval_poisson(ATOM, 1.5j)


def test_colliding_atoms_rejected():
    with pytest.raises(ValueError):
        CircleMeasure(atoms=((0.0, 1.0), (1e-16, 1.0)))
    with pytest.raises(ValueError):
        CircleMeasure(atoms=((math.pi, 1.0), (-math.pi, 1.0)))


def test_cantor_atoms():
    atoms = cantor_part_as_atoms(CantorPart(5, 2.0))
    assert len(atoms) == 32
    assert sum(m for _, m in atoms) == pytest.approx(2.0)
    angles = [a for a, _ in atoms]
    assert min(angles) > 0 and max(angles) < 2 * math.pi / 3
    with pytest.raises(ValueError):
        CantorPart(0, 1.0)


def test_total_variation_signed():
    mu = CircleMeasure(density=np.cos, atoms=((1.0, -0.5),))
    assert total_variation(mu) == pytest.approx(2 / math.pi + 0.5, rel=1e-8)
    assert total_mass(mu) == pytest.approx(-0.5, abs=1e-12)


@given(disc)
def test_kernel_relation(z):
    # Schwarz = 2·ζ-kernel − mass; Poisson = Re Schwarz
    mu = CircleMeasure(density=lambda th: 1 + 0.5 * np.sin(2 * th), atoms=((0.7, 0.3),))
    s = eval_schwarz(mu, z)
    assert abs(s - (2 * eval_zeta_kernel(mu, z) - total_mass(mu))) < 1e-9
    assert eval_poisson(mu, z) == pytest.approx(s.real, abs=1e-9)


@given(disc, angle, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(z, phi, a, b):
    mu1 = CircleMeasure(density=np.cos)
    mu2 = CircleMeasure(atoms=((phi, 1.0),))
    lhs = eval_schwarz(combine(mu1, mu2, a, b), z)
    rhs = a * eval_schwarz(mu1, z) + b * eval_schwarz(mu2, z)
    assert abs(lhs - rhs) < 1e-9 * (1 + abs(rhs))


@given(disc, angle)
def test_cauchy_atom(z, phi):
    zeta = cmath.exp(1j * phi)
    assert eval_cauchy(CircleMeasure(atoms=((phi, 1.0),)), z) == pytest.approx(1 / (zeta - z))


@given(st.floats(0.0, 0.9), st.integers(8, 12))
def test_normalization_probability(r, k):
    # Poisson integral of a probability measure has mean 1 on every circle
    mu = CircleMeasure(density=lambda th: 0.5 + 0.5 * np.cos(th) ** 2, atoms=((2.0, 0.25),))
    vals = schwarz_ring(mu, r, 2**k)
    assert vals.real.mean() == pytest.approx(1.0, rel=1e-9)


def test_ring_matches_pointwise():
    mu = CircleMeasure(density=lambda th: np.exp(np.cos(th)), atoms=((1.0, 0.2),))
    n = 256
    theta = -math.pi + 2 * math.pi * np.arange(n) / n
    ring = schwarz_ring(mu, 0.9, n)
    pts = schwarz_values(mu, 0.9 * np.exp(1j * theta))
    assert np.max(np.abs(ring - pts)) < 1e-10
    assert ring[5] == pytest.approx(eval_schwarz(mu, 0.9 * cmath.exp(1j * theta[5])), rel=1e-9)


@given(st.floats(-50, 50))
def test_wrap_angle(t):
    w = wrap_angle(t)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(t), abs=1e-9)
