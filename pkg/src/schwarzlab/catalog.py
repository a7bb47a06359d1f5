"""Named test functions: Schwarz transforms of catalog measures plus two designed failures."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boundary import AnalyticFunction, closed_form, schwarz_function
from .measure import CantorPart, CircleMeasure


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    f: AnalyticFunction
    measure: Optional[CircleMeasure] = None
    designed_failures: frozenset = frozenset()  # subset of {"i", "ii", "iii", "iv"}
    imaginary: bool = False  # Re f = 0 a.e. on the circle and f(0) real
    note: str = ""


def _atom(mass: float) -> CircleMeasure:
    return CircleMeasure(atoms=((0.0, mass),), label=f"atom({mass:g})")


def _const_i(z):
    return np.full(np.shape(z), 1j, dtype=complex)


def _exp_inner_inverse(z):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return np.exp((1.0 + z) / (1.0 - z))


def _entries():
    out = []

    def schwarz(name, mu, imaginary=False, note=""):
        out.append(CatalogEntry(name, schwarz_function(mu, name), mu, frozenset(), imaginary, note))

    schwarz("atom", _atom(1.0), True, "f = (1+z)/(1−z), boundary values i·cot(θ/2)")
    schwarz("half-atom", _atom(0.5), True)
    schwarz("quarter-atom", _atom(0.25), True)
    schwarz("cantor-8", CircleMeasure(singular=CantorPart(8, 1.0), label="cantor(8)"), True,
            "generation-8 Cantor measure of mass 1 on [0, 2π/3]")
    schwarz("atom-pair", CircleMeasure(atoms=((0.0, 0.5), (math.pi, 0.5)), label="atom-pair"), True,
            "atoms of mass 1/2 at 0 and π")
    schwarz("density-const", CircleMeasure(density=lambda th: np.ones_like(th), label="1"))
    schwarz("density-cos", CircleMeasure(density=np.cos, label="cos"), note="f(z) = z")
    schwarz("atom-plus-density",
            CircleMeasure(density=np.cos, atoms=((0.0, 0.5),), label="0.5 atom + cos"))
    out.append(CatalogEntry("const-i", closed_form(_const_i, "const-i"), None, frozenset({"iv"}),
                            False, "f ≡ i: f(0) is not real"))
    out.append(CatalogEntry("exp-inner-inverse", closed_form(_exp_inner_inverse, "exp-inner-inverse"),
                            None, frozenset({"i"}), False,
                            "f = exp((1+z)/(1−z)): |f| = 1 on the circle but f(0) = e"))
    return {e.name: e for e in out}


CATALOG = _entries()

# Entries with Re f = 0 a.e. and f(0) real, where the logarithmic-determinant chain applies.
IMAGINARY_ENTRIES = tuple(name for name, e in CATALOG.items() if e.imaginary)
SCHWARZ_ENTRIES = tuple(name for name, e in CATALOG.items() if e.measure is not None)


def get(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; choose from {', '.join(CATALOG)}") from None
