"""Catalog of 6x6 complex Hadamard matrices, scaled into U(6).

Formulas follow the published catalog of small complex Hadamard matrices
(Tadej & Zyczkowski, "A concise guide to complex Hadamard matrices", 2006).
Every generated matrix is validated on the spot; a transcription error shows
up as a HadamardValidationError rather than as a wrong conjecture verdict.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import DEFAULT_TOL, Tolerance, hadamard_deviation, is_scaled_hadamard, is_unitary
from .witness import all_inner_sums, m1, m2

CATALOG_SOURCE = "Tadej & Zyczkowski, A concise guide to complex Hadamard matrices, Open Syst. Inf. Dyn. 13 (2006)"
GENERATION_TOL = Tolerance(unitary_tol=1e-10, hadamard_tol=1e-10)


class HadamardValidationError(ValueError):
    pass


def fourier(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("d must be >= 1")
    jk = np.outer(np.arange(d), np.arange(d)) % d
    return np.exp(2j * np.pi * jk / d) / math.sqrt(d)


def _fourier_phase_pattern(a: float, b: float) -> np.ndarray:
    r = np.zeros((6, 6))
    r[1::2, [1, 4]] = a
    r[1::2, [2, 5]] = b
    return r


def _f6ab(a, b):
    return fourier(6) * np.exp(1j * _fourier_phase_pattern(a, b))


def _f6ab_t(a, b):
    return fourier(6) * np.exp(1j * _fourier_phase_pattern(a, b).T)


def _dita(c):
    i, e, ec = 1j, np.exp(1j * c), np.exp(-1j * c)
    m = np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [1, -1, i, -i, -i, i],
            [1, i, -1, i * e, -i * e, -i],
            [1, -i, i * ec, -1, i, -i * ec],
            [1, -i, -i * ec, i, -1, i * ec],
            [1, i, -i, -i * e, i * e, -1],
        ]
    )
    return m / math.sqrt(6)


def _circulant():
    d = (1 - math.sqrt(3)) / 2 + 1j * math.sqrt(math.sqrt(3) / 2)
    dc = d.conjugate()
    row = np.array([1, 1j * d, -d, -1j, -dc, 1j * dc])
    return np.array([np.roll(row, k) for k in range(6)]) / math.sqrt(6)


def _spectral():
    w = np.exp(2j * np.pi / 3)
    m = np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [1, 1, w, w, w**2, w**2],
            [1, w, 1, w**2, w**2, w],
            [1, w, w**2, 1, w, w**2],
            [1, w**2, w**2, w, 1, w],
            [1, w**2, w, w**2, w, 1],
        ]
    )
    return m / math.sqrt(6)


@dataclass(frozen=True)
class HadamardFamily:
    name: str
    n_params: int
    formula: Callable[..., np.ndarray]
    citation: str
    description: str = ""

    def generate(self, params: Sequence[float] = ()) -> np.ndarray:
        params = tuple(float(x) for x in params)
        if len(params) != self.n_params:
            raise ValueError(f"family {self.name} takes {self.n_params} parameters, got {len(params)}")
        z = np.asarray(self.formula(*params), dtype=np.complex128)
        if not is_scaled_hadamard(z, GENERATION_TOL):
            raise HadamardValidationError(
                f"{self.name}{params} is not a scaled Hadamard matrix "
                f"(deviation {hadamard_deviation(z):.3e}, unitary={is_unitary(z, GENERATION_TOL)})"
            )
        return z

    def grid(self, points: int = 11) -> list:
        """Parameter tuples on a uniform ``points``-per-axis grid over [0, 2pi)."""
        axis = [2 * math.pi * k / points for k in range(points)]
        return list(itertools.product(axis, repeat=self.n_params))

    def to_json(self) -> dict:
        return {"name": self.name, "n_params": self.n_params, "citation": self.citation, "description": self.description}


FAMILIES = {
    f.name: f
    for f in (
        HadamardFamily("F6ab", 2, _f6ab, CATALOG_SOURCE, "two-parameter affine Fourier family F6(a,b)"),
        HadamardFamily("F6abT", 2, _f6ab_t, CATALOG_SOURCE, "transposed Fourier family F6(a,b)^T"),
        HadamardFamily("D6", 1, _dita, CATALOG_SOURCE, "one-parameter Dita family D6(c)"),
        HadamardFamily("C6", 0, _circulant, CATALOG_SOURCE, "isolated circulant matrix C6 (Bjorck)"),
        HadamardFamily("S6", 0, _spectral, CATALOG_SOURCE, "isolated spectral matrix S6 over cube roots of unity (Tao)"),
    )
}


def family(name: str, params: Sequence[float] = ()) -> np.ndarray:
    try:
        fam = FAMILIES[name]
    except KeyError:
        raise KeyError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    return fam.generate(params)


@dataclass
class ConjectureRecord:
    m1: float
    m2: float
    max_inner_sum: float
    vanishes: bool
    label: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "m1": self.m1,
            "m2": self.m2,
            "max_inner_sum": self.max_inner_sum,
            "vanishes": self.vanishes,
        }


def conjecture_check(targets, tol: float = 1e-8, labels=None, tolerance: Tolerance = DEFAULT_TOL) -> list:
    """Evaluate m1, m2 and the largest |inner sum| on each scaled Hadamard target."""
    targets = list(targets)
    labels = list(labels) if labels is not None else [str(i) for i in range(len(targets))]
    out = []
    for label, z in zip(labels, targets):
        z = np.asarray(z, dtype=np.complex128)
        if z.shape != (6, 6) or not is_scaled_hadamard(z, tolerance):
            raise ValueError(f"target {label} is not a scaled 6x6 Hadamard matrix")
        v1, v2 = m1(z), m2(z)
        worst = float(np.max(np.abs(all_inner_sums(z))))
        ok = abs(v1) <= tol and abs(v2) <= tol and worst <= tol
        out.append(ConjectureRecord(v1, v2, worst, ok, label))
    return out


def family_targets(name: str, points: int = 11):
    """``(labels, matrices)`` for a family sampled on its parameter grid."""
    fam = FAMILIES[name]
    labels, mats = [], []
    for params in fam.grid(points):
        labels.append(f"{name}({', '.join(f'{x:.6f}' for x in params)})")
        mats.append(fam.generate(params))
    return labels, mats
