"""Dense complex matrix helpers used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` and shape ``(d, d)``.
Every function returns a fresh array and never mutates its arguments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    unitary_tol: float = 1e-10
    hadamard_tol: float = 1e-10
    eig_tol: float = 1e-8

    def __post_init__(self):
        for name in ("unitary_tol", "hadamard_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a square, finite complex128 array (always a copy)."""
    m = np.array(a, dtype=np.complex128, copy=True)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[-1] != b.shape[-2] or a.shape[-2:] != b.shape[-2:]:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(a, dtype=np.complex128), -1, -2)).copy()


def is_unitary(a, tol: Tolerance = DEFAULT_TOL) -> bool:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    dev = adjoint(a) @ a - np.eye(a.shape[0])
    return bool(np.max(np.abs(dev)) <= tol.unitary_tol)


def hadamard_deviation(a) -> float:
    """Largest | |a_ij| - 1/sqrt(d) | over all entries."""
    a = np.asarray(a, dtype=np.complex128)
    return float(np.max(np.abs(np.abs(a) - 1.0 / math.sqrt(a.shape[0]))))


def is_scaled_hadamard(a, tol: Tolerance = DEFAULT_TOL) -> bool:
    if not is_unitary(a, tol):
        return False
    return hadamard_deviation(a) <= tol.hadamard_tol


def _jacobi_symmetric(a: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """Cyclic Jacobi eigenvalues of a real symmetric matrix (input is overwritten)."""
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    target = (np.finfo(float).eps * scale) ** 2
    for _ in range(max_sweeps):
        off = np.sum(a * a) - np.sum(np.diag(a) ** 2)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    return np.diag(a).copy()


def _tridiagonalize(a: np.ndarray):
    """Householder reduction of a real symmetric matrix (overwritten) to tridiagonal form."""
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        alpha = -math.copysign(norm_x, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        block = a[k + 1:, k + 1:]
        p = block @ v
        w = p - (v @ p) * v
        block -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
    diag = [float(x) for x in np.diag(a)]
    off = [float(a[i + 1, i]) for i in range(n - 1)] + [0.0]
    return diag, off


def _tridiagonal_ql(d: list, e: list, max_iter: int = 60) -> list:
    """Eigenvalues of the symmetric tridiagonal (d, e) by implicit QL with shifts.

    ``e[i]`` couples rows i and i+1; ``e[-1]`` must be 0.
    """
    n = len(d)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ArithmeticError("tridiagonal QL did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d


def _symmetric_eigenvalues(a: np.ndarray, method: str) -> np.ndarray:
    if method == "jacobi":
        return _jacobi_symmetric(a)
    if method == "ql":
        if a.shape[0] == 1:
            return a.diagonal().copy()
        return np.array(_tridiagonal_ql(*_tridiagonalize(a)))
    raise ValueError(f"unknown eigen method {method!r}")


def hermitian_eigenvalues(a, herm_tol: float = 1e-10, method: str = "ql") -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    ``method="ql"`` (default) is Householder tridiagonalization followed by
    implicit-shift QL; ``method="jacobi"`` runs cyclic Jacobi rotations.
    A complex input is embedded as the real symmetric ``[[Re, -Im], [Im, Re]]``,
    whose spectrum is that of ``a`` with every eigenvalue doubled.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > herm_tol:
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    if not np.any(a.imag):
        return np.sort(_symmetric_eigenvalues(a.real.copy(), method))
    big = np.block([[a.real, -a.imag], [a.imag, a.real]])
    return np.sort(_symmetric_eigenvalues(big, method))[::2].copy()


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    return {
        "dim": int(a.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    d = obj["dim"]
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"bad dim {d!r}")
    entries = obj["entries"]
    if len(entries) != d * d:
        raise ValueError(f"expected {d * d} entries, got {len(entries)}")
    vals = []
    for pair in entries:
        if len(pair) != 2:
            raise ValueError("each entry must be a [re, im] pair")
        re, im = float(pair[0]), float(pair[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError("non-finite entry")
        vals.append(complex(re, im))
    return np.array(vals, dtype=np.complex128).reshape(d, d)
