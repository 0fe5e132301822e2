"""Witness functions on U(d) and the Delsarte cardinality bound.

Closed-form identity values and Haar means are kept as ``Fraction`` where
they are exact rationals, so ``h(1) / mean`` is rounded exactly once.

Permutations of S_6 are 0-based throughout: ``images[i]`` is the image of i.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .linalg import DimensionError, adjoint, is_unitary

Number = Union[Fraction, float]

M_DIM = 6
COMBINATION_KINDS = ("sum_sq", "sq_sum", "prod_sq")


class DelsarteHypothesisError(ValueError):
    """The Haar mean of the witness is not positive, so no bound follows."""


class ImaginaryResidueError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Decomposition:
    """``w = known + scale * residual`` where ``known`` has an exact Haar mean."""

    known_mean: Number
    scale: float
    residual: "WitnessFunction"


@dataclass(frozen=True)
class WitnessFunction:
    name: str
    dim: int
    evaluate: Callable[[np.ndarray], float]
    value_at_identity: Optional[Number] = None
    haar_mean: Optional[Number] = None
    star_symmetric: bool = True
    evaluate_many: Optional[Callable[[np.ndarray], np.ndarray]] = None
    flags: tuple = ()
    decomposition: Optional[Decomposition] = None
    # True only when positive definiteness is a theorem, None when open
    positive_definite: Optional[bool] = None
    # positive definite and <= 0 on every scaled Hadamard, so the bound is rigorous
    certified: bool = False

    def __call__(self, z) -> float:
        return self.evaluate(z)

    def values(self, stack) -> np.ndarray:
        stack = np.asarray(stack, dtype=np.complex128)
        if self.evaluate_many is not None:
            return np.asarray(self.evaluate_many(stack), dtype=float)
        return np.array([self.evaluate(z) for z in stack], dtype=float)


# -- h0, h, h_beta ------------------------------------------------------------


def h0_many(stack) -> np.ndarray:
    a2 = np.abs(np.asarray(stack, dtype=np.complex128)) ** 2
    return np.sum(a2 * a2, axis=(-2, -1))


def h0(z) -> float:
    return float(h0_many(z))


def h(z) -> float:
    return h0(z) - 1.0


def h0_haar_mean(d: int) -> Fraction:
    return Fraction(2 * d, d + 1)


def witness_h0(d: int) -> WitnessFunction:
    return WitnessFunction(
        name="h0",
        dim=d,
        evaluate=h0,
        value_at_identity=Fraction(d),
        haar_mean=h0_haar_mean(d),
        evaluate_many=h0_many,
        positive_definite=True,
    )


def witness_h(d: int) -> WitnessFunction:
    return WitnessFunction(
        name="h",
        dim=d,
        evaluate=h,
        value_at_identity=Fraction(d - 1),
        haar_mean=Fraction(d - 1, d + 1),
        evaluate_many=lambda s: h0_many(s) - 1.0,
        positive_definite=True,
        certified=True,
    )


def h_beta(beta: float, d: int) -> WitnessFunction:
    """``h0 - beta``. Values of beta outside ``[1, 2d/(d+1)]`` are flagged, not rejected.

    A float beta that round-trips from a small-denominator rational (``1.2``,
    ``12/7``) is taken as that rational, so the closed forms stay exact.
    """
    b = Fraction(beta).limit_denominator(10_000)
    if float(b) != float(beta):
        b = Fraction(beta)
    flags = []
    in_range = 1 <= b <= h0_haar_mean(d)
    if not in_range:
        flags.append("beta outside [1, 2d/(d+1)]: not a valid witness")
    mean = h0_haar_mean(d) - b
    if mean <= 0:
        flags.append("non-positive Haar mean: bound undefined")
    bf = float(beta)
    return WitnessFunction(
        name=f"h_beta:{beta!r}",
        dim=d,
        evaluate=lambda z: h0(z) - bf,
        value_at_identity=Fraction(d) - b,
        haar_mean=mean,
        evaluate_many=lambda s: h0_many(s) - bf,
        flags=tuple(flags),
        positive_definite=mean >= 0,
        certified=in_range and mean > 0,
    )


# -- permutations and the S_6 functionals ---------------------------------------


@dataclass(frozen=True)
class Permutation:
    images: tuple

    def __post_init__(self):
        imgs = tuple(int(i) for i in self.images)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError(f"not a permutation of 0..{len(imgs) - 1}: {imgs}")
        object.__setattr__(self, "images", imgs)

    @property
    def sign(self) -> int:
        seen = [False] * len(self.images)
        sign = 1
        for start in range(len(self.images)):
            if seen[start]:
                continue
            length = 0
            i = start
            while not seen[i]:
                seen[i] = True
                i = self.images[i]
                length += 1
            if length % 2 == 0:
                sign = -sign
        return sign


@lru_cache(maxsize=None)
def _perm_table(n: int) -> tuple:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    signs = np.array([Permutation(tuple(p)).sign for p in perms], dtype=float)
    return perms, signs


def all_permutations(n: int = M_DIM) -> list:
    return [Permutation(tuple(p)) for p in _perm_table(n)[0]]


@lru_cache(maxsize=None)
def _subset_table(n: int) -> tuple:
    """Row index arrays for every half-size subset and its complement."""
    subsets = list(itertools.combinations(range(n), n // 2))
    comp = [tuple(sorted(set(range(n)) - set(s))) for s in subsets]
    return np.array(subsets, dtype=np.intp), np.array(comp, dtype=np.intp)


def _check_dim6(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-2:] != (M_DIM, M_DIM):
        raise DimensionError(f"the S_6 functionals need 6x6 matrices, got {z.shape}")
    return z


def _inner_terms(z: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Per-column products: first half of ``rows`` plain, second half conjugated.

    ``rows`` has shape (k, n); the result has shape (..., k, n_columns).
    """
    half = rows.shape[-1] // 2
    picked = z[..., rows, :]  # (..., k, n, cols)
    return np.prod(picked[..., :half, :], axis=-2) * np.conj(np.prod(picked[..., half:, :], axis=-2))


def inner_sum(z, pi) -> complex:
    """Column sum of z[pi0,j] z[pi1,j] z[pi2,j] conj(z[pi3,j] z[pi4,j] z[pi5,j])."""
    z = _check_dim6(z)
    if not isinstance(pi, Permutation):
        pi = Permutation(tuple(pi))
    if len(pi.images) != M_DIM:
        raise DimensionError("permutation must act on 6 points")
    rows = np.array([pi.images], dtype=np.intp)
    return complex(np.sum(_inner_terms(z, rows)))


def all_inner_sums(z) -> np.ndarray:
    """All 720 inner sums, in ``itertools.permutations`` order."""
    z = _check_dim6(z)
    perms, _ = _perm_table(M_DIM)
    return np.sum(_inner_terms(z, perms), axis=-1)


def signed_permutation_sum(z) -> complex:
    _, signs = _perm_table(M_DIM)
    return complex(np.sum(signs * all_inner_sums(z)))


def _real_or_raise(total: np.ndarray, scale: np.ndarray, rel: float = 1e-10) -> np.ndarray:
    bad = np.abs(total.imag) > rel * scale + 1e-300
    if np.any(bad):
        raise ImaginaryResidueError(
            f"imaginary residue {np.max(np.abs(total.imag))} exceeds {rel} x term mass"
        )
    return total.real


def m1_bruteforce(z) -> float:
    """m1 as the literal sum over all 720 permutations (kept as an oracle)."""
    sums = all_inner_sums(z)
    total = np.sum(sums)
    return float(_real_or_raise(np.asarray(total), np.asarray(np.sum(np.abs(sums)))))


def m1_many(stack) -> np.ndarray:
    """m1 via the 20 three-row subsets; each subset stands for 3!*3! = 36 permutations."""
    z = _check_dim6(stack)
    s_idx, c_idx = _subset_table(M_DIM)
    rows = np.concatenate([s_idx, c_idx], axis=1)
    terms = _inner_terms(z, rows)  # (..., 20, 6)
    total = 36.0 * np.sum(terms, axis=(-2, -1))
    scale = 36.0 * np.sum(np.abs(terms), axis=(-2, -1))
    return _real_or_raise(total, scale)


def m1(z) -> float:
    return float(m1_many(z))


def m2_many(stack) -> np.ndarray:
    return m1_many(adjoint(stack))


def m2(z) -> float:
    return m1(adjoint(z))


def _combine(kind: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if kind == "sum_sq":
        return (a + b) ** 2
    if kind == "sq_sum":
        return a * a + b * b
    if kind == "prod_sq":
        return (a * b) ** 2
    raise ValueError(f"unknown combination kind {kind!r}; expected one of {COMBINATION_KINDS}")


def _m_combined_many(kind: str, stack) -> np.ndarray:
    return _combine(kind, m1_many(stack), m2_many(stack))


def witness_m1() -> WitnessFunction:
    return WitnessFunction("m1", M_DIM, m1, value_at_identity=0.0, star_symmetric=False, evaluate_many=m1_many)


def witness_m2() -> WitnessFunction:
    return WitnessFunction("m2", M_DIM, m2, value_at_identity=0.0, star_symmetric=False, evaluate_many=m2_many)


def m_combined(kind: str) -> WitnessFunction:
    """Nonnegative, star-symmetric combination of m1 and m2; its Haar mean has no closed form."""
    if kind not in COMBINATION_KINDS:
        raise ValueError(f"unknown combination kind {kind!r}; expected one of {COMBINATION_KINDS}")
    many = lambda s: _m_combined_many(kind, s)  # noqa: E731
    return WitnessFunction(
        name=f"m:{kind}",
        dim=M_DIM,
        evaluate=lambda z: float(many(z)),
        value_at_identity=Fraction(0),
        haar_mean=None,
        star_symmetric=True,
        evaluate_many=many,
    )


def h_plus_eps_m(kind: str, eps: float) -> WitnessFunction:
    """``h + eps * m`` in dimension 6. Positive definiteness is open, never assumed."""
    m = m_combined(kind)
    e = float(eps)
    many = lambda s: h0_many(s) - 1.0 + e * m.evaluate_many(s)  # noqa: E731
    return WitnessFunction(
        name=f"h_plus_eps_m:{kind}:{eps!r}",
        dim=M_DIM,
        evaluate=lambda z: float(many(z)),
        value_at_identity=Fraction(M_DIM - 1),
        haar_mean=None,
        star_symmetric=True,
        evaluate_many=many,
        flags=("positive definiteness not proven",),
        decomposition=Decomposition(known_mean=Fraction(M_DIM - 1, M_DIM + 1), scale=e, residual=m),
    )


def parse_witness(name: str, dim: int) -> WitnessFunction:
    """Build a witness from its CLI name (``h0``, ``h``, ``h_beta:1.2``, ``m:sum_sq`` ...)."""
    parts = name.split(":")
    head = parts[0]
    needs6 = head in ("m1", "m2", "m", "h_plus_eps_m")
    if needs6 and dim != M_DIM:
        raise ValueError(f"witness {name!r} is only defined in dimension 6")
    try:
        if name == "h0":
            return witness_h0(dim)
        if name == "h":
            return witness_h(dim)
        if head == "h_beta" and len(parts) == 2:
            return h_beta(float(parts[1]), dim)
        if name == "m1":
            return witness_m1()
        if name == "m2":
            return witness_m2()
        if head == "m" and len(parts) == 2:
            return m_combined(parts[1])
        if head == "h_plus_eps_m" and len(parts) == 3:
            return h_plus_eps_m(parts[1], float(parts[2]))
    except ValueError as exc:
        raise ValueError(f"bad witness {name!r}: {exc}") from None
    raise ValueError(f"unknown witness {name!r}")


# -- Delsarte bound -----------------------------------------------------------


def delsarte_bound(w: WitnessFunction, haar_mean: Optional[Number] = None) -> float:
    """``w(1) / mean``; uses the witness's closed-form mean when none is given."""
    mean = w.haar_mean if haar_mean is None else haar_mean
    if mean is None:
        raise ValueError(f"witness {w.name} has no closed-form Haar mean; pass an estimate")
    if w.value_at_identity is None:
        raise ValueError(f"witness {w.name} has no closed-form identity value")
    if mean <= 0:
        raise DelsarteHypothesisError(f"Haar mean {float(mean)} is not positive")
    top = w.value_at_identity
    if isinstance(top, (int, Fraction)) and isinstance(mean, (int, Fraction)):
        return float(Fraction(top) / Fraction(mean))
    return float(top) / float(mean)


def delsarte_bound_beta(beta: float, d: int) -> float:
    return delsarte_bound(h_beta(beta, d))


def bound_interval(value_at_identity: float, mean: float, stderr: float, k: float = 3.0) -> tuple:
    """Bound range when the mean is known only as ``mean +- k*stderr``.

    Returns ``(low, high)``; ``high`` is ``inf`` if the lower end of the mean
    interval is not positive.
    """
    lo_mean, hi_mean = mean - k * stderr, mean + k * stderr
    if hi_mean <= 0:
        raise DelsarteHypothesisError(f"Haar mean interval [{lo_mean}, {hi_mean}] is not positive")
    low = value_at_identity / hi_mean
    high = value_at_identity / lo_mean if lo_mean > 0 else math.inf
    return low, high


@dataclass
class AuditRecord:
    S: float
    upper: float
    lower: float
    valid: bool
    max_offdiag: float
    size: int
    offdiag_values: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "S": self.S,
            "upper": self.upper,
            "lower": self.lower,
            "valid": self.valid,
            "max_offdiag": self.max_offdiag,
            "size": self.size,
        }


def delsarte_audit(b, w: WitnessFunction, haar_mean: Optional[Number] = None, slack: float = 1e-8) -> AuditRecord:
    """Evaluate both sides of ``mean*|B|^2 <= sum w(u*v) <= w(1)*|B|`` on a family B."""
    members: Sequence = getattr(b, "bases", b)
    members = [np.asarray(u, dtype=np.complex128) for u in members]
    for i, u in enumerate(members):
        if not is_unitary(u):
            raise ValueError(f"member {i} is not unitary")
    mean = w.haar_mean if haar_mean is None else haar_mean
    if mean is None or w.value_at_identity is None:
        raise ValueError(f"witness {w.name} needs a closed-form identity value and Haar mean")
    stack = np.array(members)
    n, d = stack.shape[0], stack.shape[-1]
    if d != w.dim:
        raise DimensionError(f"witness {w.name} is for dimension {w.dim}, family has {d}")
    quotients = adjoint(stack)[:, None] @ stack[None, :]
    vals = w.values(quotients.reshape(n * n, d, d)).reshape(n, n)
    S = float(np.sum(vals))
    off = vals[~np.eye(n, dtype=bool)]
    max_off = float(np.max(off)) if off.size else -math.inf
    upper = float(w.value_at_identity) * n
    lower = float(mean) * n * n
    valid = lower <= S + slack and S <= upper + slack and max_off <= slack
    return AuditRecord(S, upper, lower, bool(valid), max_off, n, off.tolist())
