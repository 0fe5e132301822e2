"""Complete systems of mutually unbiased bases and their verification.

Odd prime powers use the quadratic-phase construction over GF(p^k):
basis ``a`` has columns ``b`` with entries ``omega_p ** tr(a x^2 + b x) / sqrt(q)``
over field elements ``x``, plus the standard basis. Dimension 2 is hardcoded.

Even prime powers 4, 8, ... are not supported. Their complete systems need
Galois-ring arithmetic (Z_4 lifts), which this package does not implement.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import DEFAULT_TOL, Tolerance, adjoint, as_matrix, hadamard_deviation, is_unitary, matrix_from_json, matrix_to_json

PRIME_POWER_CAP = 49


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


def prime_power(q: int):
    """``(p, k)`` with ``q == p**k`` for prime p, else ``None``."""
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                return None
            k = 0
            while q % p == 0:
                q //= p
                k += 1
            return (p, k) if q == 1 else None
    return None


# -- polynomials over F_p: coefficient tuples, lowest degree first -------------


def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mod(a, m, p):
    a = list(_trim(a))
    m = _trim(m)
    inv_lead = pow(m[-1], -1, p)
    while len(a) >= len(m):
        f = (a[-1] * inv_lead) % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - f * mc) % p
        a = list(_trim(a))
    return tuple(a)


def _monic_polys(p, deg):
    for low in itertools.product(range(p), repeat=deg):
        yield tuple(reversed(low)) + (1,) if deg else (1,)


def is_irreducible(poly, p: int) -> bool:
    """Exhaustive check: no monic factor of degree 1 .. deg/2."""
    poly = _trim(poly)
    deg = len(poly) - 1
    if deg < 1:
        return False
    for fd in range(1, deg // 2 + 1):
        for f in _monic_polys(p, fd):
            if not _poly_mod(poly, f, p):
                return False
    return True


def smallest_irreducible(p: int, k: int):
    """Lexicographically smallest monic irreducible of degree k (coefficients lowest first)."""
    for low in itertools.product(range(p), repeat=k):
        cand = tuple(low) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {k} over F_{p}")


@dataclass(frozen=True)
class GaloisField:
    p: int
    k: int
    modulus: tuple

    @classmethod
    def create(cls, p: int, k: int) -> "GaloisField":
        if not is_prime(p) or p == 2:
            raise ValueError("characteristic must be an odd prime")
        if k < 1:
            raise ValueError("degree must be positive")
        mod = (0, 1) if k == 1 else smallest_irreducible(p, k)
        return cls(p, k, mod)

    def __post_init__(self):
        if len(self.modulus) != self.k + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree k")
        if not is_irreducible(self.modulus, self.p):
            raise ValueError(f"modulus {self.modulus} is reducible over F_{self.p}")

    @property
    def order(self) -> int:
        return self.p**self.k

    def elements(self) -> list:
        """All elements as length-k coefficient tuples; index i has base-p digits of i."""
        out = []
        for i in range(self.order):
            digits = []
            for _ in range(self.k):
                digits.append(i % self.p)
                i //= self.p
            out.append(tuple(digits))
        return out

    def _pad(self, c):
        c = tuple(c)
        return c + (0,) * (self.k - len(c))

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def mul(self, a, b):
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % self.p
        return self._pad(_poly_mod(prod, self.modulus, self.p))

    def power(self, a, n: int):
        result = self._pad((1,))
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def trace(self, a) -> int:
        """Absolute trace a + a^p + ... + a^(p^(k-1)), an element of F_p."""
        total = self._pad(())
        x = a
        for _ in range(self.k):
            total = self.add(total, x)
            x = self.power(x, self.p)
        if any(total[1:]):
            raise ArithmeticError(f"trace {total} is not in the prime field")
        return total[0]


# -- MUB systems ----------------------------------------------------------------


@dataclass(frozen=True)
class MubSystem:
    dim: int
    bases: tuple

    def __post_init__(self):
        bases = tuple(as_matrix(b) for b in self.bases)
        for i, b in enumerate(bases):
            if b.shape != (self.dim, self.dim):
                raise ValueError(f"basis {i} has shape {b.shape}, expected dimension {self.dim}")
            if not is_unitary(b):
                raise ValueError(f"basis {i} is not unitary")
        object.__setattr__(self, "bases", bases)

    def __len__(self):
        return len(self.bases)

    def to_json(self) -> dict:
        return {"dim": self.dim, "bases": [matrix_to_json(b) for b in self.bases]}

    @classmethod
    def from_json(cls, obj) -> "MubSystem":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["dim"]), tuple(matrix_from_json(b) for b in obj["bases"]))


def _phase(t: np.ndarray, p: int) -> np.ndarray:
    return np.exp(2j * np.pi * (np.asarray(t) % p) / p)


def construct_d2() -> MubSystem:
    s = 1 / math.sqrt(2)
    return MubSystem(
        2,
        (
            np.eye(2),
            s * np.array([[1, 1], [1, -1]]),
            s * np.array([[1, 1], [1j, -1j]]),
        ),
    )


def construct_prime(p: int) -> MubSystem:
    if p == 2 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    x = np.arange(p)
    bases = [np.eye(p)]
    for k in range(p):
        # entry (l, j) = omega^(k l^2 + j l)
        expo = k * x[:, None] ** 2 + x[:, None] * x[None, :]
        bases.append(_phase(expo, p) / math.sqrt(p))
    return MubSystem(p, tuple(bases))


@lru_cache(maxsize=None)
def _trace_tables(p: int, k: int):
    field = GaloisField.create(p, k)
    elems = field.elements()
    index = {e: i for i, e in enumerate(elems)}
    q = field.order
    mul = np.empty((q, q), dtype=np.intp)
    add = np.empty((q, q), dtype=np.intp)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            mul[i, j] = index[field.mul(a, b)]
            add[i, j] = index[field.add(a, b)]
    tr = np.array([field.trace(e) for e in elems], dtype=np.intp)
    return field, mul, add, tr


def construct_prime_power(p: int, k: int) -> MubSystem:
    if p == 2:
        raise ValueError("even prime powers need Galois rings and are not supported")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    q = p**k
    if q > PRIME_POWER_CAP:
        raise ValueError(f"q = {q} exceeds the supported cap {PRIME_POWER_CAP}")
    _, mul, add, tr = _trace_tables(p, k)
    x = np.arange(q)
    sq = mul[x, x]
    bases = [np.eye(q)]
    for a in range(q):
        ax2 = mul[a, sq]  # a x^2 for each x
        # rows x, columns b: tr(a x^2 + b x)
        arg = add[ax2[:, None], mul[x[None, :], x[:, None]]]
        bases.append(_phase(tr[arg], p) / math.sqrt(q))
    return MubSystem(q, tuple(bases))


def construct(d: int) -> MubSystem:
    """Complete system for d = 2, an odd prime, or an odd prime power up to the cap."""
    if d == 2:
        return construct_d2()
    pk = prime_power(d)
    if pk is None:
        raise ValueError(f"{d} is not a prime power; no complete system is known")
    p, k = pk
    if p == 2:
        raise ValueError(f"{d} is an even prime power; not supported")
    return construct_prime(p) if k == 1 else construct_prime_power(p, k)


@dataclass
class VerifyResult:
    ok: bool
    worst_pair: tuple
    worst_deviation: float

    def to_json(self) -> dict:
        return {"ok": self.ok, "worst_pair": list(self.worst_pair), "worst_deviation": self.worst_deviation}


def verify_mub(b, tol: Tolerance = DEFAULT_TOL) -> VerifyResult:
    """Check that every quotient ``b_i^* b_j`` (i != j) is a scaled Hadamard matrix."""
    bases = list(getattr(b, "bases", b))
    worst, worst_pair, ok = 0.0, (-1, -1), True
    for i, j in itertools.combinations(range(len(bases)), 2):
        quot = adjoint(bases[i]) @ bases[j]
        dev = hadamard_deviation(quot)
        if dev > worst or worst_pair == (-1, -1):
            worst, worst_pair = dev, (i, j)
        if dev > tol.hadamard_tol or not is_unitary(quot, tol):
            ok = False
    if len(bases) < 2:
        ok = len(bases) == 1
    return VerifyResult(ok, worst_pair, float(worst))
