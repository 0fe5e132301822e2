import itertools
import json
import math

import numpy as np
import pytest

from mubwitness import mub
from mubwitness.catalog6 import fourier
from mubwitness.linalg import identity, is_unitary
from mubwitness.witness import delsarte_audit, witness_h

from conftest import random_unitaries


def inner_product_deviation(system):
    """Largest | |<e, f>| - 1/sqrt(d) | over vectors of distinct bases, by explicit loops."""
    d = system.dim
    worst = 0.0
    for a, b in itertools.combinations(system.bases, 2):
        for j in range(d):
            for k in range(d):
                ip = np.vdot(a[:, j], b[:, k])
                worst = max(worst, abs(abs(ip) - 1 / math.sqrt(d)))
    return worst


def test_primes_and_prime_powers():
    assert [n for n in range(20) if mub.is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert mub.prime_power(27) == (3, 3)
    assert mub.prime_power(1) is None
    assert mub.prime_power(6) is None
    assert mub.prime_power(12) is None


def test_irreducibility():
    assert mub.is_irreducible((1, 0, 1), 3)  # x^2 + 1 has no root mod 3
    assert not mub.is_irreducible((1, 0, 1), 5)  # 2^2 + 1 = 0 mod 5
    assert not mub.is_irreducible((1, 0, 2, 0, 1), 3)  # (x^2+1)^2
    assert mub.smallest_irreducible(3, 2) == (1, 0, 1)
    for p, k in [(3, 3), (3, 4), (5, 2), (7, 2)]:
        poly = mub.smallest_irreducible(p, k)
        roots = [x for x in range(p) if sum(c * x**i for i, c in enumerate(poly)) % p == 0]
        assert not roots


def test_field_rejects_reducible_modulus():
    with pytest.raises(ValueError):
        mub.GaloisField(5, 2, (1, 0, 1))
    with pytest.raises(ValueError):
        mub.GaloisField.create(2, 2)


def test_field_axioms_q9():
    f = mub.GaloisField.create(3, 2)
    elems = f.elements()
    assert len(set(elems)) == 9
    zero, one = (0, 0), (1, 0)
    for a in elems:
        assert f.mul(a, one) == a
        if a != zero:
            assert sum(f.mul(a, b) == one for b in elems) == 1
        assert f.power(a, 9) == a  # Frobenius fixes GF(9)


def test_trace_linear_exhaustive_q9():
    f = mub.GaloisField.create(3, 2)
    elems = f.elements()
    for u, v in itertools.product(elems, repeat=2):
        assert f.trace(f.add(u, v)) == (f.trace(u) + f.trace(v)) % 3
    # trace is onto F_3 and balanced
    counts = [sum(f.trace(e) == t for e in elems) for t in range(3)]
    assert counts == [3, 3, 3]


def test_construct_d2():
    s = mub.construct_d2()
    assert len(s) == 3
    for a, b in itertools.combinations(s.bases, 2):
        assert np.allclose(np.abs(a.conj().T @ b), 1 / math.sqrt(2), atol=1e-15)
    rec = delsarte_audit(s, witness_h(2))
    assert abs(rec.S - 3) < 1e-12 and rec.lower == 3 and rec.upper == 3


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_construct_prime(p):
    s = mub.construct_prime(p)
    assert len(s) == p + 1
    assert inner_product_deviation(s) <= 1e-10
    res = mub.verify_mub(s)
    assert res.ok and res.worst_deviation <= 1e-10


def test_construct_prime_7_audit_tight():
    rec = delsarte_audit(mub.construct_prime(7), witness_h(7))
    assert rec.valid
    assert abs(rec.S - rec.upper) <= 1e-6 and abs(rec.S - rec.lower) <= 1e-6


@pytest.mark.parametrize("p,k", [(3, 2), (5, 2), (3, 3)])
def test_construct_prime_power(p, k):
    s = mub.construct_prime_power(p, k)
    q = p**k
    assert s.dim == q and len(s) == q + 1
    assert inner_product_deviation(s) <= 1e-10
    assert mub.verify_mub(s).ok


def test_construct_errors():
    with pytest.raises(ValueError):
        mub.construct_prime(2)
    with pytest.raises(ValueError):
        mub.construct_prime(9)
    with pytest.raises(ValueError):
        mub.construct_prime_power(2, 2)
    with pytest.raises(ValueError):
        mub.construct_prime_power(3, 4)  # 81 > cap
    for d in (4, 6, 8, 10, 12):
        with pytest.raises(ValueError):
            mub.construct(d)


@pytest.mark.parametrize("d", [2, 3, 5, 7, 9, 25, 27, 49])
def test_complete_systems_saturate(d):
    s = mub.construct(d)
    assert len(s) == d + 1
    assert all(is_unitary(b) for b in s.bases)
    rec = delsarte_audit(s, witness_h(d))
    assert abs(rec.S - rec.upper) <= 1e-6 and abs(rec.S - rec.lower) <= 1e-6


def test_verify_examples():
    bad = mub.verify_mub([identity(3), identity(3)])
    assert not bad.ok and bad.worst_pair == (0, 1)
    two = mub.verify_mub([identity(6), fourier(6)])
    assert two.ok


def test_verify_invariant_under_left_multiplication():
    s = mub.construct(5)
    v = random_unitaries(5, 1, seed=77)[0]
    moved = mub.MubSystem(5, tuple(v @ b for b in s.bases))
    assert mub.verify_mub(moved).ok
    assert abs(mub.verify_mub(moved).worst_deviation - mub.verify_mub(s).worst_deviation) < 1e-12


def test_mub_system_validates_members():
    with pytest.raises(ValueError):
        mub.MubSystem(2, (2 * identity(2),))
    with pytest.raises(ValueError):
        mub.MubSystem(3, (identity(2),))


def test_json_roundtrip():
    s = mub.construct(5)
    back = mub.MubSystem.from_json(json.dumps(s.to_json()))
    assert back.dim == 5 and len(back) == 6
    for a, b in zip(s.bases, back.bases):
        assert np.array_equal(a, b)
