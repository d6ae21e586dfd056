from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from sympy import factorint

from cantor.base_seq import BaseSeq, build_base, in_subring, q_a_membership
from conftest import bases, unfold


def test_unfolding_examples():
    assert unfold(BaseSeq.constant(10), 5) == [10] * 5
    assert unfold(BaseSeq.periodic([2], [2, 3]), 5) == [2, 2, 3, 2, 3]
    assert BaseSeq.periodic([2], [2, 3]).value_at(4) == 2
    assert BaseSeq.constant(10).value_at(7) == 10


def test_primorial_blocks():
    b = BaseSeq.primorial_blocks([2, 3, 5])
    values = unfold(b, 64)
    # oracle: a_n = product of the first min(k, 3) primes, k = block index of n - 1
    for n, v in enumerate(values, start=1):
        k = max(1, (n - 1).bit_length())
        assert v == [2, 6, 30][min(k, 3) - 1]
    assert {n for n in range(1, 64) if values[n - 1] != values[n]} == {2, 4}
    assert BaseSeq.primorial_blocks([2, 3]).value_at(5) == 6


def test_profiles():
    p = BaseSeq.constant(10).profile()
    assert p.primes == {2, 5} and p.uniform and p.jumps.restrict(100) == []
    p = BaseSeq.periodic([], [2, 3]).profile()
    assert p.primes == frozenset() and not p.uniform
    assert p.jumps.restrict(20) == list(range(1, 21))
    p = BaseSeq.primorial_blocks([2, 3, 5]).profile()
    assert p.primes == {2, 3, 5} and p.uniform and set(p.jumps.restrict(16)) <= {2, 4}


@given(bases)
def test_prime_set_oracle(b):
    # p is in pr(a) iff p divides a_n for every large n; check one full regular window.
    start, width = b.regular_from()
    window = [b.value_at(n) for n in range(start + 1, start + 2 * width + 71)]
    primes = {p for v in window for p in factorint(v)}
    assert b.prime_set() == {p for p in primes if all(v % p == 0 for v in window)}


@given(bases)
def test_jump_set_oracle(b):
    values = unfold(b, 81)
    assert b.jump_set().restrict(80) == [n for n in range(1, 81) if values[n - 1] != values[n]]


@given(bases)
def test_prefix_product(b):
    acc = 1
    for n in range(1, 30):
        acc *= b.value_at(n)
        assert b.prefix_product(n) == acc
        assert b.unit(n) == Fraction(1, acc)


def test_subring():
    b10 = BaseSeq.constant(10)
    assert q_a_membership(Fraction(3, 20), b10)
    assert not q_a_membership(Fraction(1, 3), b10)
    assert q_a_membership(Fraction(-7, 6), BaseSeq.primorial_blocks([2, 3]))
    assert in_subring(5, set())


def test_build_base_descriptors():
    assert build_base({"kind": "constant", "value": 7}) == BaseSeq.constant(7)
    assert build_base({"kind": "periodic", "prefix": [2], "period": [2, 3]}) == BaseSeq.periodic([2], [2, 3])
    assert build_base({"kind": "primorial_blocks", "primes": [2, 3]}) == BaseSeq.primorial_blocks([2, 3])
    with pytest.raises((ValueError, KeyError)):
        build_base({"kind": "constant", "value": 1})
    with pytest.raises((ValueError, KeyError)):
        build_base({"kind": "nope"})


@given(bases)
def test_json_round_trip(b):
    assert build_base(b.to_json()) == b
