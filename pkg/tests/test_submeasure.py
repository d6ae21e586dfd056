from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantor.base_seq import BaseSeq
from cantor.natset import IndexSet, NatSet
from cantor.submeasure import (
    PhiX,
    block_harmonic,
    exh_membership,
    ideal_inclusion,
    interval_P,
    is_adapted,
    phi_eval,
    shift_modulus,
    tall_threshold,
    union_modulus,
)
from conftest import B10

F = Fraction
ODDS, EVENS = IndexSet.odds(), IndexSet.evens()


def oracle_weight(x: set[int], n: int) -> Fraction:
    """phi_x weight from first principles: find k with 2^(k-1) <= n < 2^k."""
    k = 1
    while not (2 ** (k - 1) <= n < 2**k):
        k += 1
    return F(1, 2**n) if k in x else F(1, n)


def test_interval_P_definition_matches_source(source_md):
    assert r"2^{k-1}\leq n<2^k" in source_md
    assert interval_P(1).restrict(10) == [1]
    assert interval_P(3).restrict(100) == [4, 5, 6, 7]
    assert interval_P(5).restrict(100) == list(range(16, 32))


@given(st.integers(1, 300))
def test_weights_match_oracle(n):
    for x, members in ((ODDS, set(range(1, 20, 2))), (EVENS, set(range(2, 20, 2))), (IndexSet.finite([1]), {1})):
        assert PhiX(x).weight(n) == oracle_weight(members, n)


def test_weight_examples():
    one = PhiX(IndexSet.finite([1]))
    assert [one.weight(n) for n in (1, 2, 3)] == [F(1, 2), F(1, 2), F(1, 3)]
    assert PhiX(EVENS).weight(2) == F(1, 4)


def test_phi_eval_examples():
    assert phi_eval(PhiX(IndexSet.finite([1])), [1, 2, 3]) == F(4, 3)
    assert phi_eval(PhiX(ODDS), range(4, 8)) == F(15, 128)
    assert phi_eval(PhiX(ODDS), []) == 0


@given(st.sets(st.integers(1, 200), max_size=30))
def test_phi_eval_is_the_plain_sum(a):
    assert phi_eval(PhiX(ODDS), sorted(a)) == sum((oracle_weight(set(range(1, 20, 2)), n) for n in a), F(0))


def test_harmonic_block_mass_matches_source(source_md):
    assert r"\sum_{n\in P_k} \frac{1}{n} \geq \frac{1}{2}" in source_md
    assert block_harmonic(3) == F(319, 420)
    for k in range(1, 13):
        oracle = sum((F(1, n) for n in range(2 ** (k - 1), 2**k)), F(0))
        assert block_harmonic(k) == oracle >= F(1, 2)


def test_membership_examples():
    assert exh_membership(PhiX(ODDS), NatSet.finite([1, 5, 9])).is_in
    assert exh_membership(PhiX(EVENS), NatSet.empty()).is_in
    verdict = exh_membership(PhiX(EVENS), NatSet.naturals())
    assert verdict.is_out and verdict.certificate.d == F(1, 2)
    for k, mass in verdict.certificate.masses(3):
        assert mass == block_harmonic(k) >= F(1, 2)
    inside = exh_membership(PhiX(ODDS), NatSet.blocks(ODDS))
    assert inside.is_in
    for n in (0, 8, 40):
        assert inside.certificate.bound(n) <= F(1, 2**n)


@given(st.text("01", max_size=4), st.text("01", min_size=1, max_size=4), st.text("01", max_size=4), st.text("01", min_size=1, max_size=4))
def test_tail_certificates_bound_the_true_tail(xp, xq, ap, aq):
    x = IndexSet.from_bits(xp, xq)
    phi = PhiX(x)
    a = NatSet.blocks(IndexSet.from_bits(ap, aq)).union(NatSet.finite([3, 17]))
    verdict = exh_membership(phi, a)
    if verdict.is_in:
        for n in (0, 5, 20, 60):
            window = phi_eval(phi, a.iter_between(n + 1, 2**10))
            assert window <= verdict.certificate.bound(n)
    else:
        assert verdict.is_out
        cert = verdict.certificate
        for k in cert.blocks(3):
            if k <= 13:
                members = a.iter_between(2 ** (k - 1), 2**k - 1)
                assert sum((phi.weight(n) for n in members), F(0)) >= cert.d


def test_adapted_bases():
    assert is_adapted(B10, PhiX(ODDS)).is_in
    assert is_adapted(BaseSeq.primorial_blocks([2, 3, 5, 7, 11]), PhiX(EVENS)).is_in
    assert is_adapted(BaseSeq.periodic([], [2, 3]), PhiX(EVENS)).is_out


def test_tall_threshold_examples():
    phi = PhiX(ODDS)
    assert tall_threshold(phi, F(1, 10)) == 11
    assert tall_threshold(phi, F(1, 100)) == 101
    assert tall_threshold(phi, 2) == 1
    for eps in (F(1, 3), F(1, 7), F(2, 5)):
        n0 = tall_threshold(phi, eps)
        assert all(phi.weight(n) < eps for n in range(n0, n0 + 300))


def test_union_modulus_examples():
    assert union_modulus(PhiX(ODDS), 1) == F(1, 2)
    assert union_modulus(PhiX(ODDS), F(1, 5)) == F(1, 10)


def random_small_set(rng, phi, delta, top=64):
    """Greedy random subset of [1, top] with phi-mass below delta."""
    out, mass = [], F(0)
    for n in rng.sample(range(1, top + 1), top):
        w = phi.weight(n)
        if mass + w < delta and rng.random() < 0.5:
            out.append(n)
            mass += w
    return sorted(out)


def test_union_modulus_randomized():
    rng = random.Random(3)
    for x in (ODDS, EVENS, IndexSet.empty()):
        phi = PhiX(x)
        delta = union_modulus(phi, F(1, 5))
        for _ in range(200):
            a, b = random_small_set(rng, phi, delta), random_small_set(rng, phi, delta)
            assert phi_eval(phi, set(a) | set(b)) < F(1, 5)


def test_shift_modulus_values_and_randomized():
    phi = PhiX(EVENS)
    assert shift_modulus(phi, 1) == F(1, 16)
    assert shift_modulus(phi, 2) == F(1, 4)
    rng = random.Random(5)
    for x in (ODDS, EVENS, IndexSet.empty(), IndexSet.finite([2, 3])):
        phi = PhiX(x)
        delta = shift_modulus(phi, 1)
        for _ in range(200):
            a = random_small_set(rng, phi, delta, top=200)
            assert phi_eval(phi, [n + 1 for n in a]) < 1
            assert phi_eval(phi, [n - 1 for n in a if n > 1]) < 1


def test_shift_modulus_monotone():
    phi = PhiX(ODDS)
    schedule = [F(2) ** -i for i in range(-3, 7)]
    values = [shift_modulus(phi, e) for e in schedule]
    assert values == sorted(values, reverse=True)


def test_inclusion():
    result = ideal_inclusion(ODDS, EVENS)
    assert not result.included
    assert result.witnesses.members(9) == [1, 3, 5, 7, 9]
    assert ideal_inclusion(EVENS, EVENS.union(IndexSet.finite([1]))).included
    assert ideal_inclusion(ODDS, ODDS).included
    assert ideal_inclusion(ODDS.union(IndexSet.finite([2])), ODDS).included
    for row in result.block_values(ODDS, EVENS, 5):
        assert row["phi_y"] >= F(1, 2) and row["phi_x"] <= row["phi_x_bound"]


def test_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        union_modulus(PhiX(ODDS), 0)
    with pytest.raises(ValueError):
        tall_threshold(PhiX(ODDS), -1)


def test_smla_blocks_for_odds_over_evens():
    # phi_x(P_k) < 2^-k and phi_y(P_k) >= 1/2 on every k in x \ y; the cap
    # 2^(1 - 2^(k-1)) coincides with 2^-k at k = 3 and is strictly smaller after.
    px, py = PhiX(ODDS), PhiX(EVENS)
    for k in range(3, 16, 2):
        block = range(2 ** (k - 1), 2**k)
        fx, fy = phi_eval(px, block), phi_eval(py, block)
        cap = F(2, 2 ** (2 ** (k - 1)))
        assert fx == F(1, 2 ** (2 ** (k - 1) - 1)) - F(1, 2 ** (2**k - 1))
        assert fx <= cap and fx < F(1, 2**k) and fy >= F(1, 2)
        assert cap < F(1, 2**k) if k >= 4 else cap == F(1, 2**k)
