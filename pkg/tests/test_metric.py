from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantor.base_seq import BaseSeq
from cantor.metric import (
    PreconditionError,
    exact_mass,
    h_membership,
    rho,
    rho_triangle_modulus,
    triangle_modulus,
    truncation,
    truncation_convergence,
)
from cantor.mixed_radix import MRReal, SignedMRReal
from cantor.natset import IndexSet, NatSet
from cantor.submeasure import PhiX, phi_eval
from conftest import B10

F = Fraction
ODDS, EVENS = IndexSet.odds(), IndexSet.evens()
ONE = IndexSet.finite([1])


def S(v, b=B10):
    return SignedMRReal(F(v), b)


def test_rho_examples():
    value = rho(PhiX(ONE), S(F(1, 4)), S(F(1, 20)))
    assert (value.distance, value.kind, value.value) == (F(1, 5), "exact", F(1, 2))
    assert value.total == F(7, 10)
    far = rho(PhiX(EVENS), S(F(1, 7)), S(0), depth=64)
    assert far.kind == "infinite" and far.value is None
    assert rho(PhiX(ODDS), S(F(5, 9)), S(F(5, 9))).total == 0


def test_rho_json_shape():
    doc = rho(PhiX(ONE), S(F(1, 4)), S(F(1, 20))).to_json()
    assert doc == {"distance": "1/5", "phi": {"kind": "exact", "value": "1/2"}, "depth": 128}


def test_membership_examples():
    assert h_membership(PhiX(ODDS), S(F(1, 3))).is_in
    assert h_membership(PhiX(ODDS), S(F(-1, 3))).is_in
    assert h_membership(PhiX(EVENS), S(F(1, 7))).is_out


def test_exact_mass_geometric_series():
    # x cofinite: every n >= 2 is in A_x, so phi(evens from 2) = sum_{m>=1} 4^-m = 1/3
    phi = PhiX(IndexSet.everything())
    evens = NatSet.mask(EVENS)
    assert exact_mass(phi, evens) == F(1, 3)
    assert exact_mass(PhiX(ODDS), evens) is None


fractions = st.fractions(min_value=-3, max_value=3, max_denominator=400)


@given(fractions, fractions, fractions)
def test_invariance_identities(r, s, t):
    phi = PhiX(ODDS)
    base = rho(phi, S(r), S(s))
    assert rho(phi, S(r + t), S(s + t)) == base
    assert rho(phi, S(-r), S(-s)) == base
    assert rho(phi, S(s), S(r)) == base


@given(fractions, fractions)
def test_rho_exact_value_oracle(r, s):
    phi = PhiX(ODDS)
    value = rho(phi, S(r), S(s))
    diff = MRReal(abs(r - s), B10)
    ds = diff.digits(121)
    window = [n for n in range(1, 121) if ds[n - 1] != ds[n]]
    assert value.distance == abs(r - s)
    if value.kind == "exact":
        # the exact mass dominates the window sum and the excess fits in the tail beyond 120
        prefix_mass = phi_eval(phi, window)
        assert prefix_mass <= value.value <= prefix_mass + sum((F(1, n) for n in range(121, 200)), F(0)) + F(1, 2**120)


def test_triangle_modulus_values():
    phi = PhiX(ODDS)
    assert rho_triangle_modulus(phi, B10, 1) == F(1, 512)
    assert rho_triangle_modulus(phi, B10, F(1, 10)) == F(1, 2**65)
    m = triangle_modulus(phi, B10, 1)
    assert m.cutoff == 0 and m.delta == min(m.gamma, m.shift, m.union, 1)


def finite_number(rng, b, delta):
    """Random finite-digit number r with 0 < |r| and rho(r, 0) < delta, or 0."""
    for _ in range(20):
        # shallow digits, or digits deep inside the odd block P_7 = [64, 128)
        lo = rng.choice((rng.randint(1, 12), rng.randint(67, 110)))
        spec = {p: rng.randrange(1, b.value_at(p)) for p in rng.sample(range(lo, lo + 12), rng.randint(1, 3))}
        v = sum((F(d, b.prefix_product(p)) for p, d in spec.items()), F(0))
        if rho(PhiX(ODDS), SignedMRReal(v, b), SignedMRReal(0, b)).total < delta:
            return v if rng.random() < 0.5 else -v
    return F(0)


@pytest.mark.parametrize("eps", [F(1), F(1, 10)])
def test_triangle_modulus_randomized(eps):
    phi = PhiX(ODDS)
    rng = random.Random(11)
    for b in (B10, BaseSeq.constant(2)):
        delta = rho_triangle_modulus(phi, b, eps)
        hits = 0
        for _ in range(100):
            s = F(rng.randint(-50, 50), rng.randint(1, 9))
            r = s + finite_number(rng, b, delta)
            t = s + finite_number(rng, b, delta)
            a, c = rho(phi, S(r, b), S(s, b)), rho(phi, S(s, b), S(t, b))
            if a.less_than(delta) and c.less_than(delta):
                assert rho(phi, S(r, b), S(t, b)).less_than(eps)
                hits += r != s and t != s
        assert hits >= 20


def test_truncation_is_signed():
    assert truncation(S(F(-1, 3)), 2) == F(-33, 100)


def test_truncation_examples():
    result = truncation_convergence(PhiX(ONE), S(F(1, 3)), F(1, 2))
    assert result.kind == "index" and result.n0 == 3
    assert result.rhos[0] == F(1, 3) + F(1, 3000)
    done = truncation_convergence(PhiX(ODDS), S(F(101, 1000)), F(1, 100))
    assert done.n0 == 3 and done.rhos == (0,)


def test_truncation_subsequence_for_infinite_jump_sets():
    # x cofinite: 1/11 = 0.0909... has j = N, which is in Exh(phi_x) with exact tails
    phi = PhiX(IndexSet.everything().minus(IndexSet.finite([1])))
    result = truncation_convergence(phi, S(F(1, 11)), F(1, 100), count=5)
    assert result.kind == "subsequence" and len(result.indices) == 5
    assert all(v < F(1, 100) for v in result.rhos)
    assert list(result.rhos) == sorted(result.rhos, reverse=True)


def test_truncation_rejects_out_numbers():
    with pytest.raises(PreconditionError):
        truncation_convergence(PhiX(EVENS), S(F(1, 7)), F(1, 2))


@given(st.fractions(min_value=-2, max_value=2, max_denominator=300))
def test_truncation_indices_are_close(r):
    phi = PhiX(ODDS)
    if not h_membership(phi, S(r)).is_in:
        return
    result = truncation_convergence(phi, S(r), F(1, 8), count=4)
    for n, value in zip(result.indices, result.rhos):
        assert rho(phi, S(r), S(truncation(S(r), n))).total == value < F(1, 8)
