"""Weighted submeasures, their Exh ideals, and the dyadic-block family ``phi_x``.

A weighted submeasure is ``phi(a) = sum_{n in a} w(n)`` with ``w(n) > 0``.
The flagship instance is ``phi_x`` for an index set ``x``::

    w(n) = 2**-n   if n lies in A_x = union of P_k over k in x,
    w(n) = 1/n     otherwise,

where ``P_k = [2**(k-1), 2**k)``.  ``Exh(phi_x)`` is the ideal ``I_x`` of sets
of finite ``phi_x`` mass.

Membership questions return a :class:`Verdict` carrying an auditable
certificate instead of a bare boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import islice
from typing import Callable, Iterable

from gmpy2 import mpq, mpz

from .natset import IndexSet, NatSet, Term, block_index


class Submeasure:
    """``phi(a) = sum of weight(n) over n in a``."""

    name = "weighted"

    def __init__(self, weight: Callable[[int], Fraction], name: str = "weighted"):
        self._weight = weight
        self.name = name

    def weight(self, n: int) -> Fraction:
        return Fraction(self._weight(n))

    def __call__(self, a: Iterable[int]) -> Fraction:
        return phi_eval(self, a)

    def to_json(self) -> dict:
        return {"name": self.name}


class PhiX(Submeasure):
    """The submeasure ``phi_x`` attached to an index set ``x``."""

    def __init__(self, x: IndexSet):
        self.x = x
        self.name = "phi_x"

    def __repr__(self):
        return f"PhiX({self.x.to_json()})"

    def __eq__(self, other):
        return isinstance(other, PhiX) and self.x.same_as(other.x)

    def __hash__(self):
        return hash(("phi_x", self.x))

    def in_support(self, n: int) -> bool:
        """``n in A_x``."""
        return n >= 1 and block_index(n) in self.x

    def weight(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("weights are defined on positive integers")
        if self.in_support(n):
            return Fraction(1, 1 << n)
        return Fraction(1, n)

    def support(self) -> NatSet:
        """``A_x`` as a structured set."""
        return NatSet.blocks(self.x)

    def to_json(self) -> dict:
        return {"name": "phi_x", "x": self.x.to_json()}


def make_phi_x(x: IndexSet) -> PhiX:
    return PhiX(x)


def interval_P(k: int) -> NatSet:
    """``P_k = {n : 2**(k-1) <= n < 2**k}``."""
    if k < 1:
        raise ValueError("block index must be >= 1")
    return NatSet.interval(1 << (k - 1), (1 << k) - 1)


def phi_eval(phi: Submeasure, a: Iterable[int]) -> Fraction:
    """Exact mass of a finite set."""
    if isinstance(a, NatSet):
        a = a.restrict(a.max_member())
    a = set(a)
    if any(n < 1 for n in a):
        raise ValueError("weights are defined on positive integers")
    if isinstance(phi, PhiX):
        # Common denominators keep long sums fast.
        on = [n for n in a if phi.in_support(n)]
        off = [n for n in a if not phi.in_support(n)]
        top = max(on, default=0)
        dyadic = Fraction(sum(1 << (top - n) for n in on), 1 << top)
        return dyadic + harmonic_sum(off)
    return sum((phi.weight(n) for n in a), Fraction(0))


def harmonic_sum(ns: Iterable[int]) -> Fraction:
    """``sum(1/n)`` over distinct ``ns`` by binary splitting."""
    ns = sorted(set(ns))

    def split(lo: int, hi: int) -> tuple[mpz, mpz]:
        if hi - lo == 1:
            return mpz(1), mpz(ns[lo])
        mid = (lo + hi) // 2
        p1, q1 = split(lo, mid)
        p2, q2 = split(mid, hi)
        return p1 * q2 + p2 * q1, q1 * q2

    if not ns:
        return Fraction(0)
    reduced = mpq(*split(0, len(ns)))
    return Fraction(int(reduced.numerator), int(reduced.denominator))


def block_harmonic(k: int) -> Fraction:
    """``sum_{n in P_k} 1/n``."""
    return harmonic_sum(range(1 << (k - 1), 1 << k))


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class TailCertificate:
    """Certified tail bounds ``phi(a \\ [1, N]) <= bound(N)``.

    ``bound`` is nonincreasing and tends to 0.  Up to ``stable`` the bound is
    the exact mass of the listed elements; past it the closed form is
    ``2**-N`` (mass inside ``A_x``) plus, for each shifted block term, the
    boundary spill ``|o| * 2**(3 - j)`` with ``j`` least such that
    ``2**j > N - |o| + 1``.
    """

    stable: int
    head: tuple[tuple[int, Fraction], ...]
    spills: tuple[int, ...] = ()
    finite: bool = False

    @cached_property
    def _suffix(self) -> list[Fraction]:
        out = [Fraction(0)] * (len(self.head) + 1)
        for i in range(len(self.head) - 1, -1, -1):
            out[i] = out[i + 1] + self.head[i][1]
        return out

    def _closed(self, n: int) -> Fraction:
        if self.finite:
            return Fraction(0)
        total = Fraction(1, 1 << n)
        for o in self.spills:
            j = max(0, n - o + 1).bit_length()
            total += Fraction(o * 8, 1 << j)
        return total

    def bound(self, n: int) -> Fraction:
        n = max(n, 0)
        lo, hi = 0, len(self.head)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.head[mid][0] <= n:
                lo = mid + 1
            else:
                hi = mid
        return self._suffix[lo] + self._closed(max(n, self.stable))

    def threshold(self, eps) -> int:
        """Least ``N`` with ``bound(N) < eps``."""
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        if self._closed(self.stable) < eps:
            positions = [0] + [p for p, _ in self.head]
            for p in positions:
                if self.bound(p) < eps:
                    return p
            return self.stable
        lo, hi = self.stable, max(self.stable, 1) * 2
        while self._closed(hi) >= eps:
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._closed(mid) < eps:
                hi = mid
            else:
                lo = mid
        return hi

    def to_json(self, sample=(0, 8, 16, 32, 64, 128)) -> dict:
        return {
            "stable": self.stable,
            "bounds": {str(n): str(self.bound(n)) for n in sample},
        }


@dataclass(frozen=True)
class IntervalCertificate:
    """Disjoint blocks ``P_k`` (``k`` in ``family``, ``k >= start``), each of mass ``>= d``."""

    d: Fraction
    family: IndexSet
    start: int
    reason: str
    phi: Submeasure = field(compare=False, repr=False)
    a: NatSet = field(compare=False, repr=False)

    def blocks(self, count: int) -> list[int]:
        out = []
        for k in self.family.iter_members(self.start):
            out.append(k)
            if len(out) == count:
                break
        return out

    def masses(self, count: int = 3) -> list[tuple[int, Fraction]]:
        """Exact ``phi(a ∩ P_k)`` for the first ``count`` blocks."""
        return [
            (k, phi_eval(self.phi, a_cap_block(self.a, k)))
            for k in self.blocks(count)
        ]

    def to_json(self, count: int = 3) -> dict:
        return {
            "d": str(self.d),
            "family": self.family.to_json(),
            "start": self.start,
            "reason": self.reason,
            "blocks": [{"k": k, "mass": str(m)} for k, m in self.masses(count)],
        }


def a_cap_block(a: NatSet, k: int) -> list[int]:
    return list(a.iter_between(1 << (k - 1), (1 << k) - 1))


@dataclass(frozen=True)
class Verdict:
    """Three-valued membership answer: ``"in"``, ``"out"`` or ``"unknown"``."""

    status: str
    certificate: TailCertificate | IntervalCertificate | None = None
    depth: int | None = None

    @property
    def is_in(self) -> bool:
        return self.status == "in"

    @property
    def is_out(self) -> bool:
        return self.status == "out"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.depth is not None:
            out["depth"] = self.depth
        return out


def _finite_certificate(phi: Submeasure, a: NatSet) -> TailCertificate:
    members = a.restrict(a.max_member())
    head = tuple((n, phi.weight(n)) for n in members)
    return TailCertificate(stable=max(members, default=0), head=head, finite=True)


def _out_for_term(phi: PhiX, a: NatSet, t: Term) -> IntervalCertificate | None:
    x = phi.x
    flips_top = max(a.flips, default=0)
    if t.kind == "mask":
        family = x.complement()
        if family.is_finite():
            return None
        width = len(t.index.period)
        ones = sum(t.index.period)
        k0 = 1
        while (
            (1 << (k0 - 1)) < width
            or (1 << (k0 - 1)) <= flips_top
            or (1 << (k0 - 1)) - t.offset <= len(t.index.prefix)
        ):
            k0 += 1
        d = Fraction(ones * ((1 << (k0 - 1)) // width), 1 << k0)
        reason = "periodic term meets every block outside A_x in a fixed density"
    else:
        family = t.index.minus(x)
        if family.is_finite():
            return None
        o = abs(t.offset)
        k0 = 1
        while (1 << (k0 - 1)) <= 2 * o or (1 << (k0 - 1)) <= flips_top:
            k0 += 1
        d = Fraction((1 << (k0 - 1)) - o, 1 << k0)
        reason = "shifted blocks of the term lie outside A_x"
    k0 = max(k0, family.stable_from())
    while k0 not in family:
        k0 += 1
    return IntervalCertificate(d, family, k0, reason, phi, a)


def exh_membership(phi: Submeasure, a: NatSet, depth: int = 128) -> Verdict:
    """Membership of ``a`` in ``Exh(phi)``."""
    if a.is_finite():
        return Verdict("in", _finite_certificate(phi, a))
    if not isinstance(phi, PhiX):
        return Verdict("unknown", depth=depth)
    x = phi.x
    stable = max(a.flips, default=0)
    spills = []
    for t in a.terms:
        if t.is_finite():
            stable = max(stable, t.max_member())
            continue
        out = _out_for_term(phi, a, t)
        if out is not None:
            return Verdict("out", out)
        o = abs(t.offset)
        if t.kind == "mask":
            # x is cofinite here: everything past block c lies in A_x.
            stable = max(stable, 1 << x.last_nonmember(), t.offset + len(t.index.prefix))
        else:
            exceptional = t.index.minus(x).max_member()
            stable = max(stable, (1 << exceptional) + o, 4 * o)
            if o:
                spills.append(o)
    head = tuple((n, phi.weight(n)) for n in a.iter_between(1, stable))
    return Verdict("in", TailCertificate(stable, head, tuple(spills)))


def is_adapted(b, phi: Submeasure) -> Verdict:
    """Whether the jump set of the base sequence ``b`` lies in ``Exh(phi)``."""
    return exh_membership(phi, b.jump_set())


# -- moduli -------------------------------------------------------------------


def tall_threshold(phi: Submeasure, eps) -> int:
    """``N`` with ``weight(n) < eps`` for every ``n >= N``.

    For ``phi_x`` every weight is at most ``1/n``, so ``N = floor(1/eps) + 1``.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not isinstance(phi, PhiX):
        raise ValueError("tallness threshold is only certified for phi_x")
    return (1 / eps).__floor__() + 1


def union_modulus(phi: Submeasure, eps) -> Fraction:
    """``delta`` with ``phi(a), phi(b) < delta  =>  phi(a ∪ b) < eps``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return eps / 2


def _power_of_two_at_least(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


def shift_gain_bound(s: int) -> Fraction:
    """Upper bound on ``phi_x`` of either shift of a set of mass ``< 2**-s``.

    Elements that keep their regime at most double in weight (shift down) or
    do not grow (shift up).  The only other moves are across a block boundary
    out of ``A_x``: ``2**(k-1) -> 2**(k-1) - 1`` and ``2**k - 1 -> 2**k``.  A
    set of mass ``< 2**-s`` only holds support points ``m >= s + 1``, so the
    crossings contribute at most ``1/(t-1) + 2/t`` (down) and ``2/t'`` (up),
    with ``t`` and ``t'`` the least powers of two ``>= max(s+1, 2)`` and
    ``>= s + 2``.
    """
    delta = Fraction(1, 1 << s)
    t = _power_of_two_at_least(max(s + 1, 2))
    t_up = _power_of_two_at_least(s + 2)
    down = 2 * delta + Fraction(1, t - 1) + Fraction(2, t)
    up = delta + Fraction(2, t_up)
    return max(down, up)


def shift_modulus(phi: Submeasure, eps) -> Fraction:
    """``delta`` with ``phi(a) < delta  =>  phi(a ± 1) < eps`` for ``phi_x``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not isinstance(phi, PhiX):
        raise ValueError("shift modulus is only certified for phi_x")
    s = 0
    while shift_gain_bound(s) >= eps:
        s += 1
    return Fraction(1, 1 << s)


# -- inclusion between ideals --------------------------------------------------


@dataclass(frozen=True)
class InclusionResult:
    included: bool
    witnesses: IndexSet | None = None

    def block_values(self, x: IndexSet, y: IndexSet, count: int = 5) -> list[dict]:
        """Exact ``phi_x(P_k)``, ``phi_y(P_k)`` and the ``phi_x`` bound for witness blocks."""
        if self.witnesses is None:
            return []
        px, py = PhiX(x), PhiX(y)
        out = []
        for k in self.witnesses.iter_members(1):
            block = range(1 << (k - 1), 1 << k)
            out.append(
                {
                    "k": k,
                    "phi_x": phi_eval(px, block),
                    "phi_y": phi_eval(py, block),
                    "phi_x_bound": Fraction(2, 1 << (1 << (k - 1))),
                }
            )
            if len(out) == count:
                break
        return out

    def to_json(self, x: IndexSet, y: IndexSet, count: int = 5) -> dict:
        if self.included:
            return {"result": "Included"}
        return {
            "result": "NotIncludedOnIntervals",
            "witnesses": self.witnesses.to_json(),
            "first": list(islice(self.witnesses.iter_members(1), count)),
            "d": "1/2",
            "blocks": [
                {key: (str(v) if isinstance(v, Fraction) else v) for key, v in row.items()}
                for row in self.block_values(x, y, count)
            ],
        }


def ideal_inclusion(x: IndexSet, y: IndexSet) -> InclusionResult:
    """``I_x ⊆ I_y`` when ``x \\ y`` is finite; otherwise the blocks ``P_k``,
    ``k in x \\ y``, separate the ideals on intervals."""
    diff = x.minus(y)
    if diff.is_finite():
        return InclusionResult(True)
    return InclusionResult(False, diff)
