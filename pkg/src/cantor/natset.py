"""Finitely described subsets of the positive integers.

Two representations are used throughout the package:

``IndexSet``
    an eventually periodic subset of N given by a prefix bit string and a
    repeating period bit string.

``NatSet``
    a finite union of structured *terms* (shifted periodic masks or shifted
    unions of dyadic blocks ``P_k = [2**(k-1), 2**k)``), modified by a finite
    symmetric difference.  The class is closed under the one-step shifts and
    under unions, and membership is decidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator


def _bits(text: str) -> tuple[bool, ...]:
    if any(ch not in "01" for ch in text):
        raise ValueError(f"bit string may only contain 0/1, got {text!r}")
    return tuple(ch == "1" for ch in text)


def _bitstr(bits: Iterable[bool]) -> str:
    return "".join("1" if b else "0" for b in bits)


def block_index(n: int) -> int:
    """Index ``k`` of the dyadic block ``P_k`` containing ``n >= 1``."""
    return n.bit_length()


@dataclass(frozen=True)
class IndexSet:
    """Eventually periodic subset of N.

    Position ``k`` (1-based) is a member iff ``prefix[k-1]`` for
    ``k <= len(prefix)``, and ``period[(k - len(prefix) - 1) % len(period)]``
    otherwise.
    """

    prefix: tuple[bool, ...] = ()
    period: tuple[bool, ...] = (False,)

    def __post_init__(self):
        if not self.period:
            raise ValueError("IndexSet period must be nonempty")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_bits(cls, prefix_bits: str, period_bits: str) -> IndexSet:
        return cls(_bits(prefix_bits), _bits(period_bits))

    @classmethod
    def from_json(cls, obj: dict) -> IndexSet:
        return cls.from_bits(obj.get("prefix_bits", ""), obj["period_bits"])

    @classmethod
    def empty(cls) -> IndexSet:
        return cls((), (False,))

    @classmethod
    def everything(cls) -> IndexSet:
        return cls((), (True,))

    @classmethod
    def evens(cls) -> IndexSet:
        return cls((), (False, True))

    @classmethod
    def odds(cls) -> IndexSet:
        return cls((), (True, False))

    @classmethod
    def finite(cls, members: Iterable[int]) -> IndexSet:
        members = set(members)
        if any(k < 1 for k in members):
            raise ValueError("IndexSet members must be positive integers")
        top = max(members, default=0)
        return cls(tuple(k in members for k in range(1, top + 1)), (False,))

    def to_json(self) -> dict:
        return {"prefix_bits": _bitstr(self.prefix), "period_bits": _bitstr(self.period)}

    # -- queries ------------------------------------------------------------

    def __contains__(self, k: int) -> bool:
        if k < 1:
            return False
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.period[(k - len(self.prefix) - 1) % len(self.period)]

    def is_finite(self) -> bool:
        return not any(self.period)

    def is_cofinite(self) -> bool:
        return all(self.period)

    def stable_from(self) -> int:
        """First position from which membership is purely periodic."""
        return len(self.prefix) + 1

    def max_member(self) -> int:
        """Largest member of a finite set (0 when empty)."""
        if not self.is_finite():
            raise ValueError("infinite IndexSet has no largest member")
        return max((i + 1 for i, b in enumerate(self.prefix) if b), default=0)

    def last_nonmember(self) -> int:
        """Largest non-member of a cofinite set (0 when the set is N)."""
        if not self.is_cofinite():
            raise ValueError("IndexSet is not cofinite")
        return max((i + 1 for i, b in enumerate(self.prefix) if not b), default=0)

    def members(self, limit: int) -> list[int]:
        return [k for k in range(1, limit + 1) if k in self]

    def iter_members(self, start: int = 1) -> Iterator[int]:
        """Members ``>= start`` in increasing order (possibly endless)."""
        k = max(start, 1)
        if self.is_finite():
            top = self.max_member()
            while k <= top:
                if k in self:
                    yield k
                k += 1
            return
        while True:
            if k in self:
                yield k
            k += 1

    # -- algebra ------------------------------------------------------------

    def _combine(self, other: IndexSet, op) -> IndexSet:
        start = max(len(self.prefix), len(other.prefix))
        width = math.lcm(len(self.period), len(other.period))
        prefix = tuple(op(k in self, k in other) for k in range(1, start + 1))
        period = tuple(op(k in self, k in other) for k in range(start + 1, start + width + 1))
        return IndexSet(prefix, period)

    def union(self, other: IndexSet) -> IndexSet:
        return self._combine(other, lambda a, b: a or b)

    def intersection(self, other: IndexSet) -> IndexSet:
        return self._combine(other, lambda a, b: a and b)

    def minus(self, other: IndexSet) -> IndexSet:
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> IndexSet:
        return IndexSet(tuple(not b for b in self.prefix), tuple(not b for b in self.period))

    def difference_is_finite(self, other: IndexSet) -> bool:
        """Decide whether ``self \\ other`` is finite."""
        return self.minus(other).is_finite()

    def same_as(self, other: IndexSet) -> bool:
        return not any(self._combine(other, lambda a, b: a != b).prefix) and not any(
            self._combine(other, lambda a, b: a != b).period
        )


@dataclass(frozen=True)
class Term:
    """One structured component of a :class:`NatSet`.

    ``kind == "mask"``: the set ``{m + offset : m in index}``.
    ``kind == "blocks"``: the set ``{m + offset : m in P_k, k in index}``.
    Only positive results are members.
    """

    kind: str
    index: IndexSet
    offset: int = 0

    def __post_init__(self):
        if self.kind not in ("mask", "blocks"):
            raise ValueError(f"unknown term kind {self.kind!r}")

    def __contains__(self, n: int) -> bool:
        m = n - self.offset
        if m < 1 or n < 1:
            return False
        if self.kind == "mask":
            return m in self.index
        return block_index(m) in self.index

    def is_finite(self) -> bool:
        return self.index.is_finite()

    def max_member(self) -> int:
        if self.kind == "mask":
            top = self.index.max_member()
        else:
            top = (1 << self.index.max_member()) - 1 if self.index.max_member() else 0
        return top + self.offset if top else 0

    def shifted(self, delta: int) -> Term:
        return Term(self.kind, self.index, self.offset + delta)

    def to_json(self) -> dict:
        return {"kind": self.kind, "index": self.index.to_json(), "offset": self.offset}


@dataclass(frozen=True)
class NatSet:
    """``(union of terms) XOR flips`` restricted to positive integers."""

    terms: tuple[Term, ...] = ()
    flips: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if any(n < 1 for n in self.flips):
            raise ValueError("flip positions must be positive")

    @classmethod
    def empty(cls) -> NatSet:
        return cls()

    @classmethod
    def finite(cls, members: Iterable[int]) -> NatSet:
        return cls((), frozenset(members))

    @classmethod
    def interval(cls, lo: int, hi: int) -> NatSet:
        return cls.finite(range(max(lo, 1), hi + 1))

    @classmethod
    def mask(cls, index: IndexSet, offset: int = 0) -> NatSet:
        return cls((Term("mask", index, offset),))

    @classmethod
    def blocks(cls, index: IndexSet, offset: int = 0) -> NatSet:
        return cls((Term("blocks", index, offset),))

    @classmethod
    def naturals(cls) -> NatSet:
        return cls.mask(IndexSet.everything())

    @classmethod
    def from_json(cls, obj: dict) -> NatSet:
        terms = tuple(
            Term(t["kind"], IndexSet.from_json(t["index"]), int(t.get("offset", 0)))
            for t in obj.get("terms", [])
        )
        return cls(terms, frozenset(int(n) for n in obj.get("flips", [])))

    def to_json(self) -> dict:
        return {"terms": [t.to_json() for t in self.terms], "flips": sorted(self.flips)}

    def _raw(self, n: int) -> bool:
        return any(n in t for t in self.terms)

    def __contains__(self, n: int) -> bool:
        if n < 1:
            return False
        return self._raw(n) != (n in self.flips)

    def is_finite(self) -> bool:
        return all(t.is_finite() for t in self.terms)

    def max_member(self) -> int:
        if not self.is_finite():
            raise ValueError("infinite NatSet has no largest member")
        top = max([t.max_member() for t in self.terms] + list(self.flips) + [0])
        while top >= 1 and top not in self:
            top -= 1
        return top

    def structure_bound(self) -> int:
        """Position past which every term is in its periodic regime and no flips occur."""
        bound = max(self.flips, default=0)
        for t in self.terms:
            if t.kind == "mask":
                edge = len(t.index.prefix) + t.offset
            else:
                edge = (1 << len(t.index.prefix)) + t.offset
            bound = max(bound, edge, abs(t.offset))
        return bound

    def restrict(self, limit: int) -> list[int]:
        """Members in ``[1, limit]``, increasing."""
        if not self.terms:
            return sorted(n for n in self.flips if n <= limit)
        return [n for n in range(1, limit + 1) if n in self]

    def iter_between(self, lo: int, hi: int) -> Iterator[int]:
        if not self.terms:
            yield from sorted(n for n in self.flips if lo <= n <= hi)
            return
        for n in range(max(lo, 1), hi + 1):
            if n in self:
                yield n

    # -- algebra ------------------------------------------------------------

    def _with_fix(self, terms: tuple[Term, ...], flips: set[int], want) -> NatSet:
        """Adjust flips so membership agrees with ``want`` on ``flips``'s support."""
        probe = NatSet(terms, frozenset())
        fixed = {n for n in flips if want(n) != probe._raw(n)}
        return NatSet(terms, frozenset(fixed))

    def shift_up(self) -> NatSet:
        """``{n + 1 : n in self}``."""
        terms = tuple(t.shifted(1) for t in self.terms)
        flips = {n + 1 for n in self.flips} | {1}
        return self._with_fix(terms, flips, lambda n: n >= 2 and (n - 1) in self)

    def shift_down(self) -> NatSet:
        """``{n : n + 1 in self}``."""
        terms = tuple(t.shifted(-1) for t in self.terms)
        flips = {n - 1 for n in self.flips if n >= 2}
        return self._with_fix(terms, flips, lambda n: (n + 1) in self)

    def union(self, other: NatSet) -> NatSet:
        terms = self.terms + other.terms
        flips = set(self.flips) | set(other.flips)
        return self._with_fix(terms, flips, lambda n: n in self or n in other)

    def minus_initial(self, upto: int) -> NatSet:
        """``self \\ [1, upto]``."""
        terms = self.terms
        flips = set(self.flips) | set(range(1, upto + 1))
        return self._with_fix(terms, flips, lambda n: n > upto and n in self)

    def __or__(self, other: NatSet) -> NatSet:
        return self.union(other)
