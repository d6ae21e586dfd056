"""Base sequences ``a = (a_n)`` with ``a_n >= 2``, their prime sets and jump sets.

Three finitely described kinds are supported:

* ``constant``         -- ``a_n = value``;
* ``periodic``         -- a finite prefix followed by a repeating period;
* ``primorial_blocks`` -- constant on each dyadic block ``(2**(k-1), 2**k]``
  (``n = 1`` belongs to the first block), equal there to the product of the
  first ``min(k, len(primes))`` listed primes.

Every kind is eventually periodic, which makes ``pr(a)``, uniformity and the
jump set ``{n : a_n != a_{n+1}}`` exactly computable.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from sympy import isprime, primefactors

from .natset import IndexSet, NatSet

KINDS = ("constant", "periodic", "primorial_blocks")


@dataclass(frozen=True)
class BaseProfile:
    primes: frozenset[int]
    uniform: bool
    jumps: NatSet


@dataclass(frozen=True)
class BaseSeq:
    kind: str
    value: int = 0
    prefix: tuple[int, ...] = ()
    period: tuple[int, ...] = ()
    primes: tuple[int, ...] = ()
    _products: list = field(default_factory=lambda: [1], init=False, repr=False, compare=False)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, init=False, repr=False, compare=False
    )
    _table: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "constant":
            if self.value < 2:
                raise ValueError(f"base values must be >= 2, got {self.value}")
        elif self.kind == "periodic":
            if not self.period:
                raise ValueError("periodic base needs a nonempty period")
            bad = [v for v in self.prefix + self.period if v < 2]
            if bad:
                raise ValueError(f"base values must be >= 2, got {bad[0]}")
        elif self.kind == "primorial_blocks":
            if not self.primes:
                raise ValueError("primorial_blocks needs a nonempty prime list")
            for p in self.primes:
                if not isprime(p):
                    raise ValueError(f"{p} is not prime")
            if any(q <= p for p, q in zip(self.primes, self.primes[1:])):
                raise ValueError("primorial_blocks primes must be strictly increasing")
        else:
            raise ValueError(f"unknown base kind {self.kind!r}")
        if self.kind == "periodic":
            object.__setattr__(self, "_table", self.prefix + self.period)
        elif self.kind == "primorial_blocks":
            products = tuple(math.prod(self.primes[:i]) for i in range(1, len(self.primes) + 1))
            object.__setattr__(self, "_table", products)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value: int) -> BaseSeq:
        return cls("constant", value=value)

    @classmethod
    def periodic(cls, prefix, period) -> BaseSeq:
        return cls("periodic", prefix=tuple(prefix), period=tuple(period))

    @classmethod
    def primorial_blocks(cls, primes) -> BaseSeq:
        return cls("primorial_blocks", primes=tuple(primes))

    @classmethod
    def first_primes(cls, m: int) -> BaseSeq:
        """Primorial blocks over the first ``m`` primes."""
        from sympy import prime

        return cls.primorial_blocks([prime(i) for i in range(1, m + 1)])

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "periodic":
            return {"kind": "periodic", "prefix": list(self.prefix), "period": list(self.period)}
        return {"kind": "primorial_blocks", "primes": list(self.primes)}

    # -- terms --------------------------------------------------------------

    def __getitem__(self, n: int) -> int:
        return self.value_at(n)

    def value_at(self, n: int) -> int:
        if self.kind == "constant" and n >= 1:
            return self.value
        if n < 1:
            raise ValueError("base sequence is indexed from 1")
        if self.kind == "periodic":
            start = len(self.prefix)
            if n <= start:
                return self._table[n - 1]
            return self._table[start + (n - start - 1) % len(self.period)]
        k = max(1, (n - 1).bit_length())
        return self._table[min(k, len(self._table)) - 1]

    def regular_from(self) -> tuple[int, int]:
        """``(S, L)`` such that ``a_n = a_{n+L}`` for every ``n > S``."""
        if self.kind == "constant":
            return 0, 1
        if self.kind == "periodic":
            return len(self.prefix), len(self.period)
        m = len(self.primes)
        return (1 << (m - 1) if m >= 2 else 0), 1

    def prefix_product(self, n: int) -> int:
        """``a_1 * ... * a_n`` (1 for ``n = 0``)."""
        products = self._products
        if n < len(products):
            return products[n]
        with self._lock:
            while len(products) <= n:
                products.append(products[-1] * self.value_at(len(products)))
        return products[n]

    def unit(self, n: int) -> Fraction:
        """``1 / (a_1 * ... * a_n)``."""
        return Fraction(1, self.prefix_product(n))

    # -- primes -------------------------------------------------------------

    def _eventual_values(self) -> tuple[int, ...]:
        start, width = self.regular_from()
        return tuple(self.value_at(start + i) for i in range(1, width + 1))

    def prime_set(self) -> frozenset[int]:
        """``pr(a)``: primes dividing ``a_n`` for all but finitely many ``n``."""
        g = reduce(math.gcd, self._eventual_values())
        return frozenset(primefactors(g))

    def all_primes(self) -> frozenset[int]:
        """Primes dividing at least one term."""
        start, width = self.regular_from()
        values = {self.value_at(n) for n in range(1, start + width + 1)}
        return frozenset(p for v in values for p in primefactors(v))

    def is_uniform(self) -> bool:
        return self.all_primes() <= self.prime_set()

    def divisibility_threshold(self, p: int) -> int:
        """Least ``N`` with ``p | a_n`` for every ``n >= N``."""
        if p not in self.prime_set():
            raise ValueError(f"{p} is not in pr(a) = {sorted(self.prime_set())}")
        start, _ = self.regular_from()
        threshold = 1
        for n in range(1, start + 1):
            if self.value_at(n) % p:
                threshold = n + 1
        return threshold

    # -- jumps --------------------------------------------------------------

    def jump_set(self) -> NatSet:
        """``{n : a_n != a_{n+1}}`` as a structured set."""
        if self.kind == "constant":
            return NatSet.empty()
        if self.kind == "primorial_blocks":
            m = len(self.primes)
            return NatSet.finite(1 << k for k in range(1, m))
        start, width = self.regular_from()
        prefix = tuple(self.value_at(n) != self.value_at(n + 1) for n in range(1, start + 1))
        period = tuple(
            self.value_at(n) != self.value_at(n + 1) for n in range(start + 1, start + width + 1)
        )
        return NatSet.mask(IndexSet(prefix, period))

    def profile(self) -> BaseProfile:
        return BaseProfile(self.prime_set(), self.is_uniform(), self.jump_set())


def build_base(spec: dict) -> BaseSeq:
    """Build a :class:`BaseSeq` from its JSON descriptor."""
    kind = spec.get("kind")
    if kind == "constant":
        return BaseSeq.constant(int(spec["value"]))
    if kind == "periodic":
        return BaseSeq.periodic([int(v) for v in spec.get("prefix", [])], [int(v) for v in spec["period"]])
    if kind == "primorial_blocks":
        if "first" in spec:
            return BaseSeq.first_primes(int(spec["first"]))
        return BaseSeq.primorial_blocks([int(p) for p in spec["primes"]])
    raise ValueError(f"unknown base kind {kind!r}")


def base_profile(b: BaseSeq) -> BaseProfile:
    return b.profile()


def in_subring(q: Fraction | int, primes) -> bool:
    """Whether ``q`` lies in ``P^{-1} Z`` for the prime set ``primes``."""
    den = Fraction(q).denominator
    for p in primes:
        while den % p == 0:
            den //= p
    return den == 1


def q_a_membership(q: Fraction | int, b: BaseSeq) -> bool:
    """Whether ``q`` lies in the subring ``Q_a = pr(a)^{-1} Z``."""
    return in_subring(q, b.prime_set())
