"""Exact mixed-radix expansions of nonnegative rationals.

For a base sequence ``a`` every ``r >= 0`` is written uniquely as::

    r = [r] + sum_{n >= 1} r_n / (a_1 ... a_n),   0 <= r_n < a_n,

with the digit sequence not ending in ``a_n - 1`` forever.  For a rational
``r`` the greedy rule (multiply the remainder by ``a_n`` and take the floor)
produces exactly this expansion, since an all-maximal tail would force the
remainder to equal 1.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from gmpy2 import mpz, remove
from sympy.ntheory import n_order

from .base_seq import BaseSeq
from .natset import IndexSet, NatSet

# Longest jump-set period the classifier will materialize.
MAX_JUMP_PERIOD = 1 << 16
_LEAF = 48


def _valuation(n: int, p: int) -> int:
    return int(remove(n, p)[1])


def _first_reaching(base: BaseSeq, p: int, need: int) -> int | None:
    """Least ``K`` with ``v_p(a_1 ... a_K) >= need``."""
    if need <= 0:
        return 0
    start, width = base.regular_from()
    total = 0
    for n in range(1, start + 1):
        total += _valuation(base.value_at(n), p)
        if total >= need:
            return n
    per = [_valuation(base.value_at(start + i), p) for i in range(1, width + 1)]
    if not sum(per):
        return None
    periods = max(0, (need - total) // sum(per) - 1)
    total += periods * sum(per)
    n = start + periods * width
    while total < need:
        n += 1
        total += per[(n - start - 1) % width]
    return n


def _terminating_length(base: BaseSeq, den: int) -> int | None:
    """Least ``K`` with ``den | a_1 ... a_K``, or None when there is none."""
    rest, length = mpz(den), 0
    for p in sorted(base.all_primes()):
        rest, need = remove(rest, p)
        reach = _first_reaching(base, p, int(need))
        if reach is None:
            return None
        length = max(length, reach)
    return length if rest == 1 else None


def _segment_product(base: BaseSeq, lo: int, hi: int) -> int:
    """``a_{lo+1} * ... * a_hi``."""
    if base.kind == "constant":
        return base.value ** (hi - lo)
    return base.prefix_product(hi) // base.prefix_product(lo)


def _mixed_digits(base: BaseSeq, value: int, lo: int, hi: int) -> list[int]:
    """Digits at positions ``lo+1 .. hi`` of ``value / (a_{lo+1} ... a_hi)``."""
    if hi - lo <= _LEAF:
        out = []
        for n in range(hi, lo, -1):
            value, d = divmod(value, base.value_at(n))
            out.append(d)
        out.reverse()
        return out
    mid = (lo + hi) // 2
    high, low = divmod(value, _segment_product(base, mid, hi))
    return _mixed_digits(base, high, lo, mid) + _mixed_digits(base, low, mid, hi)


class MRReal:
    """A nonnegative rational together with its lazily extracted digits.

    The digit cache only ever grows; extension happens under a lock, so
    concurrent readers always see a consistent prefix.
    """

    def __init__(self, value, base: BaseSeq):
        value = Fraction(value)
        if value < 0:
            raise ValueError("MRReal holds nonnegative values; use SignedMRReal")
        self.value = value
        self.base = base
        self.integer_part = value.numerator // value.denominator
        self._num = value.numerator - self.integer_part * value.denominator
        self._den = value.denominator
        self._digits: list[int] = []
        self._rem = self._num
        self._lock = threading.Lock()
        self.terminates_at = _terminating_length(base, self._den)
        if self.terminates_at is not None and self.terminates_at > _LEAF:
            k = self.terminates_at
            scaled = self._num * (base.prefix_product(k) // self._den)
            self._digits = _mixed_digits(base, scaled, 0, k)
            self._rem = 0

    def __repr__(self):
        return f"MRReal({self.value}, {self.base.to_json()})"

    def __eq__(self, other):
        return isinstance(other, MRReal) and self.value == other.value and self.base == other.base

    def __hash__(self):
        return hash((self.value, self.base))

    def _extend(self, n: int) -> None:
        if len(self._digits) >= n:
            return
        with self._lock:
            digits, rem, den = self._digits, self._rem, self._den
            value_at = self.base.value_at
            for pos in range(len(digits) + 1, n + 1):
                if rem == 0:
                    digits.extend([0] * (n - len(digits)))
                    break
                d, rem = divmod(rem * value_at(pos), den)
                digits.append(d)
            self._rem = rem

    def digits(self, n: int) -> list[int]:
        """First ``n`` canonical digits ``r_1 .. r_n``."""
        self._extend(n)
        return self._digits[:n]

    def digit(self, n: int) -> int:
        self._extend(n)
        return self._digits[n - 1]

    def remainder(self, n: int) -> Fraction:
        """Remainder after ``n`` digits, a rational in ``[0, 1)``."""
        return Fraction((self._num * self.base.prefix_product(n)) % self._den, self._den)

    def truncate(self, n: int) -> Fraction:
        """``[r]_n``: integer part plus the first ``n`` digits."""
        scale = self.base.prefix_product(n)
        return Fraction(self.value.numerator * scale // self.value.denominator, scale)

    def has_finite_digits(self) -> bool:
        return self.terminates_at is not None

    def last_nonzero_position(self) -> int:
        if self.terminates_at is None:
            raise ValueError(f"{self.value} has infinitely many nonzero digits")
        digits = self.digits(self.terminates_at)
        for i in range(len(digits), 0, -1):
            if digits[i - 1]:
                return i
        return 0

    def jumps(self, n: int) -> list[int]:
        """``j(r) ∩ [1, n]``."""
        d = self.digits(n + 1)
        return [i for i in range(1, n + 1) if d[i - 1] != d[i]]

    def jump_info(self, depth: int = 128) -> JumpInfo:
        return jump_of(self, depth)


@dataclass(frozen=True)
class SignedMRReal:
    """An element of the signed carrier: a rational with a sign."""

    value: Fraction
    base: BaseSeq

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    @property
    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    @cached_property
    def magnitude(self) -> MRReal:
        return MRReal(abs(self.value), self.base)

    def _check(self, other: SignedMRReal) -> None:
        if other.base != self.base:
            raise ValueError("base mismatch")

    def __add__(self, other: SignedMRReal) -> SignedMRReal:
        self._check(other)
        return SignedMRReal(self.value + other.value, self.base)

    def __sub__(self, other: SignedMRReal) -> SignedMRReal:
        self._check(other)
        return SignedMRReal(self.value - other.value, self.base)

    def __neg__(self) -> SignedMRReal:
        return SignedMRReal(-self.value, self.base)

    def scale(self, c) -> SignedMRReal:
        return SignedMRReal(self.value * Fraction(c), self.base)


def signed(value, base: BaseSeq) -> SignedMRReal:
    return SignedMRReal(Fraction(value), base)


def _magnitude(r) -> MRReal:
    return r.magnitude if isinstance(r, SignedMRReal) else r


def absdiff(r, s) -> MRReal:
    """``r ⊖ s = |r - s|``."""
    if r.base != s.base:
        raise ValueError("base mismatch")
    rv = r.value if isinstance(r, (SignedMRReal, MRReal)) else Fraction(r)
    sv = s.value if isinstance(s, (SignedMRReal, MRReal)) else Fraction(s)
    return MRReal(abs(rv - sv), r.base)


def digits(r: MRReal, n: int) -> list[int]:
    return r.digits(n)


def truncate(r: MRReal, n: int) -> Fraction:
    return r.truncate(n)


@dataclass(frozen=True)
class DigitSpec:
    """Finitely many nonzero digits plus an integer part."""

    entries: tuple[tuple[int, int], ...] = ()
    integer: int = 0

    @classmethod
    def of(cls, mapping: Mapping[int, int], integer: int = 0) -> DigitSpec:
        items = tuple(sorted((int(k), int(v)) for k, v in mapping.items() if int(v) != 0))
        return cls(items, int(integer))

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def max_position(self) -> int:
        return max((p for p, _ in self.entries), default=0)

    def validate(self, base: BaseSeq) -> None:
        if self.integer < 0:
            raise ValueError("integer part must be nonnegative")
        for pos, d in self.entries:
            if pos < 1:
                raise ValueError(f"digit position {pos} must be >= 1")
            if not 0 <= d < base.value_at(pos):
                raise ValueError(f"digit {d} at position {pos} out of range [0, {base.value_at(pos)})")

    def value(self, base: BaseSeq) -> Fraction:
        self.validate(base)
        top = self.max_position()
        digits = self.as_dict()
        total = 0
        for pos in range(1, top + 1):
            total = total * base.value_at(pos) + digits.get(pos, 0)
        return self.integer + Fraction(total, base.prefix_product(top))

    def to_json(self) -> dict:
        return {"digits": {str(p): d for p, d in self.entries}, "int": self.integer}


def from_digit_spec(spec: DigitSpec | Mapping[int, int], base: BaseSeq) -> MRReal:
    if not isinstance(spec, DigitSpec):
        spec = DigitSpec.of(spec)
    return MRReal(spec.value(base), base)


def parse_number(obj, base: BaseSeq) -> Fraction:
    """Parse ``{"rational": "p/q"}`` or ``{"digits": {...}, "int": k}``."""
    if isinstance(obj, (int, Fraction)):
        return Fraction(obj)
    if isinstance(obj, str):
        return Fraction(obj)
    if "rational" in obj:
        return Fraction(str(obj["rational"]))
    if "digits" in obj:
        return DigitSpec.of({int(k): v for k, v in obj["digits"].items()}, obj.get("int", 0)).value(base)
    raise ValueError(f"cannot parse number literal {obj!r}")


# -- jump sets ----------------------------------------------------------------


@dataclass(frozen=True)
class JumpInfo:
    """``j(r)`` seen through a finite window plus a classified tail.

    ``tail`` is ``"empty"`` (finitely many jumps), ``"periodic"`` (an
    infinite eventually periodic jump set) or ``"unknown"``.  When the tail
    is classified, ``natset`` is the exact jump set.
    """

    prefix: frozenset[int]
    tail: str
    depth: int
    natset: NatSet | None = None

    @property
    def classified(self) -> bool:
        return self.natset is not None


def _periodic_start(r: MRReal) -> tuple[int, int] | None:
    """``(P, W)`` with ``r_{n+W} = r_n`` for all ``n >= P``, for non-terminating ``r``."""
    base = r.base
    start, width = base.regular_from()
    q = r._den
    cycle = _segment_product(base, start, start + width)
    q2 = q
    g = math.gcd(q2, cycle)
    while g > 1:
        while q2 % g == 0:
            q2 //= g
        g = math.gcd(q2, cycle)
    order = 1 if q2 == 1 else int(n_order(cycle % q2, q2))
    if order * width > MAX_JUMP_PERIOD:
        return None
    jump = pow(cycle, order, q)
    state = (r._num * base.prefix_product(start)) % q
    j = 0
    while (state * jump) % q != state:
        state = (state * cycle) % q
        j += 1
    return start + j * width + 1, order * width


def jump_of(r, depth: int = 128) -> JumpInfo:
    """Jump set ``j(r) = {n : r_n != r_{n+1}}`` of ``|r|``."""
    r = _magnitude(r)
    prefix = frozenset(r.jumps(depth))
    if r.terminates_at is not None:
        last = r.last_nonzero_position()
        full = r.jumps(last) if last else []
        return JumpInfo(prefix, "empty", depth, NatSet.finite(full))
    located = _periodic_start(r)
    if located is None:
        return JumpInfo(prefix, "unknown", depth)
    start, width = located
    d = r.digits(start + width)
    head = tuple(d[n - 1] != d[n] for n in range(1, start))
    cycle = tuple(d[n - 1] != d[n] for n in range(start, start + width))
    index = IndexSet(head, cycle)
    if not any(cycle):
        return JumpInfo(prefix, "empty", depth, NatSet.finite(index.members(len(head))))
    return JumpInfo(prefix, "periodic", depth, NatSet.mask(index))


def jump_algebra_bound(r, s, n: int) -> frozenset[int]:
    """Restriction to ``[1, n]`` of the superset of ``j(r + s)`` and ``j(r ⊖ s)``."""
    r, s = _magnitude(r), _magnitude(s)
    if r.base != s.base:
        raise ValueError("base mismatch")
    base = r.base
    both = set(r.jumps(n + 1)) | set(s.jumps(n + 1))
    out = {m for m in range(1, n + 1) if m in both or (m + 1) in both}
    out |= {m for m in range(1, n + 1) if base.value_at(m) != base.value_at(m + 1)}
    out |= {m for m in range(1, n + 1) if base.value_at(m + 1) != base.value_at(m + 2)}
    return frozenset(out)


def div_by_prime_digits(r, p: int, n: int) -> list[int]:
    """First ``n`` digits of ``r / p`` by digit transport from the digits of ``r``.

    For positions ``m`` past the threshold ``N0`` (``p | a_m`` for ``m >= N0``)
    the digit is ``r_m // p + (a_m // p) * (r_{m-1} mod p)``.  Positions up to
    ``N0`` come from the exact expansion of ``[r]_{N0+1} / p``.
    """
    r = _magnitude(r)
    base = r.base
    threshold = base.divisibility_threshold(p)
    head = MRReal(r.truncate(threshold + 1) / p, base).digits(threshold)
    src = r.digits(max(n, threshold + 1))
    out = head[:n]
    for m in range(threshold + 1, n + 1):
        out.append(src[m - 1] // p + (base.value_at(m) // p) * (src[m - 2] % p))
    return out


def to_digit_spec(r) -> DigitSpec:
    """Digit spec of a number with finitely many nonzero digits."""
    r = _magnitude(r)
    last = r.last_nonzero_position()
    return DigitSpec.of(dict(enumerate(r.digits(last), start=1)), r.integer_part)
