"""The pseudo-metric ``rho(r, s) = phi(j(r ⊖ s)) + |r - s|`` and what hangs off it.

Jump sets of rationals are finite or eventually periodic masks, so for
``phi_x`` the submeasure part is always decided: finite sets have an exact
mass, periodic masks lying eventually inside ``A_x`` (only possible when
``x`` is cofinite) have an exact geometric-series mass, and every other
periodic mask has infinite mass with an interval certificate.  A lower
bound from the depth-``N`` prefix is reported only when the jump set could
not be classified or the submeasure is not a ``phi_x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .base_seq import BaseSeq
from .mixed_radix import MRReal, SignedMRReal, jump_of
from .natset import NatSet
from .submeasure import (
    PhiX,
    Submeasure,
    Verdict,
    exh_membership,
    phi_eval,
    shift_modulus,
    union_modulus,
)

DEFAULT_DEPTH = 128


class PreconditionError(ValueError):
    """An operation was called outside its contract (CLI exit code 2)."""


class UndecidedError(ValueError):
    """A decision was required but the verdict is Unknown (CLI exit code 3)."""


@dataclass(frozen=True)
class RhoValue:
    """``rho`` split into its exact distance part and its submeasure part.

    ``kind`` is ``"exact"``, ``"lower_bound"`` or ``"infinite"``; ``value``
    is ``None`` only for ``"infinite"``.
    """

    distance: Fraction
    kind: str
    value: Fraction | None
    depth: int

    @property
    def total(self) -> Fraction | None:
        """``distance + value`` (a lower bound when ``kind == "lower_bound"``)."""
        if self.value is None:
            return None
        return self.distance + self.value

    def less_than(self, eps) -> bool | None:
        """Whether ``rho < eps``; ``None`` when a lower bound cannot decide it."""
        eps = Fraction(eps)
        if self.kind == "infinite":
            return False
        if self.kind == "exact":
            return self.total < eps
        return False if self.total >= eps else None

    def to_json(self) -> dict:
        phi = {"kind": self.kind}
        if self.value is not None:
            phi["value"] = str(self.value)
        return {"distance": str(self.distance), "phi": phi, "depth": self.depth}


def _value(r) -> Fraction:
    if isinstance(r, (SignedMRReal, MRReal)):
        return r.value
    return Fraction(r)


def _check_bases(r, s) -> BaseSeq:
    if r.base != s.base:
        raise ValueError("base mismatch")
    return r.base


def exact_mass(phi: Submeasure, a: NatSet) -> Fraction | None:
    """Exact ``phi(a)`` when it is a finite rational we can sum in closed form."""
    if a.is_finite():
        return phi_eval(phi, a)
    if not isinstance(phi, PhiX) or not phi.x.is_cofinite():
        return None
    infinite = [t for t in a.terms if not t.is_finite()]
    if any(t.kind != "mask" for t in infinite):
        return None
    stable = max(a.structure_bound(), 1 << phi.x.last_nonmember())
    width = math.lcm(*(len(t.index.period) for t in infinite))
    head = phi_eval(phi, a.iter_between(1, stable))
    top = stable + width
    cycle = Fraction(sum(1 << (top - n) for n in range(stable + 1, top + 1) if n in a), 1 << top)
    return head + cycle * Fraction(1 << width, (1 << width) - 1)


def phi_of_jumps(phi: Submeasure, r, depth: int = DEFAULT_DEPTH) -> tuple[str, Fraction | None]:
    """``phi(j(|r|))`` as ``(kind, value)``."""
    info = jump_of(r, depth)
    if info.natset is None:
        return "lower_bound", phi_eval(phi, info.prefix)
    exact = exact_mass(phi, info.natset)
    if exact is not None:
        return "exact", exact
    if isinstance(phi, PhiX) and exh_membership(phi, info.natset).is_out:
        return "infinite", None
    return "lower_bound", phi_eval(phi, info.prefix)


def rho(phi: Submeasure, r, s, depth: int = DEFAULT_DEPTH) -> RhoValue:
    """``rho(r, s) = phi(j(r ⊖ s)) + |r - s|``."""
    base = _check_bases(r, s)
    diff = MRReal(abs(_value(r) - _value(s)), base)
    kind, value = phi_of_jumps(phi, diff, depth)
    return RhoValue(diff.value, kind, value, depth)


def h_membership(phi: Submeasure, r, depth: int = DEFAULT_DEPTH) -> Verdict:
    """Whether ``j(|r|)`` lies in ``Exh(phi)``; the sign of ``r`` is irrelevant."""
    info = jump_of(r, depth)
    if info.natset is None:
        return Verdict("unknown", depth=depth)
    return exh_membership(phi, info.natset, depth)


# -- weak triangle ----------------------------------------------------------


@dataclass(frozen=True)
class TriangleModulus:
    """``delta = min(gamma, shift part, union part, eps)`` with its ingredients.

    With ``rho(r,s), rho(s,t) < delta`` the jump set of ``r ⊖ t`` avoids
    ``[1, N]`` (both differences are below ``gamma = 1/(a_1...a_{N+2})``) and
    lies in ``X ∪ (X - 1) ∪ J ∪ (J - 1)`` where ``X = j(r ⊖ s) ∪ j(s ⊖ t)``
    and ``J`` is the jump set of the base.  The four pieces contribute less
    than ``eps/8``, ``eps/4``, ``eps/4`` and ``eps/8`` (distance).
    """

    delta: Fraction
    gamma: Fraction
    shift: Fraction
    union: Fraction
    cutoff: int

    def to_json(self) -> dict:
        return {
            "delta": str(self.delta),
            "gamma": str(self.gamma),
            "shift": str(self.shift),
            "union": str(self.union),
            "N": self.cutoff,
        }


def base_tail_cutoff(phi: Submeasure, b: BaseSeq, eps) -> int:
    """``N`` with ``phi((J ∪ (J - 1)) \\ [1, N]) < eps``, ``J`` the base jump set."""
    jumps = b.jump_set()
    spread = jumps.union(jumps.shift_down())
    if spread.is_finite() and not spread.restrict(spread.max_member()):
        return 0
    verdict = exh_membership(phi, spread)
    if not verdict.is_in:
        raise PreconditionError("base sequence is not adapted to Exh(phi)")
    return verdict.certificate.threshold(eps)


def triangle_modulus(phi: Submeasure, b: BaseSeq, eps) -> TriangleModulus:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not isinstance(phi, PhiX):
        raise PreconditionError("the weak triangle modulus is only certified for phi_x")
    cutoff = base_tail_cutoff(phi, b, eps / 4)
    gamma = b.unit(cutoff + 2)
    shift = union_modulus(phi, shift_modulus(phi, eps / 4))
    union = union_modulus(phi, eps / 8)
    return TriangleModulus(min(gamma, shift, union, eps), gamma, shift, union, cutoff)


def rho_triangle_modulus(phi: Submeasure, b: BaseSeq, eps) -> Fraction:
    """``delta`` with ``rho(r,s), rho(s,t) < delta  =>  rho(r,t) < eps``."""
    return triangle_modulus(phi, b, eps).delta


# -- density of finite-digit numbers ------------------------------------------


@dataclass(frozen=True)
class TruncationResult:
    """Truncation indices ``n`` with exact ``rho(r, [r]_n) < eps``.

    ``kind == "index"``: every ``n >= n0`` works; ``rhos`` lists the exact
    values on ``[n0, certified]`` and ``tail_bound`` bounds every ``n >=
    certified``.  ``kind == "subsequence"``: ``indices`` lie in ``j(r)``.
    """

    kind: str
    eps: Fraction
    indices: tuple[int, ...]
    rhos: tuple[Fraction, ...]
    certified: int
    tail_bound: Fraction

    @property
    def n0(self) -> int:
        return self.indices[0]

    def to_json(self) -> dict:
        out = {"kind": self.kind, "eps": str(self.eps)}
        if self.kind == "index":
            out["n0"] = self.n0
        out["indices"] = list(self.indices)
        out["rho"] = [str(v) for v in self.rhos]
        out["certified_from"] = self.certified
        out["tail_bound"] = str(self.tail_bound)
        return out


def truncation(r, n: int) -> Fraction:
    """Signed truncation ``sign(r) * [|r|]_n``."""
    v = _value(r)
    mag = MRReal(abs(v), r.base).truncate(n)
    return -mag if v < 0 else mag


def truncation_rho(phi: Submeasure, r, n: int) -> Fraction:
    """Exact ``rho(r, [r]_n)``; raises when the value is not an exact rational."""
    approx = SignedMRReal(truncation(r, n), r.base)
    value = rho(phi, r, approx)
    if value.kind != "exact":
        raise UndecidedError(f"rho(r, [r]_{n}) is {value.kind}")
    return value.total


def _safe_index(phi: PhiX, cert, eps: Fraction) -> tuple[int, Fraction]:
    """``N`` with ``1/n + bound(n) + 2**-n < eps`` for every ``n >= N``."""

    def slack(n: int) -> Fraction:
        return Fraction(1, n) + cert.bound(n) + Fraction(1, 1 << n)

    hi = 1
    while slack(hi) >= eps:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if slack(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi, slack(hi)


def truncation_convergence(phi: Submeasure, r, eps, count: int = 8) -> TruncationResult:
    """Truncations of ``r`` that are ``rho``-close to ``r``.

    ``rho(r, [r]_n) <= weight(n) + phi(j(r) \\ [1, n]) + 1/(a_1...a_n)``
    because ``r - [r]_n`` has zero digits up to ``n`` and ``r``'s digits
    after it.  The bound is nonincreasing in ``n``; it certifies every index
    past some ``N`` and exact values are scanned below ``N``.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    verdict = h_membership(phi, r)
    if verdict.is_unknown:
        raise UndecidedError("membership of j(r) is unknown")
    if not verdict.is_in:
        raise PreconditionError("j(r) is not in Exh(phi)")
    mag = MRReal(abs(_value(r)), r.base)
    if mag.has_finite_digits():
        n0 = mag.last_nonzero_position()
        return TruncationResult("index", eps, (n0,), (Fraction(0),), n0, Fraction(0))
    if not isinstance(phi, PhiX):
        raise PreconditionError("truncation certificates need phi_x")
    cert = verdict.certificate
    safe, bound = _safe_index(phi, cert, eps)
    jumps = jump_of(mag).natset
    if jumps.is_finite():
        rhos = [truncation_rho(phi, r, safe)]
        n = safe - 1
        while n >= 1:
            value = truncation_rho(phi, r, n)
            if value >= eps:
                break
            rhos.append(value)
            n -= 1
        n0 = n + 1
        rhos.reverse()
        indices = tuple(range(n0, safe + 1))
        return TruncationResult("index", eps, indices, tuple(rhos), safe, bound)
    # Infinite jump set: report members of j(r) past the certified index.
    picked, rhos = [], []
    for n in jumps.iter_between(safe, safe + 64 * count * max(1, len(jumps.terms))):
        picked.append(n)
        rhos.append(truncation_rho(phi, r, n))
        if len(picked) == count:
            break
    return TruncationResult("subsequence", eps, tuple(picked), tuple(rhos), safe, bound)
