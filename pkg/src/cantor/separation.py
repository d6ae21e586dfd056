"""Witnesses that ``c * I_x`` is not contained in ``I_y``.

For every block ``k`` in ``x \\ y`` we build a small finite-digit ``w`` whose
jump set is confined to (or concentrated on) ``P_k`` while ``c * w`` jumps on
all of ``P_k``.  Then ``phi_x(j(w))`` is tiny because ``P_k ⊆ A_x``, and
``phi_y(j(c w)) >= phi_y(P_k) = sum_{n in P_k} 1/n >= 1/2``.

Two constructions are available:

``direct``
    ``z`` has alternating digits on ``P_k`` and a last digit chosen so that
    ``w = z / c`` has finitely many digits; then ``c w = z`` exactly.

``spike``
    the general scheme: a spike ``y ~ z`` approximated from above inside
    ``c * F``, then flattened by zeroing a middle band of digits.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .base_seq import BaseSeq, in_subring
from .metric import PreconditionError, h_membership, phi_of_jumps
from .mixed_radix import DigitSpec, MRReal, SignedMRReal, to_digit_spec
from .natset import IndexSet
from .submeasure import PhiX, Submeasure, ideal_inclusion, is_adapted

D = Fraction(1, 2)


def _check_scalar(c, b: BaseSeq) -> Fraction:
    c = Fraction(c)
    if c < 1:
        raise PreconditionError("scalar must satisfy c >= 1")
    if not in_subring(c, b.prime_set()):
        raise PreconditionError(f"scalar {c} is not in Q_a for pr(a) = {sorted(b.prime_set())}")
    return c


def alternating_positions(k: int) -> list[int]:
    """``2**(k-1) + 1, 2**(k-1) + 3, ..., 2**k - 1``."""
    return list(range((1 << (k - 1)) + 1, 1 << k, 2))


def spike_spec(k: int, extra: int | None = None) -> DigitSpec:
    """Ones on the alternating positions of ``P_k`` plus one at ``extra``."""
    digits = {p: 1 for p in alternating_positions(k)}
    if extra is not None:
        digits[extra] = 1
    return DigitSpec.of(digits)


def spike_witness(b: BaseSeq, k: int, c=1, extra: int | None = None) -> SignedMRReal:
    """A number ``y`` in ``c * F`` with ``j(y) ⊇ P_k`` and a nonzero digit at ``extra``.

    ``extra`` defaults to ``2**k + 2``.  ``y`` is ``z`` itself when ``z / c``
    has finitely many digits, and otherwise ``c * ([z/c]_N + 1/(a_1...a_N))``
    with ``a_1...a_N >= c * a_1...a_extra``, so ``0 < y - z < 1/(a_1...a_extra)``
    and the digits of ``z`` up to ``extra`` survive.
    """
    if k < 2:
        raise PreconditionError("spike blocks need k >= 2")
    c = _check_scalar(c, b)
    extra = (1 << k) + 2 if extra is None else extra
    if extra <= (1 << k) - 1:
        raise PreconditionError("the extra digit must sit past the block")
    z = spike_spec(k, extra).value(b)
    scaled = MRReal(z / c, b)
    if scaled.has_finite_digits():
        return SignedMRReal(z, b)
    target = c * b.prefix_product(extra)
    n = extra
    while b.prefix_product(n) < target:
        n += 1
    return SignedMRReal(c * (scaled.truncate(n) + b.unit(n)), b)


def scale_bits(c) -> int:
    """Least ``k0`` with ``2**k0 > c``."""
    return Fraction(c).__floor__().bit_length()


def flatten(v, k: int, c, eps, phi: Submeasure, cut: int | None = None) -> SignedMRReal:
    """Zero the digits of ``v`` strictly between ``m + k0 + 2`` and ``N + 1``.

    ``m = 2**k - 1`` and ``k0`` is least with ``2**k0 > c``.  ``N`` (or the
    explicit ``cut``) is taken past ``m + k0 + 2`` with the part of ``j(v)``
    beyond ``N`` of mass below ``eps / 3``.  The result satisfies
    ``0 <= v - w < 1/(a_1...a_{m+2} * 2**k0)`` and is checked to have
    ``phi(j(w)) < eps``.
    """
    eps = Fraction(eps)
    c = Fraction(c)
    if c < 1:
        raise PreconditionError("scalar must satisfy c >= 1")
    b = v.base
    value = v.value
    if not 0 <= value < b.unit(1 << (k - 1)):
        raise PreconditionError("v must lie in [0, 1/(a_1...a_{2^(k-1)}))")
    verdict = h_membership(phi, v)
    if not verdict.is_in:
        raise PreconditionError(f"j(v) is not certified in Exh(phi) ({verdict.status})")
    m = (1 << k) - 1
    keep = m + scale_bits(c) + 2
    if cut is None:
        cut = max(keep + 1, verdict.certificate.threshold(eps / 3))
    elif cut <= keep:
        raise PreconditionError(f"cut must exceed {keep}")
    mag = MRReal(value, b)
    w = mag.truncate(keep) + (value - mag.truncate(cut))
    kind, mass = phi_of_jumps(phi, MRReal(w, b))
    if kind != "exact" or mass >= eps:
        raise PreconditionError(f"no cut makes phi(j(w)) < {eps} at block {k}")
    return SignedMRReal(w, b)


# -- certificates ------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    k: int
    digits: DigitSpec
    w: Fraction
    eps: Fraction
    phi_x: Fraction
    phi_y: Fraction
    route: str

    @property
    def rho_x(self) -> Fraction:
        """``rho_{phi_x}(w, 0)``."""
        return self.phi_x + self.w

    def rho_y(self, c: Fraction) -> Fraction:
        """``rho_{phi_y}(c w, 0)``."""
        return self.phi_y + c * self.w

    def to_json(self, c: Fraction) -> dict:
        return {
            "k": self.k,
            "route": self.route,
            "w": str(self.w),
            "digits": self.digits.to_json(),
            "eps": str(self.eps),
            "phi_x_jw": str(self.phi_x),
            "phi_y_jcw": str(self.phi_y),
            "rho_x_w_0": str(self.rho_x),
            "rho_y_cw_0": str(self.rho_y(c)),
        }


@dataclass(frozen=True)
class SeparationCertificate:
    x: IndexSet
    y: IndexSet
    c: Fraction
    base: BaseSeq
    d: Fraction
    witnesses: tuple[Witness, ...]

    def check(self) -> list[str]:
        """Recompute every stated value from the digit specs; return violations."""
        problems = []
        px, py = PhiX(self.x), PhiX(self.y)
        previous = None
        for wit in self.witnesses:
            w = wit.digits.value(self.base)
            fx = _exact_jump_mass(px, w, self.base)
            fy = _exact_jump_mass(py, self.c * w, self.base)
            if (w, fx, fy) != (wit.w, wit.phi_x, wit.phi_y):
                problems.append(f"k={wit.k}: stated values do not recompute")
            if not 0 <= w < wit.eps:
                problems.append(f"k={wit.k}: (a) fails")
            if not fx < wit.eps:
                problems.append(f"k={wit.k}: (b) fails")
            if not fy >= self.d:
                problems.append(f"k={wit.k}: (c) fails")
            if previous is not None and not (fx < previous.phi_x and wit.eps < previous.eps):
                problems.append(f"k={wit.k}: not strictly decreasing")
            previous = wit
        return problems

    def to_json(self) -> dict:
        return {
            "x": self.x.to_json(),
            "y": self.y.to_json(),
            "c": str(self.c),
            "base": self.base.to_json(),
            "d": str(self.d),
            "witnesses": [wit.to_json(self.c) for wit in self.witnesses],
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["k", "w", "phi_x", "phi_y"])
        for wit in self.witnesses:
            writer.writerow([wit.k, str(wit.w), str(wit.phi_x), str(wit.phi_y)])
        return out.getvalue()


def _exact_jump_mass(phi: Submeasure, value: Fraction, b: BaseSeq) -> Fraction:
    kind, mass = phi_of_jumps(phi, MRReal(value, b))
    if kind != "exact":
        raise PreconditionError(f"jump mass is {kind}")
    return mass


def _direct_witness(b: BaseSeq, k: int, c: Fraction) -> Fraction | None:
    """``w = z / c`` for an alternating ``z`` on ``P_k`` whose last digit keeps ``w`` inside ``[1, m]``.

    With ``z = M / (a_1...a_m)`` and ``c = p / q`` the quotient has no digits
    past ``m`` exactly when ``p | M``, which fixes the last digit modulo ``p``.
    """
    m = (1 << k) - 1
    scale = b.prefix_product(m)
    ones = set(alternating_positions(k)[:-1])
    head = 0
    for pos in range(1, m + 1):
        head = head * b.value_at(pos) + (pos in ones)
    last = -head % c.numerator or c.numerator
    if last >= b.value_at(m):
        return None
    return Fraction((head + last) * c.denominator, c.numerator * scale)


def _spike_witness(b: BaseSeq, k: int, c: Fraction, phi: PhiX, eps: Fraction) -> Fraction:
    y = spike_witness(b, k, c, extra=(1 << k) + 1)
    v = SignedMRReal(y.value / c, b)
    return flatten(v, k, c, eps, phi).value


def block_epsilon(k: int, c: Fraction, route: str) -> Fraction:
    """Per-block tolerance: ``2**(1 - 2**(k-1))`` plus room for the flattened band."""
    eps = Fraction(2, 1 << (1 << (k - 1)))
    if route == "spike":
        eps += Fraction(scale_bits(c) + 3, 1 << k)
    return eps


def separation_certificate(
    x: IndexSet,
    y: IndexSet,
    c,
    count: int,
    b: BaseSeq,
    min_block: int = 5,
    route: str = "auto",
) -> SeparationCertificate:
    """``count`` witnesses on the smallest blocks ``k >= min_block`` of ``x \\ y``."""
    if count < 1:
        raise PreconditionError("count must be positive")
    if route not in ("auto", "direct", "spike"):
        raise ValueError(f"unknown route {route!r}")
    c = _check_scalar(c, b)
    inclusion = ideal_inclusion(x, y)
    if inclusion.included:
        raise PreconditionError("Included: x \\ y is finite, so I_x ⊆ I_y")
    px, py = PhiX(x), PhiX(y)
    for name, phi in (("I_x", px), ("I_y", py)):
        verdict = is_adapted(b, phi)
        if not verdict.is_in:
            raise PreconditionError(f"base is not adapted to {name} ({verdict.status})")
    blocks = []
    for k in inclusion.witnesses.iter_members(max(min_block, 3)):
        blocks.append(k)
        if len(blocks) == count:
            break
    values = None
    if route in ("auto", "direct"):
        values = [_direct_witness(b, k, c) for k in blocks]
        if any(w is None for w in values):
            if route == "direct":
                raise PreconditionError("no direct witness on some block")
            values = None
    chosen = "direct"
    if values is None:
        # One route for the whole list keeps the tolerances comparable.
        chosen = "spike"
        values = [_spike_witness(b, k, c, px, block_epsilon(k, c, chosen)) for k in blocks]
    witnesses = [
        Witness(
            k=k,
            digits=to_digit_spec(MRReal(w, b)),
            w=w,
            eps=block_epsilon(k, c, chosen),
            phi_x=_exact_jump_mass(px, w, b),
            phi_y=_exact_jump_mass(py, c * w, b),
            route=chosen,
        )
        for k, w in zip(blocks, values)
    ]
    cert = SeparationCertificate(x, y, c, b, D, tuple(witnesses))
    problems = cert.check()
    if problems:
        raise PreconditionError("; ".join(problems))
    return cert
