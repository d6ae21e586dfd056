"""Randomized and exhaustive invariant suites behind ``cantor verify``.

Every suite is deterministic for a fixed seed and reports, per lemma tag,
how many instances were checked and how many failed.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .base_seq import BaseSeq
from .metric import (
    exact_mass,
    rho,
    rho_triangle_modulus,
    truncation_convergence,
    truncation_rho,
)
from .mixed_radix import (
    MRReal,
    SignedMRReal,
    div_by_prime_digits,
    jump_algebra_bound,
    jump_of,
)
from .natset import IndexSet
from .separation import separation_certificate
from .submeasure import (
    PhiX,
    block_harmonic,
    ideal_inclusion,
    phi_eval,
    shift_modulus,
    tall_threshold,
    union_modulus,
)

SUITES = (
    "digit-rules",
    "jump-algebra",
    "moduli",
    "triangle",
    "density",
    "family",
    "separation",
    "division",
)


@dataclass
class LemmaRow:
    tag: str
    trials: int = 0
    failures: int = 0
    elapsed: float = 0.0
    examples: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def record(self, ok: bool, example=None) -> None:
        self.trials += 1
        if not ok:
            self.failures += 1
            if example is not None and len(self.examples) < 5:
                self.examples.append(example)

    def to_json(self, timing: bool = False) -> dict:
        out = {"tag": self.tag, "trials": self.trials, "failures": self.failures}
        if self.examples:
            out["failing_examples"] = [str(e) for e in self.examples]
        if self.notes:
            out["notes"] = self.notes
        if timing:
            out["elapsed_s"] = round(self.elapsed, 3)
        return out


@dataclass
class SuiteReport:
    suite: str
    seed: int
    rows: list[LemmaRow]

    @property
    def failures(self) -> int:
        return sum(r.failures for r in self.rows)

    @property
    def ok(self) -> bool:
        return self.failures == 0 and all(r.trials > 0 for r in self.rows)

    def to_json(self, timing: bool = False) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "ok": self.ok,
            "lemmas": [r.to_json(timing) for r in self.rows],
        }


def _timed(tag: str, body: Callable[[LemmaRow], None]) -> LemmaRow:
    row = LemmaRow(tag)
    start = time.perf_counter()
    body(row)
    row.elapsed = time.perf_counter() - start
    return row


# -- random inputs -------------------------------------------------------------


def random_base(rng: random.Random, kind: str) -> BaseSeq:
    if kind == "constant":
        return BaseSeq.constant(rng.randint(2, 16))
    if kind == "periodic":
        prefix = [rng.randint(2, 12) for _ in range(rng.randint(0, 3))]
        period = [rng.randint(2, 12) for _ in range(rng.randint(1, 4))]
        return BaseSeq.periodic(prefix, period)
    return BaseSeq.first_primes(rng.randint(1, 4))


def random_base_with_primes(rng: random.Random) -> BaseSeq:
    """A random base with nonempty ``pr(a)``."""
    kind = rng.choice(["constant", "periodic", "primorial_blocks"])
    if kind == "constant":
        return BaseSeq.constant(rng.choice([2, 3, 4, 6, 10, 12, 15, 30]))
    if kind == "periodic":
        g = rng.choice([2, 3, 5, 6])
        prefix = [rng.randint(2, 12) for _ in range(rng.randint(0, 3))]
        period = [g * rng.randint(1, 4) for _ in range(rng.randint(1, 3))]
        return BaseSeq.periodic(prefix, period)
    return BaseSeq.first_primes(rng.randint(1, 4))


def random_rational(rng: random.Random, base: BaseSeq, top: int = 3, den_digits: int = 8) -> Fraction:
    """Mix of plain fractions, finite digit expansions and repeating tails."""
    shape = rng.random()
    if shape < 0.4:
        q = rng.randint(1, 10**rng.randint(1, den_digits))
        return Fraction(rng.randint(0, top * q), q)
    if shape < 0.7:
        n = rng.randint(1, 40)
        v = Fraction(rng.randint(0, top))
        for pos in sorted(rng.sample(range(1, n + 1), rng.randint(1, min(n, 6)))):
            v += rng.randint(0, base.value_at(pos) - 1) * base.unit(pos)
        return v
    # A finite head plus a repeating tail.
    n = rng.randint(0, 20)
    head = Fraction(rng.randint(0, top)) + rng.randint(0, base.prefix_product(n) - 1) * base.unit(n)
    return head + base.unit(n) * Fraction(rng.randint(0, 20), rng.randint(21, 400))


# -- digit rules ----------------------------------------------------------------


def _reconstructs(r: MRReal, depth: int) -> bool:
    digits = r.digits(depth)
    acc = 0
    for n, d in enumerate(digits, start=1):
        a = r.base.value_at(n)
        if not 0 <= d < a:
            return False
        acc = acc * a + d
    rem = r.remainder(depth)
    if not 0 <= rem < 1:
        return False
    scale = r.base.prefix_product(depth)
    return r.value == r.integer_part + Fraction(acc, scale) + rem / scale


def suite_digit_rules(seed: int, trials: int = 10_000, depth: int = 128) -> list[LemmaRow]:
    rows = []
    for kind in ("constant", "periodic", "primorial_blocks"):

        def body(row, kind=kind):
            rng = random.Random(f"{seed}:real:{kind}")
            for _ in range(trials):
                b = random_base(rng, kind)
                v = random_rational(rng, b)
                row.record(_reconstructs(MRReal(v, b), depth), (b.to_json(), v))

        rows.append(_timed(f"E:real reconstruction [{kind}]", body))

    def rul_i(row):
        rng = random.Random(f"{seed}:rul-i")
        for _ in range(trials):
            b = random_base(rng, rng.choice(["constant", "periodic", "primorial_blocks"]))
            l = rng.randint(1, 40)
            v = Fraction(rng.randint(0, 10**6 - 1), 10**6) * b.unit(l)
            row.record(MRReal(v, b).digits(l) == [0] * l, (b.to_json(), v, l))

    def rul_ii(row):
        rng = random.Random(f"{seed}:rul-ii")
        skipped = 0
        while row.trials < trials:
            b = random_base(rng, rng.choice(["constant", "periodic", "primorial_blocks"]))
            l = rng.randint(1, 30)
            r = random_rational(rng, b)
            gap = Fraction(rng.randint(0, 10**6 - 1), 10**6) * b.unit(l)
            if rng.random() < 0.3:
                # Land just below a digit boundary to stress carries.
                gap = b.unit(l) - Fraction(1, rng.randint(2, 10**6)) * b.unit(l + 3)
            s = r + gap
            mr, ms = MRReal(r, b), MRReal(s, b)
            if mr.digit(l) == b.value_at(l) - 1 and ms.digit(l) == 0:
                skipped += 1
                continue
            row.record(mr.digits(l - 1) == ms.digits(l - 1), (b.to_json(), r, s, l))
        row.notes["skipped_by_hypothesis"] = skipped

    def conv_digi(row):
        b = BaseSeq.constant(10)
        for r in (Fraction(1, 3), Fraction(1, 7)):
            target = MRReal(r, b).digits(20)
            for k in range(25, 60):
                row.record(MRReal(r + Fraction(1, 10**k), b).digits(20) == target, (r, k))

    def canonical(row):
        rng = random.Random(f"{seed}:canonical")
        for _ in range(trials):
            b = random_base(rng, rng.choice(["constant", "periodic", "primorial_blocks"]))
            mr = MRReal(random_rational(rng, b), b)
            digits = mr.digits(48)
            tail_max = all(digits[n - 1] == b.value_at(n) - 1 for n in range(33, 49))
            row.record(not tail_max and 0 <= mr.remainder(48) < 1, mr.value)

    rows.append(_timed("L:rul(i)", rul_i))
    rows.append(_timed("L:rul(ii)", rul_ii))
    rows.append(_timed("L:conv digi (from above)", conv_digi))
    rows.append(_timed("canonical expansion", canonical))
    return rows


# -- jump algebra -----------------------------------------------------------------


def suite_jump_algebra(seed: int, trials: int = 10_000, depth: int = 64) -> list[LemmaRow]:
    def body(row):
        rng = random.Random(f"{seed}:jalg")
        for _ in range(trials):
            b = random_base(rng, rng.choice(["constant", "periodic", "primorial_blocks"]))
            r, s = MRReal(random_rational(rng, b), b), MRReal(random_rational(rng, b), b)
            bound = jump_algebra_bound(r, s, depth)
            plus = set(MRReal(r.value + s.value, b).jumps(depth))
            minus = set(MRReal(abs(r.value - s.value), b).jumps(depth))
            row.record(plus <= bound and minus <= bound, (b.to_json(), r.value, s.value))

    return [_timed("L:jalg", body)]


# -- division by p -------------------------------------------------------------------


def suite_division(seed: int, trials: int = 1_000, depth: int = 128) -> list[LemmaRow]:
    def body(row):
        rng = random.Random(f"{seed}:division")
        for _ in range(trials):
            b = random_base_with_primes(rng)
            p = rng.choice(sorted(b.prime_set()))
            r = MRReal(random_rational(rng, b), b)
            got = div_by_prime_digits(r, p, depth)
            row.record(got == MRReal(r.value / p, b).digits(depth), (b.to_json(), r.value, p))

    return [_timed("E:digit division by p", body)]


# -- moduli ------------------------------------------------------------------------------


def random_index_set(rng: random.Random) -> IndexSet:
    choice = rng.random()
    if choice < 0.25:
        return IndexSet.odds()
    if choice < 0.5:
        return IndexSet.evens()
    prefix = tuple(rng.random() < 0.5 for _ in range(rng.randint(0, 4)))
    period = tuple(rng.random() < 0.5 for _ in range(rng.randint(1, 4)))
    return IndexSet(prefix, period)


def random_small_set(rng: random.Random, phi: PhiX, target: Fraction) -> list[int]:
    """A finite set, biased towards block boundaries, of mass often near ``target``."""
    out = set()
    for _ in range(rng.randint(1, 12)):
        k = rng.randint(2, 12)
        lo, hi = 1 << (k - 1), (1 << k) - 1
        n = rng.choice([lo, lo + 1, hi - 1, hi, rng.randint(lo, hi)])
        out.add(n)
    # Drop points until the mass is below the target most of the time.
    ordered = sorted(out, key=lambda n: -phi.weight(n))
    while ordered and phi_eval(phi, ordered) >= target and rng.random() < 0.9:
        ordered.pop(0)
    return ordered


def suite_moduli(seed: int, trials: int = 10_000) -> list[LemmaRow]:
    union_eps, shift_eps = Fraction(1, 5), Fraction(1)

    def union_body(row):
        rng = random.Random(f"{seed}:union")
        skipped = 0
        while row.trials < trials:
            phi = PhiX(random_index_set(rng))
            delta = union_modulus(phi, union_eps)
            a, b = random_small_set(rng, phi, delta), random_small_set(rng, phi, delta)
            if phi_eval(phi, a) >= delta or phi_eval(phi, b) >= delta:
                skipped += 1
                continue
            row.record(phi_eval(phi, set(a) | set(b)) < union_eps, (phi, a, b))
        row.notes["delta"] = str(union_modulus(PhiX(IndexSet.odds()), union_eps))
        row.notes["skipped_by_hypothesis"] = skipped

    def shift_body(row):
        rng = random.Random(f"{seed}:shift")
        skipped = 0
        while row.trials < trials:
            phi = PhiX(random_index_set(rng))
            delta = shift_modulus(phi, shift_eps)
            a = random_small_set(rng, phi, delta)
            if phi_eval(phi, a) >= delta:
                skipped += 1
                continue
            up = [n + 1 for n in a]
            down = [n - 1 for n in a if n >= 2]
            row.record(phi_eval(phi, up) < shift_eps and phi_eval(phi, down) < shift_eps, (phi, a))
        row.notes["delta"] = str(shift_modulus(PhiX(IndexSet.odds()), shift_eps))
        row.notes["skipped_by_hypothesis"] = skipped

    def monotone_body(row):
        schedule = [Fraction(2) ** -i for i in range(-3, 7)]
        for x in (IndexSet.odds(), IndexSet.evens(), IndexSet.everything(), IndexSet.empty()):
            phi = PhiX(x)
            for name, fn in (
                ("union", union_modulus),
                ("shift", shift_modulus),
                ("tall", lambda p, e: Fraction(1, tall_threshold(p, e))),
            ):
                values = [fn(phi, e) for e in schedule]
                row.record(all(u <= v for u, v in zip(values[1:], values)), (name, x))
            b = BaseSeq.constant(10)
            values = [rho_triangle_modulus(phi, b, e) for e in schedule[3:]]
            row.record(all(u <= v for u, v in zip(values[1:], values)), ("triangle", x))

    return [
        _timed("L:phs union modulus (eps=1/5)", union_body),
        _timed("L:phs shift modulus (eps=1)", shift_body),
        _timed("moduli monotone in eps", monotone_body),
    ]


# -- weak triangle and invariance ------------------------------------------------------


def _support_window(phi: PhiX, delta: Fraction) -> tuple[int, int]:
    """Positions ``[lo, hi]`` inside one block of ``A_x`` where single digits have rho < delta/4."""
    need = (1 / delta).__ceil__().bit_length() + 4
    k = 1
    while not ((1 << k) - 1 >= need + 8 and k in phi.x):
        k += 1
    return max((1 << (k - 1)) + 1, need), (1 << k) - 1


def random_perturbation(rng: random.Random, b: BaseSeq, phi: PhiX, delta: Fraction) -> Fraction:
    """A small number whose rho-distance to 0 is usually (not always) below ``delta``."""
    lo, hi = _support_window(phi, delta)
    shape = rng.random()
    if shape < 0.7:
        hi = min(hi, lo + 96)
        positions = rng.sample(range(lo, hi + 1), rng.randint(1, 3))
        return sum((rng.randint(1, b.value_at(p) - 1) * b.unit(p) for p in positions), Fraction(0))
    if shape < 0.9 and 1 / delta < 4096:
        # A run of equal digits far out: two jumps of weight about 1/n.
        start = rng.randint(int(2 / delta) - 8, int(2 / delta) + 64)
        length = rng.randint(1, 8)
        return sum((b.unit(p) for p in range(start, start + length)), Fraction(0))
    # Something coarse that usually violates the hypothesis.
    return b.unit(rng.randint(1, 12))


def suite_triangle(
    seed: int,
    trials: int = 10_000,
    eps_list=(Fraction(1), Fraction(1, 10), Fraction(1, 100)),
    x: IndexSet | None = None,
    base: BaseSeq | None = None,
) -> list[LemmaRow]:
    phi = PhiX(IndexSet.odds() if x is None else x)
    b = BaseSeq.constant(10) if base is None else base
    rows = []
    for eps in eps_list:
        eps = Fraction(eps)

        def body(row, eps=eps):
            rng = random.Random(f"{seed}:triangle:{eps}")
            delta = rho_triangle_modulus(phi, b, eps)
            skipped = 0
            attempts = 0
            while row.trials < trials:
                attempts += 1
                if attempts > 50 * trials:
                    break
                r = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4))
                s = r + rng.choice([-1, 1]) * random_perturbation(rng, b, phi, delta)
                t = s + rng.choice([-1, 1]) * random_perturbation(rng, b, phi, delta)
                R, S, T = (SignedMRReal(v, b) for v in (r, s, t))
                if not (rho(phi, R, S).less_than(delta) and rho(phi, S, T).less_than(delta)):
                    skipped += 1
                    continue
                row.record(rho(phi, R, T).less_than(eps) is True, (r, s, t))
            row.notes["delta"] = str(delta) if delta.denominator < 10**40 else f"2^-{delta.denominator.bit_length() - 1}"
            row.notes["skipped_by_hypothesis"] = skipped

        rows.append(_timed(f"L:rhotri eps={eps}", body))
    return rows


def suite_invariance(seed: int, trials: int = 10_000) -> list[LemmaRow]:
    def body(row):
        rng = random.Random(f"{seed}:invariance")
        for _ in range(trials):
            b = random_base(rng, rng.choice(["constant", "periodic", "primorial_blocks"]))
            phi = PhiX(rng.choice([IndexSet.odds(), IndexSet.from_bits("0", "1"), IndexSet.evens()]))
            r, s1, s2 = (
                rng.choice([-1, 1]) * random_rational(rng, b, top=2, den_digits=3) for _ in range(3)
            )
            R, S1, S2 = (SignedMRReal(v, b) for v in (r, s1, s2))
            base_value = rho(phi, S1, S2)
            ok = base_value == rho(phi, R + S1, R + S2) == rho(phi, -S1, -S2)
            ok = ok and base_value == rho(phi, S2, S1)
            row.record(ok, (b.to_json(), r, s1, s2))

    return [_timed("rho translation/negation invariance", body)]


# -- density ---------------------------------------------------------------------------------


def density_samples(seed: int, count: int) -> list[tuple[PhiX, SignedMRReal]]:
    """``count`` numbers paired with a ``phi_x`` for which ``j(r)`` is In."""
    rng = random.Random(f"{seed}:density")
    b = BaseSeq.constant(10)
    out = []
    cofinite = PhiX(IndexSet.from_bits("0", "1"))
    odds = PhiX(IndexSet.odds())
    while len(out) < count:
        shape = len(out) % 3
        n = rng.randint(0, 12)
        head = Fraction(rng.randint(0, 10**n - 1), 10**n) if n else Fraction(0)
        sign = rng.choice([-1, 1])
        if shape == 0:
            # Finite digits.
            out.append((odds, SignedMRReal(sign * head, b)))
        elif shape == 1:
            # Eventually constant digits: finite jump set.
            out.append((odds, SignedMRReal(sign * (head + Fraction(rng.randint(1, 8), 9 * 10**n)), b)))
        else:
            # Genuinely periodic digits, In only because x is cofinite.
            q = rng.choice([7, 11, 13, 17, 21, 27, 37, 41])
            out.append((cofinite, SignedMRReal(sign * (head + Fraction(rng.randint(1, q - 1), q * 10**n)), b)))
    return out


def check_truncation(phi: PhiX, r: SignedMRReal, eps: Fraction) -> bool:
    result = truncation_convergence(phi, r, eps)
    if not all(v < eps for v in result.rhos):
        return False
    if any(truncation_rho(phi, r, n) != v for n, v in zip(result.indices, result.rhos)):
        return False
    if result.kind == "subsequence":
        jumps = jump_of(r).natset
        if not all(n in jumps for n in result.indices):
            return False
    return result.tail_bound < eps


def suite_density(seed: int, trials: int = 100, schedule=(Fraction(1, 2), Fraction(1, 8), Fraction(1, 64))) -> list[LemmaRow]:
    samples = density_samples(seed, trials)

    def body(row):
        for phi, r in samples:
            ok = True
            for eps in schedule:
                try:
                    ok = ok and check_truncation(phi, r, Fraction(eps))
                except ValueError:
                    ok = False
            row.record(ok, r.value)

    return [_timed("L:separ truncations are rho-dense", body)]


# -- the phi_x family ------------------------------------------------------------------------------


def suite_family(seed: int, kmax: int = 20, smla_max: int = 15) -> list[LemmaRow]:
    def harmonic(row):
        for k in range(1, kmax + 1):
            value = block_harmonic(k)
            row.record(value >= Fraction(1, 2), k)
            if k <= 6:
                row.notes[f"k={k}"] = str(value)
            elif value.denominator < 10**30:
                row.notes[f"k={k}"] = str(value)

    def smla(row):
        x, y = IndexSet.odds(), IndexSet.evens()
        px, py = PhiX(x), PhiX(y)
        diff = ideal_inclusion(x, y).witnesses
        for k in range(3, smla_max + 1):
            if k not in diff:
                continue
            block = range(1 << (k - 1), 1 << k)
            fx, fy = phi_eval(px, block), phi_eval(py, block)
            cap = Fraction(2, 1 << (1 << (k - 1)))
            # cap == 2**-k at k = 3, so the cap comparison is strict only from k = 4.
            ok = fx <= cap and fx < Fraction(1, 1 << k) and fy >= Fraction(1, 2)
            ok = ok and (k < 4 or cap < Fraction(1, 1 << k))
            row.record(ok, k)
            if k <= 5:
                row.notes[f"k={k}"] = f"phi_x={fx} phi_y={fy}"

    def primorial(row):
        for m in range(1, 8):
            b = BaseSeq.first_primes(m)
            jumps = b.jump_set()
            ok = jumps.is_finite() and all(n & (n - 1) == 0 for n in jumps.restrict(jumps.max_member()))
            ok = ok and b.is_uniform()
            for x in (IndexSet.odds(), IndexSet.evens(), IndexSet.empty()):
                ok = ok and exact_mass(PhiX(x), jumps) is not None
            row.record(ok, m)

    def tall(row):
        for x in (IndexSet.odds(), IndexSet.evens(), IndexSet.everything(), IndexSet.empty()):
            phi = PhiX(x)
            for eps in (Fraction(2), Fraction(1, 3), Fraction(1, 10), Fraction(1, 100)):
                n0 = tall_threshold(phi, eps)
                row.record(all(phi.weight(n) < eps for n in range(n0, n0 + 200)), (x, eps))

    return [
        _timed("P_k harmonic mass >= 1/2", harmonic),
        _timed("E:smla odds vs evens", smla),
        _timed("primorial jumps at powers of 2", primorial),
        _timed("E:tal tallness threshold", tall),
    ]


# -- separation ---------------------------------------------------------------------------------------


def suite_separation(seed: int, count: int = 5) -> list[LemmaRow]:
    cases = [
        (Fraction(1), BaseSeq.constant(10)),
        (Fraction(3, 2), BaseSeq.constant(10)),
        (Fraction(5, 4), BaseSeq.first_primes(3)),
    ]
    rows = []
    for c, b in cases:

        def body(row, c=c, b=b):
            cert = separation_certificate(IndexSet.odds(), IndexSet.evens(), c, count, b)
            problems = cert.check()
            for wit in cert.witnesses:
                ok = not any(p.startswith(f"k={wit.k}:") for p in problems)
                ok = ok and wit.phi_y >= cert.d and wit.phi_x <= Fraction(2, 1 << (1 << (wit.k - 1)))
                row.record(ok, wit.k)
            row.notes["blocks"] = [w.k for w in cert.witnesses]

        rows.append(_timed(f"T:D (a)(b)(c) c={c} base={b.to_json()}", body))
    return rows


def verify_suite(name: str, seed: int = 0, trials: int | None = None, count: int | None = None) -> SuiteReport:
    """Run one named suite; ``trials``/``count`` override the default sizes."""
    kwargs = {} if trials is None else {"trials": trials}
    if name == "digit-rules":
        rows = suite_digit_rules(seed, **kwargs)
    elif name == "jump-algebra":
        rows = suite_jump_algebra(seed, **kwargs)
    elif name == "division":
        rows = suite_division(seed, **kwargs)
    elif name == "moduli":
        rows = suite_moduli(seed, **kwargs)
    elif name == "triangle":
        rows = suite_triangle(seed, **kwargs) + suite_invariance(seed, **kwargs)
    elif name == "density":
        rows = suite_density(seed, **kwargs)
    elif name == "family":
        rows = suite_family(seed, **({} if count is None else {"kmax": count}))
    elif name == "separation":
        rows = suite_separation(seed, **({} if count is None else {"count": count}))
    else:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    return SuiteReport(name, seed, rows)
