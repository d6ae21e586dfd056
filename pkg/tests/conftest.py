from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from cantor.base_seq import BaseSeq

settings.register_profile("default", max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]

B10 = BaseSeq.constant(10)


@pytest.fixture(scope="session")
def source_md() -> str:
    return (ROOT / "paper.md").read_text(encoding="utf-8")


def greedy_digits(r: Fraction, bases, n: int) -> tuple[int, list[int]]:
    """Independent oracle: floor/remainder iteration written from scratch."""
    whole = r.numerator // r.denominator
    rest = r - whole
    out = []
    for a in bases[:n]:
        rest *= a
        d = rest.numerator // rest.denominator
        out.append(d)
        rest -= d
    return whole, out


def unfold(b: BaseSeq, n: int) -> list[int]:
    return [b.value_at(i) for i in range(1, n + 1)]


bases = st.one_of(
    st.integers(2, 16).map(BaseSeq.constant),
    st.tuples(st.lists(st.integers(2, 9), max_size=3), st.lists(st.integers(2, 9), min_size=1, max_size=3)).map(
        lambda t: BaseSeq.periodic(t[0], t[1])
    ),
    st.sampled_from([[2], [2, 3], [2, 3, 5], [3, 7]]).map(BaseSeq.primorial_blocks),
)

rationals = st.fractions(min_value=0, max_value=5, max_denominator=10**6)


def rng(seed: int = 0) -> random.Random:
    return random.Random(seed)


ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {text}")
