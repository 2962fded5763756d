"""Modular-arithmetic question generation, encoding, and solving.

Questions have the fixed form ``Num1 ≡ Num2 (mod Num3)`` with Num1 and Num2
two-digit, Num3 one-digit. The task for a human is binary (is Num1 - Num2
divisible by Num3?); the reasoning agent instead predicts the remainder.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Character dictionary for the one-hot sequence encoding. Index 16 (space)
# is reserved for padding and never appears in the canonical render.
CHAR_DICT = ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "≡", "(", "m", "o", "d", ")", " "]
CHAR_INDEX = {c: i for i, c in enumerate(CHAR_DICT)}

SEQ_LEN = 11
VOCAB = 17


@dataclass(frozen=True)
class MathQuestion:
    """One trial item: digits (a, b, c, d, e) with Num1=10a+b, Num2=10c+d, Num3=e.

    Any renderable two-digit/two-digit/one-digit question is representable;
    the tighter digit-range constraints apply to generated questions only
    (see :func:`satisfies_generation_constraints`).
    """

    a: int
    b: int
    c: int
    d: int
    e: int

    def __post_init__(self) -> None:
        if not (1 <= self.a <= 9 and 0 <= self.b <= 9 and 1 <= self.c <= 9 and 0 <= self.d <= 9):
            raise ValueError(f"digits out of range: {self}")
        if not (1 <= self.e <= 9):
            raise ValueError(f"modulus digit must lie in [1, 9]: {self}")

    @property
    def num1(self) -> int:
        return 10 * self.a + self.b

    @property
    def num2(self) -> int:
        return 10 * self.c + self.d

    @property
    def num3(self) -> int:
        return self.e

    @classmethod
    def from_numbers(cls, num1: int, num2: int, num3: int) -> MathQuestion:
        return cls(num1 // 10, num1 % 10, num2 // 10, num2 % 10, num3)

    def render(self) -> str:
        """Canonical 11-character string, e.g. ``61≡26(mod4)``."""
        s = f"{self.num1}≡{self.num2}(mod{self.num3})"
        assert len(s) == SEQ_LEN
        return s


def satisfies_generation_constraints(q: MathQuestion) -> bool:
    """Digit ranges the generator draws from: 1<=a<=9, 2<=b<=9, 1<=c<=9,
    1<=d<=b-1, 3<=e<=9."""
    return 2 <= q.b <= 9 and 1 <= q.d <= q.b - 1 and 3 <= q.e <= 9


def enumerate_all() -> list[MathQuestion]:
    """Every valid question in lexicographic (a, b, c, d, e) order.

    The count is 9 * 9 * 7 * sum_{b=2..9}(b-1) = 20412.
    """
    out = []
    for a in range(1, 10):
        for b in range(2, 10):
            for c in range(1, 10):
                for d in range(1, b):
                    for e in range(3, 10):
                        out.append(MathQuestion(a, b, c, d, e))
    return out


def answer(q: MathQuestion) -> int:
    """Euclidean (non-negative) remainder of (Num1 - Num2) mod Num3."""
    return (q.num1 - q.num2) % q.num3


def is_divisible(q: MathQuestion) -> bool:
    return answer(q) == 0


def encode(q: MathQuestion) -> np.ndarray:
    """One-hot encode the canonical string as an (11, 17) float matrix."""
    mat = np.zeros((SEQ_LEN, VOCAB))
    for row, ch in enumerate(q.render()):
        mat[row, CHAR_INDEX[ch]] = 1.0
    return mat


def decode(matrix: np.ndarray) -> str:
    """Inverse of :func:`encode`; returns the canonical string."""
    if matrix.shape != (SEQ_LEN, VOCAB):
        raise ValueError(f"expected ({SEQ_LEN}, {VOCAB}) matrix, got {matrix.shape}")
    return "".join(CHAR_DICT[int(i)] for i in matrix.argmax(axis=1))


def random_question(rng: np.random.Generator) -> MathQuestion:
    """Uniform draw over the valid digit ranges (not over the enumeration)."""
    a = int(rng.integers(1, 10))
    b = int(rng.integers(2, 10))
    c = int(rng.integers(1, 10))
    d = int(rng.integers(1, b))
    e = int(rng.integers(3, 10))
    return MathQuestion(a, b, c, d, e)


def write_csv(questions: list[MathQuestion], path: str | Path) -> None:
    """Serialize questions as num1,num2,num3,answer,divisible rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["num1", "num2", "num3", "answer", "divisible"])
        for q in questions:
            w.writerow([q.num1, q.num2, q.num3, answer(q), int(is_divisible(q))])


def read_csv(path: str | Path) -> list[MathQuestion]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            MathQuestion.from_numbers(int(r["num1"]), int(r["num2"]), int(r["num3"]))
            for r in csv.DictReader(fh)
        ]
