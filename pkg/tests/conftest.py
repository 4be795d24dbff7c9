"""Shared helpers: parse shortcut and a seeded random-polynomial generator."""

import random
from fractions import Fraction

import pytest

from laxdual.diffpoly import DiffPoly, FieldVar, parse_poly


def P(text: str) -> DiffPoly:
    return parse_poly(text)


def fv(kind: str, index: int, dorder: int = 0) -> FieldVar:
    return FieldVar(kind, index, dorder)


# Small pool of generators for randomized identities: <= 5 distinct fields,
# derivative orders <= 2, degrees kept small enough to stay fast.
_POOL = [
    fv("b", 1), fv("b", 1, 1), fv("b", 1, 2),
    fv("c", 1), fv("c", 1, 1),
    fv("b", 2), fv("c", 2, 1),
]


def random_poly(rng: random.Random, max_terms: int = 4, max_factors: int = 3) -> DiffPoly:
    out = DiffPoly.zero()
    for _ in range(rng.randint(0, max_terms)):
        coeff = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        term = DiffPoly.const(coeff)
        for _ in range(rng.randint(0, max_factors)):
            term = term * DiffPoly.from_var(rng.choice(_POOL))
        out = out + term
    return out


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20411)
