"""Exponent triads of Manning-form coordinate transformations.

A triad ``(m1, m2, m3)`` fixes ``rho(z) = prod (z - a_i)**m_i / sigma``.
Exponents are half-integers in ``[-1, 1]``; they are stored doubled so that
membership tests and sums are exact integer arithmetic.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidTriad

DOUBLED_VALUES = (2, 1, 0, -1, -2)


@dataclass(frozen=True, order=True)
class Triad:
    """Exponent triple stored as doubled integers ``(2*m1, 2*m2, 2*m3)``."""

    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        for d in self.doubled:
            if not isinstance(d, int) or d not in DOUBLED_VALUES:
                raise InvalidTriad(f"doubled exponent {d!r} not in {DOUBLED_VALUES}")
        if not 2 <= sum(self.doubled) <= 6:
            raise InvalidTriad(f"exponent sum {sum(self.doubled)}/2 outside [1, 3]")

    @classmethod
    def from_exponents(cls, m1, m2, m3) -> "Triad":
        doubled = []
        for m in (m1, m2, m3):
            f = Fraction(m).limit_denominator(4) * 2
            if f.denominator != 1 or abs(float(f) - 2 * float(m)) > 1e-12:
                raise InvalidTriad(f"exponent {m!r} is not a half-integer")
            doubled.append(int(f))
        return cls(*doubled)

    @property
    def doubled(self) -> tuple[int, int, int]:
        return (self.d1, self.d2, self.d3)

    @property
    def m(self) -> tuple[float, float, float]:
        return tuple(d / 2 for d in self.doubled)

    @property
    def exponents(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(Fraction(d, 2) for d in self.doubled)

    def permute(self, order) -> "Triad":
        d = self.doubled
        return Triad(*(d[i] for i in order))

    def label(self) -> str:
        return "(" + ", ".join(_fmt_half(d) for d in self.doubled) + ")"

    def __str__(self):
        return self.label()


def _fmt_half(d: int) -> str:
    return str(d // 2) if d % 2 == 0 else f"{d}/2"


def _permissible(doubled) -> bool:
    return all(d in DOUBLED_VALUES for d in doubled) and 2 <= sum(doubled) <= 6


def enumerate_triads() -> list[Triad]:
    """All 35 permissible triads, lexicographically descending."""
    return [Triad(*t) for t in itertools.product(DOUBLED_VALUES, repeat=3)
            if 2 <= sum(t) <= 6]


def canonical_class(t: Triad) -> Triad:
    """Representative of the permutation orbit: components sorted descending."""
    if not isinstance(t, Triad):
        t = Triad(*t)
    elif not _permissible(t.doubled):  # pragma: no cover - guarded by __post_init__
        raise InvalidTriad(str(t))
    return Triad(*sorted(t.doubled, reverse=True))


def canonical_order(t: Triad) -> tuple[int, int, int]:
    """Stable permutation of indices that sorts ``t`` into its class order."""
    return tuple(sorted(range(3), key=lambda i: -t.doubled[i]))


def canonical_classes() -> list[Triad]:
    """The eleven class representatives, in catalog order."""
    return sorted({canonical_class(t) for t in enumerate_triads()}, reverse=True)


@functools.lru_cache(maxsize=None)
def _class_numbers() -> dict:
    return {c.doubled: k for k, c in enumerate(canonical_classes(), start=1)}


def class_number(t: Triad) -> int:
    """1-based row number of ``t``'s class in the catalog."""
    return _class_numbers()[canonical_class(t).doubled]
