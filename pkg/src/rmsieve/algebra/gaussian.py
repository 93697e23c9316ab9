"""Exact Gaussian integers for sums of fourth roots of unity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class GaussianInt:
    """``re + im*i`` with integer parts; no rounding anywhere."""

    re: int = 0
    im: int = 0

    @classmethod
    def from_phase_counts(cls, counts) -> GaussianInt:
        """Sum of ``i**d`` taken ``counts[d]`` times, d = 0..3."""
        n0, n1, n2, n3 = (int(c) for c in counts)
        return cls(n0 - n2, n1 - n3)

    @classmethod
    def from_phases(cls, phases) -> GaussianInt:
        """Sum of ``i**p`` over an array of exponents (taken mod 4)."""
        counts = np.bincount(np.asarray(phases, dtype=np.int64).ravel() % 4, minlength=4)
        return cls.from_phase_counts(counts)

    def __add__(self, other: GaussianInt) -> GaussianInt:
        return GaussianInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other: GaussianInt) -> GaussianInt:
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __mul__(self, other: GaussianInt) -> GaussianInt:
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> GaussianInt:
        return GaussianInt(-self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re or self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.sqrt(self.norm())

    def conjugate(self) -> GaussianInt:
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        """Squared magnitude, exact."""
        return self.re * self.re + self.im * self.im

    def scaled_norm(self, denominator: int) -> Fraction:
        """Exact ``|self / denominator|**2``."""
        return Fraction(self.norm(), denominator * denominator)

    def __str__(self) -> str:
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"


def log2_exact(value: Fraction) -> float | None:
    """Return log2 of a power-of-two fraction, or None if it is not one."""
    if value <= 0:
        return None
    num, den = value.numerator, value.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    return float(num.bit_length() - den.bit_length())
