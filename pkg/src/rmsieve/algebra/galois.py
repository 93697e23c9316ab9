"""Arithmetic in GF(2^m), odd m, in the polynomial basis.

Binary m-tuples and field elements are identified bitwise: bit ``i`` of an
element's integer value is the coefficient of ``beta**i``, where ``beta`` is a
root of the modulus polynomial. Polynomials over GF(2) are plain ints with bit
``i`` holding the coefficient of ``x**i``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from functools import lru_cache
from typing import NewType

from rmsieve.errors import EvenM, InvalidFieldSpec, ReducibleModulus

logger = logging.getLogger(__name__)

MIN_M = 3
MAX_M = 15

FieldElement = NewType("FieldElement", int)

# Irreducible moduli shipped with the package. Every entry is re-validated by
# validate_field_spec() when this module is imported.
DEFAULT_MODULI: dict[int, int] = {
    3: 0b1011,                  # x^3 + x + 1
    5: 0b100101,                # x^5 + x^2 + 1
    7: 0b10000011,              # x^7 + x + 1
    9: 0b1000010001,            # x^9 + x^4 + 1
    11: 0b100000000101,         # x^11 + x^2 + 1
    13: 0b10000000011011,       # x^13 + x^4 + x^3 + x + 1
    15: 0b1000000000000011,     # x^15 + x + 1
}


@dataclass(frozen=True)
class FieldSpec:
    """A validated description of GF(2^m).

    Build instances through ``validate_field_spec`` or ``field_spec``; the
    constructor itself does not test irreducibility.
    """

    m: int
    modulus: int

    @property
    def order(self) -> int:
        return 1 << self.m

    def element(self, value: int) -> FieldElement:
        """Validate ``value`` as an element of this field."""
        if not 0 <= int(value) < self.order:
            raise InvalidFieldSpec(
                f"Element {value} outside GF(2^{self.m}); expected 0 <= value < {self.order}"
            )
        return FieldElement(int(value))

    def elements(self) -> range:
        return range(self.order)

    def describe(self) -> str:
        return f"GF(2^{self.m}) mod {poly_to_str(self.modulus)}"


# ---------------------------------------------------------------------------
# Polynomial helpers over GF(2)
# ---------------------------------------------------------------------------

def poly_degree(a: int) -> int:
    return a.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    if a < b:
        a, b = b, a
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        b >>= 1
    return result


def poly_mod(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero polynomial")
    db = poly_degree(b)
    while a and poly_degree(a) >= db:
        a ^= b << (poly_degree(a) - db)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def poly_to_str(a: int) -> str:
    """Render a polynomial as ``x^3 + x + 1``."""
    if a == 0:
        return "0"
    terms = []
    for power in range(poly_degree(a), -1, -1):
        if not (a >> power) & 1:
            continue
        if power == 0:
            terms.append("1")
        elif power == 1:
            terms.append("x")
        else:
            terms.append(f"x^{power}")
    return " + ".join(terms)


def _bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for i, bit in enumerate(bits):
        if bit not in (0, 1):
            raise InvalidFieldSpec(f"Modulus bit {i} must be 0 or 1, got {bit!r}")
        value |= int(bit) << i
    return value


def _x_pow_2k_mod(k: int, modulus: int) -> int:
    """Return x^(2^k) mod modulus by k repeated squarings."""
    value = poly_mod(0b10, modulus)
    for _ in range(k):
        value = poly_mod(poly_mul(value, value), modulus)
    return value


def _proper_divisors(m: int) -> list[int]:
    return [d for d in range(1, m) if m % d == 0]


# ---------------------------------------------------------------------------
# Field construction
# ---------------------------------------------------------------------------

def validate_field_spec(m: int, modulus: int | Iterable[int]) -> FieldSpec:
    """Return a FieldSpec for GF(2^m) if ``modulus`` is irreducible of degree m.

    ``modulus`` is either an int (bit i = coefficient of x^i) or a sequence of
    m+1 bits in the same order.

    Raises:
        EvenM: m is even.
        InvalidFieldSpec: m out of range, or the modulus degree is not m.
        ReducibleModulus: the modulus factors over GF(2).
    """
    if m % 2 == 0:
        raise EvenM(f"m must be odd, got m={m}")
    if not MIN_M <= m <= MAX_M:
        raise InvalidFieldSpec(f"m must satisfy {MIN_M} <= m <= {MAX_M}, got m={m}")

    poly = modulus if isinstance(modulus, int) else _bits_to_int(modulus)
    if poly_degree(poly) != m:
        raise InvalidFieldSpec(
            f"Modulus {poly_to_str(poly)} has degree {poly_degree(poly)}, expected {m}"
        )
    if not poly & 1:
        raise ReducibleModulus(f"Modulus {poly_to_str(poly)} is divisible by x")

    x = 0b10
    if _x_pow_2k_mod(m, poly) != x:
        raise ReducibleModulus(f"Modulus {poly_to_str(poly)} fails x^(2^{m}) = x")
    for d in _proper_divisors(m):
        residue = _x_pow_2k_mod(d, poly)
        if residue == x or poly_gcd(residue ^ x, poly) != 1:
            raise ReducibleModulus(
                f"Modulus {poly_to_str(poly)} has a factor of degree dividing {d}"
            )
    logger.debug("Validated modulus %s for m=%d", poly_to_str(poly), m)
    return FieldSpec(m=m, modulus=poly)


_DEFAULT_SPECS = {m: validate_field_spec(m, p) for m, p in DEFAULT_MODULI.items()}


def field_spec(m: int) -> FieldSpec:
    """Return the packaged field for degree m."""
    if m % 2 == 0:
        raise EvenM(f"m must be odd, got m={m}")
    try:
        return _DEFAULT_SPECS[m]
    except KeyError:
        available = ", ".join(str(k) for k in sorted(_DEFAULT_SPECS))
        raise InvalidFieldSpec(f"No packaged modulus for m={m}. Available: {available}") from None


# ---------------------------------------------------------------------------
# Element arithmetic
# ---------------------------------------------------------------------------

def gf_add(a: int, b: int) -> FieldElement:
    return FieldElement(a ^ b)


def gf_mul(spec: FieldSpec, a: int, b: int) -> FieldElement:
    """Multiply two elements: carry-less product reduced by the modulus."""
    result = 0
    top = spec.order
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= spec.modulus
    return FieldElement(result)


def gf_square(spec: FieldSpec, x: int) -> FieldElement:
    return gf_mul(spec, x, x)


def gf_pow_1p2j(spec: FieldSpec, x: int, j: int) -> FieldElement:
    """Return x^(1 + 2^j): j squarings followed by one multiplication."""
    if not 0 <= j <= (spec.m - 1) // 2:
        raise ValueError(f"j must satisfy 0 <= j <= {(spec.m - 1) // 2}, got {j}")
    power = x
    for _ in range(j):
        power = gf_square(spec, power)
    return gf_mul(spec, x, power)


def gf_trace(spec: FieldSpec, x: int) -> int:
    """Absolute trace Tr(x) = x + x^2 + ... + x^(2^(m-1)), a bit."""
    total = 0
    power = x
    for _ in range(spec.m):
        total ^= power
        power = gf_square(spec, power)
    if total not in (0, 1):
        raise ArithmeticError(f"Trace of {x} left GF(2): {total}; modulus is not irreducible")
    return total


@lru_cache(maxsize=None)
def trace_mask(spec: FieldSpec) -> int:
    """Bit mask t with Tr(x) = parity(x & t), from the traces of the basis."""
    mask = 0
    for i in range(spec.m):
        if gf_trace(spec, 1 << i):
            mask |= 1 << i
    return mask


def fast_trace(spec: FieldSpec, x: int) -> int:
    return (x & trace_mask(spec)).bit_count() & 1
