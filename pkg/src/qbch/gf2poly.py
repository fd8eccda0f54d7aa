"""Binary polynomial arithmetic and GF(2^m) field machinery.

Polynomials over GF(2) are stored as Python ints with bit i holding the
coefficient of x^i.  Field elements of GF(2^m) are ints below 2^m in the
polynomial basis; multiplication goes through log/antilog tables built
once per field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

MAX_DEGREE = 512

# Default primitive polynomials per extension degree.  Code parameters do
# not depend on this choice, but byte-level outputs must be reproducible.
DEFAULT_PRIMITIVE_POLYS = {
    3: 0b1011,        # x^3 + x + 1
    4: 0b10011,       # x^4 + x + 1
    5: 0b100101,      # x^5 + x^2 + 1
    6: 0b1000011,     # x^6 + x + 1
    7: 0b10000011,    # x^7 + x + 1
    8: 0b100011101,   # x^8 + x^4 + x^3 + x^2 + 1
}


class PolynomialError(ValueError):
    """Raised for invalid polynomial operations (division by zero, oversize)."""


@dataclass(frozen=True, order=True)
class BitPoly:
    """Polynomial over GF(2), bit i of ``bits`` = coefficient of x^i."""

    bits: int = 0

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise PolynomialError("negative coefficient payload")
        if self.bits.bit_length() - 1 > MAX_DEGREE:
            raise PolynomialError(f"degree above cap {MAX_DEGREE}")

    @classmethod
    def from_exponents(cls, exponents) -> "BitPoly":
        bits = 0
        for e in exponents:
            bits ^= 1 << e
        return cls(bits)

    @property
    def degree(self) -> int | None:
        """Degree, or None for the zero polynomial."""
        if self.bits == 0:
            return None
        return self.bits.bit_length() - 1

    def is_zero(self) -> bool:
        return self.bits == 0

    def coefficient(self, i: int) -> int:
        return (self.bits >> i) & 1

    def __add__(self, other: "BitPoly") -> "BitPoly":
        return BitPoly(self.bits ^ other.bits)

    __sub__ = __add__

    def __mul__(self, other: "BitPoly") -> "BitPoly":
        a, b, acc = self.bits, other.bits, 0
        while b:
            if b & 1:
                acc ^= a
            a <<= 1
            b >>= 1
        return BitPoly(acc)

    def __divmod__(self, other: "BitPoly") -> tuple["BitPoly", "BitPoly"]:
        if other.bits == 0:
            raise PolynomialError("division by zero polynomial")
        db = other.bits.bit_length() - 1
        rem = self.bits
        quo = 0
        while rem and rem.bit_length() - 1 >= db:
            shift = rem.bit_length() - 1 - db
            quo |= 1 << shift
            rem ^= other.bits << shift
        return BitPoly(quo), BitPoly(rem)

    def __mod__(self, other: "BitPoly") -> "BitPoly":
        return divmod(self, other)[1]

    def __floordiv__(self, other: "BitPoly") -> "BitPoly":
        return divmod(self, other)[0]

    def divides(self, other: "BitPoly") -> bool:
        return (other % self).is_zero()

    def reciprocal(self) -> "BitPoly":
        """x^deg * p(1/x): coefficients reversed across the degree span."""
        d = self.degree
        if d is None:
            return BitPoly(0)
        out = 0
        for i in range(d + 1):
            if (self.bits >> i) & 1:
                out |= 1 << (d - i)
        return BitPoly(out)

    def to_hex(self) -> str:
        return hex(self.bits)

    @classmethod
    def from_hex(cls, s: str) -> "BitPoly":
        return cls(int(s, 16))

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in range(self.bits.bit_length() - 1, -1, -1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return " + ".join(terms)


def poly_gcd(a: BitPoly, b: BitPoly) -> BitPoly:
    x, y = a.bits, b.bits
    while y:
        bp = BitPoly(y)
        x, y = y, (BitPoly(x) % bp).bits
    return BitPoly(x)


def poly_lcm(a: BitPoly, b: BitPoly) -> BitPoly:
    if a.is_zero() or b.is_zero():
        return BitPoly(0)
    return (a * b) // poly_gcd(a, b)


def x_n_minus_1(n: int) -> BitPoly:
    """x^n - 1 (= x^n + 1 over GF(2))."""
    return BitPoly((1 << n) | 1)


@dataclass(frozen=True)
class CyclotomicCoset:
    """Orbit of an exponent under j -> 2j mod n."""

    representative: int
    members: tuple[int, ...]


def cyclotomic_cosets(n: int) -> list[CyclotomicCoset]:
    """Partition {0..n-1} into orbits of doubling mod n.  Requires n odd."""
    if n < 1 or n % 2 == 0:
        raise ValueError("cyclotomic cosets need odd modulus")
    seen = [False] * n
    cosets = []
    for j in range(n):
        if seen[j]:
            continue
        orbit = []
        x = j
        while not seen[x]:
            seen[x] = True
            orbit.append(x)
            x = (2 * x) % n
        cosets.append(CyclotomicCoset(min(orbit), tuple(sorted(orbit))))
    return cosets


def cyclotomic_coset_of(j: int, n: int) -> CyclotomicCoset:
    orbit = []
    x = j % n
    while x not in orbit:
        orbit.append(x)
        x = (2 * x) % n
    return CyclotomicCoset(min(orbit), tuple(sorted(orbit)))


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) description: extension degree plus a primitive polynomial.

    The class of x is a primitive element; log/antilog tables make
    multiplication a table lookup.  Primitivity is checked exhaustively
    at construction (order of x must be exactly 2^m - 1).
    """

    m: int
    primitive_poly: BitPoly
    exp_table: tuple[int, ...] = field(repr=False, compare=False, default=())
    log_table: tuple[int, ...] = field(repr=False, compare=False, default=())

    def __post_init__(self) -> None:
        if not (2 <= self.m <= 16):
            raise ValueError("extension degree out of supported range")
        if self.primitive_poly.degree != self.m:
            raise ValueError("primitive polynomial degree must equal m")
        n = (1 << self.m) - 1
        exp = [0] * (2 * n)
        log = [0] * (1 << self.m)
        x = 1
        for i in range(n):
            exp[i] = x
            if x == 1 and i > 0:
                raise ValueError("polynomial is not primitive (order of x too small)")
            log[x] = i
            x = self._mul_raw(x, 0b10)
        if x != 1:
            raise ValueError("polynomial is not primitive (x has no full order)")
        for i in range(n, 2 * n):
            exp[i] = exp[i - n]
        object.__setattr__(self, "exp_table", tuple(exp))
        object.__setattr__(self, "log_table", tuple(log))

    @classmethod
    def default(cls, m: int) -> "FieldSpec":
        if m not in DEFAULT_PRIMITIVE_POLYS:
            raise ValueError(f"no default primitive polynomial for m={m}")
        return cls(m, BitPoly(DEFAULT_PRIMITIVE_POLYS[m]))

    @property
    def n(self) -> int:
        """Multiplicative group order 2^m - 1 (= BCH code length)."""
        return (1 << self.m) - 1

    def _mul_raw(self, a: int, b: int) -> int:
        res = 0
        mask = 1 << self.m
        red = self.primitive_poly.bits
        while b:
            if b & 1:
                res ^= a
            a <<= 1
            if a & mask:
                a ^= red
            b >>= 1
        return res

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp_table[self.log_table[a] + self.log_table[b]]

    def power_of_alpha(self, e: int) -> int:
        return self.exp_table[e % self.n]

    def to_json(self) -> dict:
        return {"m": self.m, "primitive_poly": self.primitive_poly.to_hex()}

    @classmethod
    def from_json(cls, data: dict) -> "FieldSpec":
        return cls(int(data["m"]), BitPoly.from_hex(data["primitive_poly"]))


def minimal_polynomial(spec: FieldSpec, exponent: int) -> BitPoly:
    """Minimal polynomial of alpha^exponent over GF(2).

    Expands prod_{j in coset} (x - alpha^j) over GF(2^m) and checks that
    every coefficient lands in {0,1}.
    """
    if not 0 <= exponent < spec.n:
        raise ValueError("exponent out of range")
    coset = cyclotomic_coset_of(exponent, spec.n)
    # coefficients of the expanding product, in GF(2^m), index = degree
    coeffs = [1]
    for j in coset.members:
        root = spec.power_of_alpha(j)
        new = [0] * (len(coeffs) + 1)
        for d, c in enumerate(coeffs):
            if c == 0:
                continue
            new[d + 1] ^= c
            new[d] ^= spec.mul(c, root)
        coeffs = new
    bits = 0
    for d, c in enumerate(coeffs):
        if c not in (0, 1):
            raise ArithmeticError("minimal polynomial has a coefficient outside GF(2)")
        bits |= c << d
    return BitPoly(bits)


def bch_generator(spec: FieldSpec, delta: int) -> BitPoly:
    """Narrow-sense BCH generator: LCM of minimal polys of alpha^1..alpha^(delta-1)."""
    n = spec.n
    if not 2 <= delta <= n:
        raise ValueError(f"designed distance must lie in [2, {n}]")
    reps = []
    seen = set()
    for e in range(1, delta):
        rep = cyclotomic_coset_of(e, n).representative
        if rep not in seen:
            seen.add(rep)
            reps.append(rep)
    polys = [minimal_polynomial(spec, r) for r in reps]
    g = reduce(poly_lcm, polys, BitPoly(1))
    if not g.divides(x_n_minus_1(n)):
        raise ArithmeticError("generator does not divide x^n - 1")
    return g
