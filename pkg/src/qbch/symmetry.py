"""Cyclic and Frobenius code symmetries.

Elements of C_n x| F_m act on coordinate labels as j -> 2^l * j + s mod n
(Frobenius first, then the shift).  Permutations are applied by
relabeling coordinates, never by inserting gates, so a permuted block is
the same logical state with its error patterns moved around.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from qbch.codes import CssCode
from qbch.gf2mat import GF2Matrix


@dataclass(frozen=True)
class AutomorphismElement:
    """pi(j) = 2^l * j + s mod n on coordinates 0..n-1."""

    n: int
    shift: int
    frobenius_power: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift", self.shift % self.n)

    @classmethod
    def identity(cls, n: int) -> "AutomorphismElement":
        return cls(n, 0, 0)

    def image(self, j: int) -> int:
        return ((j << self.frobenius_power) + self.shift) % self.n

    def images(self) -> list[int]:
        return [self.image(j) for j in range(self.n)]

    def apply(self, v: int) -> int:
        """out[pi(j)] = v[j] for a coordinate bitset v."""
        if v < 0 or v >> self.n:
            raise ValueError("vector length does not match the permutation")
        out = 0
        while v:
            j = (v & -v).bit_length() - 1
            out |= 1 << self.image(j)
            v &= v - 1
        return out

    def apply_matrix(self, mat: GF2Matrix) -> GF2Matrix:
        if mat.cols != self.n:
            raise ValueError("matrix width does not match the permutation")
        return GF2Matrix(tuple(self.apply(r) for r in mat.rows), self.n)

    def compose(self, other: "AutomorphismElement", m: int) -> "AutomorphismElement":
        """self after other: pi = pi_self . pi_other."""
        if self.n != other.n:
            raise ValueError("permutations act on different lengths")
        l = (self.frobenius_power + other.frobenius_power) % m
        s = ((other.shift << self.frobenius_power) + self.shift) % self.n
        return AutomorphismElement(self.n, s, l)

    def label(self) -> str:
        parts = []
        if self.shift:
            parts.append(f"R^{self.shift}" if self.shift != 1 else "R")
        if self.frobenius_power:
            parts.append(f"F^{self.frobenius_power}" if self.frobenius_power != 1 else "F")
        return " ".join(parts) if parts else "I"

    @classmethod
    def parse(cls, text: str, n: int) -> "AutomorphismElement":
        """Parse forms like "I", "R", "R^6", "F", "R^12 F", "R F^2"."""
        text = text.strip()
        if text in ("I", "id", "identity"):
            return cls.identity(n)
        shift = 0
        frob = 0
        for tok in text.split():
            m_r = re.fullmatch(r"R(?:\^(-?\d+))?", tok)
            m_f = re.fullmatch(r"F(?:\^(-?\d+))?", tok)
            if m_r:
                shift = int(m_r.group(1)) if m_r.group(1) else 1
            elif m_f:
                frob = int(m_f.group(1)) if m_f.group(1) else 1
            else:
                raise ValueError(f"cannot parse permutation token {tok!r}")
        return cls(n, shift % n, frob)


def all_elements(n: int, m: int) -> list[AutomorphismElement]:
    """The n*m elements of C_n x| F_m, lexicographic in (s, l)."""
    return [AutomorphismElement(n, s, l) for s in range(n) for l in range(m)]


def verify_code_automorphism(code: CssCode, perm: AutomorphismElement) -> bool:
    """True iff column-permuting h_x and h_z leaves both row spaces fixed."""
    if perm.n != code.n:
        return False
    for mat in (code.h_x, code.h_z):
        if not mat.row_space_equals(perm.apply_matrix(mat)):
            return False
    return True
