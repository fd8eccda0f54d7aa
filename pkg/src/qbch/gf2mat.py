"""Bit-packed GF(2) matrices.

Rows are Python ints, bit j = column j.  All linear algebra (rank, RREF,
kernels, row-space tests) runs on these bitsets; nothing here depends on
numpy so matrices of any width up to the polynomial cap are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GF2Matrix:
    """Immutable GF(2) matrix with int-bitset rows."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self) -> None:
        mask = (1 << self.cols) - 1
        for r in self.rows:
            if r < 0 or r & ~mask:
                raise ValueError("row has bits outside the column range")

    @classmethod
    def from_rows(cls, rows, cols: int) -> "GF2Matrix":
        return cls(tuple(int(r) for r in rows), cols)

    @classmethod
    def from_lists(cls, lists) -> "GF2Matrix":
        lists = list(lists)
        cols = len(lists[0]) if lists else 0
        rows = []
        for lst in lists:
            if len(lst) != cols:
                raise ValueError("ragged rows")
            rows.append(sum((b & 1) << j for j, b in enumerate(lst)))
        return cls(tuple(rows), cols)

    @classmethod
    def identity(cls, n: int) -> "GF2Matrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, cols: int) -> "GF2Matrix":
        return cls((0,) * nrows, cols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.nrows and 0 <= j < self.cols):
            raise IndexError("matrix index out of range")
        return (self.rows[i] >> j) & 1

    def row(self, i: int) -> int:
        return self.rows[i]

    def column_bits(self, j: int) -> int:
        """Column j packed as an int over row indices."""
        out = 0
        for i, r in enumerate(self.rows):
            out |= ((r >> j) & 1) << i
        return out

    def mul_vec(self, v: int) -> int:
        """Matrix-vector product H . v over GF(2); v is a column bitset."""
        out = 0
        for i, r in enumerate(self.rows):
            out |= ((r & v).bit_count() & 1) << i
        return out

    def matmul(self, other: "GF2Matrix") -> "GF2Matrix":
        if self.cols != other.nrows:
            raise ValueError("inner dimensions do not match")
        out = []
        for r in self.rows:
            acc = 0
            rr = r
            while rr:
                j = (rr & -rr).bit_length() - 1
                acc ^= other.rows[j]
                rr &= rr - 1
            out.append(acc)
        return GF2Matrix(tuple(out), other.cols)

    def transpose(self) -> "GF2Matrix":
        return GF2Matrix(tuple(self.column_bits(j) for j in range(self.cols)), self.nrows)

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.rows)

    def rref(self) -> tuple["GF2Matrix", tuple[int, ...]]:
        """Reduced row-echelon form; pivot ties broken by lowest column index."""
        work = list(self.rows)
        pivots = []
        row_idx = 0
        for col in range(self.cols):
            sel = None
            for r in range(row_idx, len(work)):
                if (work[r] >> col) & 1:
                    sel = r
                    break
            if sel is None:
                continue
            work[row_idx], work[sel] = work[sel], work[row_idx]
            for r in range(len(work)):
                if r != row_idx and ((work[r] >> col) & 1):
                    work[r] ^= work[row_idx]
            pivots.append(col)
            row_idx += 1
            if row_idx == len(work):
                break
        return GF2Matrix(tuple(work[:row_idx]), self.cols), tuple(pivots)

    def rank(self) -> int:
        return self.rref()[0].nrows

    def kernel_basis(self) -> "GF2Matrix":
        """Basis of {v : H v = 0}, one vector per free column, ascending."""
        red, pivots = self.rref()
        pivot_set = set(pivots)
        basis = []
        for f in range(self.cols):
            if f in pivot_set:
                continue
            v = 1 << f
            for i, p in enumerate(pivots):
                if (red.rows[i] >> f) & 1:
                    v |= 1 << p
            basis.append(v)
        return GF2Matrix(tuple(basis), self.cols)

    def stack(self, other: "GF2Matrix") -> "GF2Matrix":
        if self.cols != other.cols:
            raise ValueError("column counts differ")
        return GF2Matrix(self.rows + other.rows, self.cols)

    def in_row_space(self, v: int) -> bool:
        base = self.rank()
        return self.stack(GF2Matrix((v,), self.cols)).rank() == base

    def row_space_equals(self, other: "GF2Matrix") -> bool:
        if self.cols != other.cols:
            return False
        r = self.rank()
        return other.rank() == r and self.stack(other).rank() == r

    def permute_columns(self, images: list[int]) -> "GF2Matrix":
        """New matrix with out[:, images[j]] = self[:, j]."""
        if sorted(images) != list(range(self.cols)):
            raise ValueError("images do not form a permutation")
        out = []
        for r in self.rows:
            acc = 0
            rr = r
            while rr:
                j = (rr & -rr).bit_length() - 1
                acc |= 1 << images[j]
                rr &= rr - 1
            out.append(acc)
        return GF2Matrix(tuple(out), self.cols)

    def to_hex_rows(self) -> list[str]:
        return [hex(r) for r in self.rows]

    @classmethod
    def from_hex_rows(cls, rows: list[str], cols: int) -> "GF2Matrix":
        return cls(tuple(int(r, 16) for r in rows), cols)

    def __str__(self) -> str:
        return "\n".join(
            "".join(str((r >> j) & 1) for j in range(self.cols)) for r in self.rows
        )
