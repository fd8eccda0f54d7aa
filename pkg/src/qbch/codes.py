"""Classical cyclic/BCH codes and their quantum CSS lifts.

Coordinate convention: bit j of a vector is coordinate j and holds the
coefficient of x^j of the corresponding code polynomial, so coordinate
labels are exponents of the primitive element.  The stored circulant
check mirrors the textbook print layout (check-polynomial coefficients
h_0..h_k starting at column i in row i); in this ascending convention
that matrix annihilates coordinate-REVERSED codewords, while the
full-rank ``parity_check`` (shifts of the reciprocal check polynomial)
annihilates codewords directly and is what every downstream consumer
uses.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from qbch.gf2mat import GF2Matrix
from qbch.gf2poly import BitPoly, FieldSpec, bch_generator, x_n_minus_1

ENUMERATION_DIM_LIMIT = 28
_GRAY_DIM_LIMIT = 20
_DIRECT_TABLE_LIMIT = 3_000_000


class CodeConstructionError(ValueError):
    """Raised when a code cannot be built as requested."""


@dataclass(frozen=True)
class CyclicCode:
    """[n, k_c] cyclic code given by its generator polynomial."""

    n: int
    g: BitPoly
    h: BitPoly
    k_c: int
    parity_check: GF2Matrix
    circulant_check: GF2Matrix

    @property
    def generator_matrix(self) -> GF2Matrix:
        return GF2Matrix(tuple(self.g.bits << i for i in range(self.k_c)), self.n)


def parity_check_from_generator(n: int, g: BitPoly) -> CyclicCode:
    """Build the cyclic code and both parity-check layouts from g(x)."""
    if g.is_zero():
        raise CodeConstructionError("zero generator polynomial")
    modulus = x_n_minus_1(n)
    if not g.divides(modulus):
        raise CodeConstructionError("generator does not divide x^n - 1")
    h = modulus // g
    k_c = n - g.degree
    r = n - k_c
    h_rev = h.reciprocal()
    parity = GF2Matrix(tuple(h_rev.bits << i for i in range(r)), n)
    circulant = GF2Matrix(tuple(h.bits << i for i in range(r)), n)
    return CyclicCode(n=n, g=g, h=h, k_c=k_c, parity_check=parity, circulant_check=circulant)


def bch_code(spec: FieldSpec, delta: int) -> CyclicCode:
    return parity_check_from_generator(spec.n, bch_generator(spec, delta))


def is_dual_containing(code: CyclicCode) -> bool:
    """C_perp <= C, tested as H H^T = 0 over GF(2)."""
    h = code.parity_check
    return h.matmul(h.transpose()).is_zero()


def syndrome(h: GF2Matrix, e: int, length: int | None = None) -> int:
    """h . e over GF(2).  ``length`` guards against oversized vectors."""
    if length is not None and length != h.cols:
        raise ValueError("vector length does not match check matrix")
    if e < 0 or e >> h.cols:
        raise ValueError("vector has bits outside the code length")
    return h.mul_vec(e)


def _gf2_inverse(rows: list[int], k: int) -> list[int]:
    aug = [(rows[i], 1 << i) for i in range(k)]
    out = [0] * k
    ech: list[tuple[int, int, int]] = []
    for r, tag in aug:
        cur, cur_tag = r, tag
        for piv, er, etag in ech:
            if (cur >> piv) & 1:
                cur ^= er
                cur_tag ^= etag
        if cur == 0:
            raise ArithmeticError("matrix is singular over GF(2)")
        piv = (cur & -cur).bit_length() - 1
        for idx, (p2, er, etag) in enumerate(ech):
            if (er >> piv) & 1:
                ech[idx] = (p2, er ^ cur, etag ^ cur_tag)
        ech.append((piv, cur, cur_tag))
    inv = [0] * k
    for piv, er, etag in ech:
        # er is now a unit vector e_piv
        inv[piv] = etag
    return inv


def _extract_logicals(h: GF2Matrix, k: int) -> tuple[GF2Matrix, GF2Matrix]:
    """Deterministic logical X/Z bases with logical_x . logical_z^T = I."""
    kernel = h.kernel_basis()
    selected: list[int] = []
    cur = h
    cur_rank = h.rank()
    for v in kernel.rows:
        if len(selected) == k:
            break
        cand = cur.stack(GF2Matrix((v,), h.cols))
        cand_rank = cand.rank()
        if cand_rank > cur_rank:
            selected.append(v)
            cur, cur_rank = cand, cand_rank
    if len(selected) != k:
        raise ArithmeticError("could not extract a full logical basis")
    gram = [
        sum(((selected[i] & selected[j]).bit_count() & 1) << j for j in range(k))
        for i in range(k)
    ]
    inv = _gf2_inverse(gram, k)
    # want x_i . z_j = delta_ij with z_j = sum_t N[j][t] sel_t, N = (M^-1)^T
    z_rows = []
    for j in range(k):
        acc = 0
        for t in range(k):
            if (inv[t] >> j) & 1:
                acc ^= selected[t]
        z_rows.append(acc)
    logical_x = GF2Matrix(tuple(selected), h.cols)
    logical_z = GF2Matrix(tuple(z_rows), h.cols)
    return logical_x, logical_z


@dataclass
class CssCode:
    """Quantum CSS code from a dual-containing classical code (h_x = h_z)."""

    n: int
    k: int
    d_design: int
    h_x: GF2Matrix
    h_z: GF2Matrix
    logical_x: GF2Matrix
    logical_z: GF2Matrix
    d_true: int | None = None
    classical: CyclicCode | None = None
    field_spec: FieldSpec | None = None
    _rw_tables: dict = field(default_factory=dict, repr=False)

    @property
    def t(self) -> int:
        """Correctable errors from the design distance."""
        return (self.d_design - 1) // 2

    def label_matrix(self, pauli_type: str, target: str = "zero") -> GF2Matrix:
        """Labels whose kernel is the group of ``pauli_type`` operators
        stabilizing the target logical basis state."""
        if pauli_type == "X":
            if target == "zero":
                return self.h_z.stack(self.logical_z)
            return self.h_z
        if pauli_type == "Z":
            if target == "zero":
                return self.h_x
            return self.h_x.stack(self.logical_x)
        raise ValueError("pauli_type must be 'X' or 'Z'")

    def residual_table(self, pauli_type: str, w_max: int, target: str = "zero") -> "ResidualWeightTable":
        key = (pauli_type, target, w_max)
        if key not in self._rw_tables:
            self._rw_tables[key] = ResidualWeightTable(
                self.label_matrix(pauli_type, target), self.n, w_max
            )
        return self._rw_tables[key]

    def to_json(self) -> dict:
        data = {
            "n": self.n,
            "k": self.k,
            "delta": self.d_design,
            "h_x": self.h_x.to_hex_rows(),
            "h_z": self.h_z.to_hex_rows(),
            "logical_x": self.logical_x.to_hex_rows(),
            "logical_z": self.logical_z.to_hex_rows(),
        }
        if self.d_true is not None:
            data["d_true"] = self.d_true
        if self.classical is not None:
            data["g_poly"] = self.classical.g.to_hex()
        if self.field_spec is not None:
            data["m"] = self.field_spec.m
            data["primitive_poly"] = self.field_spec.primitive_poly.to_hex()
        return data

    @classmethod
    def from_json(cls, data: dict) -> "CssCode":
        n = int(data["n"])
        spec = None
        classical = None
        if "m" in data:
            spec = FieldSpec(int(data["m"]), BitPoly.from_hex(data["primitive_poly"]))
        if "g_poly" in data:
            classical = parity_check_from_generator(n, BitPoly.from_hex(data["g_poly"]))
        return cls(
            n=n,
            k=int(data["k"]),
            d_design=int(data["delta"]),
            h_x=GF2Matrix.from_hex_rows(data["h_x"], n),
            h_z=GF2Matrix.from_hex_rows(data["h_z"], n),
            logical_x=GF2Matrix.from_hex_rows(data["logical_x"], n),
            logical_z=GF2Matrix.from_hex_rows(data["logical_z"], n),
            d_true=data.get("d_true"),
            classical=classical,
            field_spec=spec,
        )


def css_from_dual_containing(code: CyclicCode, delta: int, spec: FieldSpec | None = None) -> CssCode:
    if not is_dual_containing(code):
        raise CodeConstructionError(
            f"[{code.n},{code.k_c}] code is not dual-containing; no CSS lift"
        )
    h = code.parity_check
    k = 2 * code.k_c - code.n
    logical_x, logical_z = _extract_logicals(h, k)
    return CssCode(
        n=code.n,
        k=k,
        d_design=delta,
        h_x=h,
        h_z=h,
        logical_x=logical_x,
        logical_z=logical_z,
        classical=code,
        field_spec=spec,
    )


@dataclass(frozen=True)
class WeightEnumerator:
    """Exact weight distribution A_0..A_n of a linear code."""

    n: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != self.n + 1:
            raise ValueError("counts must have length n + 1")
        if self.counts[0] != 1 or any(c < 0 for c in self.counts):
            raise ValueError("invalid weight distribution")

    @property
    def dimension(self) -> int:
        total = sum(self.counts)
        dim = total.bit_length() - 1
        if 1 << dim != total:
            raise ValueError("total count is not a power of two")
        return dim


def weight_enumerator_exhaustive(gen: GF2Matrix) -> WeightEnumerator:
    """Exact enumerator by visiting all 2^dim codewords."""
    red, _ = gen.rref()
    dim = red.nrows
    n = gen.cols
    if dim > ENUMERATION_DIM_LIMIT:
        raise CodeConstructionError(
            f"dimension {dim} above enumeration budget {ENUMERATION_DIM_LIMIT}; "
            "use the MacWilliams path from the dual or an external enumerator file"
        )
    if dim <= _GRAY_DIM_LIMIT:
        counts = [0] * (n + 1)
        word = 0
        counts[0] = 1
        rows = red.rows
        for i in range(1, 1 << dim):
            word ^= rows[(i & -i).bit_length() - 1]
            counts[word.bit_count()] += 1
        return WeightEnumerator(n, tuple(counts))
    return _weight_enumerator_blocked(red.rows, n, dim)


def _pack_words(value: int, n_words: int) -> list[int]:
    return [(value >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(n_words)]


def _weight_enumerator_blocked(rows: tuple[int, ...], n: int, dim: int) -> WeightEnumerator:
    """Split-basis enumeration: XOR every left combo against a vectorized
    array of right combos; exact counts via popcount + bincount."""
    n_words = (n + 63) // 64
    left_dim = dim // 2
    left_rows, right_rows = rows[:left_dim], rows[left_dim:]

    def span(basis: tuple[int, ...]) -> np.ndarray:
        arr = np.zeros((1, n_words), dtype=np.uint64)
        for r in basis:
            packed = np.array(_pack_words(r, n_words), dtype=np.uint64)
            arr = np.concatenate([arr, arr ^ packed])
        return arr

    left = span(left_rows)
    right = span(right_rows)
    counts = np.zeros(n + 1, dtype=np.int64)
    for i in range(left.shape[0]):
        weights = np.bitwise_count(right ^ left[i]).sum(axis=1, dtype=np.int64)
        counts += np.bincount(weights, minlength=n + 1)
    return WeightEnumerator(n, tuple(int(c) for c in counts))


def macwilliams_transform(enum: WeightEnumerator, dim: int) -> WeightEnumerator:
    """Enumerator of the dual code via the Krawtchouk expansion, exactly."""
    n = enum.n
    size = 1 << dim
    if sum(enum.counts) != size:
        raise ValueError("enumerator total does not match the stated dimension")
    counts = []
    for j in range(n + 1):
        total = 0
        for w, a_w in enumerate(enum.counts):
            if a_w == 0:
                continue
            kraw = 0
            for i in range(max(0, j - (n - w)), min(j, w) + 1):
                term = math.comb(w, i) * math.comb(n - w, j - i)
                kraw += -term if i & 1 else term
            total += a_w * kraw
        if total % size or total < 0:
            raise ArithmeticError("MacWilliams transform produced a non-code count")
        counts.append(total // size)
    return WeightEnumerator(n, tuple(counts))


def min_distance(enum: WeightEnumerator) -> int:
    for w in range(1, enum.n + 1):
        if enum.counts[w] > 0:
            return w
    raise ValueError("zero code has no minimum distance")


def code_enumerator(code: CyclicCode) -> tuple[WeightEnumerator, WeightEnumerator]:
    """(enumerator of C, enumerator of C_perp), via whichever side is small.

    For a dual-containing code the dual side has dimension n - k_c, which
    stays within the enumeration budget for every in-scope code with the
    distances this toolkit targets.
    """
    n = code.n
    dual_dim = n - code.k_c
    if code.k_c <= ENUMERATION_DIM_LIMIT:
        enum_c = weight_enumerator_exhaustive(code.generator_matrix)
        enum_dual = macwilliams_transform(enum_c, code.k_c)
        return enum_c, enum_dual
    if dual_dim <= ENUMERATION_DIM_LIMIT:
        enum_dual = weight_enumerator_exhaustive(code.parity_check)
        enum_c = macwilliams_transform(enum_dual, dual_dim)
        return enum_c, enum_dual
    raise CodeConstructionError(
        "both the code and its dual exceed the enumeration budget; "
        "supply an external enumerator file"
    )


def logical_weight_difference(enum_c: WeightEnumerator, enum_dual: WeightEnumerator) -> tuple[int, ...]:
    """A_w(C) - A_w(C_perp): counts of X-logical classes by weight."""
    return tuple(c - d for c, d in zip(enum_c.counts, enum_dual.counts))


class ResidualWeightTable:
    """Syndrome/logical-label -> coset-leader weight, exact up to w_max.

    Direct mode tabulates every error of weight <= w_max.  Above the
    direct budget a meet-in-the-middle split stores only half-weight
    patterns and resolves queries by joining the two halves.
    """

    def __init__(self, label_matrix: GF2Matrix, n: int, w_max: int) -> None:
        self.n = n
        self.w_max = w_max
        self.label_cols = tuple(label_matrix.column_bits(j) for j in range(n))
        total = sum(math.comb(n, w) for w in range(w_max + 1))
        self.direct = total <= _DIRECT_TABLE_LIMIT
        if self.direct:
            self.table = self._build(w_max)
            self.half_a = self.half_b = None
        else:
            a = w_max // 2
            b = w_max - a
            self.half_a = self._build(a)
            self.half_b = self._build(b)
            self.table = None
        self._query_cache: dict[int, int | None] = {}

    def _build(self, w_cap: int) -> dict[int, int]:
        cols = self.label_cols
        table: dict[int, int] = {0: 0}
        for w in range(1, w_cap + 1):
            for combo in itertools.combinations(range(self.n), w):
                label = 0
                for q in combo:
                    label ^= cols[q]
                if label not in table:
                    table[label] = w
        return table

    def label_of(self, e: int) -> int:
        label = 0
        while e:
            q = (e & -e).bit_length() - 1
            label ^= self.label_cols[q]
            e &= e - 1
        return label

    def query_label(self, label: int) -> int | None:
        """Coset-leader weight for a label, or None if above w_max."""
        if self.direct:
            return self.table.get(label)
        cached = self._query_cache.get(label, -1)
        if cached != -1:
            return cached
        best: int | None = None
        get_b = self.half_b.get
        for la, wa in self.half_a.items():
            wb = get_b(la ^ label)
            if wb is not None:
                cand = wa + wb
                if best is None or cand < best:
                    best = cand
                    if best == 0:
                        break
        if best is not None and best > self.w_max:
            best = None
        self._query_cache[label] = best
        return best

    def query(self, e: int) -> int | None:
        return self.query_label(self.label_of(e))


def reduced_weight(code: CssCode, e: int, pauli_type: str, w_max: int, target: str = "zero") -> int | None:
    """Minimum weight of e modulo the same-type operators stabilizing the
    target logical state.  Returns the exact value if <= w_max, else None."""
    if e < 0 or e >> code.n:
        raise ValueError("error vector has bits outside the block")
    return code.residual_table(pauli_type, w_max, target).query(e)
