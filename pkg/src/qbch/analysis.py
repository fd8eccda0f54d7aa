"""Closed-form analytics: effective error rates, acceptance lower bounds,
the code-capacity reduction coefficient, maximum-likelihood leading
coefficients, and scaling thresholds.

All rational quantities stay exact (fractions.Fraction); root extraction
runs in mpmath at 40 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from qbch.codes import (
    CssCode,
    WeightEnumerator,
    code_enumerator,
    logical_weight_difference,
    min_distance,
)

MP_DPS = 40


@dataclass(frozen=True)
class EffectiveRates:
    """Per-qubit output error coefficients (multiples of p)."""

    p_x_coeff: Fraction
    p_z_coeff: Fraction


def effective_rates(m_x: int, m_z: int, target_state: str = "zero") -> EffectiveRates:
    """Leading-order transversal error rates of the distilled output.

    For a logical-zero target the X rate grows with the Z-check size m_z
    (one undetected contribution per surviving transversal CNOT) while
    the Z rate comes only from the final transversal CNOT; the plus
    target mirrors the two.
    """
    if m_x < 2 or m_z < 2:
        raise ValueError("distillation steps need at least two blocks")
    if target_state == "zero":
        return EffectiveRates(Fraction(4 * m_z, 15), Fraction(4, 15))
    if target_state == "plus":
        return EffectiveRates(Fraction(4, 15), Fraction(4 * m_x, 15))
    raise ValueError("target_state must be 'zero' or 'plus'")


def acceptance_lower_bounds(circuit_stats: dict, m: int, p: float) -> tuple[float, float]:
    """Per-step success-probability lower bounds for an m-to-1 x m-to-1
    protocol, parametrized by the block circuit's (n, n_H, n_CNOT).

    Each factor is the probability that no error strikes one family of
    locations capable of triggering a rejection in that step.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    n = circuit_stats["n"]
    n_h = circuit_stats["n_H"]
    n_cnot = circuit_stats["n_CNOT"]
    prep_x_sensitive = n - n_h

    p_x_spam = (1 - p) ** (prep_x_sensitive * m) * (1 - p) ** (n * (m - 1))
    p_x_nonft = (1 - 2 * p / 3) ** (n_h * m) * (1 - 12 * p / 15) ** (n_cnot * m)
    p_x_trans1 = (1 - 12 * p / 15) ** n * (1 - 8 * p / 15) ** (n * (m - 1))
    p_x = p_x_spam * p_x_nonft * p_x_trans1

    p_z_spam = (1 - p) ** (n_h * m) * (1 - p) ** (n * (m - 1))
    p_z_nonft = (1 - p / 3) ** (n_h * m) * (1 - 3 * p / 15) ** (n_cnot * m)
    p_z_trans1 = (1 - 4 * p / 15) ** n * (1 - 2 * p / 15) ** (n * (m - 1))
    p_z_trans2 = (1 - 12 * p / 15) ** n * (1 - 8 * p / 15) ** (n * (m - 1))
    p_z = p_z_spam * p_z_nonft * p_z_trans1 * p_z_trans2
    return p_x, p_z


@dataclass(frozen=True)
class GammaInputs:
    """Inputs of the code-capacity reduction: prep-flip coefficients for
    the logical zero/plus ancillas, the per-location transversal CNOT
    coefficient c1 = 4/15, and the correctable error count t."""

    alpha: Fraction
    beta: Fraction
    t: int
    c1: Fraction = Fraction(4, 15)

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.c1 < 0:
            raise ValueError("coefficients must be nonnegative")
        if self.t < 1:
            raise ValueError("t must be at least 1")


def gamma_terms(inputs: GammaInputs) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    a = 8 * inputs.c1 + inputs.alpha + 2 * inputs.beta + 1
    b = 10 * inputs.c1 + 2 * inputs.alpha + 3 * inputs.beta + 1
    c = 3 * inputs.c1 + inputs.alpha + inputs.beta
    d = inputs.c1 + inputs.beta
    return a, b, c, d


def gamma(inputs: GammaInputs) -> mp.mpf:
    """gamma = (A^(t+1) + B^(t+1) - C^(t+1) - D^(t+1))^(1/(t+1))."""
    a, b, c, d = gamma_terms(inputs)
    e = inputs.t + 1
    radicand = a**e + b**e - c**e - d**e
    if radicand <= 0:
        raise ArithmeticError("nonpositive radicand in the reduction coefficient")
    with mp.workdps(MP_DPS):
        return mp.root(_mpf_fraction(radicand), e)


def _mpf_fraction(f: Fraction) -> mp.mpf:
    return mp.mpf(f.numerator) / mp.mpf(f.denominator)


def default_gamma_inputs(m_x: int, m_z: int, t: int) -> GammaInputs:
    """alpha from the zero-ancilla X rate, beta from the plus-ancilla Z rate."""
    zero = effective_rates(m_x, m_z, "zero")
    plus = effective_rates(m_x, m_z, "plus")
    return GammaInputs(alpha=zero.p_x_coeff, beta=plus.p_z_coeff, t=t)


def leading_coefficient(enumerator_diff, t: int, tie_adjustment: Fraction = Fraction(0)) -> Fraction:
    """Leading failure-count coefficient from logical-class weight counts.

    a = A'_{2t+1} C(2t+1, t+1) + (1/2) A'_{2t+2} C(2t+2, t+1), with an
    optional exact adjustment for configurations the half-tie term
    double-counts (they require a weight-(2t+2) logical overlapping a
    weight-(2t+1) logical in t+1 coordinates).
    """
    diff = list(enumerator_diff)
    w1 = 2 * t + 1
    w2 = 2 * t + 2
    a1 = diff[w1] if w1 < len(diff) else 0
    a2 = diff[w2] if w2 < len(diff) else 0
    a = Fraction(a1 * math.comb(w1, t + 1)) + Fraction(a2 * math.comb(w2, t + 1), 2)
    return a - tie_adjustment


def mld_failure_coefficient_exhaustive(code: CssCode, t: int, pauli: str = "X") -> Fraction:
    """Count weight-(t+1) errors a fair-tie ML decoder corrects wrongly.

    Builds exact class-minimum-weight tables over all patterns of weight
    at most t+1 and resolves every error directly; feasible through
    n = 63 at the distances in scope.
    """
    n = code.n
    target = "zero"
    if pauli == "X":
        syn_matrix = code.h_z
        log_matrix = code.logical_z
    else:
        syn_matrix = code.h_x
        log_matrix = code.logical_x
    syn_cols = [syn_matrix.mul_vec(1 << q) for q in range(n)]
    log_cols = [log_matrix.mul_vec(1 << q) for q in range(n)]

    classes: dict[int, dict[int, int]] = {0: {0: 0}}
    import itertools as _it

    for w in range(1, t + 2):
        for combo in _it.combinations(range(n), w):
            syn = 0
            log = 0
            for q in combo:
                syn ^= syn_cols[q]
                log ^= log_cols[q]
            bucket = classes.setdefault(syn, {})
            if log not in bucket:
                bucket[log] = w
    failures = Fraction(0)
    for combo in _it.combinations(range(n), t + 1):
        syn = 0
        log = 0
        for q in combo:
            syn ^= syn_cols[q]
            log ^= log_cols[q]
        bucket = classes[syn]
        best = min(bucket.values())
        argmin = [lg for lg, w in bucket.items() if w == best]
        own = bucket[log]
        if own > best:
            failures += 1
        elif len(argmin) > 1:
            wrong = sum(1 for lg in argmin if lg != log)
            failures += Fraction(wrong, len(argmin))
    return failures


def union_bound_logical_rate(enumerator_diff, p: float) -> float:
    """Union bound over logical classes: sum_w A'_w P(>= w/2 of w flip)."""
    total = 0.0
    for w, a_w in enumerate(enumerator_diff):
        if w == 0 or a_w <= 0:
            continue
        tail = 0.0
        for j in range(math.ceil(w / 2), w + 1):
            tail += math.comb(w, j) * p**j * (1 - p) ** (w - j)
        total += a_w * tail
    return total


@dataclass
class ThresholdResult:
    a: Fraction
    t: int
    gamma_value: mp.mpf | None
    p0_code_capacity: mp.mpf
    p0_circuit: mp.mpf | None

    def identity_residual(self) -> mp.mpf:
        """|a p0^(t+1) - p0| / p0 at the code-capacity point."""
        with mp.workdps(MP_DPS):
            p0 = self.p0_code_capacity
            lhs = _mpf_fraction(self.a) * p0 ** (self.t + 1)
            return abs(lhs - p0) / p0


def scaling_threshold(a: Fraction, t: int, gamma_value=None) -> ThresholdResult:
    """p0 = a^(-1/t); with a reduction coefficient, (a gamma^(t+1))^(-1/t)."""
    if a <= 0:
        raise ValueError("leading coefficient must be positive")
    with mp.workdps(MP_DPS):
        a_mp = _mpf_fraction(Fraction(a))
        p0_cc = mp.power(a_mp, mp.mpf(-1) / t)
        p0_circ = None
        if gamma_value is not None:
            g = mp.mpf(gamma_value)
            p0_circ = mp.power(a_mp * g ** (t + 1), mp.mpf(-1) / t)
    return ThresholdResult(Fraction(a), t, gamma_value, p0_cc, p0_circ)


def binomial_logical_diff(n: int, k_c: int, w_values) -> dict[int, Fraction]:
    """Binomial-approximation logical-class counts for codes whose exact
    enumerator is out of reach: A_w(C) ~ C(n,w)/2^(n-k_c), and the dual
    term C(n,w)/2^(k_c) subtracted exactly."""
    out = {}
    for w in w_values:
        c_term = Fraction(math.comb(n, w), 1 << (n - k_c))
        d_term = Fraction(math.comb(n, w), 1 << k_c)
        out[w] = c_term - d_term
    return out


@dataclass
class ThresholdRow:
    code_label: str
    n: int
    k: int
    d: int
    rate: Fraction
    level: str
    shape: tuple[int, int]
    a_x: Fraction
    a_sum: Fraction
    gamma_value: mp.mpf
    p0_code_capacity: mp.mpf
    p0_circuit: mp.mpf
    enum_source: str

    def csv_fields(self) -> list[str]:
        with mp.workdps(MP_DPS):
            return [
                self.code_label,
                str(self.n),
                str(self.k),
                str(self.d),
                f"{float(self.rate):.6f}",
                f"{float(self.a_sum):.6e}",
                mp.nstr(self.gamma_value, 12),
                mp.nstr(self.p0_code_capacity, 12),
                mp.nstr(self.p0_circuit, 12),
                self.level,
                self.enum_source,
            ]


THRESHOLD_CSV_HEADER = (
    "code,n,k,d,rate,a,gamma,p0_code_capacity,p0_circuit,level,enum_source"
)


def threshold_rows_for_code(
    css: CssCode,
    enum_diff=None,
    enum_source: str = "exact",
) -> list[ThresholdRow]:
    """Threshold rows at every optimization level of one code."""
    n, k = css.n, css.k
    d = css.d_true if css.d_true is not None else css.d_design
    t = (d - 1) // 2
    if enum_diff is None:
        if css.classical is None:
            raise ValueError("need the classical code or an explicit enumerator")
        enum_c, enum_dual = code_enumerator(css.classical)
        enum_diff = logical_weight_difference(enum_c, enum_dual)
    if isinstance(enum_diff, dict):
        max_w = max(enum_diff)
        diff_list = [enum_diff.get(w, Fraction(0)) for w in range(max_w + 1)]
    else:
        diff_list = list(enum_diff)
    a_x = leading_coefficient(diff_list, t)
    a_sum = 2 * a_x  # X and Z channels are mirror images for these codes
    levels = [("conventional", (t + 1, t + 1))]
    if t >= 2:
        levels.append(("optimized", (2, 2)))
    rows = []
    for level, shape in levels:
        m_x, m_z = shape
        g = gamma(default_gamma_inputs(m_x, m_z, t))
        res = scaling_threshold(a_sum, t, g)
        rows.append(
            ThresholdRow(
                code_label=f"[[{n},{k},{d}]]",
                n=n,
                k=k,
                d=d,
                rate=Fraction(k, n),
                level=level,
                shape=shape,
                a_x=a_x,
                a_sum=a_sum,
                gamma_value=g,
                p0_code_capacity=res.p0_code_capacity,
                p0_circuit=res.p0_circuit,
                enum_source=enum_source,
            )
        )
    return rows


def dual_containing_bch_parameters(n_max: int) -> list[tuple[int, int]]:
    """(m, delta) pairs of narrow-sense dual-containing BCH codes with
    odd designed distance, deduplicated by generator, up to length n_max."""
    from qbch.codes import bch_code, is_dual_containing
    from qbch.gf2poly import DEFAULT_PRIMITIVE_POLYS, FieldSpec

    out = []
    for m in sorted(DEFAULT_PRIMITIVE_POLYS):
        n = (1 << m) - 1
        if n > n_max:
            break
        spec = FieldSpec.default(m)
        seen = set()
        for delta in range(3, n, 2):
            try:
                code = bch_code(spec, delta)
            except ValueError:
                break
            if code.k_c <= n // 2:
                break
            if code.g.bits in seen:
                continue
            if not is_dual_containing(code):
                break
            seen.add(code.g.bits)
            out.append((m, delta))
    return out
