"""Strict fault-tolerance verification of distillation protocols.

The check runs one pass per Pauli type.  In the pass for the type the
FIRST step detects, faults distribute over the m1 blocks of a group
(plus starred transversal-CNOT locations when m1 >= 3); groups never
share detection words, and a multi-group pattern whose per-group parts
all survive their own group-level checks has reduced weight at most the
sum of the per-group bounds, so per-group analysis is exhaustive.  In
the second-step pass each group collapses into one "survivor" source
(all of its preparation circuits feed the survivor's error), the
survivors share the second step's words, and starred locations appear
for m2 >= 3.

A case = (pass, group, fault count w, ordered composition of w over the
case's sources).  Within a case, partial fault combinations are XORed
into signature integers (one label field per detection word) and
undetected patterns are found by hashing one half of the combination
slots against the other: equal signatures XOR to zero.  A surviving
pattern is malignant when the reduced weight of its kept-block residual
exceeds its fault count.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

from qbch.circuit import Circuit, FaultLocation, enumerate_single_faults
from qbch.codes import CssCode, ResidualWeightTable
from qbch.distill import (
    DistillationProtocol,
    first_step_check_matrix,
    second_step_check_matrix,
)
from qbch.gf2mat import GF2Matrix


class VerifierBudgetError(RuntimeError):
    """A case split would exceed the memory budget; includes the case id."""


@dataclass(frozen=True)
class FaultEffect:
    """One fault combination's consequence, XOR-composable.

    ``multiplicity`` counts the faults the effect represents; ``degeneracy``
    counts how many concrete (location, Pauli) choices realize it.
    """

    block: int
    multiplicity: int
    detect_parity: int
    residual: int
    degeneracy: int = 1
    reps: tuple = ()

    def combine(self, other: "FaultEffect") -> "FaultEffect":
        return FaultEffect(
            block=self.block if self.block == other.block else -1,
            multiplicity=self.multiplicity + other.multiplicity,
            detect_parity=self.detect_parity ^ other.detect_parity,
            residual=self.residual ^ other.residual,
            degeneracy=self.degeneracy * other.degeneracy,
            reps=self.reps + other.reps,
        )


@dataclass(frozen=True)
class MalignantPattern:
    pauli: str
    w: int
    case_id: str
    residual: int
    reduced_weight: int
    rw_exact: bool
    locations: tuple
    degeneracy: int

    def to_json(self) -> dict:
        return {
            "pauli": self.pauli,
            "w": self.w,
            "case": self.case_id,
            "residual_hex": hex(self.residual),
            "reduced_weight": self.reduced_weight,
            "reduced_weight_exact": self.rw_exact,
            "locations": [list(loc) for loc in self.locations],
            "degeneracy": self.degeneracy,
        }


@dataclass
class Verdict:
    passed: bool
    malignant_patterns: list[MalignantPattern]
    cases: int
    undetected: int
    table_sizes: dict
    elapsed_s: float

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "cases": self.cases,
            "undetected": self.undetected,
            "malignant": [p.to_json() for p in self.malignant_patterns],
            "table_sizes": self.table_sizes,
            "elapsed_s": self.elapsed_s,
        }


@dataclass(frozen=True)
class _Effect:
    sig: int
    residual: int
    rlabel: int
    degeneracy: int
    idx: int
    rep: tuple


@dataclass
class _Source:
    name: str
    word_bits: tuple[int, ...]  # word indices this source's label feeds
    in_residual: bool
    effects: list[_Effect]


def _project_block_effects(
    circuit: Circuit,
    perm,
    component: str,
    check: GF2Matrix,
    rtable: ResidualWeightTable,
    in_residual: bool,
    block_tag: str,
) -> list[tuple[int, int, int, int, tuple]]:
    """(pattern, label, rlabel, degeneracy, rep) per deduplicated fault."""
    out = []
    for pf in enumerate_single_faults(circuit, component):
        pattern = perm.apply(pf.bits)
        label = check.mul_vec(pattern)
        rlabel = rtable.label_of(pattern) if in_residual else 0
        rep = (block_tag, pf.representative.location_id, pf.representative.pauli, pf.multiplicity)
        out.append((pattern, label, rlabel, pf.multiplicity, rep))
    return out


def build_fault_table(protocol: DistillationProtocol, block: int, pass_type: str) -> list[FaultEffect]:
    """Single-fault effects of one block's prep circuit for one pass.

    Patterns are permuted by the block's automorphism and labeled by the
    detecting step's accept checks; only blocks that feed the kept block
    report a nonzero residual.
    """
    m1, _ = protocol.shape
    g, i = divmod(block, m1)
    first = pass_type == protocol.first_step_type()
    if first:
        check = first_step_check_matrix(protocol.code, protocol.target_state, protocol.logical_checks)
        in_residual = i == 0
    else:
        check = second_step_check_matrix(protocol.code, protocol.target_state)
        in_residual = g == 0
    circuit = _effective_block_circuit(protocol)
    perm = protocol.block_perm(g, i)
    effects = []
    for pattern, label, _, degeneracy, rep in _project_block_effects(
        circuit, perm, pass_type, check,
        protocol.code.residual_table(pass_type, protocol.code.t + 1, protocol.target_state),
        in_residual, f"block[{g}][{i}]",
    ):
        effects.append(
            FaultEffect(
                block=block,
                multiplicity=1,
                detect_parity=label,
                residual=pattern if in_residual else 0,
                degeneracy=degeneracy,
                reps=(rep,),
            )
        )
    return effects


def _effective_block_circuit(protocol: DistillationProtocol) -> Circuit:
    """Block prep circuit, plus the transversal-H layer for plus targets."""
    if protocol.target_state == "zero":
        return protocol.block_circuit
    ops = [(op.kind, op.qubits) for op in protocol.block_circuit.ops]
    ops.extend(("H", (q,)) for q in range(protocol.code.n))
    return Circuit.build(protocol.block_circuit.n_qubits, ops)


def mitm_match(table_a, table_b, relation: int = 0):
    """Stream all pairs (a, b) with a.detect_parity ^ b.detect_parity == relation."""
    index: dict[int, list] = {}
    for b in table_b:
        index.setdefault(b.detect_parity ^ relation, []).append(b)
    for a in table_a:
        for b in index.get(a.detect_parity, ()):
            yield a, b


def _compositions(total: int, parts: int):
    """Ordered compositions of ``total`` into ``parts`` nonnegative ints."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _make_sig(label: int, words: tuple[int, ...], width: int) -> int:
    sig = 0
    for w in words:
        sig ^= label << (w * width)
    return sig


def _build_pass_sources(
    protocol: DistillationProtocol,
    pass_type: str,
    rtable: ResidualWeightTable,
) -> list[tuple[str, list[_Source]]]:
    """(case-scope name, sources) units for one pass."""
    code = protocol.code
    n = code.n
    m1, m2 = protocol.shape
    first = pass_type == protocol.first_step_type()
    circuit = _effective_block_circuit(protocol)
    if first:
        check = first_step_check_matrix(code, protocol.target_state, protocol.logical_checks)
    else:
        check = second_step_check_matrix(code, protocol.target_state)
    width = check.nrows
    star_cols = [check.mul_vec(1 << q) for q in range(n)]
    star_rlabels = [rtable.label_of(1 << q) for q in range(n)]

    # effects per block, cached per distinct permutation
    def block_effects(g: int, i: int, in_residual: bool) -> list[tuple[int, int, int, int, tuple]]:
        perm = protocol.block_perm(g, i)
        return _project_block_effects(
            circuit, perm, pass_type, check, rtable, in_residual, f"block[{g}][{i}]"
        )

    units = []
    if first:
        n_words = m1 - 1
        for g in range(m2):
            sources = []
            keeper_words = tuple(range(n_words))
            eff = []
            for idx, (pattern, label, rlabel, deg, rep) in enumerate(block_effects(g, 0, True)):
                eff.append(_Effect(_make_sig(label, keeper_words, width), pattern, rlabel, deg, idx, rep))
            sources.append(_Source(f"g{g}.keeper", keeper_words, True, eff))
            for i in range(1, m1):
                words = (i - 1,)
                eff = []
                for idx, (pattern, label, rlabel, deg, rep) in enumerate(block_effects(g, i, False)):
                    eff.append(_Effect(_make_sig(label, words, width), 0, 0, deg, idx, rep))
                sources.append(_Source(f"g{g}.helper{i}", words, False, eff))
            for s in range(1, m1 - 1):
                words = tuple(range(s, n_words))
                eff = []
                for q in range(n):
                    eff.append(
                        _Effect(
                            _make_sig(star_cols[q], words, width),
                            1 << q,
                            star_rlabels[q],
                            4,
                            q,
                            (f"g{g}.star{s}", -1, f"tCNOT{s} q{q}", 4),
                        )
                    )
                sources.append(_Source(f"g{g}.star{s}", words, True, eff))
            units.append((f"{pass_type}/group{g}", sources))
    else:
        n_words = m2 - 1
        sources = []
        keeper_words = tuple(range(n_words))
        eff = []
        idx = 0
        merged: dict[int, tuple[int, int, int, tuple]] = {}
        for i in range(m1):
            for pattern, label, rlabel, deg, rep in block_effects(0, i, True):
                if pattern in merged:
                    label0, rlabel0, deg0, rep0 = merged[pattern]
                    merged[pattern] = (label0, rlabel0, deg0 + deg, rep0)
                else:
                    merged[pattern] = (label, rlabel, deg, rep)
        for pattern in sorted(merged):
            label, rlabel, deg, rep = merged[pattern]
            eff.append(_Effect(_make_sig(label, keeper_words, width), pattern, rlabel, deg, idx, rep))
            idx += 1
        sources.append(_Source("survivor0", keeper_words, True, eff))
        for g in range(1, m2):
            words = (g - 1,)
            merged = {}
            for i in range(m1):
                for pattern, label, rlabel, deg, rep in block_effects(g, i, False):
                    if pattern in merged:
                        label0, rlabel0, deg0, rep0 = merged[pattern]
                        merged[pattern] = (label0, rlabel0, deg0 + deg, rep0)
                    else:
                        merged[pattern] = (label, rlabel, deg, rep)
            eff = []
            idx = 0
            for pattern in sorted(merged):
                label, rlabel, deg, rep = merged[pattern]
                eff.append(_Effect(_make_sig(label, words, width), 0, 0, deg, idx, rep))
                idx += 1
            sources.append(_Source(f"survivor{g}", words, False, eff))
        for s in range(1, m2 - 1):
            words = tuple(range(s, n_words))
            eff = []
            for q in range(n):
                eff.append(
                    _Effect(
                        _make_sig(star_cols[q], words, width),
                        1 << q,
                        star_rlabels[q],
                        4,
                        q,
                        (f"step2.star{s}", -1, f"tCNOT{s} q{q}", 4),
                    )
                )
            sources.append(_Source(f"step2.star{s}", words, True, eff))
        units.append((f"{pass_type}/step2", sources))
    return units


def _fold_combo(source: _Source, role: str, combo) -> tuple[int, int, int, int, tuple, tuple | None]:
    sig = 0
    residual = 0
    rlabel = 0
    deg = 1
    reps = []
    for e in combo:
        sig ^= e.sig
        deg *= e.degeneracy
        reps.append(e.rep)
        if source.in_residual:
            residual ^= e.residual
            rlabel ^= e.rlabel
    span = None
    if role == "boundary" and combo:
        idxs = [e.idx for e in combo]
        span = (min(idxs), max(idxs))
    return sig, residual, rlabel, deg, tuple(reps), span


def _enumerate_side(groups: list[tuple[_Source, int, str]]):
    """All combination products over (source, count) groups.

    Yields (sig, residual, rlabel, degeneracy, reps, boundary_span).  The
    first group streams lazily (it may be combinatorially large); the
    rest are materialized, which is cheap because the slot split puts at
    most one multi-fault group first on each side.
    """
    if not groups:
        yield 0, 0, 0, 1, (), None
        return
    source, count, role = groups[0]
    rest = list(_enumerate_side(groups[1:]))
    for combo in itertools.combinations(source.effects, count):
        sig0, res0, rl0, deg0, reps0, span0 = _fold_combo(source, role, combo)
        for sig1, res1, rl1, deg1, reps1, span1 in rest:
            yield (
                sig0 ^ sig1,
                res0 ^ res1,
                rl0 ^ rl1,
                deg0 * deg1,
                reps0 + reps1,
                span0 if span0 is not None else span1,
            )


def _case_combination_count(groups) -> int:
    total = 1
    for source, count, _ in groups:
        total *= math.comb(len(source.effects), count)
    return total


def check_strict_ft(
    protocol: DistillationProtocol,
    memory_budget_bytes: int = 8 << 30,
    collect_limit: int | None = None,
) -> Verdict:
    """Exhaustive malignant-pattern search over both Pauli passes."""
    start = time.monotonic()
    code = protocol.code
    t = code.t
    w_min = 2 if protocol.logical_checks else 1
    malignant: list[MalignantPattern] = []
    cases = 0
    undetected = 0
    table_sizes: dict[str, int] = {}

    for pass_type in (protocol.first_step_type(), protocol.second_step_type()):
        rtable = code.residual_table(pass_type, t + 1, protocol.target_state)
        units = _build_pass_sources(protocol, pass_type, rtable)
        for unit_name, sources in units:
            for src in sources:
                table_sizes[f"{unit_name}/{src.name}"] = len(src.effects)
            for w in range(w_min, t + 1):
                for comp in _compositions(w, len(sources)):
                    case_id = f"{unit_name}/w{w}/" + ",".join(map(str, comp))
                    cases += 1
                    found = _run_case(
                        sources, comp, w, rtable, memory_budget_bytes, case_id, pass_type
                    )
                    undetected += found[0]
                    malignant.extend(found[1])
                    if collect_limit is not None and len(malignant) >= collect_limit:
                        malignant = malignant[:collect_limit]
                        elapsed = time.monotonic() - start
                        return Verdict(False, malignant, cases, undetected, table_sizes, elapsed)

    malignant.sort(key=lambda p: (p.pauli, p.w, p.case_id, p.residual))
    elapsed = time.monotonic() - start
    return Verdict(len(malignant) == 0, malignant, cases, undetected, table_sizes, elapsed)


def _run_case(
    sources: list[_Source],
    comp: tuple[int, ...],
    w: int,
    rtable: ResidualWeightTable,
    budget: int,
    case_id: str,
    pass_type: str,
) -> tuple[int, list[MalignantPattern]]:
    active = [(s, k) for s, k in zip(sources, comp) if k > 0]
    if not active:
        return 0, []
    # split the w fault slots in half; at most one source spans the boundary,
    # and a spanning source's subsets are deduplicated by index order
    low_groups: list[tuple[_Source, int, str]] = []
    high_groups: list[tuple[_Source, int, str]] = []
    half = w // 2
    used = 0
    for s, k in active:
        if used >= half:
            high_groups.append((s, k, "plain"))
        elif used + k <= half:
            low_groups.append((s, k, "plain"))
        else:
            a = half - used
            low_groups.append((s, a, "boundary"))
            high_groups.append((s, k - a, "boundary"))
        used += k
    # stream the combinatorially largest group first on each side
    low_groups.sort(key=lambda g: -math.comb(len(g[0].effects), g[1]))
    high_groups.sort(key=lambda g: -math.comb(len(g[0].effects), g[1]))

    low_size = _case_combination_count(low_groups)
    high_size = _case_combination_count(high_groups)
    if min(low_size, high_size) * 96 > budget:
        raise VerifierBudgetError(
            f"case {case_id}: {low_size} x {high_size} partial combinations exceed the memory budget"
        )
    index_low = low_size <= high_size
    index_groups, probe_groups = (low_groups, high_groups) if index_low else (high_groups, low_groups)

    index: dict[int, list] = {}
    for sig, residual, rlabel, deg, reps, span in _enumerate_side(index_groups):
        index.setdefault(sig, []).append((residual, rlabel, deg, reps, span))

    n_undetected = 0
    malignant = []
    for sig, residual, rlabel, deg, reps, span in _enumerate_side(probe_groups):
        bucket = index.get(sig)
        if not bucket:
            continue
        for i_res, i_rlabel, i_deg, i_reps, i_span in bucket:
            if span is not None and i_span is not None:
                low_span, high_span = (i_span, span) if index_low else (span, i_span)
                if not low_span[1] < high_span[0]:
                    continue
            n_undetected += 1
            total_res = residual ^ i_res
            total_rlabel = rlabel ^ i_rlabel
            rw = rtable.query_label(total_rlabel)
            if rw is not None and rw <= w:
                continue
            malignant.append(
                MalignantPattern(
                    pauli=pass_type,
                    w=w,
                    case_id=case_id,
                    residual=total_res,
                    reduced_weight=rw if rw is not None else rtable.w_max + 1,
                    rw_exact=rw is not None,
                    locations=tuple(sorted(i_reps + reps)),
                    degeneracy=deg * i_deg,
                )
            )
    malignant.sort(key=lambda p: (p.residual, p.locations))
    return n_undetected, malignant


def search_permutations(
    code: CssCode,
    shape: tuple[int, int],
    generator_set,
    budget: int,
    target_state: str = "zero",
    block_circuit: Circuit | None = None,
    logical_checks: bool = True,
    memory_budget_bytes: int = 8 << 30,
):
    """Try permutation assignments in lexicographic order; return passers.

    ``generator_set`` is a sequence of AutomorphismElements.  Assignments
    fill the m1*m2 block slots row-major; ``budget`` caps how many
    assignments are checked.  Returns (assignment, Verdict) pairs for
    every passing assignment, in iteration order.
    """
    from qbch.distill import build_protocol

    m1, m2 = shape
    slots = m1 * m2
    gens = sorted(generator_set, key=lambda p: (p.shift, p.frobenius_power))
    results = []
    tried = 0
    for combo in itertools.product(gens, repeat=slots):
        if tried >= budget:
            break
        tried += 1
        perms = [combo[g * m1 : (g + 1) * m1] for g in range(m2)]
        protocol = build_protocol(
            code,
            shape,
            perms,
            target_state=target_state,
            block_circuit=block_circuit,
            logical_checks=logical_checks,
        )
        verdict = check_strict_ft(protocol, memory_budget_bytes=memory_budget_bytes)
        if verdict.passed:
            results.append((tuple(p.label() for p in combo), verdict))
    return results
