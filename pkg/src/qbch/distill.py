"""Two-step m1-to-1 x m2-to-1 entanglement-distillation protocols.

Step 1 runs m2 independent groups of m1 blocks; each group keeps its
first block.  Step 2 distills the m2 survivors down to one.  For a
logical-zero target the first step checks X errors (group keeper is the
control of each transversal CNOT, helpers measured qubit-wise in Z) and
the second step checks Z errors (final keeper is the target, helper
survivors are controls, measured qubit-wise in X).  For a logical-plus
target the blocks get a transversal Hadamard after preparation and the
two check types swap places.

First-step helper words ideally land in C_perp, so both the classical
parity checks and the logical parities are deterministic; second-step
words are uniform over C, leaving only the parity checks.  The
``logical_checks`` flag controls whether the first step postselects on
logical parities as well (default) or on the classical checks alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qbch.circuit import Circuit, Op
from qbch.codes import CssCode
from qbch.gf2mat import GF2Matrix
from qbch.symmetry import AutomorphismElement, verify_code_automorphism


class ProtocolError(ValueError):
    """Raised for inconsistent protocol descriptions."""


@dataclass(frozen=True)
class DistillationProtocol:
    code: CssCode
    target_state: str  # "zero" | "plus"
    shape: tuple[int, int]
    perms: tuple[tuple[AutomorphismElement, ...], ...]  # [group][position]
    block_circuit: Circuit
    logical_checks: bool = True

    @property
    def m1(self) -> int:
        return self.shape[0]

    @property
    def m2(self) -> int:
        return self.shape[1]

    @property
    def n_blocks(self) -> int:
        return self.m1 * self.m2

    def block_perm(self, group: int, pos: int) -> AutomorphismElement:
        return self.perms[group][pos]

    def first_step_type(self) -> str:
        return "X" if self.target_state == "zero" else "Z"

    def second_step_type(self) -> str:
        return "Z" if self.target_state == "zero" else "X"

    def describe(self) -> dict:
        return {
            "shape": list(self.shape),
            "target": self.target_state,
            "perms": [[p.label() for p in group] for group in self.perms],
            "logical_checks": self.logical_checks,
        }


def build_protocol(
    code: CssCode,
    shape: tuple[int, int],
    perms,
    target_state: str = "zero",
    block_circuit: Circuit | None = None,
    logical_checks: bool = True,
    check_perms: bool = True,
) -> DistillationProtocol:
    """Assemble and validate a protocol descriptor.

    ``perms`` is a sequence of m2 groups of m1 permutations, mirroring the
    parenthesized operator sequences used for optimized protocols; pass
    identity permutations everywhere for the conventional construction.
    """
    m1, m2 = shape
    if m1 < 2 or m2 < 2:
        raise ProtocolError("group sizes must be at least 2")
    if target_state not in ("zero", "plus"):
        raise ProtocolError("target_state must be 'zero' or 'plus'")
    groups = [tuple(g) for g in perms]
    if len(groups) != m2 or any(len(g) != m1 for g in groups):
        raise ProtocolError(f"permutations must form {m2} groups of {m1}")
    if check_perms:
        for gi, group in enumerate(groups):
            for pi, perm in enumerate(group):
                if not verify_code_automorphism(code, perm):
                    raise ProtocolError(
                        f"permutation {perm.label()} at group {gi}, position {pi} "
                        "is not a code automorphism"
                    )
    if block_circuit is None:
        from qbch.circuit import synth_css_prep

        block_circuit = synth_css_prep(code)
    if block_circuit.n_qubits != code.n:
        raise ProtocolError("block circuit width does not match the code length")
    return DistillationProtocol(
        code=code,
        target_state=target_state,
        shape=(m1, m2),
        perms=tuple(groups),
        block_circuit=block_circuit,
        logical_checks=logical_checks,
    )


def identity_protocol(code: CssCode, shape: tuple[int, int], **kwargs) -> DistillationProtocol:
    """Conventional protocol: identity permutations everywhere."""
    m1, m2 = shape
    ident = AutomorphismElement.identity(code.n)
    perms = [[ident] * m1 for _ in range(m2)]
    return build_protocol(code, shape, perms, **kwargs)


@dataclass(frozen=True)
class AcceptCheck:
    """One postselected parity set over a helper block's measurements.

    ``value = rows . flips`` where bit j of ``flips`` says whether the
    measurement of block-coordinate j reported a flipped outcome.
    """

    step: int
    block: tuple[int, int]  # (group, position) of the measured block
    rows: GF2Matrix
    meas_locations: tuple[int, ...]  # location id of coordinate j's readout


@dataclass(frozen=True)
class AssembledCircuit:
    protocol: DistillationProtocol
    circuit: Circuit
    accept_checks: tuple[AcceptCheck, ...]
    kept_block: range
    block_bases: dict = field(repr=False, default_factory=dict)
    block_op_ranges: dict = field(repr=False, default_factory=dict)

    @property
    def n_data_qubits(self) -> int:
        return self.circuit.n_qubits

    def checks_for_step(self, step: int) -> list[AcceptCheck]:
        return [c for c in self.accept_checks if c.step == step]


def assemble(protocol: DistillationProtocol) -> AssembledCircuit:
    """Expand a protocol into one flat circuit plus its acceptance parities."""
    code = protocol.code
    n = code.n
    m1, m2 = protocol.shape
    total_qubits = n * m1 * m2

    def base(group: int, pos: int) -> int:
        return (group * m1 + pos) * n

    op_list: list[tuple[str, tuple[int, ...]]] = []
    block_bases = {}
    block_op_ranges = {}

    # block preparations, wires relabeled through each block's permutation
    for g in range(m2):
        for i in range(m1):
            b = base(g, i)
            block_bases[(g, i)] = b
            perm = protocol.block_perm(g, i)
            qubit_map = [b + perm.image(q) for q in range(n)]
            start = len(op_list)
            for op in protocol.block_circuit.ops:
                op_list.append((op.kind, tuple(qubit_map[q] for q in op.qubits)))
            if protocol.target_state == "plus":
                for q in range(n):
                    op_list.append(("H", (b + q,)))
            block_op_ranges[(g, i)] = range(start, len(op_list))

    first_type = protocol.first_step_type()
    # first step inside each group
    step1_meas: dict[tuple[int, int], list[int]] = {}
    for g in range(m2):
        keeper = base(g, 0)
        for i in range(1, m1):
            helper = base(g, i)
            for q in range(n):
                if first_type == "X":
                    op_list.append(("CNOT", (keeper + q, helper + q)))
                else:
                    op_list.append(("CNOT", (helper + q, keeper + q)))
        for i in range(1, m1):
            helper = base(g, i)
            locs = []
            for q in range(n):
                locs.append(len(op_list))
                op_list.append(("MZ" if first_type == "X" else "MX", (helper + q,)))
            step1_meas[(g, i)] = locs

    # second step across the survivors
    second_type = protocol.second_step_type()
    keeper = base(0, 0)
    step2_meas: dict[tuple[int, int], list[int]] = {}
    for g in range(1, m2):
        helper = base(g, 0)
        for q in range(n):
            if second_type == "Z":
                op_list.append(("CNOT", (helper + q, keeper + q)))
            else:
                op_list.append(("CNOT", (keeper + q, helper + q)))
    for g in range(1, m2):
        helper = base(g, 0)
        locs = []
        for q in range(n):
            locs.append(len(op_list))
            op_list.append(("MX" if second_type == "Z" else "MZ", (helper + q,)))
        step2_meas[(g, 0)] = locs

    circuit = Circuit.build(total_qubits, op_list)

    step1_rows = first_step_check_matrix(code, protocol.target_state, protocol.logical_checks)
    step2_rows = second_step_check_matrix(code, protocol.target_state)
    checks = []
    for (g, i), locs in step1_meas.items():
        checks.append(AcceptCheck(1, (g, i), step1_rows, tuple(locs)))
    for (g, i), locs in step2_meas.items():
        checks.append(AcceptCheck(2, (g, i), step2_rows, tuple(locs)))

    return AssembledCircuit(
        protocol=protocol,
        circuit=circuit,
        accept_checks=tuple(checks),
        kept_block=range(keeper, keeper + n),
        block_bases=block_bases,
        block_op_ranges=block_op_ranges,
    )


def first_step_check_matrix(code: CssCode, target_state: str, logical_checks: bool) -> GF2Matrix:
    """Parities of a first-step helper word (ideally a C_perp element)."""
    if target_state == "zero":
        extra = code.logical_z
        base = code.h_z
    else:
        extra = code.logical_x
        base = code.h_x
    return base.stack(extra) if logical_checks else base


def second_step_check_matrix(code: CssCode, target_state: str) -> GF2Matrix:
    """Parities of a second-step helper word (ideally a C element)."""
    return code.h_x if target_state == "zero" else code.h_z


def ancilla_volume(shape: tuple[int, int], n: int) -> int:
    return shape[0] * shape[1] * n


def protocol_to_json(protocol: DistillationProtocol, code_ref: str = "") -> dict:
    data = protocol.describe()
    data["code_ref"] = code_ref
    return data


def protocol_from_json(
    data: dict,
    code: CssCode,
    block_circuit: Circuit | None = None,
) -> DistillationProtocol:
    n = code.n
    perms = [
        [AutomorphismElement.parse(p, n) for p in group] for group in data["perms"]
    ]
    shape = tuple(data["shape"])
    return build_protocol(
        code,
        (int(shape[0]), int(shape[1])),
        perms,
        target_state=data.get("target", "zero"),
        block_circuit=block_circuit,
        logical_checks=bool(data.get("logical_checks", True)),
    )
