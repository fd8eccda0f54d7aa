"""Clifford circuit representation and exact Pauli-fault propagation.

Circuits are ordered lists of PrepZ/PrepX/H/CNOT/MeasZ/MeasX ops with
dense location ids.  Fault semantics: a Pauli is inserted immediately
after a faulty gate, a flip lands after a preparation and before a
measurement readout; the fault is then conjugated through every later
op.  Y faults carry both an X and a Z component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from qbch.codes import CssCode

PAULI_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_SINGLE_LABELS = ("X", "Y", "Z")
_TWO_LABELS = tuple(
    a + b for a in "IXYZ" for b in "IXYZ" if not (a == "I" and b == "I")
)

MNEMONICS = ("PZ", "PX", "H", "CNOT", "MZ", "MX")
_ARITY = {"PZ": 1, "PX": 1, "H": 1, "CNOT": 2, "MZ": 1, "MX": 1}


class CircuitError(ValueError):
    """Raised for malformed circuits or circuit text."""


@dataclass(frozen=True)
class Op:
    kind: str
    qubits: tuple[int, ...]
    location_id: int


@dataclass(frozen=True)
class FaultLocation:
    """One fault: a location plus the Pauli label applicable to its op."""

    location_id: int
    pauli: str


@dataclass
class PauliFrame:
    """Accumulated X/Z flips plus recorded measurement-readout flips."""

    x_bits: int = 0
    z_bits: int = 0
    measurement_flips: int = 0  # bit per location id

    def __xor__(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(
            self.x_bits ^ other.x_bits,
            self.z_bits ^ other.z_bits,
            self.measurement_flips ^ other.measurement_flips,
        )

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x_bits, self.z_bits, self.measurement_flips)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Op, ...]

    @classmethod
    def build(cls, n_qubits: int, op_list) -> "Circuit":
        ops = []
        measured: set[int] = set()
        for i, (kind, qubits) in enumerate(op_list):
            qubits = tuple(qubits)
            if kind not in MNEMONICS:
                raise CircuitError(f"unknown op kind {kind!r}")
            if len(qubits) != _ARITY[kind]:
                raise CircuitError(f"{kind} takes {_ARITY[kind]} qubit(s)")
            if kind == "CNOT" and qubits[0] == qubits[1]:
                raise CircuitError("CNOT qubits must be distinct")
            for q in qubits:
                if not 0 <= q < n_qubits:
                    raise CircuitError(f"qubit {q} out of range")
                if q in measured:
                    raise CircuitError(f"qubit {q} reused after measurement")
            if kind in ("MZ", "MX"):
                measured.add(qubits[0])
            ops.append(Op(kind, qubits, i))
        return cls(n_qubits, tuple(ops))

    @property
    def n_locations(self) -> int:
        return len(self.ops)

    @property
    def cnot_count(self) -> int:
        return sum(1 for op in self.ops if op.kind == "CNOT")

    @property
    def h_count(self) -> int:
        return sum(1 for op in self.ops if op.kind == "H")

    @property
    def depth(self) -> int:
        time = [0] * self.n_qubits
        depth = 0
        for op in self.ops:
            t = max(time[q] for q in op.qubits) + 1
            for q in op.qubits:
                time[q] = t
            depth = max(depth, t)
        return depth

    def stats(self) -> dict:
        return {"cnot_count": self.cnot_count, "depth": self.depth, "h_count": self.h_count}

    def relabeled(self, qubit_map, n_qubits: int, location_offset: int = 0) -> tuple[Op, ...]:
        """Ops with qubits mapped through ``qubit_map`` and shifted ids."""
        out = []
        for op in self.ops:
            out.append(
                Op(op.kind, tuple(qubit_map[q] for q in op.qubits), op.location_id + location_offset)
            )
        return tuple(out)


def fault_labels(kind: str) -> tuple[str, ...]:
    """Nontrivial Pauli labels applicable to an op kind."""
    if kind == "CNOT":
        return _TWO_LABELS
    if kind == "H":
        return _SINGLE_LABELS
    if kind in ("PZ", "MZ"):
        return ("X",)
    if kind in ("PX", "MX"):
        return ("Z",)
    raise CircuitError(f"unknown op kind {kind!r}")


def propagate_fault(circuit: Circuit, fault: FaultLocation) -> PauliFrame:
    """Exact frame of one fault at the end of the circuit."""
    ops = circuit.ops
    if not 0 <= fault.location_id < len(ops):
        raise CircuitError("fault location out of range")
    op = ops[fault.location_id]
    labels = fault_labels(op.kind)
    if fault.pauli not in labels:
        raise CircuitError(f"label {fault.pauli!r} not applicable to {op.kind}")
    frame = PauliFrame()
    if op.kind in ("MZ", "MX"):
        # readout flip just before the measurement; qubit is consumed
        frame.measurement_flips |= 1 << op.location_id
        return frame
    for ch, q in zip(fault.pauli, op.qubits):
        x, z = PAULI_XZ[ch]
        frame.x_bits |= x << q
        frame.z_bits |= z << q
    for later in ops[fault.location_id + 1 :]:
        _apply_op(frame, later)
    return frame


def _apply_op(frame: PauliFrame, op: Op) -> None:
    kind = op.kind
    if kind == "CNOT":
        c, t = op.qubits
        frame.x_bits ^= ((frame.x_bits >> c) & 1) << t
        frame.z_bits ^= ((frame.z_bits >> t) & 1) << c
    elif kind == "H":
        q = op.qubits[0]
        xb = (frame.x_bits >> q) & 1
        zb = (frame.z_bits >> q) & 1
        frame.x_bits ^= (xb ^ zb) << q
        frame.z_bits ^= (xb ^ zb) << q
    elif kind == "MZ":
        q = op.qubits[0]
        if (frame.x_bits >> q) & 1:
            frame.measurement_flips ^= 1 << op.location_id
        frame.x_bits &= ~(1 << q)
        frame.z_bits &= ~(1 << q)
    elif kind == "MX":
        q = op.qubits[0]
        if (frame.z_bits >> q) & 1:
            frame.measurement_flips ^= 1 << op.location_id
        frame.x_bits &= ~(1 << q)
        frame.z_bits &= ~(1 << q)
    elif kind in ("PZ", "PX"):
        q = op.qubits[0]
        frame.x_bits &= ~(1 << q)
        frame.z_bits &= ~(1 << q)
    else:  # pragma: no cover
        raise CircuitError(f"unknown op kind {kind!r}")


def propagate_frame(circuit: Circuit, frame: PauliFrame, start: int = 0) -> PauliFrame:
    """Push an existing frame through ops[start:]; used by oracles."""
    out = frame.copy()
    for op in circuit.ops[start:]:
        _apply_op(out, op)
    return out


@dataclass(frozen=True)
class ProjectedFault:
    """A deduplicated single-fault effect projected to one Pauli component."""

    bits: int
    meas_flips: int
    multiplicity: int
    representative: FaultLocation
    members: tuple[FaultLocation, ...] = field(repr=False, default=())


def enumerate_single_faults(circuit: Circuit, component: str) -> list[ProjectedFault]:
    """Every single-fault effect, projected to X or Z, merged by frame.

    Faults whose projection is the zero frame are dropped: they are
    exactly reproduced by a lower-order pattern in any multi-fault
    analysis.
    """
    if component not in ("X", "Z"):
        raise ValueError("component must be 'X' or 'Z'")
    meas_kind = "MZ" if component == "X" else "MX"
    meas_mask = 0
    for op in circuit.ops:
        if op.kind == meas_kind:
            meas_mask |= 1 << op.location_id
    merged: dict[tuple[int, int], list[FaultLocation]] = {}
    for op in circuit.ops:
        for label in fault_labels(op.kind):
            fault = FaultLocation(op.location_id, label)
            frame = propagate_fault(circuit, fault)
            bits = frame.x_bits if component == "X" else frame.z_bits
            flips = frame.measurement_flips & meas_mask
            if bits == 0 and flips == 0:
                continue
            merged.setdefault((bits, flips), []).append(fault)

    def pure(fault: FaultLocation) -> bool:
        # a pure-component label carries no cross-type part that other
        # passes could detect; prefer it as the class representative
        return all(ch in ("I", component) for ch in fault.pauli)

    out = []
    for (bits, flips), faults in sorted(merged.items()):
        rep = next((f for f in faults if pure(f)), faults[0])
        out.append(
            ProjectedFault(
                bits=bits,
                meas_flips=flips,
                multiplicity=len(faults),
                representative=rep,
                members=tuple(faults),
            )
        )
    return out


def synth_css_prep(code: CssCode) -> Circuit:
    """Baseline logical-zero preparation circuit.

    RREF on h_x picks pivot qubits; each pivot gets a Hadamard and fans
    out by CNOT to the rest of its row support.  The prepared stabilizer
    group then equals <h_x rows as X, h_z rows and logical Z's as Z>.
    """
    red, pivots = code.h_x.rref()
    ops: list[tuple[str, tuple[int, ...]]] = []
    for q in range(code.n):
        ops.append(("PZ", (q,)))
    for p in pivots:
        ops.append(("H", (p,)))
    for i, p in enumerate(pivots):
        row = red.rows[i]
        targets = []
        rr = row & ~(1 << p)
        while rr:
            j = (rr & -rr).bit_length() - 1
            targets.append(j)
            rr &= rr - 1
        for t in targets:
            ops.append(("CNOT", (p, t)))
    return Circuit.build(code.n, ops)


def prepared_stabilizer_generators(circuit: Circuit) -> list[PauliFrame]:
    """Conjugate the initial product-state stabilizers through the circuit.

    Each preparation contributes one generator (Z for PrepZ, X for PrepX)
    pushed through every later op.  Valid for measurement-free circuits;
    sign tracking is omitted because the synthesized fan-out circuits
    never route a generator through a Y.
    """
    gens = []
    for i, op in enumerate(circuit.ops):
        if op.kind not in ("PZ", "PX"):
            continue
        q = op.qubits[0]
        frame = PauliFrame()
        if op.kind == "PZ":
            frame.z_bits = 1 << q
        else:
            frame.x_bits = 1 << q
        for later in circuit.ops[i + 1 :]:
            _apply_op(frame, later)
        gens.append(frame)
    return gens


def serialize_circuit(circuit: Circuit) -> str:
    lines = []
    for op in circuit.ops:
        lines.append(" ".join([op.kind] + [str(q) for q in op.qubits]))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str, n_qubits: int | None = None) -> Circuit:
    op_list = []
    max_q = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind not in MNEMONICS:
            raise CircuitError(f"line {lineno}: unknown mnemonic {kind!r}")
        try:
            qubits = tuple(int(tok) for tok in parts[1:])
        except ValueError:
            raise CircuitError(f"line {lineno}: qubit indices must be decimal integers") from None
        if len(qubits) != _ARITY[kind]:
            raise CircuitError(f"line {lineno}: {kind} takes {_ARITY[kind]} qubit(s)")
        if any(q < 0 for q in qubits):
            raise CircuitError(f"line {lineno}: negative qubit index")
        if n_qubits is not None and any(q >= n_qubits for q in qubits):
            raise CircuitError(f"line {lineno}: qubit out of range")
        max_q = max(max_q, *qubits)
        op_list.append((kind, qubits, lineno))
    total = n_qubits if n_qubits is not None else max_q + 1
    try:
        return Circuit.build(total, [(k, q) for k, q, _ in op_list])
    except CircuitError as exc:
        # re-run to locate the offending line for the message
        measured: set[int] = set()
        for kind, qubits, lineno in op_list:
            if kind == "CNOT" and qubits[0] == qubits[1]:
                raise CircuitError(f"line {lineno}: CNOT qubits must be distinct") from None
            if any(q in measured for q in qubits):
                raise CircuitError(f"line {lineno}: qubit reused after measurement") from None
            if kind in ("MZ", "MX"):
                measured.add(qubits[0])
        raise exc
