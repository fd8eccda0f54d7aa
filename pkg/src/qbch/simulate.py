"""Seeded Pauli-frame Monte Carlo for assembled distillation circuits.

Noiseless runs of an assembled protocol satisfy every acceptance parity
deterministically and leave the kept block in the exact target state, so
only fault frames matter.  Every (location, Pauli-label) pair maps to a
fixed linear effect: flips of the acceptance-check bits plus the
reduced-weight labels of the kept block's residual.  A shot is then the
XOR of its sampled faults' effects, which vectorizes the whole pipeline.

Sampling is counter-based (Philox keyed by seed and batch index) over
fixed-size batches, so results are bit-identical regardless of thread
count or batch execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from qbch.circuit import PAULI_XZ, fault_labels
from qbch.distill import AssembledCircuit

BATCH_SIZE = 4096


@dataclass(frozen=True)
class NoiseModel:
    """Circuit-level depolarizing + SPAM-flip noise at physical rate p.

    Each CNOT draws one of 15 two-qubit Paulis with probability p/15,
    single-qubit gates one of 3 Paulis with p/3, and preparations and
    measurements flip with probability p.
    """

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("physical error rate must lie in [0, 1]")


@dataclass
class TrialBatch:
    p: float
    shots: int
    seed: int
    accepted_step1: int
    accepted_step2: int
    group_trials: int
    group_accepts: int
    residual_histogram_x: dict[int, int]
    residual_histogram_z: dict[int, int]
    w_max: int

    def __post_init__(self) -> None:
        if not (self.accepted_step2 <= self.accepted_step1 <= self.shots):
            raise ValueError("acceptance counts out of order")
        if sum(self.residual_histogram_x.values()) != self.accepted_step2:
            raise ValueError("X histogram total must equal accepted shots")
        if sum(self.residual_histogram_z.values()) != self.accepted_step2:
            raise ValueError("Z histogram total must equal accepted shots")

    @property
    def acc1(self) -> float:
        """Per-distillation-unit first-step acceptance."""
        return self.group_accepts / self.group_trials if self.group_trials else 1.0

    @property
    def acc1_err(self) -> float:
        return _binom_err(self.group_accepts, self.group_trials)

    @property
    def acc2(self) -> float:
        """Second-step acceptance, conditional on reaching the second step."""
        return self.accepted_step2 / self.accepted_step1 if self.accepted_step1 else 0.0

    @property
    def acc2_err(self) -> float:
        return _binom_err(self.accepted_step2, self.accepted_step1)

    def rate(self, pauli: str, bucket: int) -> float:
        hist = self.residual_histogram_x if pauli == "X" else self.residual_histogram_z
        if self.accepted_step2 == 0:
            return 0.0
        return hist.get(bucket, 0) / self.accepted_step2

    def rate_err(self, pauli: str, bucket: int) -> float:
        hist = self.residual_histogram_x if pauli == "X" else self.residual_histogram_z
        return _binom_err(hist.get(bucket, 0), self.accepted_step2)


def _binom_err(k: int, n: int) -> float:
    if n == 0:
        return 0.0
    phat = k / n
    return math.sqrt(max(phat * (1.0 - phat), 0.0) / n)


class EffectTable:
    """Precomputed linear fault effects for one assembled circuit."""

    def __init__(self, assembled: AssembledCircuit, w_max: int = 3) -> None:
        self.assembled = assembled
        self.w_max = w_max
        protocol = assembled.protocol
        code = protocol.code
        circuit = assembled.circuit
        n = code.n
        kept_start = assembled.kept_block.start
        kept_mask = ((1 << n) - 1) << kept_start

        self.table_x = code.residual_table("X", w_max, protocol.target_state)
        self.table_z = code.residual_table("Z", w_max, protocol.target_state)

        checks = assembled.accept_checks
        bit_offsets = []
        off = 0
        step1_mask_bits = 0
        group_mask_bits: dict[int, int] = {}
        for chk in checks:
            bit_offsets.append(off)
            span = ((1 << chk.rows.nrows) - 1) << off
            if chk.step == 1:
                step1_mask_bits |= span
                g = chk.block[0]
                group_mask_bits[g] = group_mask_bits.get(g, 0) | span
            off += chk.rows.nrows
        self.total_check_bits = off
        self.n_words = max(1, (off + 63) // 64)
        self.step1_mask = self._split_words(step1_mask_bits)
        self.full_mask = self._split_words((1 << off) - 1 if off else 0)
        self.group_masks = {
            g: self._split_words(bits) for g, bits in sorted(group_mask_bits.items())
        }
        self.n_groups = len(self.group_masks)

        meas_owner: dict[int, tuple[int, int]] = {}
        for ci, chk in enumerate(checks):
            for j, loc in enumerate(chk.meas_locations):
                meas_owner[loc] = (ci, j)

        # per-location basis frames, then per-label composition
        ops = circuit.ops
        n_ops = len(ops)
        offsets = []
        label_counts = []
        eff_checks: list[list[int]] = []
        eff_lx: list[int] = []
        eff_lz: list[int] = []
        flat = 0
        for op in ops:
            offsets.append(flat)
            labels = fault_labels(op.kind)
            label_counts.append(len(labels))
            basis = _basis_effects(ops, op, meas_owner, checks, bit_offsets)
            for lab in labels:
                if op.kind in ("MZ", "MX"):
                    x_bits = z_bits = 0
                    ci_j = meas_owner.get(op.location_id)
                    cbits = 0
                    if ci_j is not None:
                        ci, j = ci_j
                        val = checks[ci].rows.mul_vec(1 << j)
                        cbits = val << bit_offsets[ci]
                else:
                    x_bits = z_bits = 0
                    cbits = 0
                    for ch, q in zip(lab, op.qubits):
                        xalpha, zalpha = PAULI_XZ[ch]
                        if xalpha:
                            bx, bz, bc = basis[("X", q)]
                            x_bits ^= bx
                            z_bits ^= bz
                            cbits ^= bc
                        if zalpha:
                            bx, bz, bc = basis[("Z", q)]
                            x_bits ^= bx
                            z_bits ^= bz
                            cbits ^= bc
                res_x = (x_bits & kept_mask) >> kept_start
                res_z = (z_bits & kept_mask) >> kept_start
                eff_checks.append(self._split_words(cbits))
                eff_lx.append(self.table_x.label_of(res_x))
                eff_lz.append(self.table_z.label_of(res_z))
                flat += 1

        self.loc_offsets = np.array(offsets, dtype=np.int64)
        self.loc_label_counts = np.array(label_counts, dtype=np.float64)
        self.n_locations = n_ops
        self.eff_checks = np.array(eff_checks, dtype=np.uint64).reshape(flat, self.n_words)
        self.lx_width = max(1, (len(code.label_matrix("X", protocol.target_state).rows) + 63) // 64)
        self.lz_width = max(1, (len(code.label_matrix("Z", protocol.target_state).rows) + 63) // 64)
        self.eff_lx = np.array(
            [self._split_label(v, self.lx_width) for v in eff_lx], dtype=np.uint64
        ).reshape(flat, self.lx_width)
        self.eff_lz = np.array(
            [self._split_label(v, self.lz_width) for v in eff_lz], dtype=np.uint64
        ).reshape(flat, self.lz_width)

    def _split_words(self, bits: int) -> list[int]:
        return [(bits >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(self.n_words)]

    @staticmethod
    def _split_label(bits: int, width: int) -> list[int]:
        return [(bits >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(width)]

    @staticmethod
    def _join(words) -> int:
        out = 0
        for w, v in enumerate(words):
            out |= int(v) << (64 * w)
        return out


def _basis_effects(ops, op, meas_owner, checks, bit_offsets):
    """Propagate the post-op X/Z basis Paulis to (x, z, checkbits)."""
    basis = {}
    seeds = []
    if op.kind == "CNOT":
        c, t = op.qubits
        seeds = [("X", c), ("Z", c), ("X", t), ("Z", t)]
    elif op.kind == "H":
        q = op.qubits[0]
        seeds = [("X", q), ("Z", q)]
    elif op.kind == "PZ":
        seeds = [("X", op.qubits[0])]
    elif op.kind == "PX":
        seeds = [("Z", op.qubits[0])]
    for kind, q in seeds:
        x = (1 << q) if kind == "X" else 0
        z = (1 << q) if kind == "Z" else 0
        cbits = 0
        for later in ops[op.location_id + 1 :]:
            lk = later.kind
            if lk == "CNOT":
                cc, tt = later.qubits
                x ^= ((x >> cc) & 1) << tt
                z ^= ((z >> tt) & 1) << cc
            elif lk == "H":
                qq = later.qubits[0]
                xb = (x >> qq) & 1
                zb = (z >> qq) & 1
                if xb != zb:
                    x ^= 1 << qq
                    z ^= 1 << qq
            elif lk == "MZ":
                qq = later.qubits[0]
                if (x >> qq) & 1:
                    owner = meas_owner.get(later.location_id)
                    if owner is not None:
                        ci, j = owner
                        cbits ^= checks[ci].rows.mul_vec(1 << j) << bit_offsets[ci]
                    x &= ~(1 << qq)
                z &= ~(1 << qq)
            elif lk == "MX":
                qq = later.qubits[0]
                if (z >> qq) & 1:
                    owner = meas_owner.get(later.location_id)
                    if owner is not None:
                        ci, j = owner
                        cbits ^= checks[ci].rows.mul_vec(1 << j) << bit_offsets[ci]
                    z &= ~(1 << qq)
                x &= ~(1 << qq)
            else:  # PZ / PX reset
                qq = later.qubits[0]
                x &= ~(1 << qq)
                z &= ~(1 << qq)
        basis[(kind, q)] = (x, z, cbits)
    # basis entries for the op's own qubits that were not seeded stay absent
    return basis


def run_trials(
    assembled: AssembledCircuit,
    noise: NoiseModel,
    shots: int,
    seed: int,
    w_max: int = 3,
    threads: int = 1,
    effects: EffectTable | None = None,
) -> TrialBatch:
    """Simulate ``shots`` rounds; fully reproducible from (seed, shots)."""
    if shots < 1:
        raise ValueError("shots must be positive")
    if effects is None:
        effects = EffectTable(assembled, w_max=w_max)
    if effects.w_max != w_max:
        raise ValueError("effect table bucket cap differs from requested w_max")
    m2 = assembled.protocol.m2
    p = noise.p

    batch_sizes = []
    remaining = shots
    while remaining > 0:
        batch_sizes.append(min(BATCH_SIZE, remaining))
        remaining -= BATCH_SIZE

    def run_batch(batch_idx: int) -> tuple:
        return _run_batch(effects, p, seed, batch_idx, batch_sizes[batch_idx])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_batch, range(len(batch_sizes))))
    else:
        results = [run_batch(i) for i in range(len(batch_sizes))]

    acc1 = acc2 = group_accepts = 0
    hist_x: dict[int, int] = {}
    hist_z: dict[int, int] = {}
    for b_acc1, b_acc2, b_gacc, b_hx, b_hz in results:
        acc1 += b_acc1
        acc2 += b_acc2
        group_accepts += b_gacc
        for k, v in b_hx.items():
            hist_x[k] = hist_x.get(k, 0) + v
        for k, v in b_hz.items():
            hist_z[k] = hist_z.get(k, 0) + v
    return TrialBatch(
        p=p,
        shots=shots,
        seed=seed,
        accepted_step1=acc1,
        accepted_step2=acc2,
        group_trials=shots * m2,
        group_accepts=group_accepts,
        residual_histogram_x={k: hist_x[k] for k in sorted(hist_x)},
        residual_histogram_z={k: hist_z[k] for k in sorted(hist_z)},
        w_max=w_max,
    )


def _run_batch(effects: EffectTable, p: float, seed: int, batch_idx: int, batch: int):
    n_words = effects.n_words
    if p == 0.0:
        hist = {0: batch}
        return batch, batch, batch * effects.n_groups, dict(hist), dict(hist)

    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, batch_idx], dtype=np.uint64))
    )
    u = rng.random((batch, effects.n_locations))
    rows, cols = np.nonzero(u < p)
    check_acc = np.zeros((batch, n_words), dtype=np.uint64)
    lx_acc = np.zeros((batch, effects.lx_width), dtype=np.uint64)
    lz_acc = np.zeros((batch, effects.lz_width), dtype=np.uint64)
    if rows.size:
        uu = u[rows, cols] / p
        label_idx = np.minimum(
            (uu * effects.loc_label_counts[cols]).astype(np.int64),
            (effects.loc_label_counts[cols] - 1).astype(np.int64),
        )
        fidx = effects.loc_offsets[cols] + label_idx
        starts = np.flatnonzero(np.diff(rows, prepend=-1))
        shot_ids = rows[starts]
        check_acc[shot_ids] = np.bitwise_xor.reduceat(effects.eff_checks[fidx], starts, axis=0)
        lx_acc[shot_ids] = np.bitwise_xor.reduceat(effects.eff_lx[fidx], starts, axis=0)
        lz_acc[shot_ids] = np.bitwise_xor.reduceat(effects.eff_lz[fidx], starts, axis=0)

    step1_mask = np.array(effects.step1_mask, dtype=np.uint64)
    full_mask = np.array(effects.full_mask, dtype=np.uint64)
    pass1 = np.all((check_acc & step1_mask) == 0, axis=1)
    pass_all = np.all((check_acc & full_mask) == 0, axis=1)
    acc1 = int(np.count_nonzero(pass1))
    acc2 = int(np.count_nonzero(pass_all))
    group_accepts = 0
    for g, mask in effects.group_masks.items():
        gm = np.array(mask, dtype=np.uint64)
        group_accepts += int(np.count_nonzero(np.all((check_acc & gm) == 0, axis=1)))

    hist_x: dict[int, int] = {}
    hist_z: dict[int, int] = {}
    acc_idx = np.flatnonzero(pass_all)
    tx, tz = effects.table_x, effects.table_z
    w_max = effects.w_max
    for i in acc_idx:
        lx = EffectTable._join(lx_acc[i])
        lz = EffectTable._join(lz_acc[i])
        rx = tx.query_label(lx)
        rz = tz.query_label(lz)
        bx = w_max if rx is None else min(rx, w_max)
        bz = w_max if rz is None else min(rz, w_max)
        hist_x[bx] = hist_x.get(bx, 0) + 1
        hist_z[bz] = hist_z.get(bz, 0) + 1
    return acc1, acc2, group_accepts, hist_x, hist_z


CSV_HEADER = "p,shots,acc1,acc1_err,acc2,acc2_err,x_w1,x_w2,x_w3plus,z_w1,z_w2,z_w3plus"


def sweep(
    assembled: AssembledCircuit,
    grid,
    shots: int,
    seed: int,
    w_max: int = 3,
    threads: int = 1,
) -> list[TrialBatch]:
    """One TrialBatch per grid point, with derived child seeds."""
    grid = list(grid)
    if not grid:
        raise ValueError("noise grid must be nonempty")
    effects = EffectTable(assembled, w_max=w_max)
    out = []
    for i, p in enumerate(grid):
        child_seed = (seed ^ (0x9E3779B97F4A7C15 * (i + 1))) & 0xFFFFFFFFFFFFFFFF
        out.append(
            run_trials(
                assembled,
                NoiseModel(p),
                shots,
                child_seed,
                w_max=w_max,
                threads=threads,
                effects=effects,
            )
        )
    return out


def sweep_to_csv(batches: list[TrialBatch]) -> str:
    lines = [CSV_HEADER]
    for b in batches:
        fields = [
            repr(b.p),
            str(b.shots),
            repr(b.acc1),
            repr(b.acc1_err),
            repr(b.acc2),
            repr(b.acc2_err),
            repr(b.rate("X", 1)),
            repr(b.rate("X", 2)),
            repr(b.rate("X", 3)),
            repr(b.rate("Z", 1)),
            repr(b.rate("Z", 2)),
            repr(b.rate("Z", 3)),
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def sweep_sidecar(assembled: AssembledCircuit, grid, shots: int, seed: int, w_max: int = 3) -> dict:
    return {
        "seed": seed,
        "grid": list(grid),
        "shots": shots,
        "batch_size": BATCH_SIZE,
        "w_max": w_max,
        "protocol": assembled.protocol.describe(),
        "code": {
            "n": assembled.protocol.code.n,
            "k": assembled.protocol.code.k,
            "d": assembled.protocol.code.d_design,
        },
    }
