"""Dense statevector simulation with instrumented circuit-evaluation counting.

Gates: RY, H, CNOT, and the two particle-conserving Givens gates used by the
excitation-based ansatz (G1 mixing |01>/|10> on two qubits, G2 mixing
|0011>/|1100> on four qubits). Basis ordering puts qubit 0 at the most
significant bit, matching the Pauli-string convention in `hamiltonian`.

Every gate here touches only paired basis-state subsets, so application is a
gather/arithmetic/scatter on cached index arrays; the same kernels serve both
the single-state API and the batched paths used for parameter-shift gradients
and flow-sample batches (rows of a (B, 2^n) amplitude matrix, one circuit
evaluation each).

The cost unit throughout the package is one circuit evaluation: one energy
expectation or one state overlap, independent of Hamiltonian term count.
EvalCounter instances are passed explicitly so that cost-model evaluations
and free benchmarking probes can be accounted to different counters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hamiltonian import Hamiltonian

PARAMETERIZED_KINDS = frozenset({"RY", "G1", "G2"})
_N_TARGETS = {"RY": 1, "H": 1, "CNOT": 2, "G1": 2, "G2": 4}

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass
class EvalCounter:
    """Monotone counter of circuit evaluations."""

    circuit_evaluations: int = 0

    def add(self, k: int = 1) -> None:
        if k < 0:
            raise ValueError("counter can only increase")
        self.circuit_evaluations += k

    @property
    def count(self) -> int:
        return self.circuit_evaluations


@dataclass(frozen=True)
class GateOp:
    """One gate application: kind, ordered targets, optional angle."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in _N_TARGETS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(self.targets) != _N_TARGETS[self.kind]:
            raise ValueError(
                f"{self.kind} takes {_N_TARGETS[self.kind]} targets, "
                f"got {len(self.targets)}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("gate targets must be distinct")
        needs_angle = self.kind in PARAMETERIZED_KINDS
        if needs_angle != (self.angle is not None):
            raise ValueError(f"angle must be present iff gate is parameterized ({self.kind})")


@dataclass
class StateVector:
    """Normalized complex amplitudes over 2^n basis states."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (2 ** self.n_qubits,):
            raise ValueError("amplitude array has wrong length")

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def prepare_basis(n: int, bits: str) -> StateVector:
    """Computational basis state |bits>, qubit 0 = leftmost bit = MSB."""
    if len(bits) != n:
        raise ValueError(f"bitstring length {len(bits)} != n_qubits {n}")
    if set(bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {bits!r}")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(n, amps)


@lru_cache(maxsize=None)
def _gate_index_pairs(n: int, kind: str, targets: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Basis-index pairs (i0, i1) whose amplitudes one gate mixes.

    RY/H pair bit 0 with bit 1 on the target; CNOT pairs target 0/1 where the
    control is set; G1 pairs |01> with |10|; G2 pairs |0011> with |1100>.
    """
    bits = tuple(1 << (n - 1 - q) for q in targets)
    idx = np.arange(1 << n)
    if kind in ("RY", "H"):
        sel = idx[(idx & bits[0]) == 0]
        return sel, sel | bits[0]
    if kind == "CNOT":
        bc, bt = bits
        sel = idx[((idx & bc) != 0) & ((idx & bt) == 0)]
        return sel, sel | bt
    if kind == "G1":
        b1, b2 = bits
        sel = idx[((idx & b1) == 0) & ((idx & b2) != 0)]
        return sel, sel ^ (b1 | b2)
    if kind == "G2":
        b1, b2, b3, b4 = bits
        sel = idx[
            ((idx & b1) == 0) & ((idx & b2) == 0) & ((idx & b3) != 0) & ((idx & b4) != 0)
        ]
        return sel, sel ^ (b1 | b2 | b3 | b4)
    raise ValueError(kind)


def apply_gate_batch(amps: np.ndarray, n: int, kind: str, targets: tuple[int, ...], angle) -> None:
    """In-place gate application on a (B, 2^n) amplitude matrix.

    `angle` may be a scalar or a per-row vector for parameterized kinds. The
    Givens convention puts +sin(theta/2) on the excitation direction:
    G1(theta)|01> = cos|01> + sin|10>, G2(theta)|0011> = cos|0011> + sin|1100>.
    """
    for q in targets:
        if not 0 <= q < n:
            raise ValueError(f"target qubit {q} out of range for {n} qubits")
    i0, i1 = _gate_index_pairs(n, kind, tuple(targets))
    a0 = amps[:, i0]
    a1 = amps[:, i1]
    if kind == "H":
        amps[:, i0] = (a0 + a1) * _SQRT1_2
        amps[:, i1] = (a0 - a1) * _SQRT1_2
    elif kind == "CNOT":
        amps[:, i0] = a1
        amps[:, i1] = a0
    else:  # RY, G1, G2: the same two-level rotation [[c, -s], [s, c]]
        half = 0.5 * np.asarray(angle, dtype=float)
        c, s = np.cos(half), np.sin(half)
        if c.ndim:
            c, s = c[:, None], s[:, None]
        amps[:, i0] = c * a0 - s * a1
        amps[:, i1] = s * a0 + c * a1


def g1_matrix(theta: float) -> np.ndarray:
    """Two-qubit single-excitation Givens rotation in span{|01>, |10>}."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, -s, 0],
            [0, s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate, returning a new StateVector."""
    amps = state.amps[None, :].copy()
    apply_gate_batch(amps, state.n_qubits, gate.kind, gate.targets, gate.angle)
    return StateVector(state.n_qubits, amps[0])


def apply_circuit(state: StateVector, gates: list[GateOp]) -> StateVector:
    amps = state.amps[None, :].copy()
    for g in gates:
        apply_gate_batch(amps, state.n_qubits, g.kind, g.targets, g.angle)
    return StateVector(state.n_qubits, amps[0])


@lru_cache(maxsize=None)
def _pauli_arrays(n: int, pauli: str):
    """(source indices | None, phase array | scalar) for one Pauli string,
    so that (P s)_i = phase_i * s_src[i]."""
    flip = 0
    zy = 0
    n_y = 0
    for q, ch in enumerate(pauli):
        bit = 1 << (n - 1 - q)
        if ch == "X":
            flip |= bit
        elif ch == "Y":
            flip |= bit
            zy |= bit
            n_y += 1
        elif ch == "Z":
            zy |= bit
    idx = np.arange(1 << n, dtype=np.uint64)
    src = (idx ^ np.uint64(flip)) if flip else None
    phase: np.ndarray | complex = (-1j) ** n_y
    if zy:
        parity = np.bitwise_count(idx & np.uint64(zy)).astype(np.int64) & 1
        phase = phase * (1.0 - 2.0 * parity)
    return src, phase


def apply_pauli_string(amps: np.ndarray, n: int, pauli: str) -> np.ndarray:
    """P|s> for one Pauli string (1-D amplitude input)."""
    src, phase = _pauli_arrays(n, pauli)
    out = amps[src] if src is not None else amps.copy()
    if isinstance(phase, np.ndarray) or phase != 1:
        out = out * phase
    return out


def expectation_batch(
    amps: np.ndarray, h: Hamiltonian, counter: EvalCounter | None = None
) -> np.ndarray:
    """Row-wise <s|H|s> for a (B, 2^n) amplitude matrix; counts B evaluations.

    Terms accumulate in Hamiltonian order, so appending a shifted identity
    term changes every energy by exactly fl(E + c).
    """
    n = h.n_qubits
    if amps.shape[1] != (1 << n):
        raise ValueError(
            f"qubit-count mismatch: states have dim {amps.shape[1]}, "
            f"Hamiltonian has {h.n_qubits} qubits"
        )
    if counter is not None:
        counter.add(amps.shape[0])
    conj = amps.conj()
    total = np.zeros(amps.shape[0], dtype=complex)
    for term in h.terms:
        src, phase = _pauli_arrays(n, term.pauli)
        v = amps[:, src] if src is not None else amps
        if isinstance(phase, np.ndarray) or phase != 1:
            v = v * phase
        total += term.coeff * np.einsum("bi,bi->b", conj, v)
    worst = np.abs(total.imag).max()
    if worst >= 1e-10:
        raise AssertionError(f"expectation has imaginary residue {worst:g}")
    return total.real.copy()


def expectation(
    state: StateVector, h: Hamiltonian, counter: EvalCounter | None = None
) -> float:
    """<s|H|s> as a real number; exactly one counter increment per call,
    independent of term count."""
    if h.n_qubits != state.n_qubits:
        raise ValueError(
            f"qubit-count mismatch: state has {state.n_qubits}, "
            f"Hamiltonian has {h.n_qubits}"
        )
    return float(expectation_batch(state.amps[None, :], h, counter)[0])


def overlap(a: StateVector, b: StateVector, counter: EvalCounter | None = None) -> float:
    """|<a|b>|^2; one counter increment per call."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("state size mismatch")
    if counter is not None:
        counter.add(1)
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def overlap_batch(
    base: StateVector, amps: np.ndarray, counter: EvalCounter | None = None
) -> np.ndarray:
    """|<base|row>|^2 for each row; counts one evaluation per row."""
    if amps.shape[1] != base.amps.shape[0]:
        raise ValueError("state size mismatch")
    if counter is not None:
        counter.add(amps.shape[0])
    inner = amps @ base.amps.conj()
    return np.abs(inner) ** 2
