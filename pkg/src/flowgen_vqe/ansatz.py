"""Variational circuit families: RY-linear hardware-efficient and Givens SD.

Two templates map a real parameter vector to a gate list:

* HEA: an initial RY layer followed by L blocks of [nearest-neighbor CNOT
  chain, RY layer]; d = (L+1) * n_qubits.
* GSD: one particle-conserving Givens gate per spin-adapted excitation,
  singles (G1) then doubles (G2), acting on an occupation-number reference
  bitstring; d = |singles| + |doubles|.

Spin-orbital convention: interleaved, orbital 2k is spatial orbital k with
alpha spin and 2k+1 the beta partner; the reference occupies the first
n_electrons spin orbitals. At theta = 0 both templates prepare their
reference state exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .simulator import GateOp, StateVector, apply_gate_batch


@dataclass(frozen=True)
class HeaSpec:
    """RY-linear hardware-efficient ansatz with L entangling layers."""

    n_qubits: int
    layers: int
    reference_bits: str = ""

    def __post_init__(self):
        if self.layers < 0:
            raise ValueError("layer count must be non-negative")
        if self.n_qubits < 1 or (self.layers >= 1 and self.n_qubits < 2):
            raise ValueError("HEA needs n_qubits >= 2 (>= 1 when layerless)")
        if not self.reference_bits:
            object.__setattr__(self, "reference_bits", "0" * self.n_qubits)
        if len(self.reference_bits) != self.n_qubits:
            raise ValueError("reference bitstring length mismatch")


@dataclass(frozen=True)
class GsdSpec:
    """Givens singles-and-doubles ansatz on n_spin_orbitals qubits."""

    n_electrons: int
    n_spin_orbitals: int
    reference_bits: str = ""

    def __post_init__(self):
        if not (0 < self.n_electrons < self.n_spin_orbitals):
            raise ValueError("need 0 < n_electrons < n_spin_orbitals")
        if self.n_electrons % 2 or self.n_spin_orbitals % 2:
            raise ValueError("electron and spin-orbital counts must be even")
        if not self.reference_bits:
            object.__setattr__(
                self,
                "reference_bits",
                "1" * self.n_electrons + "0" * (self.n_spin_orbitals - self.n_electrons),
            )
        if len(self.reference_bits) != self.n_spin_orbitals:
            raise ValueError("reference bitstring length mismatch")
        if self.reference_bits.count("1") != self.n_electrons:
            raise ValueError("reference occupation does not match electron count")

    @property
    def n_qubits(self) -> int:
        return self.n_spin_orbitals


AnsatzSpec = HeaSpec | GsdSpec


@dataclass(frozen=True)
class ExcitationList:
    """Spin-z-preserving excitations in canonical (lexicographic) order."""

    singles: tuple[tuple[int, int], ...]
    doubles: tuple[tuple[int, int, int, int], ...]

    def __len__(self) -> int:
        return len(self.singles) + len(self.doubles)


def _spin(orbital: int) -> int:
    return orbital % 2


def enumerate_excitations(n_electrons: int, n_spin_orbitals: int) -> ExcitationList:
    """All spin-z-preserving singles and doubles from the interleaved HF
    reference (occupied = 0..n_electrons-1)."""
    if not (0 < n_electrons < n_spin_orbitals):
        raise ValueError("need 0 < n_electrons < n_spin_orbitals")
    if n_electrons % 2 or n_spin_orbitals % 2:
        raise ValueError("electron and spin-orbital counts must be even")
    occupied = range(n_electrons)
    virtual = range(n_electrons, n_spin_orbitals)
    singles = tuple(
        (o, v) for o in occupied for v in virtual if _spin(o) == _spin(v)
    )
    doubles = []
    for o1, o2 in combinations(occupied, 2):
        for v1, v2 in combinations(virtual, 2):
            if _spin(o1) + _spin(o2) == _spin(v1) + _spin(v2):
                doubles.append((o1, o2, v1, v2))
    return ExcitationList(singles=singles, doubles=tuple(sorted(doubles)))


def param_count(spec: AnsatzSpec) -> int:
    if isinstance(spec, HeaSpec):
        return (spec.layers + 1) * spec.n_qubits
    exc = enumerate_excitations(spec.n_electrons, spec.n_spin_orbitals)
    return len(exc)


def circuit_template(spec: AnsatzSpec) -> list[tuple[str, tuple[int, ...], int | None]]:
    """Gate structure as (kind, targets, parameter index | None) rows; the
    single canonical unrolling order shared by all evaluation paths."""
    template: list[tuple[str, tuple[int, ...], int | None]] = []
    if isinstance(spec, HeaSpec):
        n = spec.n_qubits
        k = 0
        for q in range(n):
            template.append(("RY", (q,), k))
            k += 1
        for _ in range(spec.layers):
            for q in range(n - 1):
                template.append(("CNOT", (q, q + 1), None))
            for q in range(n):
                template.append(("RY", (q,), k))
                k += 1
    else:
        exc = enumerate_excitations(spec.n_electrons, spec.n_spin_orbitals)
        k = 0
        for o, v in exc.singles:
            template.append(("G1", (o, v), k))
            k += 1
        for o1, o2, v1, v2 in exc.doubles:
            template.append(("G2", (o1, o2, v1, v2), k))
            k += 1
    return template


def _check_theta(spec: AnsatzSpec, theta: np.ndarray, rows: int | None = None) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    d = param_count(spec)
    expected = (d,) if rows is None else (rows, d)
    if rows is None and theta.shape != (d,):
        raise ValueError(f"parameter vector has shape {theta.shape}, expected {expected}")
    if rows is not None and theta.shape != (rows, d):
        raise ValueError(f"parameter matrix has shape {theta.shape}, expected {expected}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameter values must be finite")
    return theta


def build_circuit(spec: AnsatzSpec, theta: np.ndarray) -> list[GateOp]:
    """Unroll the template into an ordered gate list for one parameter vector."""
    theta = _check_theta(spec, theta)
    return [
        GateOp(kind, targets, float(theta[k]) if k is not None else None)
        for kind, targets, k in circuit_template(spec)
    ]


def prepare_states(spec: AnsatzSpec, thetas: np.ndarray) -> np.ndarray:
    """Amplitude matrix (B, 2^n) of trial states for a (B, d) parameter batch."""
    thetas = np.asarray(thetas, dtype=float)
    thetas = _check_theta(spec, thetas, rows=thetas.shape[0])
    n = spec.n_qubits
    amps = np.zeros((thetas.shape[0], 2 ** n), dtype=complex)
    amps[:, int(spec.reference_bits, 2)] = 1.0
    for kind, targets, k in circuit_template(spec):
        apply_gate_batch(amps, n, kind, targets, thetas[:, k] if k is not None else None)
    return amps


def prepare_state(spec: AnsatzSpec, theta: np.ndarray) -> StateVector:
    """Run the circuit on the spec's reference basis state."""
    amps = prepare_states(spec, np.asarray(theta, dtype=float)[None, :])
    return StateVector(spec.n_qubits, amps[0])


def spec_to_dict(spec: AnsatzSpec) -> dict:
    if isinstance(spec, HeaSpec):
        return {
            "kind": "hea",
            "n_qubits": spec.n_qubits,
            "layers": spec.layers,
            "reference_bits": spec.reference_bits,
        }
    return {
        "kind": "gsd",
        "n_electrons": spec.n_electrons,
        "n_spin_orbitals": spec.n_spin_orbitals,
        "reference_bits": spec.reference_bits,
    }


def spec_from_dict(obj: dict) -> AnsatzSpec:
    kind = obj.get("kind")
    if kind == "hea":
        return HeaSpec(
            n_qubits=int(obj["n_qubits"]),
            layers=int(obj["layers"]),
            reference_bits=str(obj.get("reference_bits", "")),
        )
    if kind == "gsd":
        return GsdSpec(
            n_electrons=int(obj["n_electrons"]),
            n_spin_orbitals=int(obj["n_spin_orbitals"]),
            reference_bits=str(obj.get("reference_bits", "")),
        )
    raise ValueError(f"unknown ansatz kind {kind!r}")
