"""Qubit Hamiltonians as weighted Pauli strings.

A Hamiltonian is an ordered list of (pauli string, coefficient) terms over n
qubits, carrying family metadata so that instances of one parameterized family
(e.g. a TFIM field sweep, or one molecule along a distortion coordinate) expose
their coefficients in a shared fixed term order. That fixed order is what turns
a Hamiltonian into a conditioning context vector for the generative model.

Conventions: qubit 0 is the leftmost character of a Pauli string and the most
significant bit of basis-state indices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

PAULI_CHARS = frozenset("IXYZ")

#: Largest qubit count accepted for dense (2^n x 2^n) operations.
DEFAULT_DENSE_CAP = 16

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianFormatError(ValueError):
    """Raised when a Hamiltonian file or term list violates the schema."""


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string, e.g. ('ZZI', -1.0)."""

    pauli: str
    coeff: float

    def __post_init__(self):
        if not self.pauli:
            raise HamiltonianFormatError("empty Pauli string")
        bad = set(self.pauli) - PAULI_CHARS
        if bad:
            raise HamiltonianFormatError(
                f"illegal Pauli character {sorted(bad)!r} in {self.pauli!r}"
            )
        if not math.isfinite(self.coeff):
            raise HamiltonianFormatError(f"non-finite coefficient for {self.pauli!r}")


@dataclass(frozen=True)
class Hamiltonian:
    """Ordered weighted Pauli-string operator with family metadata.

    Term order is stable (ingestion order) and no two terms share a Pauli
    string; both properties are what make fixed-order context extraction
    well defined across instances of a family.
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...]
    family_id: str = ""
    instance_label: str = ""
    ref_energies: dict[str, float] | None = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise HamiltonianFormatError("n_qubits must be positive")
        if not self.terms:
            raise HamiltonianFormatError("Hamiltonian has no terms")
        seen: set[str] = set()
        for t in self.terms:
            if len(t.pauli) != self.n_qubits:
                raise HamiltonianFormatError(
                    f"Pauli string {t.pauli!r} has length {len(t.pauli)}, "
                    f"expected {self.n_qubits}"
                )
            if t.pauli in seen:
                raise HamiltonianFormatError(f"duplicate Pauli string {t.pauli!r}")
            seen.add(t.pauli)

    @property
    def pauli_strings(self) -> list[str]:
        return [t.pauli for t in self.terms]

    def coeff_of(self, pauli: str) -> float:
        for t in self.terms:
            if t.pauli == pauli:
                return t.coeff
        return 0.0

    def shifted(self, c: float) -> "Hamiltonian":
        """Return H + c*Identity (merging with an existing identity term)."""
        ident = "I" * self.n_qubits
        terms = list(self.terms)
        for i, t in enumerate(terms):
            if t.pauli == ident:
                terms[i] = PauliTerm(ident, t.coeff + c)
                break
        else:
            terms.append(PauliTerm(ident, c))
        return Hamiltonian(
            self.n_qubits, tuple(terms), self.family_id, self.instance_label,
            dict(self.ref_energies) if self.ref_energies else None,
        )


@dataclass(frozen=True)
class ContextVector:
    """Hamiltonian coefficients in a family-fixed Pauli-term order."""

    values: np.ndarray
    term_order: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (len(self.term_order),):
            raise ValueError("context length does not match term order")


def parse_hamiltonian(data: bytes | str) -> Hamiltonian:
    """Parse the versioned Hamiltonian JSON schema.

    Schema: {"format_version": 1, "n_qubits": int, "family_id": str,
    "instance_label": str, "terms": [{"pauli": str, "coeff": float}, ...],
    "ref_energies": {"hf": float, "exact": float}} (ref_energies optional).
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise HamiltonianFormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise HamiltonianFormatError("top-level JSON value must be an object")
    version = obj.get("format_version")
    if version != 1:
        raise HamiltonianFormatError(f"unsupported format_version {version!r}")
    for key in ("n_qubits", "terms"):
        if key not in obj:
            raise HamiltonianFormatError(f"missing required field {key!r}")
    raw_terms = obj["terms"]
    if not isinstance(raw_terms, list) or not raw_terms:
        raise HamiltonianFormatError("terms must be a non-empty list")
    terms = []
    for entry in raw_terms:
        if not isinstance(entry, dict) or "pauli" not in entry or "coeff" not in entry:
            raise HamiltonianFormatError(f"malformed term entry {entry!r}")
        terms.append(PauliTerm(str(entry["pauli"]), float(entry["coeff"])))
    refs = obj.get("ref_energies")
    ref_energies = None
    if refs is not None:
        if not isinstance(refs, dict):
            raise HamiltonianFormatError("ref_energies must be an object")
        ref_energies = {str(k): float(v) for k, v in refs.items()}
    return Hamiltonian(
        n_qubits=int(obj["n_qubits"]),
        terms=tuple(terms),
        family_id=str(obj.get("family_id", "")),
        instance_label=str(obj.get("instance_label", "")),
        ref_energies=ref_energies,
    )


def serialize_hamiltonian(h: Hamiltonian) -> str:
    """Inverse of parse_hamiltonian; coefficients round-trip exactly.

    json uses repr(float) (shortest representation), so IEEE doubles survive
    a dump/parse cycle bit for bit.
    """
    obj: dict = {
        "format_version": 1,
        "n_qubits": h.n_qubits,
        "family_id": h.family_id,
        "instance_label": h.instance_label,
        "terms": [{"pauli": t.pauli, "coeff": t.coeff} for t in h.terms],
    }
    if h.ref_energies is not None:
        obj["ref_energies"] = h.ref_energies
    return json.dumps(obj, indent=1)


def tfim(n: int, J: float, g: float) -> Hamiltonian:
    """Open-chain transverse-field Ising model on n qubits.

    H = -J * sum_i Z_i Z_{i+1}  -  g * sum_i X_i

    Terms are emitted in canonical order (ZZ block, then X block) so that
    every (J, g) instance of one chain length shares a context basis.
    """
    if n < 2:
        raise ValueError("tfim requires at least 2 qubits")
    terms = []
    for i in range(n - 1):
        pauli = "I" * i + "ZZ" + "I" * (n - i - 2)
        terms.append(PauliTerm(pauli, -J))
    for i in range(n):
        pauli = "I" * i + "X" + "I" * (n - i - 1)
        terms.append(PauliTerm(pauli, -g))
    return Hamiltonian(
        n_qubits=n,
        terms=tuple(terms),
        family_id=f"tfim-n{n}",
        instance_label=f"J={J:g},g={g:g}",
    )


def dense_matrix(h: Hamiltonian, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Assemble the full 2^n x 2^n matrix (qubit 0 = most significant bit)."""
    if h.n_qubits > cap:
        raise ValueError(f"n_qubits={h.n_qubits} exceeds dense cap {cap}")
    dim = 2 ** h.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        op = np.array([[1.0 + 0j]])
        for ch in term.pauli:
            op = np.kron(op, _PAULI_MATRICES[ch])
        mat += term.coeff * op
    return mat


def exact_ground_energy(h: Hamiltonian, cap: int = DEFAULT_DENSE_CAP) -> float:
    """Minimum eigenvalue of the dense Hamiltonian matrix."""
    mat = dense_matrix(h, cap=cap)
    return float(np.linalg.eigvalsh(mat)[0])


def context_of(h: Hamiltonian, family_order: list[str] | tuple[str, ...]) -> ContextVector:
    """Coefficients of h in the family's fixed term order (absent terms -> 0)."""
    order = tuple(family_order)
    if len(set(order)) != len(order):
        raise ValueError("family_order contains duplicate Pauli strings")
    lookup = {t.pauli: t.coeff for t in h.terms}
    values = np.array([lookup.get(p, 0.0) for p in order], dtype=float)
    return ContextVector(values=values, term_order=order)


def family_term_order(instances: list[Hamiltonian]) -> tuple[str, ...]:
    """Shared term order across instances: union in first-seen order."""
    order: list[str] = []
    seen: set[str] = set()
    for h in instances:
        for t in h.terms:
            if t.pauli not in seen:
                seen.add(t.pauli)
                order.append(t.pauli)
    return tuple(order)
