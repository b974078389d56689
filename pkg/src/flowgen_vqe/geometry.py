"""Parameterized molecular geometries emitted as XYZ text.

Each supported molecule has one distortion coordinate d (Angstrom): symmetric
O-H stretch for water (bond angle fixed at 104.5 degrees), uniform spacing of
the collinear H4 chain, nitrogen height above the fixed hydrogen plane for
ammonia, and displacement of a single C-H bond from its 1.084 A equilibrium
for benzene. These files feed external electronic-structure pipelines; no
quantum chemistry happens here.
"""

from __future__ import annotations

import math

H2O_BOND_ANGLE_DEG = 104.5
C6H6_H1_EQUILIBRIUM_X = 2.4810

_C6H6_FIXED = [
    ("C", 1.3970, 0.0, 0.0),
    ("C", 0.6985, 1.2098, 0.0),
    ("C", -0.6985, 1.2098, 0.0),
    ("C", -1.3970, 0.0, 0.0),
    ("C", -0.6985, -1.2098, 0.0),
    ("C", 0.6985, -1.2098, 0.0),
    # H1 (on C1) is the displaced atom and is inserted at build time
    ("H", 1.2405, 2.1486, 0.0),
    ("H", -1.2405, 2.1486, 0.0),
    ("H", -2.4810, 0.0, 0.0),
    ("H", -1.2405, -2.1486, 0.0),
    ("H", 1.2405, -2.1486, 0.0),
]

SUPPORTED_MOLECULES = ("H2O", "H4", "NH3", "C6H6")


def geometry(molecule: str, d: float) -> list[tuple[str, float, float, float]]:
    """Atom list (element, x, y, z) for the molecule at distortion d."""
    name = molecule.upper()
    if name == "H2O":
        half = math.radians(H2O_BOND_ANGLE_DEG / 2.0)
        sx, cz = d * math.sin(half), d * math.cos(half)
        return [
            ("O", 0.0, 0.0, 0.0),
            ("H", sx, 0.0, cz),
            ("H", -sx, 0.0, cz),
        ]
    if name == "H4":
        return [("H", i * d, 0.0, 0.0) for i in range(4)]
    if name == "NH3":
        r3 = math.sqrt(3.0) / 2.0
        return [
            ("N", 0.0, 0.0, d),
            ("H", 1.0, 0.0, 0.0),
            ("H", -0.5, r3, 0.0),
            ("H", -0.5, -r3, 0.0),
        ]
    if name == "C6H6":
        atoms = list(_C6H6_FIXED[:6])
        atoms.append(("H", C6H6_H1_EQUILIBRIUM_X + d, 0.0, 0.0))
        atoms.extend(_C6H6_FIXED[6:])
        return atoms
    raise ValueError(f"unknown molecule {molecule!r}; supported: {SUPPORTED_MOLECULES}")


def to_xyz(atoms: list[tuple[str, float, float, float]], comment: str = "") -> str:
    lines = [str(len(atoms)), comment]
    for element, x, y, z in atoms:
        lines.append(f"{element} {x:.10f} {y:.10f} {z:.10f}")
    return "\n".join(lines) + "\n"
