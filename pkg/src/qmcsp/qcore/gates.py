"""Gate definitions and the finite gate sets used for enumeration."""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import DimensionError, QmcspError

UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GateDef:
    label: str
    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if not 1 <= self.arity <= 3:
            raise DimensionError(f"gate {self.label}: arity {self.arity} outside 1..3")
        d = 2**self.arity
        if m.shape != (d, d):
            raise DimensionError(f"gate {self.label}: matrix shape {m.shape}, expected {(d, d)}")
        if np.max(np.abs(m @ m.conj().T - np.eye(d))) > UNITARY_TOL:
            raise DimensionError(f"gate {self.label}: matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @cached_property
    def is_permutation(self) -> bool:
        """True when the matrix is a 0/1 permutation (classical reversible gate)."""
        m = self.matrix
        ones = np.isclose(m, 1.0, atol=1e-12)
        zeros = np.abs(m) < 1e-12
        return bool(np.all(ones | zeros) and np.all(ones.sum(axis=0) == 1))

    def __eq__(self, other):
        return (
            isinstance(other, GateDef)
            and self.label == other.label
            and self.arity == other.arity
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.label, self.arity))


def _perm_matrix(images: list[int]) -> np.ndarray:
    d = len(images)
    m = np.zeros((d, d), dtype=complex)
    for src, dst in enumerate(images):
        m[dst, src] = 1.0
    return m


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def controlled(u: np.ndarray) -> np.ndarray:
    """Control on the first qubit of the tuple."""
    d = u.shape[0]
    m = np.eye(2 * d, dtype=complex)
    m[d:, d:] = u
    return m


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_T = np.diag([1, np.exp(0.25j * np.pi)])
_Z = np.diag([1.0, -1.0]).astype(complex)

FIXED_GATES: dict[str, GateDef] = {
    g.label: g
    for g in [
        GateDef("X", 1, _X),
        GateDef("H", 1, _H),
        GateDef("T", 1, _T),
        GateDef("Tdg", 1, _T.conj().T),
        GateDef("Z", 1, _Z),
        GateDef("CNOT", 2, _perm_matrix([0, 1, 3, 2])),
        GateDef("TOFFOLI", 3, _perm_matrix([0, 1, 2, 3, 4, 5, 7, 6])),
        # CNOT after X on the target: flips the target when the control is 0
        GateDef("ACNOT", 2, _perm_matrix([1, 0, 2, 3])),
    ]
}

_PARAM_RE = re.compile(r"^(Rx|Ry|Rz|CRy|CRz|Ph)\(([-+0-9.eE]+)\)$")
_PARAM_BUILDERS = {
    "Rx": (1, rx),
    "Ry": (1, ry),
    "Rz": (1, rz),
    "CRy": (2, lambda a: controlled(ry(a))),
    "CRz": (2, lambda a: controlled(rz(a))),
    "Ph": (1, lambda a: np.exp(1j * a) * np.eye(2)),
}


def parametric_gate(kind: str, angle: float) -> GateDef:
    """Gate with a real parameter; the label round-trips through gate_from_label."""
    arity, build = _PARAM_BUILDERS[kind]
    return GateDef(f"{kind}({float(angle)!r})", arity, build(float(angle)))


def gate_from_label(label: str) -> GateDef:
    if label in FIXED_GATES:
        return FIXED_GATES[label]
    m = _PARAM_RE.match(label)
    if m:
        return parametric_gate(m.group(1), float(m.group(2)))
    m = re.match(r"^(Rx|Ry|Rz)\[(\d+)/(\d+)\]$", label)
    if m:
        k, den = int(m.group(2)), int(m.group(3))
        arity, build = _PARAM_BUILDERS[m.group(1)]
        return GateDef(label, arity, build(2 * np.pi * k / den))
    raise QmcspError(f"unknown gate label {label!r}")


def arrangements(arity: int, n_qubits: int) -> int:
    """Number of ordered tuples of distinct qubits."""
    out = 1
    for i in range(arity):
        out *= max(n_qubits - i, 0)
    return out


@dataclass(frozen=True)
class GateSet:
    name: str
    gates: tuple[GateDef, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        labels = [g.label for g in self.gates]
        if len(set(labels)) != len(labels):
            raise QmcspError(f"gate set {self.name}: duplicate labels")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def index(self, label: str) -> int:
        for i, g in enumerate(self.gates):
            if g.label == label:
                return i
        raise QmcspError(f"gate {label!r} not in gate set {self.name}")

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.gates]

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for g in self.gates:
            h.update(g.label.encode())
            h.update(np.round(g.matrix, 12).tobytes())
        return h.hexdigest()[:16]

    @property
    def is_classical(self) -> bool:
        return all(g.is_permutation for g in self.gates)

    @property
    def max_arity(self) -> int:
        return max((g.arity for g in self.gates), default=1)

    def placements(self, n_qubits: int) -> list[tuple[int, tuple[int, ...]]]:
        """All (gate index, qubit tuple) choices for one slot, in tie-break order."""
        out = []
        for gi, g in enumerate(self.gates):
            for q in itertools.permutations(range(n_qubits), g.arity):
                out.append((gi, q))
        return out

    def slot_count(self, n_qubits: int) -> int:
        return sum(arrangements(g.arity, n_qubits) for g in self.gates)

    def subset(self, labels, name: str | None = None) -> "GateSet":
        labels = list(labels)
        return GateSet(name or f"{self.name}[{','.join(labels)}]", tuple(self.gates[self.index(lb)] for lb in labels))

    def extended(self, extra, name: str) -> "GateSet":
        have = set(self.labels)
        add = [g for g in extra if g.label not in have]
        return GateSet(name, self.gates + tuple(add))


def _rotation_grid(depth: int) -> list[GateDef]:
    den = 2**depth
    out = []
    for kind, build in (("Rx", rx), ("Ry", ry), ("Rz", rz)):
        for k in range(1, den):
            out.append(GateDef(f"{kind}[{k}/{den}]", 1, build(2 * np.pi * k / den)))
    return out


def g0() -> GateSet:
    return GateSet("G0", tuple(FIXED_GATES[k] for k in ("X", "H", "T", "Tdg", "CNOT", "TOFFOLI", "ACNOT")))


def grot(depth: int = 3) -> GateSet:
    name = "Grot" if depth == 3 else f"Grot{depth}"
    return GateSet(name, tuple(_rotation_grid(depth)) + (FIXED_GATES["CNOT"],))


def grev() -> GateSet:
    """Classical reversible part of G0."""
    return GateSet("Grev", tuple(FIXED_GATES[k] for k in ("X", "CNOT", "TOFFOLI", "ACNOT")))


def g0_two_qubit() -> GateSet:
    """G0 without Toffoli: every gate acts on at most two qubits."""
    return GateSet("G0-2q", tuple(FIXED_GATES[k] for k in ("X", "H", "T", "Tdg", "CNOT", "ACNOT")))


_REGISTRY = {
    "G0": g0,
    "Grot": grot,
    "Grev": grev,
    "G0-2q": g0_two_qubit,
}


def available_gatesets() -> list[str]:
    return sorted(_REGISTRY)


def get_gateset(name: str) -> GateSet:
    if name in _REGISTRY:
        return _REGISTRY[name]()
    m = re.match(r"^Grot(\d+)$", name)
    if m:
        return grot(int(m.group(1)))
    raise QmcspError(f"unknown gate set {name!r}; available: {', '.join(available_gatesets())}")
