"""Immutable data objects: circuits, states, unitaries, truth tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import DimensionError
from .gates import GateSet, gate_from_label, get_gateset

NORM_TOL = 1e-9
UNITARITY_TOL = 1e-9

Op = tuple[int, tuple[int, ...]]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuantumCircuit:
    """Gate sequence on n input qubits followed by t ancillas (qubit 0 is the MSB).

    ``output`` is the qubit read as f(x) in function problems. It defaults to 0
    and is set by the oracles when the best circuit writes elsewhere.
    """

    n: int
    t: int
    gateset: GateSet
    ops: tuple[Op, ...] = ()
    output: int = 0

    def __post_init__(self):
        ops = tuple((int(g), tuple(int(q) for q in qs)) for g, qs in self.ops)
        object.__setattr__(self, "ops", ops)
        width = self.n + self.t
        if self.n < 0 or self.t < 0:
            raise DimensionError("negative qubit count")
        if not 0 <= self.output < max(width, 1):
            raise DimensionError(f"output qubit {self.output} outside register of {width}")
        for g, qs in ops:
            if not 0 <= g < len(self.gateset):
                raise DimensionError(f"gate index {g} outside gate set {self.gateset.name}")
            if len(qs) != self.gateset.gates[g].arity:
                raise DimensionError(f"gate {self.gateset.gates[g].label} expects {self.gateset.gates[g].arity} qubits, got {qs}")
            if len(set(qs)) != len(qs) or any(not 0 <= q < width for q in qs):
                raise DimensionError(f"bad qubit tuple {qs} for a {width}-qubit register")

    @property
    def width(self) -> int:
        return self.n + self.t

    def size(self) -> int:
        return len(self.ops)

    def __len__(self):
        return len(self.ops)

    def then(self, other: "QuantumCircuit") -> "QuantumCircuit":
        """Concatenate (self first). Gate sets must match by name and fingerprint."""
        if other.gateset.fingerprint != self.gateset.fingerprint or other.width != self.width:
            raise DimensionError("cannot concatenate circuits over different registers or gate sets")
        return QuantumCircuit(self.n, self.t, self.gateset, self.ops + other.ops, self.output)

    def with_output(self, q: int) -> "QuantumCircuit":
        return QuantumCircuit(self.n, self.t, self.gateset, self.ops, q)

    def labeled_ops(self) -> list[tuple[str, tuple[int, ...]]]:
        return [(self.gateset.gates[g].label, qs) for g, qs in self.ops]

    @classmethod
    def from_labels(cls, n: int, t: int, gateset: GateSet, ops: Iterable[tuple[str, Sequence[int]]], output: int = 0):
        return cls(n, t, gateset, tuple((gateset.index(lb), tuple(q)) for lb, q in ops), output)

    def to_json(self) -> dict:
        d = {
            "n": self.n,
            "t": self.t,
            "gateset": self.gateset.name,
            "ops": [{"g": lb, "q": list(q)} for lb, q in self.labeled_ops()],
        }
        if self.output:
            d["output"] = self.output
        return d

    @classmethod
    def from_json(cls, d: dict, gateset: GateSet | None = None) -> "QuantumCircuit":
        labels = [o["g"] for o in d["ops"]]
        if gateset is None:
            try:
                gateset = get_gateset(d["gateset"])
                missing = [lb for lb in labels if lb not in gateset.labels]
                if missing:
                    gateset = gateset.extended([gate_from_label(lb) for lb in missing], d["gateset"])
            except Exception:
                uniq = list(dict.fromkeys(labels))
                gateset = GateSet(d["gateset"], tuple(gate_from_label(lb) for lb in uniq))
        ops = [(o["g"], o["q"]) for o in d["ops"]]
        return cls.from_labels(int(d["n"]), int(d["t"]), gateset, ops, int(d.get("output", 0)))

    def __str__(self):
        body = " ".join(f"{lb}{list(q)}" for lb, q in self.labeled_ops()) or "(empty)"
        return f"<{self.gateset.name} n={self.n} t={self.t} out={self.output}: {body}>"


@dataclass(frozen=True, eq=False)
class PureState:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex).ravel()
        if a.shape != (2**self.n,):
            raise DimensionError(f"state on {self.n} qubits needs {2**self.n} amplitudes, got {a.shape[0]}")
        if abs(np.linalg.norm(a) - 1) > NORM_TOL:
            raise DimensionError(f"state norm {np.linalg.norm(a):.3e} is not 1")
        object.__setattr__(self, "amps", _frozen(a))

    @classmethod
    def basis(cls, bits: str) -> "PureState":
        a = np.zeros(2 ** len(bits), dtype=complex)
        a[int(bits, 2) if bits else 0] = 1
        return cls(len(bits), a)

    @classmethod
    def normalized(cls, v) -> "PureState":
        v = np.asarray(v, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise DimensionError("zero vector")
        n = int(round(np.log2(v.size)))
        return cls(n, v / nrm)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(self.n + other.n, np.kron(self.amps, other.amps))

    def overlap(self, other: "PureState") -> complex:
        if self.n != other.n:
            raise DimensionError("overlap of states on different registers")
        return complex(np.vdot(self.amps, other.amps))

    def __eq__(self, other):
        return isinstance(other, PureState) and self.n == other.n and np.array_equal(self.amps, other.amps)

    def __hash__(self):
        return hash((self.n, self.amps.tobytes()))

    def to_json(self) -> dict:
        return {"n": self.n, "re": self.amps.real.tolist(), "im": self.amps.imag.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "PureState":
        return cls(int(d["n"]), np.asarray(d["re"]) + 1j * np.asarray(d.get("im", np.zeros(len(d["re"])))))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    n: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        d = 2**self.n
        if m.shape != (d, d):
            raise DimensionError(f"unitary on {self.n} qubits needs shape {(d, d)}, got {m.shape}")
        if self.deviation_of(m) > UNITARITY_TOL:
            raise DimensionError(f"matrix is not unitary (max deviation {self.deviation_of(m):.2e})")
        object.__setattr__(self, "entries", _frozen(m))

    @staticmethod
    def deviation_of(m: np.ndarray) -> float:
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) if m.size else 0.0

    @property
    def deviation(self) -> float:
        return self.deviation_of(self.entries)

    @classmethod
    def identity(cls, n: int) -> "UnitaryMatrix":
        return cls(n, np.eye(2**n))

    @property
    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.n, self.entries.conj().T)

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        return UnitaryMatrix(self.n, self.entries @ other.entries)

    def __eq__(self, other):
        return isinstance(other, UnitaryMatrix) and self.n == other.n and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.n, self.entries.tobytes()))

    def to_json(self) -> dict:
        return {"n": self.n, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "UnitaryMatrix":
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
        return cls(int(d["n"]), re + 1j * im)


def _parse_bits(s: str, allowed: str) -> tuple[int, ...]:
    s = "".join(s.split())
    bad = set(s) - set(allowed)
    if bad:
        raise DimensionError(f"unexpected symbols {sorted(bad)} in table string")
    return tuple(2 if ch == "*" else int(ch) for ch in s)


def _n_from_len(length: int) -> int:
    n = length.bit_length() - 1
    if length <= 0 or 2**n != length:
        raise DimensionError(f"table length {length} is not a power of two")
    return n


@dataclass(frozen=True)
class TruthTable:
    """Boolean function table, MSB-first in x: bits[i] = f(binary(i, n))."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != 2**self.n:
            raise DimensionError(f"truth table on {self.n} inputs needs {2**self.n} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise DimensionError("truth table entries must be 0/1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "TruthTable":
        bits = _parse_bits(s, "01")
        return cls(_n_from_len(len(bits)), bits)

    @classmethod
    def from_function(cls, n: int, f) -> "TruthTable":
        return cls(n, tuple(int(f(format(i, f"0{n}b") if n else "")) for i in range(2**n)))

    def __call__(self, x: str) -> int:
        return self.bits[int(x, 2) if x else 0]

    def __str__(self):
        return "".join(map(str, self.bits))

    def to_json(self) -> str:
        return str(self)

    @property
    def entries(self) -> tuple[int, ...]:
        return self.bits


@dataclass(frozen=True)
class PartialTruthTable:
    """Table over {0, 1, *}; the star is stored as 2."""

    n: int
    entries: tuple[int, ...]

    STAR = 2

    def __post_init__(self):
        e = tuple(int(b) for b in self.entries)
        if len(e) != 2**self.n:
            raise DimensionError(f"partial table on {self.n} inputs needs {2**self.n} entries, got {len(e)}")
        if any(b not in (0, 1, 2) for b in e):
            raise DimensionError("partial table entries must be 0, 1 or *")
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_string(cls, s: str) -> "PartialTruthTable":
        e = _parse_bits(s, "01*")
        return cls(_n_from_len(len(e)), e)

    @classmethod
    def from_total(cls, T: TruthTable) -> "PartialTruthTable":
        return cls(T.n, T.bits)

    def defined(self) -> np.ndarray:
        return np.array([e != 2 for e in self.entries])

    def __str__(self):
        return "".join("*" if e == 2 else str(e) for e in self.entries)

    def to_json(self) -> str:
        return str(self)
