"""Dense statevector simulation."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, ResourceError
from .types import PureState, QuantumCircuit, UnitaryMatrix

DIM_CAP = 2**12


def apply_gate(state: np.ndarray, width: int, matrix: np.ndarray, qubits) -> np.ndarray:
    """Apply a k-qubit matrix to `qubits` of a (2^width, ...) array; trailing axes are batch."""
    k = len(qubits)
    batch = state.shape[1:]
    psi = state.reshape((2,) * width + batch)
    g = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(g, psi, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the gate's output axes first; move them back into place
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(state.shape)


def _run(circuit: QuantumCircuit, vecs: np.ndarray) -> np.ndarray:
    gates = circuit.gateset.gates
    for g, qs in circuit.ops:
        vecs = apply_gate(vecs, circuit.width, gates[g].matrix, qs)
    return vecs


def embed_input(circuit: QuantumCircuit, amps: np.ndarray) -> np.ndarray:
    anc = np.zeros(2**circuit.t, dtype=complex)
    anc[0] = 1
    return np.kron(amps, anc)


def run_circuit(circuit: QuantumCircuit, input: PureState | None = None) -> PureState:
    if input is None:
        input = PureState.basis("0" * circuit.n)
    if input.n != circuit.n:
        raise DimensionError(f"input has {input.n} qubits, circuit expects {circuit.n}")
    if 2**circuit.width > DIM_CAP:
        raise ResourceError(f"register of {circuit.width} qubits exceeds the dimension cap {DIM_CAP}", 2**circuit.width)
    out = _run(circuit, embed_input(circuit, input.amps))
    return PureState(circuit.width, out)


def circuit_unitary(circuit: QuantumCircuit, dim_cap: int = DIM_CAP) -> UnitaryMatrix:
    d = 2**circuit.width
    if d > dim_cap:
        raise ResourceError(f"unitary dimension {d} exceeds cap {dim_cap}", d)
    return UnitaryMatrix(circuit.width, _run(circuit, np.eye(d, dtype=complex)))


def output_distribution(circuit: QuantumCircuit, x: str) -> np.ndarray:
    """Probabilities (p0, p1) of reading the output qubit on input |x, 0^t>."""
    if len(x) != circuit.n:
        raise DimensionError(f"input {x!r} has {len(x)} bits, circuit expects {circuit.n}")
    psi = run_circuit(circuit, PureState.basis(x)).amps
    probs = np.abs(psi.reshape((2,) * circuit.width)) ** 2
    other = tuple(i for i in range(circuit.width) if i != circuit.output)
    return probs.sum(axis=other) if other else probs


def func_acceptance(circuit: QuantumCircuit, x: str, target_bit: int) -> float:
    return float(output_distribution(circuit, x)[int(target_bit)])
