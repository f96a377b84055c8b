"""State preparation by cascades of uniformly controlled rotations.

Magnitudes are loaded with Ry rotations on qubit j controlled by qubits
0..j-1, then relative phases are injected with Rz rotations in the reverse
direction, and a final global phase gate fixes the overall phase. Each
uniformly controlled rotation is compiled into single-qubit rotations and
CNOTs, so the gate count is at most O(4^n).
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from .gates import FIXED_GATES, GateSet, parametric_gate
from .types import QuantumCircuit

ANGLE_EPS = 1e-12


def _uniformly_controlled(kind: str, controls: list[int], target: int, angles: np.ndarray, out: list):
    """Append ops (label, qubits) realizing R(angles[p]) on target when controls read p (MSB first)."""
    if np.all(np.abs(angles) < ANGLE_EPS):
        return
    if not controls:
        out.append((f"{kind}({float(angles[0])!r})", (target,)))
        return
    half = len(angles) // 2
    a0, a1 = angles[:half], angles[half:]
    _uniformly_controlled(kind, controls[1:], target, (a0 + a1) / 2, out)
    diff = (a0 - a1) / 2
    if np.all(np.abs(diff) < ANGLE_EPS):
        return
    # X on the target negates the angle of both Ry and Rz
    out.append(("CNOT", (controls[0], target)))
    _uniformly_controlled(kind, controls[1:], target, diff, out)
    out.append(("CNOT", (controls[0], target)))


def state_prep_ops(v) -> list[tuple[str, tuple[int, ...]]]:
    v = np.asarray(v, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DimensionError("cannot prepare the zero vector")
    if abs(nrm - 1) > 1e-9:
        raise DimensionError(f"state_prep_circuit expects a normalized vector, got norm {nrm:.3e}")
    n = v.size.bit_length() - 1
    if 2**n != v.size:
        raise DimensionError(f"length {v.size} is not a power of two")
    mag2 = np.abs(v) ** 2
    ops: list = []
    for j in range(n):
        # probability mass of each length-(j+1) prefix
        mass = mag2.reshape(2 ** (j + 1), -1).sum(axis=1).reshape(2**j, 2)
        theta = 2 * np.arctan2(np.sqrt(mass[:, 1]), np.sqrt(mass[:, 0]))
        _uniformly_controlled("Ry", list(range(j)), j, theta, ops)

    phase = np.where(np.abs(v) > 1e-14, np.angle(v), 0.0)
    for j in range(n - 1, -1, -1):
        pairs = phase.reshape(2**j, 2)
        _uniformly_controlled("Rz", list(range(j)), j, pairs[:, 1] - pairs[:, 0], ops)
        phase = pairs.mean(axis=1)
    glob = float(phase[0])
    if abs(glob) > ANGLE_EPS:
        ops.append((f"Ph({glob!r})", (0,)))
    return ops


def state_prep_circuit(v) -> QuantumCircuit:
    """Circuit C over CNOT and parametric rotations with C|0...0> = v."""
    ops = state_prep_ops(v)
    n = np.asarray(v).size.bit_length() - 1
    labels = list(dict.fromkeys(lb for lb, _ in ops))
    gates = []
    for lb in labels:
        if lb in FIXED_GATES:
            gates.append(FIXED_GATES[lb])
        else:
            kind, ang = lb.split("(", 1)
            gates.append(parametric_gate(kind, float(ang[:-1])))
    gs = GateSet("prep", tuple(gates))
    return QuantumCircuit.from_labels(n, 0, gs, ops)
