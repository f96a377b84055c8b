"""Circuit model, gate sets, simulation and fidelities."""

import numpy as np

from .fidelity import (
    ancilla_projections,
    certified_min_fidelity,
    exact_min_fidelity,
    fidelities_from_blocks,
    min_fidelity_from_eigenvalues,
    state_overlap,
    swap_test,
    swap_test_probability,
    unitary_basis_fidelities,
)
from .gates import (
    FIXED_GATES,
    GateDef,
    GateSet,
    arrangements,
    available_gatesets,
    controlled,
    g0,
    g0_two_qubit,
    gate_from_label,
    get_gateset,
    grev,
    grot,
    parametric_gate,
    rx,
    ry,
    rz,
)
from .prep import state_prep_circuit
from .sim import DIM_CAP, apply_gate, circuit_unitary, func_acceptance, output_distribution, run_circuit
from .types import PartialTruthTable, PureState, QuantumCircuit, TruthTable, UnitaryMatrix


def inverse_circuit(circuit: QuantumCircuit) -> QuantumCircuit:
    """Reverse order with each gate replaced by its adjoint (adjoints are appended to the gate set)."""
    gs = circuit.gateset
    extra = []
    index = {}
    for g, _ in circuit.ops:
        gd = gs.gates[g]
        adj = gd.matrix.conj().T
        match = next((i for i, h in enumerate(gs.gates) if h.arity == gd.arity and np.allclose(h.matrix, adj, atol=1e-12)), None)
        if match is None:
            lab = gd.label + "^dg"
            extra.append(GateDef(lab, gd.arity, adj))
            index[g] = lab
        else:
            index[g] = gs.gates[match].label
    new_gs = gs.extended(extra, gs.name) if extra else gs
    ops = [(index[g], qs) for g, qs in reversed(circuit.ops)]
    return QuantumCircuit.from_labels(circuit.n, circuit.t, new_gs, ops, circuit.output)


__all__ = [name for name in dir() if not name.startswith("_") and name != "np"]
