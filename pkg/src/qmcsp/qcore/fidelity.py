"""Fidelity computations between circuits and targets."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from .sim import DIM_CAP, apply_gate
from .types import PureState, QuantumCircuit, UnitaryMatrix

# deficits below this are treated as floating-point noise by certified bounds
NOISE_FLOOR = 1e-12


def _projected_blocks(circuit: QuantumCircuit, U: UnitaryMatrix) -> np.ndarray:
    """Y[a_out, anc, a_in] = (<a_out| (x) <anc|)(U^dag (x) I) C |a_in, 0^t>."""
    if U.n != circuit.n:
        raise DimensionError(f"unitary acts on {U.n} qubits, circuit has {circuit.n} inputs")
    if 2**circuit.width > DIM_CAP:
        from ..errors import ResourceError

        raise ResourceError(f"register of {circuit.width} qubits exceeds the dimension cap", 2**circuit.width)
    N, t = circuit.n, circuit.t
    cols = np.zeros((2**circuit.width, 2**N), dtype=complex)
    cols[np.arange(2**N) << t, np.arange(2**N)] = 1
    for g, qs in circuit.ops:
        cols = apply_gate(cols, circuit.width, circuit.gateset.gates[g].matrix, qs)
    Y = cols.reshape(2**N, 2**t, 2**N)
    return np.einsum("ba,bkc->akc", U.entries.conj(), Y)


def fidelities_from_blocks(Y: np.ndarray) -> np.ndarray:
    """Basis fidelities then pair fidelities in (a, b) lexicographic order. Works on a leading batch axis."""
    d = Y.shape[-1]
    idx = np.arange(d)
    diag = Y[..., idx, :, idx]  # (d, batch..., anc) after fancy indexing
    diag = np.moveaxis(diag, 0, -2)  # batch..., d, anc
    basis = np.sum(np.abs(diag) ** 2, axis=-1)
    a, b = np.triu_indices(d, k=1)
    # projection of (C|a>+C|b>)/sqrt2 onto (|a>+|b>)/sqrt2 is (Y[a,:,a]+Y[a,:,b]+Y[b,:,a]+Y[b,:,b])/2
    amp = (Y[..., a, :, a] + Y[..., a, :, b] + Y[..., b, :, a] + Y[..., b, :, b]) / 2
    amp = np.moveaxis(amp, 0, -2)
    pair = np.sum(np.abs(amp) ** 2, axis=-1)
    return np.concatenate([basis, pair], axis=-1)


def unitary_basis_fidelities(circuit: QuantumCircuit, U: UnitaryMatrix) -> list[float]:
    return [float(v) for v in fidelities_from_blocks(_projected_blocks(circuit, U))]


def ancilla_projections(circuit: QuantumCircuit, U: UnitaryMatrix) -> np.ndarray:
    """Unnormalized ancilla states chi_a = (<a| (x) I)(U^dag (x) I) C |a, 0^t>, one row per a."""
    Y = _projected_blocks(circuit, U)
    d = Y.shape[0]
    return np.stack([Y[a, :, a] for a in range(d)])


def _n_from_count(count: int) -> int:
    for n in range(0, 16):
        d = 2**n
        if d + d * (d - 1) // 2 == count:
            return n
    raise DimensionError(f"{count} fidelities do not match 2^n + C(2^n, 2) for any n")


def certified_min_fidelity(fidelities, n: int | None = None, noise_floor: float = NOISE_FLOOR) -> float:
    """Worst-case fidelity bound 1 - 10 * 2^(n/2) * delta^(1/4), clamped at 0."""
    f = np.asarray(list(fidelities), dtype=float)
    if f.size == 0:
        raise DimensionError("no fidelities supplied")
    if np.any(f < -1e-12) or np.any(f > 1 + 1e-9):
        raise DimensionError("fidelities must lie in [0, 1]")
    if n is None:
        n = _n_from_count(f.size)
    delta = max(0.0, 1.0 - float(f.min()))
    if delta < noise_floor:
        delta = 0.0
    return max(0.0, 1.0 - 10.0 * 2 ** (n / 2) * delta**0.25)


def min_fidelity_from_eigenvalues(eigs: np.ndarray) -> np.ndarray:
    """min over |psi> of |<psi|V|psi>|^2 given the eigenvalues of unitary V (batched on leading axes).

    The numerical range of a normal matrix is the convex hull of its spectrum.
    When the eigenphases fit in an arc of length L < pi the closest hull point
    to the origin sits on the chord at distance cos(L/2); otherwise the hull
    contains 0.
    """
    ang = np.sort(np.mod(np.angle(eigs), 2 * np.pi), axis=-1)
    gaps = np.diff(ang, axis=-1)
    wrap = ang[..., :1] + 2 * np.pi - ang[..., -1:]
    gap = np.max(np.concatenate([gaps, wrap], axis=-1), axis=-1)
    arc = 2 * np.pi - gap
    return np.where(arc < np.pi, np.cos(arc / 2) ** 2, 0.0)


def exact_min_fidelity(circuit_or_matrix, U: UnitaryMatrix) -> float:
    """Exact worst-case fidelity for ancilla-free circuits."""
    from .sim import circuit_unitary

    if isinstance(circuit_or_matrix, QuantumCircuit):
        if circuit_or_matrix.t != 0:
            raise DimensionError("exact worst-case fidelity needs t = 0")
        W = circuit_unitary(circuit_or_matrix).entries
    else:
        W = np.asarray(circuit_or_matrix.entries if isinstance(circuit_or_matrix, UnitaryMatrix) else circuit_or_matrix)
    if W.shape != U.entries.shape:
        raise DimensionError("shape mismatch between circuit unitary and target")
    return float(min_fidelity_from_eigenvalues(np.linalg.eigvals(U.entries.conj().T @ W)))


def state_overlap(circuit: QuantumCircuit, psi: PureState) -> float:
    """||(<psi| (x) I) C|0^{n+t}>||^2, with psi on the first n qubits."""
    from .sim import run_circuit

    if psi.n != circuit.n:
        raise DimensionError(f"target has {psi.n} qubits, circuit has {circuit.n} inputs")
    out = run_circuit(circuit).amps.reshape(2**circuit.n, 2**circuit.t)
    return float(np.sum(np.abs(psi.amps.conj() @ out) ** 2))


def swap_test_probability(phi: PureState, psi: PureState) -> float:
    """Probability of outcome 1."""
    if phi.n != psi.n:
        raise DimensionError("swap test on states of different sizes")
    return 0.5 - 0.5 * abs(np.vdot(phi.amps, psi.amps)) ** 2


def swap_test(phi: PureState, psi: PureState, rng: np.random.Generator) -> int:
    return int(rng.random() < swap_test_probability(phi, psi))
