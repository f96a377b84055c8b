import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmcsp.errors import DimensionError, QmcspError
from qmcsp.qcore import (
    FIXED_GATES,
    GateDef,
    PartialTruthTable,
    PureState,
    QuantumCircuit,
    TruthTable,
    UnitaryMatrix,
    certified_min_fidelity,
    circuit_unitary,
    exact_min_fidelity,
    func_acceptance,
    g0,
    gate_from_label,
    get_gateset,
    grot,
    inverse_circuit,
    parametric_gate,
    run_circuit,
    state_prep_circuit,
    state_overlap,
    swap_test,
    swap_test_probability,
    unitary_basis_fidelities,
)

G0 = g0()
G0Z = G0.extended([FIXED_GATES["Z"]], name="G0+Z")


def circ(n, t, labels, gs=G0, output=0):
    return QuantumCircuit.from_labels(n, t, gs, labels, output)


@st.composite
def random_circuits(draw, gs=G0, max_n=2, max_t=1, max_size=5):
    n = draw(st.integers(1, max_n))
    t = draw(st.integers(0, max_t))
    placements = gs.placements(n + t)
    picks = draw(st.lists(st.integers(0, len(placements) - 1), max_size=max_size))
    return QuantumCircuit(n, t, gs, tuple(placements[i] for i in picks))


@st.composite
def random_states(draw, n=None):
    n = n or draw(st.integers(1, 3))
    parts = draw(st.lists(st.floats(-1, 1), min_size=2 * 2**n, max_size=2 * 2**n))
    v = np.array(parts[: 2**n]) + 1j * np.array(parts[2**n :])
    if np.linalg.norm(v) < 1e-3:
        v[0] = 1
    return PureState.normalized(v)


# ---------------------------------------------------------------- gates


def test_gate_rejects_non_unitary_and_wide_gates():
    with pytest.raises(DimensionError):
        GateDef("bad", 1, np.array([[1, 1], [0, 1]]))
    with pytest.raises(DimensionError):
        GateDef("wide", 4, np.eye(16))


def test_acnot_flips_target_when_control_is_zero():
    c = circ(2, 0, [("ACNOT", (0, 1))])
    assert run_circuit(c, PureState.basis("00")) == PureState.basis("01")
    assert run_circuit(c, PureState.basis("10")) == PureState.basis("10")


def test_gate_labels_round_trip():
    for label in ["H", "TOFFOLI", "Ry[3/8]", "CRz(0.25)", "Ph(1.5)"]:
        assert gate_from_label(label).label == label
    assert np.allclose(gate_from_label("Ry[4/8]").matrix, parametric_gate("Ry", np.pi).matrix)


def test_gateset_registry():
    assert get_gateset("G0").labels == ["X", "H", "T", "Tdg", "CNOT", "TOFFOLI", "ACNOT"]
    assert len(grot().gates) == 22
    with pytest.raises(QmcspError, match="available"):
        get_gateset("nope")


def test_placements_lex_order_and_count():
    p = G0.placements(3)
    assert len(p) == G0.slot_count(3) == 4 * 3 + 2 * 6 + 6
    assert p[0] == (0, (0,))
    assert p == sorted(p)


# ---------------------------------------------------------------- circuits


def test_circuit_validation():
    with pytest.raises(DimensionError):
        circ(1, 0, [("CNOT", (0, 1))])
    with pytest.raises(DimensionError):
        circ(2, 0, [("CNOT", (0, 0))])
    c = circ(2, 1, [("H", (0,)), ("TOFFOLI", (0, 1, 2))])
    assert c.size() == 2 and c.width == 3


def test_circuit_json_round_trip():
    c = circ(2, 1, [("H", (0,)), ("TOFFOLI", (0, 1, 2))], output=2)
    assert QuantumCircuit.from_json(c.to_json()) == c


def test_run_circuit_examples():
    assert run_circuit(circ(1, 2, [])) == PureState.basis("000")
    plus = run_circuit(circ(1, 0, [("H", (0,))]))
    assert np.allclose(plus.amps, np.array([1, 1]) / np.sqrt(2))
    out = run_circuit(circ(2, 0, [("X", (0,)), ("CNOT", (0, 1))]), PureState.basis("00"))
    assert out == PureState.basis("11")


def test_circuit_unitary_examples():
    assert np.allclose(circuit_unitary(circ(1, 0, [])).entries, np.eye(2))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(circuit_unitary(circ(2, 0, [("CNOT", (0, 1))])).entries, cnot)
    assert np.allclose(circuit_unitary(circ(1, 0, [("H", (0,)), ("H", (0,))])).entries, np.eye(2), atol=1e-12)


def test_func_acceptance_examples():
    assert func_acceptance(circ(1, 0, [("X", (0,))]), "0", 1) == pytest.approx(1.0)
    assert func_acceptance(circ(1, 0, [("H", (0,))]), "0", 1) == pytest.approx(0.5)
    toff = circ(2, 1, [("TOFFOLI", (0, 1, 2))], output=2)
    assert func_acceptance(toff, "11", 1) == pytest.approx(1.0)
    assert func_acceptance(toff, "10", 0) == pytest.approx(1.0)


@given(random_circuits(), st.data())
def test_run_preserves_norm(c, data):
    psi = data.draw(random_states(c.n))
    assert np.linalg.norm(run_circuit(c, psi).amps) == pytest.approx(1.0, abs=1e-9)


@given(random_circuits(max_t=0), random_circuits(max_t=0))
def test_composition_matches_matrix_product(a, b):
    if a.n != b.n:
        return
    ab = a.then(b)
    assert np.allclose(circuit_unitary(ab).entries, circuit_unitary(b).entries @ circuit_unitary(a).entries, atol=1e-10)


@given(random_circuits(max_t=0))
def test_inverse_circuit_undoes(c):
    both = c.then(inverse_circuit(c)) if inverse_circuit(c).gateset == c.gateset else None
    U = circuit_unitary(inverse_circuit(c)).entries @ circuit_unitary(c).entries
    assert np.allclose(U, np.eye(2**c.n), atol=1e-10)
    if both is not None:
        assert np.allclose(circuit_unitary(both).entries, np.eye(2**c.n), atol=1e-10)


@given(random_circuits(gs=get_gateset("Grev"), max_n=3))
def test_reversible_circuits_stay_classical(c):
    for x in range(2**c.n):
        out = run_circuit(c, PureState.basis(format(x, f"0{c.n}b")))
        assert np.isclose(np.max(np.abs(out.amps)), 1.0)


# ---------------------------------------------------------------- data types


def test_state_and_table_invariants():
    with pytest.raises(DimensionError):
        PureState(1, np.array([1.0, 1.0]))
    with pytest.raises(DimensionError):
        TruthTable.from_string("011")
    P = PartialTruthTable.from_string("0*1*")
    assert P.n == 2 and str(P) == "0*1*"
    assert TruthTable.from_string("0001")("11") == 1
    with pytest.raises(DimensionError):
        UnitaryMatrix(1, np.array([[1, 1], [0, 1]]))


# ---------------------------------------------------------------- fidelities


def test_unitary_fidelity_examples():
    assert unitary_basis_fidelities(circ(1, 0, []), UnitaryMatrix.identity(1)) == pytest.approx([1.0, 1.0, 1.0])
    z = circ(1, 0, [("Z", (0,))], gs=G0Z)
    assert unitary_basis_fidelities(z, UnitaryMatrix.identity(1)) == pytest.approx([1.0, 1.0, 0.0], abs=1e-12)
    h = circ(1, 0, [("H", (0,))])
    assert unitary_basis_fidelities(h, circuit_unitary(h)) == pytest.approx([1.0] * 3)


def test_certified_min_fidelity_examples():
    assert certified_min_fidelity([1.0] * 10) == 1.0
    assert certified_min_fidelity([1 - 1e-8] + [1.0] * 9) == pytest.approx(0.8)
    assert certified_min_fidelity([0.5, 1.0, 1.0]) == 0.0


@given(random_circuits(max_t=0), st.data())
def test_exact_min_fidelity_is_a_lower_bound(c, data):
    U = circuit_unitary(data.draw(random_circuits(max_t=0).filter(lambda d: d.n == c.n)))
    worst = exact_min_fidelity(c, U)
    W = circuit_unitary(c).entries
    for _ in range(5):
        psi = data.draw(random_states(c.n)).amps
        assert abs(np.vdot(U.entries @ psi, W @ psi)) ** 2 >= worst - 1e-9
    assert min(unitary_basis_fidelities(c, U)) >= worst - 1e-9


def test_swap_test_examples():
    zero, one = PureState.basis("0"), PureState.basis("1")
    plus = PureState.normalized([1, 1])
    assert swap_test_probability(zero, zero) == 0
    assert swap_test_probability(zero, one) == pytest.approx(0.5)
    assert swap_test_probability(zero, plus) == pytest.approx(0.25)
    rng = np.random.default_rng(0)
    assert sum(swap_test(zero, zero, rng) for _ in range(100)) == 0


# ---------------------------------------------------------------- state preparation


def test_state_prep_examples():
    assert state_prep_circuit([1, 0]).size() == 0
    assert state_prep_circuit(np.array([1, 1]) / np.sqrt(2)).size() == 1


@given(random_states())
def test_state_prep_accuracy(psi):
    c = state_prep_circuit(psi.amps)
    assert np.linalg.norm(run_circuit(c).amps - psi.amps) < 1e-6
    assert state_overlap(c, psi) == pytest.approx(1.0, abs=1e-9)
