import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from qmcsp import serialize
from qmcsp.cli import load_golden
from qmcsp.errors import DimensionError
from qmcsp.experiments import overlap_witness, perturbation_report, phase_flip, random_circuit
from qmcsp.qcore import (
    FIXED_GATES,
    PartialTruthTable,
    PureState,
    QuantumCircuit,
    TruthTable,
    UnitaryMatrix,
    circuit_unitary,
    g0,
    parametric_gate,
    run_circuit,
)
from qmcsp.verifiers import (
    ancilla_state_distances,
    smcsp_zero_probability,
    umcsp_threshold,
    verify_mqcsp,
    verify_smcsp,
    verify_umcsp,
)

G0 = g0()
G0Z = G0.extended([FIXED_GATES["Z"]], name="G0+Z")


def ry_circuit(theta):
    g = parametric_gate("Ry", theta)
    return QuantumCircuit.from_labels(1, 0, G0.extended([g], name="G0+Ry"), [(g.label, (0,))])


# ---------------------------------------------------------------- MQCSP


def test_mqcsp_exact_witness_accepts():
    T = TruthTable.from_string("0001")
    W = QuantumCircuit.from_labels(2, 1, G0, [("TOFFOLI", (0, 1, 2))], output=2)
    for ell in (1, 10, 1000):
        assert verify_mqcsp(T, W, 0.9, 0.6, ell, rng=ell).verdict == "Accept"


def test_mqcsp_wrong_witness_rejects():
    rep = verify_mqcsp(TruthTable.from_string("10"), QuantumCircuit(1, 0, G0, ()), 0.9, 0.6, 100, rng=0)
    assert rep.verdict == "Reject"
    assert [c.name for c in rep.checks if c.fires] == ["x=0", "x=1"]


def test_mqcsp_acceptance_at_beta_rejects():
    # f(x) = x and a rotation that leaves the right answer with probability 0.6 on both inputs
    theta = 2 * math.acos(math.sqrt(0.6))
    W = ry_circuit(theta)
    T = TruthTable.from_string("01")
    rejects = sum(verify_mqcsp(T, W, 0.9, 0.6, 10_000, rng=r).verdict == "Reject" for r in range(100))
    assert rejects / 100 >= 0.99


def test_mqcsp_skips_star_entries():
    P = PartialTruthTable.from_string("1*")
    W = QuantumCircuit.from_labels(1, 0, G0, [("X", (0,))])
    rep = verify_mqcsp(P, W, 0.9, 0.6, 100, rng=0)
    assert [c.name for c in rep.checks] == ["x=0"] and rep.verdict == "Accept"


def test_mqcsp_dimension_mismatch():
    with pytest.raises(DimensionError):
        verify_mqcsp(TruthTable.from_string("01"), QuantumCircuit(2, 0, G0, ()), 0.9, 0.6, 10)


# ---------------------------------------------------------------- SMCSP


def test_smcsp_exact_and_orthogonal():
    psi, exact = overlap_witness(1.0)
    assert smcsp_zero_probability(psi, exact) == 1.0
    assert verify_smcsp(psi, exact, 0.9, 0.5, 10_000, rng=3).verdict == "Accept"
    psi, orth = overlap_witness(0.0)
    assert smcsp_zero_probability(psi, orth) == pytest.approx(0.5)
    assert verify_smcsp(psi, orth, 0.9, 0.5, 10_000, rng=3).verdict == "Reject"


def test_smcsp_accepts_at_alpha_with_hoeffding_margin():
    alpha, beta, ell = 0.9, 0.5, 200
    psi, W = overlap_witness(alpha)
    acc = sum(verify_smcsp(psi, W, alpha, beta, ell, rng=r).verdict == "Accept" for r in range(300)) / 300
    assert acc >= 1 - math.exp(-((alpha - beta) ** 2) * ell / 16) - 0.05
    assert acc >= 2 / 3


@settings(max_examples=10)
@given(st.floats(0.0, 1.0), st.integers(50, 400))
def test_smcsp_matches_binomial_tail(ov, ell):
    psi, W = overlap_witness(ov)
    p0 = smcsp_zero_probability(psi, W)
    need = math.ceil((0.5 + 1.4 / 4) * ell - 1e-9)
    predicted = binom.sf(need - 1, ell, p0)
    acc = np.mean([verify_smcsp(psi, W, 0.9, 0.5, ell, rng=r).verdict == "Accept" for r in range(400)])
    # four-sigma band for 400 Bernoulli draws
    assert abs(acc - predicted) <= 4 * math.sqrt(max(predicted * (1 - predicted), 1e-4) / 400) + 1e-9


# ---------------------------------------------------------------- UMCSP


def test_umcsp_exact_witness_accepts():
    C = QuantumCircuit.from_labels(2, 0, G0, [("H", (0,)), ("CNOT", (0, 1))])
    rep = verify_umcsp(circuit_unitary(C), C, 0.5, 10_000, 10_000, rng=1)
    assert rep.verdict == "Accept" and rep.mode == "formula"


def test_umcsp_phase_adversary():
    Z = QuantumCircuit.from_labels(1, 0, G0Z, [("Z", (0,))])
    rep = verify_umcsp(UnitaryMatrix.identity(1), Z, 0.5, 10_000, 10_000, rng=0)
    assert [c.negatives for c in rep.checks[:2]] == [0, 0]
    assert rep.checks[2].probability == pytest.approx(1.0)
    assert rep.verdict == "Reject" and rep.meta["standard_basis_only"] == "Accept"


@pytest.mark.parametrize("n,a", [(1, 0), (1, 1), (2, 0), (2, 3)])
def test_phase_flip_of_identity(n, a):
    rep = verify_umcsp(phase_flip(n, a), QuantumCircuit(n, 0, G0, ()), 0.5, 100, 100, rng=a)
    assert rep.verdict == "Reject" and rep.meta["standard_basis_only"] == "Accept"


def test_threshold_formula_and_cap():
    assert umcsp_threshold(1, 0.5) == pytest.approx(2.0**-20 / 16)
    C = QuantumCircuit.from_labels(1, 0, G0, [("T", (0,))])
    rep = verify_umcsp(UnitaryMatrix.identity(1), C, 0.5, 1000, 1000, rng=0, threshold_cap=0.5)
    assert rep.mode == "threshold_cap" and rep.meta["threshold"] == 0.5
    assert rep.verdict == "Accept"
    assert verify_umcsp(UnitaryMatrix.identity(1), C, 0.5, 1000, 1000, rng=0).verdict == "Reject"


def test_t_perturbation_report_matches_golden():
    golden = load_golden("verifiers")["payload"]["t_perturbation"]
    assert serialize.canonical(perturbation_report(0)) == golden


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_completeness_for_exact_witnesses(seed):
    rng = np.random.default_rng(seed)
    C = random_circuit(2, G0, int(rng.integers(0, 4)), rng)
    U = circuit_unitary(C)
    accepts = sum(verify_umcsp(U, C, 0.5, 1000, 1000, rng=r).verdict == "Accept" for r in range(20))
    assert accepts == 20


def test_report_determinism():
    C = QuantumCircuit.from_labels(1, 0, G0, [("T", (0,))])
    a = verify_umcsp(UnitaryMatrix.identity(1), C, 0.5, 500, 500, rng=11, threshold_cap=0.2)
    b = verify_umcsp(UnitaryMatrix.identity(1), C, 0.5, 500, 500, rng=11, threshold_cap=0.2)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    c = verify_umcsp(UnitaryMatrix.identity(1), C, 0.5, 500, 500, rng=12, threshold_cap=0.2)
    assert json.dumps(a.to_json()) != json.dumps(c.to_json())


@settings(max_examples=20)
@given(st.floats(1e-10, 1e-4), st.sampled_from(["CRy", "CRz"]), st.integers(0, 1))
def test_ancilla_states_within_bound(delta, kind, ctrl):
    eta = 4 * math.asin(math.sqrt(delta))
    leak = parametric_gate(kind, eta)
    gs = G0.extended([leak], name="leaky")
    C = QuantumCircuit.from_labels(2, 0, G0, [("H", (1,)), ("CNOT", (1, 0))])
    W = QuantumCircuit.from_labels(2, 1, gs, C.labeled_ops() + [(leak.label, (ctrl, 2))])
    for p in ancilla_state_distances(circuit_unitary(C), W):
        assert p["delta"] <= delta * (1 + 1e-6) + 1e-15
        assert p["distance"] <= p["bound"] + 1e-12
