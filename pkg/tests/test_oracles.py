import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmcsp.cli import load_golden
from qmcsp.errors import NotSynthesizable, QmcspError, ResourceError
from qmcsp.oracles import (
    OracleCache,
    OracleVerdict,
    PromiseThresholds,
    count_circuits,
    decide_mqcsp,
    decide_mqcsp_star,
    decide_smcsp,
    decide_umcsp,
    dependency_set,
    enumerate_circuits,
    min_size,
)
from qmcsp.oracles.engine import ReachableSet, clear_engine_cache
from qmcsp.qcore import (
    FIXED_GATES,
    GateSet,
    PartialTruthTable,
    PureState,
    TruthTable,
    UnitaryMatrix,
    circuit_unitary,
    func_acceptance,
    g0,
    grev,
    run_circuit,
    state_overlap,
)

G0 = g0()
AND, XOR, NOT = (TruthTable.from_string(s) for s in ("0001", "0110", "10"))
BELL = PureState.normalized([1, 0, 0, 1])


def tables(n):
    return [TruthTable(n, tuple((c >> (2**n - 1 - i)) & 1 for i in range(2**n))) for c in range(2 ** (2**n))]


def brute_min_size(T, t, gs, s_max):
    """Independent oracle: enumerate circuits in size order and simulate each one."""
    for s in range(s_max + 1):
        for c in enumerate_circuits(T.n, t, s, gs):
            for w in range(c.width):
                cw = c.with_output(w)
                if all(func_acceptance(cw, format(x, f"0{T.n}b"), T.bits[x]) > 1 - 1e-9 for x in range(2**T.n)):
                    return s
    return None


# ---------------------------------------------------------------- enumeration


def test_enumeration_examples():
    xh = GateSet("XH", (FIXED_GATES["X"], FIXED_GATES["H"]))
    assert len(list(enumerate_circuits(1, 0, 1, xh))) == 2
    cn = GateSet("CNOT", (FIXED_GATES["CNOT"],))
    assert [c.ops[0][1] for c in enumerate_circuits(2, 0, 1, cn)] == [(0, 1), (1, 0)]
    xc = GateSet("XC", (FIXED_GATES["X"], FIXED_GATES["CNOT"]))
    # 2 X placements + 2 CNOT orderings = 4 choices per slot
    assert len(list(enumerate_circuits(2, 0, 2, xc))) == 16 == count_circuits(2, 0, 2, xc)


def test_enumeration_is_deterministic():
    a = [c.ops for c in enumerate_circuits(2, 0, 2, G0)]
    b = [c.ops for c in enumerate_circuits(2, 0, 2, G0)]
    assert a == b and len(set(a)) == len(a)


def test_enumeration_budget():
    with pytest.raises(ResourceError):
        enumerate_circuits(3, 0, 6, G0, budget=1000)


@given(st.integers(1, 2), st.integers(0, 1), st.integers(0, 2))
def test_counting_closed_form(n, t, s):
    gs = grev()
    per_slot = sum(math.perm(n + t, g.arity) for g in gs.gates)
    assert count_circuits(n, t, s, gs) == per_slot**s == sum(1 for _ in enumerate_circuits(n, t, s, gs))


# ---------------------------------------------------------------- MQCSP


def test_mqcsp_examples():
    const0 = TruthTable.from_string("00")
    # with no ancilla the only wire carries x itself; an idle ancilla reads 0
    assert decide_mqcsp(const0, 0, 0, (0.9, 0.6)).verdict == "No"
    assert decide_mqcsp(const0, 0, 1, (0.9, 0.6)).verdict == "Yes"
    assert decide_mqcsp(NOT, 0, 0, (0.9, 0.6)).verdict == "No"
    assert decide_mqcsp(NOT, 1, 0, (0.9, 0.6)).verdict == "Yes"


def test_thresholds_validated():
    with pytest.raises(QmcspError):
        PromiseThresholds(0.6, 0.4)
    with pytest.raises(QmcspError):
        PromiseThresholds(0.7, 0.8, "UMCSP")


def test_and_xor_match_golden_and_brute_force():
    facts = load_golden("oracle_facts")["payload"]
    for name, T in (("AND", AND), ("XOR", XOR)):
        cert = min_size(T, 0.0, t=1, gateset=G0, s_max=3)
        assert cert.min_size == facts[name]["min_size"] == brute_min_size(T, 1, G0, 2)
        w = cert.witness
        assert all(func_acceptance(w, format(x, "02b"), T.bits[x]) == pytest.approx(1.0) for x in range(4))


def test_n2_min_sizes_against_brute_force():
    facts = load_golden("oracle_facts")["payload"]
    sizes = [min_size(T, 0.0, t=1, gateset=G0, s_max=4).min_size for T in tables(2)]
    assert sizes == facts["n2_min_sizes"]
    assert facts["n2_fraction_at_most_1"] == sum(s <= 1 for s in sizes) / 16
    for T, s in zip(tables(2), sizes):
        if s <= 2:
            assert brute_min_size(T, 1, G0, 2) == s
        else:
            assert brute_min_size(T, 1, G0, 2) is None


def test_yes_witness_rescores():
    v = decide_mqcsp(AND, 1, 1, (1.0, 0.66))
    assert v.verdict == "Yes"
    w = v.best_circuit
    score = min(func_acceptance(w, format(x, "02b"), AND.bits[x]) for x in range(4))
    assert score == pytest.approx(v.best_score)


def test_fixed_output_wire():
    assert decide_mqcsp(AND, 1, 1, (1.0, 0.66), output=2).verdict == "Yes"
    assert decide_mqcsp(AND, 1, 1, (1.0, 0.66), output=0).verdict == "No"


@given(st.sampled_from(tables(2)), st.integers(0, 2))
def test_size_monotonicity(T, s):
    a = decide_mqcsp(T, s, 1, (1.0, 0.66)).verdict
    b = decide_mqcsp(T, s + 1, 1, (1.0, 0.66)).verdict
    assert not (a == "Yes" and b != "Yes")


@given(st.sampled_from(tables(2)), st.integers(0, 2))
def test_threshold_monotonicity(T, s):
    if decide_mqcsp(T, s, 1, (1.0, 0.66)).verdict == "Yes":
        assert decide_mqcsp(T, s, 1, (0.8, 0.6)).verdict == "Yes"


# ---------------------------------------------------------------- UMCSP / SMCSP


def test_umcsp_examples():
    v = decide_umcsp(UnitaryMatrix.identity(2), 0, 0, (0.99, 0.9))
    assert v.verdict == "Yes" and v.best_circuit.size() == 0
    cnot = UnitaryMatrix(2, FIXED_GATES["CNOT"].matrix)
    assert decide_umcsp(cnot, 1, 0, (1.0, 0.9)).verdict == "Yes"
    tgate = UnitaryMatrix(1, FIXED_GATES["T"].matrix)
    v = decide_umcsp(tgate, 0, 0, (0.99, 0.9))
    assert v.verdict == "No"
    assert v.best_score == pytest.approx(abs((1 + np.exp(1j * np.pi / 4)) / 2) ** 2)
    assert v.meta["unitarity_deviation"] < 1e-12


def test_t_gate_score_matches_dense_sampling():
    tgate = UnitaryMatrix(1, FIXED_GATES["T"].matrix)
    rng = np.random.default_rng(1)
    v = rng.normal(size=(20000, 2)) + 1j * rng.normal(size=(20000, 2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    sampled = np.min(np.abs(np.sum(v.conj() * (v @ tgate.entries.T), axis=1)) ** 2)
    score = decide_umcsp(tgate, 0, 0, (0.99, 0.9)).best_score
    assert score <= sampled + 1e-9 and sampled - score < 1e-3


def test_umcsp_with_ancilla_uses_certified_path():
    v = decide_umcsp(UnitaryMatrix(1, FIXED_GATES["H"].matrix), 1, 1, (0.99, 0.9))
    assert v.verdict == "Yes"


def test_smcsp_examples():
    assert decide_smcsp(PureState.basis("00"), 0, 0, (1.0, 0.9)).verdict == "Yes"
    assert decide_smcsp(BELL, 1, 0, (1.0, 0.9)).verdict == "No"
    v = decide_smcsp(BELL, 2, 0, (1.0, 0.9))
    assert v.verdict == "Yes" and v.best_circuit.labeled_ops() == [("H", (0,)), ("CNOT", (0, 1))]
    h_only = GateSet("H", (FIXED_GATES["H"],))
    assert decide_smcsp(PureState.basis("1"), 1, 0, (0.9, 0.6), h_only).verdict == "No"


def test_bell_against_brute_force():
    best = {s: max(state_overlap(c, BELL) for c in enumerate_circuits(2, 0, s, G0)) for s in (1, 2)}
    assert best[1] < 1 - 1e-9 and best[2] == pytest.approx(1.0)


def test_min_size_examples():
    assert min_size(UnitaryMatrix.identity(1), 0.0).min_size == 0
    cert = min_size(BELL, 0.0, 0, G0)
    assert cert.min_size == 2 and cert.achieved_fidelity == pytest.approx(1.0)
    with pytest.raises(NotSynthesizable) as e:
        min_size(TruthTable.from_string("1000"), 0.0, t=1, gateset=G0, s_max=1)
    assert 0 <= e.value.best_fidelity < 1


# ---------------------------------------------------------------- MQCSP*


def test_mqcsp_star_examples():
    assert decide_mqcsp_star(PartialTruthTable.from_string("****"), 0).verdict == "Yes"
    assert decide_mqcsp_star(PartialTruthTable.from_total(NOT), 1).verdict == "Yes"
    assert decide_mqcsp_star(PartialTruthTable.from_string("0*1*"), 0).verdict == "Yes"


def test_dependency_set():
    assert dependency_set(PartialTruthTable.from_string("0001")) == (0, 1)
    assert dependency_set(PartialTruthTable.from_string("0011")) == (0,)
    assert dependency_set(PartialTruthTable.from_string("01**")) == (1,)


def test_light_cone_shortcut():
    v = decide_mqcsp_star(PartialTruthTable.from_total(XOR), 0)
    assert v.verdict == "No" and v.path == "light-cone"


def test_tight_case_agrees_with_unpruned_search():
    gs = G0.subset(["X", "H", "CNOT", "ACNOT"], name="G0-2q-small")
    for T in tables(2):
        P = PartialTruthTable.from_total(T)
        D = dependency_set(P)
        s = max(0, len(D) - 1)
        tight = decide_mqcsp_star(P, s, 0, gs).verdict
        full = decide_mqcsp(T, s, 0, (1.0, 0.9), gs).verdict if T.n else None
        assert tight == full


# ---------------------------------------------------------------- cache, budget, determinism


def test_cache_hits_are_bit_identical(tmp_path):
    path = tmp_path / "cache.json"
    cache = OracleCache(path)
    first = decide_mqcsp(AND, 1, 1, (1.0, 0.66), cache=cache)
    cache.save()
    again = OracleCache(path)
    second = decide_mqcsp(AND, 1, 1, (1.0, 0.66), cache=again)
    assert again.hits == 1
    assert json.dumps(first.to_json(), sort_keys=True) == json.dumps(second.to_json(), sort_keys=True)
    clear_engine_cache()
    fresh = decide_mqcsp(AND, 1, 1, (1.0, 0.66))
    assert json.dumps(fresh.to_json(), sort_keys=True) == json.dumps(first.to_json(), sort_keys=True)


def test_cache_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("QMCSP_CACHE", str(tmp_path / "env.json"))
    assert OracleCache().path == tmp_path / "env.json"


def test_verdict_json_round_trip():
    v = decide_smcsp(BELL, 2, 0, (1.0, 0.9))
    back = OracleVerdict.from_json(v.to_json())
    assert back.best_circuit == v.best_circuit and back.verdict == v.verdict


def test_budget_error():
    with pytest.raises(ResourceError):
        decide_mqcsp(TruthTable.from_string("1000"), 3, 1, (1.0, 0.66), budget=100)


def test_engine_lex_first_witness():
    eng = ReachableSet(G0, 2, [0, 1, 2, 3])
    layer = eng.layer(1)
    assert eng.ops_of(1, 0) == (G0.placements(2)[0],)
    assert len(layer) <= G0.slot_count(2)


def test_engine_classes_match_distinct_unitaries():
    """Class counts from the engine equal distinct circuit unitaries up to phase, by brute force."""
    eng = ReachableSet(G0, 1, [0, 1])
    seen = set()
    counts = []
    for s in range(4):
        new = set()
        for c in enumerate_circuits(1, 0, s, G0):
            U = circuit_unitary(c).entries
            k = np.flatnonzero(np.abs(U.ravel()) > 1e-6)[0]
            key = tuple(np.round(U.ravel() * abs(U.ravel()[k]) / U.ravel()[k], 6).tolist())
            if key not in seen:
                new.add(key)
        seen |= new
        counts.append(len(new))
    assert eng.class_counts()[:1] == [1]
    eng.layer(3)
    assert eng.class_counts() == counts
