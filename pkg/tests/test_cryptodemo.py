import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmcsp import cryptodemo as cd
from qmcsp.cli import load_golden
from qmcsp.errors import DimensionError
from qmcsp.oracles import enumerate_circuits, min_size
from qmcsp.qcore import TruthTable, circuit_unitary, func_acceptance, grev


@pytest.fixture(scope="module")
def census():
    return cd.complexity_census(3, grev(), t=1)


def test_toy_prg_validation():
    with pytest.raises(DimensionError):
        cd.ToyPRG(2, (1, 2, 3))
    with pytest.raises(DimensionError):
        cd.ToyPRG(1, (0, 4))


def test_ggm_examples():
    prg = cd.ToyPRG.random(2, np.random.default_rng(3))
    assert cd.ggm_eval(prg, "01", "") == "01"
    dup = cd.ToyPRG.duplication(2)
    assert all(cd.ggm_eval(dup, "10", z) == "10" for z in ("0", "1", "0110"))
    # z = "10": take the right half of G("01"), then the left half of G of that
    step1 = format(prg.table[1], "04b")[2:]
    step2 = format(prg.table[int(step1, 2)], "04b")[:2]
    assert cd.ggm_eval(prg, "01", "10") == step2


def test_local_tables():
    dup = cd.ToyPRG.duplication(2)
    assert str(cd.local_prg_truth_table(dup, "10", 3)) == "11111111"
    prg = cd.ToyPRG.random(2, np.random.default_rng(5))
    T = cd.local_prg_truth_table(prg, "11", 2)
    assert T.bits == tuple(int(cd.ggm_eval(prg, "11", format(i, "02b"))[0]) for i in range(4))


@given(st.integers(0, 10_000), st.integers(0, 3), st.integers(0, 7))
def test_local_bits_are_independent(seed, x, i):
    prg = cd.ToyPRG.random(2, np.random.default_rng(seed))
    T = cd.local_prg_truth_table(prg, format(x, "02b"), 3)
    assert T.bits[i] == int(cd.ggm_eval(prg, format(x, "02b"), format(i, "03b"))[0])


def test_demo_prg_tables_match_golden(census):
    golden = load_golden("prg")["payload"]["demo_prg"]
    prg = cd.demo_prg()
    assert list(prg.table) == golden["table"]
    for x, cc in golden["local_cc"].items():
        assert census.of(cd.local_prg_truth_table(prg, x, 3)) == cc


def test_census_matches_frozen_artifact(census):
    frozen = load_golden("census_m3")["payload"]
    assert census.to_json() == frozen
    assert sum(census.histogram.values()) == 256
    assert census.histogram == {0: 4, 1: 16, 2: 56, 3: 102, 4: 70, 5: 7, 6: 1}


def test_census_against_brute_force(census):
    """Tables of complexity <= 2, found by simulating every circuit of at most 2 gates."""
    reach = {}
    for s in range(3):
        for c in enumerate_circuits(3, 1, s, grev()):
            U = circuit_unitary(c).entries
            outs = np.argmax(np.abs(U[:, [x << 1 for x in range(8)]]), axis=0)
            for w in range(4):
                key = "".join(str((o >> (3 - w)) & 1) for o in outs)
                reach.setdefault(key, s)
    from_census = {format(k, "08b"): v for k, v in census.cc.items() if v <= 2}
    assert reach == from_census


def test_census_agrees_with_min_size(census):
    for code in (0b00010111, 0b01101001, 0b10000000):
        T = TruthTable(3, tuple((code >> (7 - i)) & 1 for i in range(8)))
        assert min_size(T, 0.0, t=1, gateset=grev(), s_max=6).min_size == census.of(T)


def test_demo_prg_is_below_median(census):
    seed, prg = cd.find_demo_prg(census)
    assert seed == cd.DEMO_PRG_SEED and prg == cd.demo_prg()
    for x in range(4):
        assert census.of(cd.local_prg_truth_table(prg, format(x, "02b"), 3)) < census.median
    assert cd.census_threshold(census) == 2


def test_distinguisher_examples(census):
    assert cd.distinguish_by_complexity(TruthTable.from_string("00000000"), 0) == 1
    hard = next(TruthTable.from_string(format(k, "08b")) for k, v in census.cc.items() if v > 2)
    assert cd.distinguish_by_complexity(hard, 2) == 0


def test_prg_tables_accepted_with_checked_witness(census):
    prg = cd.demo_prg()
    for x in range(4):
        T = cd.local_prg_truth_table(prg, format(x, "02b"), 3)
        cert = min_size(T, 0.0, t=1, gateset=grev(), s_max=2)
        w = cert.witness
        assert w.size() <= 2
        assert all(func_acceptance(w, format(i, "03b"), T.bits[i]) == pytest.approx(1.0) for i in range(8))
        assert cd.distinguish_by_complexity(T, 2) == 1


def test_constant_prg_always_accepted():
    const = cd.ToyPRG(2, (0, 0, 0, 0))
    r = cd.run_distinguisher_experiment(const, 2, 3, 0, 20, 20, rng=0)
    assert r.prg_accept_rate == 1.0


def test_random_rate_below_one_and_determinism():
    a = cd.run_distinguisher_experiment(cd.demo_prg(), 2, 3, 2, 50, 50, rng=1)
    b = cd.run_distinguisher_experiment(cd.demo_prg(), 2, 3, 2, 50, 50, rng=1)
    assert a.to_json() == b.to_json()
    assert a.random_accept_rate < 1


def test_formula_threshold():
    assert cd.formula_threshold(3) == pytest.approx(8 / 6)
