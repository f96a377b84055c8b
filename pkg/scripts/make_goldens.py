"""Regenerate the golden files under src/qmcsp/golden/.

Run once after a deliberate change; `qmcsp repro <suite>` compares against them.
"""

import argparse
import time
from pathlib import Path

from qmcsp import cryptodemo, serialize
from qmcsp.cli import DEFAULT_SEEDS, REPRO_SUITES, run_suite
from qmcsp.oracles import min_size
from qmcsp.qcore.gates import g0, grev
from qmcsp.qcore.types import TruthTable

GOLDEN = Path(__file__).resolve().parents[1] / "src" / "qmcsp" / "golden"


def oracle_facts() -> dict:
    gs = g0()
    facts = {}
    for name, table in (("AND", "0001"), ("XOR", "0110")):
        cert = min_size(TruthTable.from_string(table), 0.0, t=1, gateset=gs, s_max=4)
        facts[name] = {"table": table, "min_size": cert.min_size, "witness": cert.witness.to_json()}
    sizes = []
    for code in range(16):
        T = TruthTable(2, tuple((code >> (3 - i)) & 1 for i in range(4)))
        sizes.append(min_size(T, 0.0, t=1, gateset=gs, s_max=4).min_size)
    facts["n2_min_sizes"] = sizes
    facts["n2_fraction_at_most_1"] = sum(s <= 1 for s in sizes) / 16
    return facts


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("suites", nargs="*", default=list(REPRO_SUITES) + ["census_m3", "oracle_facts"])
    args = ap.parse_args()
    for suite in args.suites:
        t0 = time.perf_counter()
        if suite == "census_m3":
            config = {"suite": suite, "seed": None, "m": 3, "gateset": "Grev", "t": 1}
            payload = cryptodemo.complexity_census(3, grev(), t=1).to_json()
        elif suite == "oracle_facts":
            config = {"suite": suite, "seed": None, "gateset": "G0", "t": 1}
            payload = oracle_facts()
        else:
            seed = DEFAULT_SEEDS.get(suite, 0)
            config = {"suite": suite, "seed": seed, "command": f"qmcsp repro {suite} --seed {seed}"}
            payload = run_suite(suite, seed)
        serialize.write(GOLDEN / f"{suite}.json", {"config": config, "payload": payload})
        print(f"{suite}: {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
