"""Raw circuit stream, used for counting checks and as an independent reference."""

from __future__ import annotations

import itertools
from typing import Iterator

from ..errors import ResourceError
from ..qcore.gates import GateSet
from ..qcore.sim import DIM_CAP
from ..qcore.types import QuantumCircuit
from .engine import DEFAULT_BUDGET


def count_circuits(n: int, t: int, s: int, gateset: GateSet) -> int:
    """Closed form (sum over gates of ordered distinct qubit tuples)^s."""
    return gateset.slot_count(n + t) ** s


def enumerate_circuits(n: int, t: int, s: int, gateset: GateSet, budget: int = DEFAULT_BUDGET, dim_cap: int = DIM_CAP) -> Iterator[QuantumCircuit]:
    """Every circuit with exactly s gates, lexicographic in (gate index, qubit tuple) per slot."""
    if 2 ** (n + t) > dim_cap:
        raise ResourceError(f"register of {n + t} qubits exceeds dimension cap {dim_cap}", 2 ** (n + t))
    total = count_circuits(n, t, s, gateset)
    if total > budget:
        raise ResourceError(f"{total} circuits of size {s} exceed the enumeration budget {budget}", total)
    slots = gateset.placements(n + t)

    def gen():
        for ops in itertools.product(slots, repeat=s):
            yield QuantumCircuit(n, t, gateset, ops)

    return gen()
