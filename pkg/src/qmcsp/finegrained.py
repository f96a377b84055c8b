"""The gamma partial function and bipartite permutation independent set (BPIS).

Conventions: graph vertices (j, k) and edge endpoints are 1-based, as in the
problem statement. Permutations are 0-based tuples, pi[i] = image of i.
gamma takes 6n input bits ordered x (2n bits), y, z, each MSB first; the
table index is int(x + y + z, 2). e_k is the length-n indicator of k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ResourceError
from .oracles.decide import decide_mqcsp_star
from .oracles.engine import DEFAULT_BUDGET
from .qcore.gates import GateSet, g0_two_qubit
from .qcore.types import PartialTruthTable

STAR = 2
MAX_N = 2

Edge = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class BipartiteGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((tuple(a), tuple(b)) for a, b in self.edges)
        for (j, k), (jp, kp) in edges:
            if not all(1 <= v <= self.n for v in (j, k, jp, kp)):
                raise DimensionError(f"edge {((j, k), (jp, kp))} out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)

    @property
    def vertices(self) -> list[tuple[int, int]]:
        return [(j, k) for j in range(1, self.n + 1) for k in range(1, self.n + 1)]

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    @classmethod
    def random(cls, n: int, p: float, rng: np.random.Generator) -> "BipartiteGraph":
        vs = [(j, k) for j in range(1, n + 1) for k in range(1, n + 1)]
        pairs = [(a, b) for a in vs for b in vs]
        mask = rng.random(len(pairs)) < p
        return cls(n, frozenset(e for e, keep in zip(pairs, mask) if keep))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[list(a), list(b)] for a, b in self.sorted_edges()]}


@dataclass(frozen=True)
class BlockPermutation:
    pi: tuple[int, ...]

    def __post_init__(self):
        pi = tuple(int(v) for v in self.pi)
        if len(pi) % 2 or sorted(pi) != list(range(len(pi))):
            raise DimensionError(f"{pi} is not a permutation of an even-size set")
        n = len(pi) // 2
        if sorted(pi[:n]) != list(range(n)):
            raise DimensionError(f"{pi} does not map the first block onto itself")
        object.__setattr__(self, "pi", pi)

    @property
    def n(self) -> int:
        return len(self.pi) // 2

    @classmethod
    def identity(cls, n: int) -> "BlockPermutation":
        return cls(tuple(range(2 * n)))

    @classmethod
    def all(cls, n: int):
        """All (n!)^2 block permutations in lexicographic order."""
        for lo in itertools.permutations(range(n)):
            for hi in itertools.permutations(range(n, 2 * n)):
                yield cls(lo + hi)


# ------------------------------------------------------------------ gamma


def _bit_columns(n: int):
    """Boolean arrays x, y, z of shape (2^{6n}, 2n) for every table index."""
    w = 6 * n
    idx = np.arange(2**w, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(w - 1, -1, -1)) & 1).astype(bool)
    return bits[:, : 2 * n], bits[:, 2 * n : 4 * n], bits[:, 4 * n :]


def _indicator(n: int, k: int) -> str:
    return "".join("1" if i == k else "0" for i in range(1, n + 1))


def case7_inputs(G: BipartiteGraph) -> dict[int, Edge]:
    """Table index of each case-7 input, mapped to the first edge producing it."""
    n = G.n
    out: dict[int, Edge] = {}
    for (j, k), (jp, kp) in G.sorted_edges():
        x = "".join("1" if c == "0" else "0" for c in _indicator(n, k) + _indicator(n, kp))
        z = _indicator(n, j) + _indicator(n, jp)
        out.setdefault(int(x + "0" * (2 * n) + z, 2), ((j, k), (jp, kp)))
    return out


def _generic_cases(n: int):
    """(mask, value) arrays for cases 1 through 6 in listed order."""
    x, y, z = _bit_columns(n)
    half = np.zeros(2 * n, dtype=bool)
    half[:n] = True
    y0 = ~y.any(1)
    return [
        (~x.any(1), (y & z).any(1)),
        (x.all(1), z.any(1)),
        (z.all(1), (x | y).any(1)),
        (~z.any(1), np.zeros(len(x), dtype=bool)),
        ((z == half).all(1) & y0, x[:, :n].any(1)),
        ((z == ~half).all(1) & y0, x[:, n:].any(1)),
    ]


def build_gamma(G: BipartiteGraph, case7_first: bool = True) -> PartialTruthTable:
    """gamma as a partial table on 6n bits.

    Cases 1-6 are taken in listed order, first match wins. Case 7 is applied
    before them by default: at n = 1 its inputs coincide with cases 1 and 3,
    and for n >= 2 no input matches case 7 and an earlier case, so the order
    only matters at n = 1. case7_first=False gives the strict listed order.
    """
    n = G.n
    if not 1 <= n <= MAX_N:
        raise ResourceError(f"gamma on {6 * n} bits exceeds the table budget", 2 ** (6 * n))
    entries = np.full(2 ** (6 * n), STAR, dtype=np.uint8)
    decided = np.zeros(len(entries), dtype=bool)
    c7 = list(case7_inputs(G))
    if case7_first:
        entries[c7] = 1
        decided[c7] = True
    for mask, val in _generic_cases(n):
        sel = mask & ~decided
        entries[sel] = val[sel]
        decided |= mask
    if not case7_first:
        sel = [i for i in c7 if not decided[i]]
        entries[sel] = 1
    return PartialTruthTable(6 * n, tuple(int(v) for v in entries))


def gamma_consistency_audit(G: BipartiteGraph) -> dict:
    """Exhaustively list inputs where two matching cases disagree."""
    n = G.n
    cases = _generic_cases(n)
    c7 = case7_inputs(G)
    conflicts = []
    overlaps = 0
    for i in range(2 ** (6 * n)):
        vals = [(c + 1, int(v[i])) for c, (m, v) in enumerate(cases) if m[i]]
        if i in c7:
            vals.append((7, 1))
        if len(vals) > 1:
            overlaps += 1
            if len({v for _, v in vals}) > 1:
                bits = format(i, f"0{6 * n}b")
                conflicts.append({"x": bits[: 2 * n], "y": bits[2 * n : 4 * n], "z": bits[4 * n :], "cases": vals})
    return {"n": n, "overlapping_inputs": overlaps, "conflicts": conflicts, "consistent": not conflicts}


# ------------------------------------------------------------------ formulas and BPIS


def formula_values(n: int, pi) -> np.ndarray:
    """OR_i ((x_{pi(i)} or y_i) and z_i) on every 6n-bit input."""
    x, y, z = _bit_columns(n)
    return ((x[:, list(pi)] | y) & z).any(1)


def check_permutation_formula(gamma: PartialTruthTable, pi) -> bool:
    """True iff the pi-formula agrees with gamma on every defined entry. pi may be any permutation of [2n]."""
    p = pi.pi if isinstance(pi, BlockPermutation) else tuple(pi)
    if gamma.n != 3 * len(p):
        raise DimensionError(f"gamma has {gamma.n} inputs, permutation expects {3 * len(p)}")
    e = np.asarray(gamma.entries)
    defined = e != STAR
    return bool(np.array_equal(formula_values(len(p) // 2, p)[defined], e[defined].astype(bool)))


def formula_exists(gamma: PartialTruthTable) -> tuple[int, ...] | None:
    """First pi in S_{2n} (not only block permutations) whose formula computes gamma."""
    n2 = gamma.n // 3
    e = np.asarray(gamma.entries)
    defined = e != STAR
    target = e[defined].astype(bool)
    x, y, z = (a[defined] for a in _bit_columns(n2 // 2))
    for p in itertools.permutations(range(n2)):
        if np.array_equal(((x[:, list(p)] | y) & z).any(1), target):
            return p
    return None


def _violates(pi, n: int, edge: Edge, reading: str) -> bool:
    (j, k), (jp, kp) = edge
    first = pi[j - 1] == k - 1
    if reading == "corrected":
        second = pi[n + jp - 1] == n + kp - 1
    elif reading == "literal":
        second = pi[n + jp - 1] == pi[n + kp - 1]
    else:
        raise ValueError(f"unknown reading {reading!r}")
    return first and second


def solve_bpis(G: BipartiteGraph, reading: str = "corrected") -> BlockPermutation | None:
    """Lexicographically first block permutation avoiding every edge.

    An edge ((j,k),(j',k')) forbids pi(j) = k together with pi(n+j') = n+k'.
    reading="literal" instead uses pi(n+j') != pi(n+k'), i.e. it only
    constrains edges with j' = k'.
    """
    if G.n > 4:
        raise ResourceError("BPIS brute force is limited to n <= 4", G.n)
    edges = G.sorted_edges()
    for bp in BlockPermutation.all(G.n):
        if not any(_violates(bp.pi, G.n, e, reading) for e in edges):
            return bp
    return None


def bpis_exists_direct(G: BipartiteGraph) -> bool:
    """Independent check: scan all of S_{2n}, test block and edge constraints by direct loops."""
    n = G.n
    for p in itertools.permutations(range(1, 2 * n + 1)):
        pi = dict(zip(range(1, 2 * n + 1), p))
        if any(pi[i] > n for i in range(1, n + 1)):
            continue
        ok = True
        for (j, k), (jp, kp) in G.edges:
            if pi[j] == k and pi[n + jp] == n + kp:
                ok = False
                break
        if ok:
            return True
    return False


# ------------------------------------------------------------------ experiment


def default_graphs(n: int, count: int | None = None, seed: int = 0, p: float = 0.25) -> list[BipartiteGraph]:
    """n = 1: both graphs (no edge, the single self-loop edge). n >= 2: `count` seeded random graphs."""
    if n == 1:
        return [BipartiteGraph(1), BipartiteGraph(1, frozenset({((1, 1), (1, 1))}))]
    count = 200 if count is None else count
    return [BipartiteGraph.random(n, p, np.random.default_rng([seed, g])) for g in range(count)]


@dataclass
class EquivalenceRow:
    graph: BipartiteGraph
    formula: tuple[int, ...] | None
    bpis: BlockPermutation | None
    direct: bool
    mqcsp_star: str | None = None
    mqcsp_meta: dict = field(default_factory=dict)

    @property
    def a(self) -> bool:
        return self.formula is not None

    @property
    def b(self) -> bool:
        return self.bpis is not None

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "a_formula": list(self.formula) if self.formula is not None else None,
            "b_bpis": list(self.bpis.pi) if self.bpis is not None else None,
            "b_direct": self.direct,
            "c_mqcsp_star": self.mqcsp_star,
            "c_meta": self.mqcsp_meta,
        }


@dataclass
class EquivalenceReport:
    n: int
    rows: list[EquivalenceRow]
    audit: list[dict]

    @property
    def ab_violations(self) -> int:
        return sum(r.a != r.b or r.b != r.direct for r in self.rows)

    @property
    def ac_violations(self) -> int | None:
        rows = [r for r in self.rows if r.mqcsp_star is not None]
        if not rows:
            return None
        return sum(r.a and r.mqcsp_star != "Yes" for r in rows)

    def table(self) -> str:
        lines = ["| graph | edges | (a) formula | (b) BPIS | (c) MQCSP* |", "|---|---|---|---|---|"]
        for i, r in enumerate(self.rows):
            lines.append(f"| {i} | {len(r.graph.edges)} | {r.a} | {r.b} | {r.mqcsp_star or '-'} |")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rows": [r.to_json() for r in self.rows],
            "ab_violations": self.ab_violations,
            "ac_violations": self.ac_violations,
            "audit": self.audit,
        }


def equivalence_experiment(
    n: int,
    graphs: list[BipartiteGraph] | None = None,
    circuit_check: bool | None = None,
    gateset: GateSet | None = None,
    budget: int = DEFAULT_BUDGET,
) -> EquivalenceReport:
    """(a) formula over S_{2n}, (b) solve_bpis plus the direct checker, (c) MQCSP*(gamma, 6n-1) at n = 1."""
    graphs = default_graphs(n) if graphs is None else graphs
    circuit_check = (n == 1) if circuit_check is None else circuit_check
    gateset = gateset or g0_two_qubit()
    rows = []
    audit = []
    for G in graphs:
        gamma = build_gamma(G)
        row = EquivalenceRow(G, formula_exists(gamma), solve_bpis(G), bpis_exists_direct(G))
        if circuit_check:
            v = decide_mqcsp_star(gamma, 6 * n - 1, t=0, gateset=gateset, budget=budget)
            row.mqcsp_star = v.verdict
            row.mqcsp_meta = {"path": v.path, "best_score": v.best_score, "gateset": gateset.name, "tight": v.meta.get("tight")}
        rows.append(row)
        if n == 1:
            audit.append(gamma_consistency_audit(G))
    return EquivalenceReport(n, rows, audit)
