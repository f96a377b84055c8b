"""Decision and search oracles for the circuit size problems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DimensionError, NotSynthesizable, QmcspError
from ..qcore.fidelity import NOISE_FLOOR, fidelities_from_blocks, min_fidelity_from_eigenvalues
from ..qcore.gates import GateSet, g0
from ..qcore.types import PartialTruthTable, PureState, QuantumCircuit, TruthTable, UnitaryMatrix
from .cache import OracleCache, make_key
from .engine import DEFAULT_BUDGET, Layer, Pruning, ReachableSet, get_engine

TOL = 1e-9
SCORE_CHUNK = 100_000
STAR_ALPHA = 2 / 3


@dataclass(frozen=True)
class PromiseThresholds:
    alpha: float
    beta: float
    kind: str = "MQCSP"

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if self.kind == "MQCSP":
            # alpha = 1 is admitted so exact computation can be asked for
            if not 0.5 < b < a <= 1:
                raise QmcspError(f"MQCSP thresholds need 1/2 < beta < alpha <= 1, got alpha={a}, beta={b}")
        elif self.kind in ("UMCSP", "SMCSP"):
            if not 0 < b < a <= 1:
                raise QmcspError(f"{self.kind} thresholds need 0 < beta < alpha <= 1, got alpha={a}, beta={b}")
        elif self.kind != "MQCSP*":
            raise QmcspError(f"unknown problem kind {self.kind!r}")


@dataclass
class OracleVerdict:
    verdict: str
    best_circuit: QuantumCircuit | None
    best_score: float
    path: str = "exact"
    size: int | None = None
    classes: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "best_circuit": self.best_circuit.to_json() if self.best_circuit is not None else None,
            "best_score": float(self.best_score),
            "path": self.path,
            "size": self.size,
            "classes": list(self.classes),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, d: dict, gateset: GateSet | None = None) -> "OracleVerdict":
        c = d.get("best_circuit")
        return cls(
            d["verdict"],
            QuantumCircuit.from_json(c, gateset) if c else None,
            d["best_score"],
            d.get("path", "exact"),
            d.get("size"),
            d.get("classes", []),
            d.get("meta", {}),
        )


@dataclass
class ComplexityCertificate:
    object_kind: str
    epsilon: float
    min_size: int
    witness: QuantumCircuit
    achieved_fidelity: float
    ancilla_used: int

    def to_json(self) -> dict:
        return {
            "object_kind": self.object_kind,
            "epsilon": self.epsilon,
            "min_size": self.min_size,
            "witness": self.witness.to_json(),
            "achieved_fidelity": self.achieved_fidelity,
            "ancilla_used": self.ancilla_used,
        }


# ---------------------------------------------------------------- scorers
# A scorer maps a layer to (yes_score, no_score, output_wire) arrays. yes_score
# is a lower bound on the true quality, no_score an upper bound; they coincide
# on exact paths.


def _chunks(k: int):
    for lo in range(0, k, SCORE_CHUNK):
        yield lo, min(k, lo + SCORE_CHUNK)


def _function_scorer(engine: ReachableSet, n: int, t: int, entries, output):
    width = n + t
    ent = np.asarray(entries)
    defined = ent != 2
    target = (ent == 1)
    if engine.backend == "classical":
        dt = engine._dtype
        fmask = dt(sum(1 << r for r in range(len(ent)) if target[r]))
        dmask = dt(sum(1 << r for r in range(len(ent)) if defined[r]))

        def score(layer: Layer):
            ok = ((layer.data ^ fmask) & dmask) == 0
            if output is not None:
                s = ok[:, output].astype(float)
                w = np.full(len(s), output)
            else:
                s = ok.any(axis=1).astype(float)
                w = np.argmax(ok, axis=1)
            return s, s, w

        return score

    d = 2**width
    bitsel = np.array([[(r >> (width - 1 - w)) & 1 for r in range(d)] for w in range(width)], dtype=float)

    def score(layer: Layer):
        K = len(layer)
        s = np.empty(K)
        wsel = np.empty(K, dtype=np.int64)
        for lo, hi in _chunks(K):
            probs = np.abs(layer.data[lo:hi]) ** 2  # (k, d, X)
            p1 = np.einsum("wd,kdx->kwx", bitsel, probs)
            acc = np.where(target, p1, 1 - p1)
            acc = np.where(defined, acc, 1.0)
            per_wire = acc.min(axis=2) if acc.shape[2] else np.ones(acc.shape[:2])
            if output is not None:
                s[lo:hi] = per_wire[:, output]
                wsel[lo:hi] = output
            else:
                wsel[lo:hi] = np.argmax(per_wire, axis=1)
                s[lo:hi] = per_wire.max(axis=1)
        s = np.clip(s, 0.0, 1.0)
        return s, s, wsel

    return score


def _unitary_scorer(engine: ReachableSet, U: UnitaryMatrix, t: int):
    n = U.n
    Ud = U.entries.conj().T
    zeros = None

    if t == 0:

        def score(layer: Layer):
            K = len(layer)
            s = np.empty(K)
            for lo, hi in _chunks(K):
                V = np.matmul(Ud, layer.data[lo:hi])
                s[lo:hi] = min_fidelity_from_eigenvalues(np.linalg.eigvals(V))
            return s, s, np.zeros(K, dtype=np.int64)

        return score

    def score(layer: Layer):
        K = len(layer)
        yes = np.empty(K)
        no = np.empty(K)
        for lo, hi in _chunks(K):
            Y = layer.data[lo:hi].reshape(hi - lo, 2**n, 2**t, 2**n)
            Y = np.einsum("ab,kbjc->kajc", Ud, Y)
            f = fidelities_from_blocks(Y)
            mn = np.clip(f.min(axis=1), 0.0, 1.0)
            delta = 1.0 - mn
            delta = np.where(delta < NOISE_FLOOR, 0.0, delta)
            yes[lo:hi] = np.maximum(0.0, 1.0 - 10.0 * 2 ** (n / 2) * delta**0.25)
            no[lo:hi] = mn
        return yes, no, np.zeros(K, dtype=np.int64)

    return score


def _state_scorer(engine: ReachableSet, psi: PureState, t: int):
    phi = psi.amps.conj()

    def score(layer: Layer):
        K = len(layer)
        s = np.empty(K)
        for lo, hi in _chunks(K):
            a = layer.data[lo:hi, :, 0].reshape(hi - lo, 2**psi.n, 2**t)
            s[lo:hi] = np.sum(np.abs(np.einsum("i,kij->kj", phi, a)) ** 2, axis=1)
        s = np.clip(s, 0.0, 1.0)
        return s, s, np.zeros(K, dtype=np.int64)

    return score


# ---------------------------------------------------------------- search core


def _circuit(engine: ReachableSet, n: int, t: int, depth: int, idx: int, output: int) -> QuantumCircuit:
    return QuantumCircuit(n, t, engine.gateset, engine.ops_of(depth, idx), int(output))


def _search(engine: ReachableSet, scorer: Callable, n: int, t: int, s: int, alpha: float, beta: float | None, path: str) -> OracleVerdict:
    best_no, best_loc = -np.inf, None
    for depth in range(s + 1):
        layer = engine.layer(depth)
        if len(layer) == 0:
            continue
        yes, no, wsel = scorer(layer)
        hits = np.flatnonzero(yes >= alpha - TOL)
        if hits.size:
            i = int(hits[0])
            c = _circuit(engine, n, t, depth, i, wsel[i])
            return OracleVerdict("Yes", c, float(yes[i]), path, depth, engine.class_counts()[: s + 1])
        j = int(np.argmax(no))
        if no[j] > best_no + TOL:
            best_no, best_loc = float(no[j]), (depth, j, int(wsel[j]))
    c = _circuit(engine, n, t, *best_loc) if best_loc else None
    verdict = "No" if beta is not None and best_no <= beta + TOL else "Unpromised"
    return OracleVerdict(verdict, c, best_no, path, None if c is None else c.size(), engine.class_counts()[: s + 1])


def _cached(cache: OracleCache | None, key: str, gateset: GateSet, compute: Callable[[], OracleVerdict]) -> OracleVerdict:
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return OracleVerdict.from_json(hit, gateset)
    v = compute()
    if cache is not None:
        cache.put(key, v.to_json())
    return v


def _as_thresholds(thresholds, kind: str) -> PromiseThresholds:
    if isinstance(thresholds, PromiseThresholds):
        return thresholds
    a, b = thresholds
    return PromiseThresholds(float(a), float(b), kind)


def function_engine(gateset: GateSet, n: int, t: int, budget: int = DEFAULT_BUDGET) -> ReachableSet:
    return get_engine(gateset, n + t, [x << t for x in range(2**n)], budget=budget)


def decide_mqcsp(
    T: TruthTable,
    s: int,
    t: int,
    thresholds,
    gateset: GateSet | None = None,
    output: int | None = None,
    budget: int = DEFAULT_BUDGET,
    cache: OracleCache | None = None,
) -> OracleVerdict:
    """Gap MQCSP. `output=None` lets each circuit choose its output qubit."""
    gateset = gateset or g0()
    th = _as_thresholds(thresholds, "MQCSP")

    def compute():
        eng = function_engine(gateset, T.n, t, budget)
        return _search(eng, _function_scorer(eng, T.n, t, T.bits, output), T.n, t, s, th.alpha, th.beta, eng.backend)

    key = make_key("MQCSP", gateset, T, s=s, t=t, alpha=th.alpha, beta=th.beta, output=output)
    return _cached(cache, key, gateset, compute)


def decide_umcsp(
    U: UnitaryMatrix,
    s: int,
    t: int,
    thresholds,
    gateset: GateSet | None = None,
    budget: int = DEFAULT_BUDGET,
    cache: OracleCache | None = None,
) -> OracleVerdict:
    """Gap UMCSP. t = 0 scores exactly; t > 0 uses the certified basis/pair bound for Yes
    and the minimum basis/pair fidelity (an upper bound on the worst case) for No."""
    gateset = gateset or g0()
    th = _as_thresholds(thresholds, "UMCSP")

    def compute():
        n = U.n
        probes = list(range(2**n)) if t == 0 else [a << t for a in range(2**n)]
        eng = get_engine(gateset, n + t, probes, backend="quantum", budget=budget)
        v = _search(eng, _unitary_scorer(eng, U, t), n, t, s, th.alpha, th.beta, "exact-eigenphase" if t == 0 else "certified")
        v.meta["unitarity_deviation"] = U.deviation
        return v

    key = make_key("UMCSP", gateset, U, s=s, t=t, alpha=th.alpha, beta=th.beta)
    return _cached(cache, key, gateset, compute)


def decide_smcsp(
    psi: PureState,
    s: int,
    t: int,
    thresholds,
    gateset: GateSet | None = None,
    budget: int = DEFAULT_BUDGET,
    cache: OracleCache | None = None,
) -> OracleVerdict:
    gateset = gateset or g0()
    th = _as_thresholds(thresholds, "SMCSP")

    def compute():
        eng = get_engine(gateset, psi.n + t, [0], backend="quantum", budget=budget)
        return _search(eng, _state_scorer(eng, psi, t), psi.n, t, s, th.alpha, th.beta, "exact")

    key = make_key("SMCSP", gateset, psi, s=s, t=t, alpha=th.alpha, beta=th.beta)
    return _cached(cache, key, gateset, compute)


def dependency_set(P: PartialTruthTable) -> tuple[int, ...]:
    """Inputs i with two defined entries that differ only in bit i and disagree in value.

    Any circuit meeting acceptance > 1/2 on the defined entries must have
    every such input in the backward light cone of its output qubit.
    """
    n = P.n
    e = np.asarray(P.entries)
    out = []
    for i in range(n):
        bit = 1 << (n - 1 - i)
        idx = np.arange(2**n)
        lo = idx[(idx & bit) == 0]
        a, b = e[lo], e[lo | bit]
        if np.any((a != 2) & (b != 2) & (a != b)):
            out.append(i)
    return tuple(out)


def decide_mqcsp_star(
    P: PartialTruthTable,
    s: int,
    t: int = 0,
    gateset: GateSet | None = None,
    budget: int = DEFAULT_BUDGET,
    cache: OracleCache | None = None,
) -> OracleVerdict:
    """Partial-function MQCSP: Yes iff some circuit of size <= s accepts every defined
    entry with probability >= 2/3.

    When the size bound is tight for the dependency set (every gate must merge
    two light-cone components), only gates of maximal arity can appear; if
    those are all classical the search runs on the classical backend with
    component pruning, which is exact for that case.
    """
    gateset = gateset or g0()
    n = P.n
    D = dependency_set(P)
    qmax = gateset.max_arity
    width = n + t
    meta = {"dependency_set": list(D)}

    def compute():
        if len(D) - 1 > s * (qmax - 1):
            v = OracleVerdict("No", None, 0.0, "light-cone", None, [], dict(meta, reason="too few gates to connect the dependency set"))
            return v
        tight = len(D) >= 2 and len(D) - 1 == s * (qmax - 1)
        gs = gateset
        pruning = None
        if tight:
            gs = GateSet(gateset.name + "|merge", tuple(g for g in gateset.gates if g.arity == qmax))
            if gs.is_classical:
                pruning = Pruning(wires=D, target=s)
        if pruning is not None:
            eng = get_engine(gs, width, [x << t for x in range(2**n)], backend="classical", budget=budget, pruning=pruning)
            path = "classical-pruned"
        else:
            eng = function_engine(gs, n, t, budget)
            path = eng.backend
        v = _search(eng, _function_scorer(eng, n, t, P.entries, None), n, t, s, STAR_ALPHA, STAR_ALPHA - 1e-6, path)
        if v.verdict == "Unpromised":
            v.verdict = "No"
        if v.best_circuit is not None and gs is not gateset:
            labels = v.best_circuit.labeled_ops()
            v.best_circuit = QuantumCircuit.from_labels(n, t, gateset, labels, v.best_circuit.output)
        v.meta.update(meta, tight=tight)
        return v

    key = make_key("MQCSP*", gateset, P, s=s, t=t)
    return _cached(cache, key, gateset, compute)


def _ancillas_used(c: QuantumCircuit) -> int:
    touched = {q for _, qs in c.ops for q in qs}
    return len([q for q in range(c.n, c.width) if q in touched])


def min_size(
    obj,
    epsilon: float,
    t: int = 0,
    gateset: GateSet | None = None,
    s_max: int = 4,
    output: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ComplexityCertificate:
    """Least s <= s_max with a circuit of quality >= 1 - epsilon (CC(obj, epsilon))."""
    gateset = gateset or g0()
    alpha = 1.0 - epsilon
    if isinstance(obj, (TruthTable, PartialTruthTable)):
        n, kind = obj.n, "function"
        entries = obj.bits if isinstance(obj, TruthTable) else obj.entries
        eng = function_engine(gateset, n, t, budget)
        scorer = _function_scorer(eng, n, t, entries, output)
    elif isinstance(obj, UnitaryMatrix):
        n, kind = obj.n, "unitary"
        probes = list(range(2**n)) if t == 0 else [a << t for a in range(2**n)]
        eng = get_engine(gateset, n + t, probes, backend="quantum", budget=budget)
        scorer = _unitary_scorer(eng, obj, t)
    elif isinstance(obj, PureState):
        n, kind = obj.n, "state"
        eng = get_engine(gateset, n + t, [0], backend="quantum", budget=budget)
        scorer = _state_scorer(eng, obj, t)
    else:
        raise DimensionError(f"min_size does not know how to handle {type(obj).__name__}")
    v = _search(eng, scorer, n, t, s_max, alpha, None, eng.backend)
    if v.verdict != "Yes":
        raise NotSynthesizable(f"no {kind} circuit of size <= {s_max} reaches fidelity {alpha}", v.best_score)
    c = v.best_circuit
    return ComplexityCertificate(kind, epsilon, c.size(), c, v.best_score, _ancillas_used(c))
