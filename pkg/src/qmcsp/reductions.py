"""Reductions driven by decision oracles.

* search-to-decision for unitaries and states (peel the last gate, recurse);
* MQCSP to UMCSP through the XOR oracle U_f;
* the one-qubit self-reduction bracket for state complexity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, NotSynthesizable, PromiseViolation, UnsupportedConfiguration
from .oracles.cache import OracleCache
from .oracles.decide import OracleVerdict, decide_smcsp, decide_umcsp, min_size
from .oracles.engine import DEFAULT_BUDGET
from .qcore.gates import GateSet, controlled, g0, grot, rx, ry, rz
from .qcore.sim import apply_gate
from .qcore.types import PureState, QuantumCircuit, TruthTable, UnitaryMatrix


@dataclass
class Bracket:
    lo: int
    hi: int | None
    lo_formula: str
    hi_formula: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hi is not None and self.lo > self.hi:
            raise ValueError(f"bracket lo={self.lo} exceeds hi={self.hi}")

    def contains(self, value: int) -> bool:
        return self.lo <= value and (self.hi is None or value <= self.hi)

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "lo_formula": self.lo_formula, "hi_formula": self.hi_formula, "details": self.details}


@dataclass
class ReductionTrace:
    oracle_calls: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def call_bound(self, gateset: GateSet, width: int, s: int, s_max: int) -> int:
        return gateset.slot_count(width) * s + 2 * (math.ceil(math.log2(s_max + 2)) + 1)

    def to_json(self) -> dict:
        return {"oracle_calls": self.oracle_calls, "steps": self.steps}


@dataclass
class UMCSPOracle:
    """Gap UMCSP decision oracle (t = 0) backed by exhaustive search."""

    gateset: GateSet = field(default_factory=g0)
    t: int = 0
    budget: int = DEFAULT_BUDGET
    cache: OracleCache | None = None

    def __call__(self, U: UnitaryMatrix, s: int, alpha: float, beta: float) -> OracleVerdict:
        return decide_umcsp(U, s, self.t, (alpha, beta), self.gateset, self.budget, self.cache)


@dataclass
class SMCSPOracle:
    gateset: GateSet = field(default_factory=g0)
    t: int = 0
    budget: int = DEFAULT_BUDGET
    cache: OracleCache | None = None

    def __call__(self, psi: PureState, s: int, alpha: float, beta: float) -> OracleVerdict:
        return decide_smcsp(psi, s, self.t, (alpha, beta), self.gateset, self.budget, self.cache)


def _gate_matrix(gateset: GateSet, g: int, qs, width: int) -> np.ndarray:
    return apply_gate(np.eye(2**width, dtype=complex), width, gateset.gates[g].matrix, qs)


def _binary_search(oracle, target, lo: int, hi: int, alpha: float, beta: float, trace: ReductionTrace) -> int:
    """Least s in [lo, hi] answered Yes; Unpromised counts as No."""

    def ask(s):
        v = oracle(target, s, alpha, beta)
        trace.oracle_calls.append(({"phase": "size-search", "s": s, "alpha": alpha, "beta": beta}, v.verdict))
        return v.verdict == "Yes"

    if not ask(hi):
        raise PromiseViolation(f"no Yes answer up to s_max={hi}", {"s": hi, "alpha": alpha, "beta": beta})
    while lo < hi:
        mid = (lo + hi) // 2
        if ask(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _peel(oracle, target, apply_dagger, s: int, eps: float, delta: float, width: int, trace: ReductionTrace):
    gs = oracle.gateset
    placements = gs.placements(width)
    chosen = []
    for i in range(1, s + 1):
        eps_i = eps + i * delta
        alpha, beta = 1 - eps_i, 1 - eps_i - delta
        for g, qs in placements:
            cand = apply_dagger(target, g, qs)
            v = oracle(cand, s - i, alpha, beta)
            q = {"phase": "gate", "i": i, "gate": gs.gates[g].label, "qubits": list(qs), "s": s - i, "alpha": alpha, "beta": beta}
            trace.oracle_calls.append((q, v.verdict))
            # Unpromised counts as No, as in the size search. The peeled gate of
            # a genuine witness always earns a definite Yes, so some gate passes.
            if v.verdict == "Yes":
                chosen.append((g, qs))
                trace.steps.append((i, gs.gates[g].label, list(qs), float(v.best_score)))
                target = cand
                break
        else:
            raise PromiseViolation(f"no gate passed at iteration {i}", {"i": i, "s": s - i, "alpha": alpha, "beta": beta})
    return chosen


def s2d_umcsp(U: UnitaryMatrix, epsilon: float, oracle=None, c3: float = 1.0, s_max: int = 4, t: int = 0):
    """Recover a circuit for U using only decisions. Returns (circuit, trace).

    The size-s target is peeled from the output end: g_1 is the last gate
    applied, found by asking whether g^dag U has a circuit of size s - 1.
    """
    oracle = oracle or UMCSPOracle()
    if t != 0 or getattr(oracle, "t", 0) != 0:
        raise UnsupportedConfiguration("search-to-decision is only defined without ancillas (t = 0)")
    n = U.n
    delta = 2.0 ** (-2 * c3 * n)
    trace = ReductionTrace()
    s = _binary_search(oracle, U, 0, s_max, 1 - epsilon, 1 - epsilon - delta, trace)
    gs = oracle.gateset

    def dagger(target: UnitaryMatrix, g, qs):
        return UnitaryMatrix(n, _gate_matrix(gs, g, qs, n).conj().T @ target.entries)

    chosen = _peel(oracle, U, dagger, s, epsilon, delta, n, trace)
    circuit = QuantumCircuit(n, 0, gs, tuple(reversed(chosen)))
    return circuit, trace


def s2d_smcsp(psi: PureState, s_bound: int, epsilon: float, oracle=None, c3: float = 1.0):
    """Search-to-decision for states; the uncompute step is an exact matrix-vector product."""
    oracle = oracle or SMCSPOracle()
    if getattr(oracle, "t", 0) != 0:
        raise UnsupportedConfiguration("search-to-decision is only defined without ancillas (t = 0)")
    n = psi.n
    delta = 2.0 ** (-2 * c3 * n)
    trace = ReductionTrace()
    s = _binary_search(oracle, psi, 0, s_bound, 1 - epsilon, 1 - epsilon - delta, trace)
    gs = oracle.gateset

    def dagger(target: PureState, g, qs):
        v = apply_gate(target.amps.copy(), n, gs.gates[g].matrix.conj().T, qs)
        return PureState(n, v / np.linalg.norm(v))

    chosen = _peel(oracle, psi, dagger, s, epsilon, delta, n, trace)
    return QuantumCircuit(n, 0, gs, tuple(reversed(chosen))), trace


# ------------------------------------------------------------------ U_f and B2U


def build_U_f(T: TruthTable | Sequence[TruthTable], m: int = 1) -> UnitaryMatrix:
    """|x, b> -> |x, b xor f(x)> on n + m qubits (input register first)."""
    tables = [T] if isinstance(T, TruthTable) else list(T)
    if len(tables) != m:
        raise DimensionError(f"m={m} but {len(tables)} output tables supplied")
    if m > 2:
        raise UnsupportedConfiguration("build_U_f supports m <= 2")
    n = tables[0].n
    if any(tb.n != n for tb in tables):
        raise DimensionError("output tables disagree on n")
    d = 2 ** (n + m)
    M = np.zeros((d, d))
    for x in range(2**n):
        fx = 0
        for tb in tables:
            fx = (fx << 1) | tb.bits[x]
        for b in range(2**m):
            M[(x << m) | (b ^ fx), (x << m) | b] = 1
    return UnitaryMatrix(n + m, M)


def default_umcsp_min_size(gateset: GateSet | None = None, s_max: int = 4):
    gateset = gateset or g0()

    def cc(U: UnitaryMatrix, eps: float) -> int:
        return min_size(U, eps, 0, gateset, s_max).min_size

    return cc


def mqcsp_via_umcsp(T: TruthTable, umcsp_min_size_oracle=None, epsilon: float = 0.0, m: int = 1) -> Bracket:
    """Bracket on CC(f, eps) from the complexity of U_f.

    Upper end CC(U_f, eps); lower end ceil(CC(U_f, 2 eps) / 2) - m clamped at 0.
    """
    cc = umcsp_min_size_oracle or default_umcsp_min_size()
    U = build_U_f(T, m)
    s_hi = cc(U, epsilon)
    s_lo_src = s_hi if epsilon == 0 else cc(U, 2 * epsilon)
    lo = max(0, math.ceil(s_lo_src / 2) - m)
    return Bracket(lo, s_hi, f"max(0, ceil(CC(U_f, 2eps)/2) - m) = max(0, ceil({s_lo_src}/2) - {m})", f"CC(U_f, eps) = {s_hi}", {"s": s_hi, "m": m, "epsilon": epsilon})


# ------------------------------------------------------------------ self-reduction


def _controlled_construction(kind: str, theta: float):
    """Half-angle construction of a controlled rotation on (control, target).

    Returns [(matrix, qubits)] on two qubits plus the gate count. Rx needs a
    basis change by Rz(-pi/2) .. Rz(pi/2) around the Ry construction.
    """
    if kind in ("Ry", "Rz"):
        r = ry if kind == "Ry" else rz
        cx = np.array([[0, 1], [1, 0]], dtype=complex)
        seq = [(r(theta / 2), (1,)), (controlled(cx), (0, 1)), (r(-theta / 2), (1,)), (controlled(cx), (0, 1))]
        return seq
    if kind == "Rx":
        inner = _controlled_construction("Ry", theta)
        # Rz(pi/2) Ry(a) Rz(-pi/2) = Rx(-a), so conjugate the other way round
        return [(rz(np.pi / 2), (1,))] + inner + [(rz(-np.pi / 2), (1,))]
    raise ValueError(kind)


def controlled_overhead(gateset: GateSet | None = None) -> dict:
    """Gate cost of controlling each single-qubit grid rotation, verified numerically.

    The constructions use half angles, which live on the next finer grid.
    Returns {"k": max cost, "per_kind": {...}, "verified": bool}.
    """
    gateset = gateset or grot()
    per_kind = {}
    ok = True
    for g in gateset.gates:
        if g.arity != 1:
            continue
        kind = g.label[:2]
        if kind not in ("Rx", "Ry", "Rz"):
            continue
        num, den = g.label[3:-1].split("/")
        theta = 2 * np.pi * int(num) / int(den)
        seq = _controlled_construction(kind, theta)
        U = np.eye(4, dtype=complex)
        for mat, qs in seq:
            U = apply_gate(U, 2, mat, qs)
        ok &= bool(np.allclose(U, controlled(g.matrix), atol=1e-10))
        per_kind[kind] = max(per_kind.get(kind, 0), len(seq))
    return {"k": max(per_kind.values()) if per_kind else 0, "per_kind": per_kind, "verified": ok}


def split_first_qubit(psi: PureState):
    """psi = c0|0>psi0 + c1|1>psi1 with c0, c1 >= 0. Missing branches come back as None."""
    half = 2 ** (psi.n - 1)
    b0, b1 = psi.amps[:half], psi.amps[half:]
    c0, c1 = float(np.linalg.norm(b0)), float(np.linalg.norm(b1))
    p0 = PureState(psi.n - 1, b0 / c0) if c0 > 1e-12 else None
    p1 = PureState(psi.n - 1, b1 / c1) if c1 > 1e-12 else None
    return c0, c1, p0, p1


def default_state_cc(gateset: GateSet | None = None, s_max: int = 5):
    gateset = gateset or grot()

    def cc(phi: PureState, eps: float, t: int = 0) -> int | None:
        if eps >= 1:
            return 0
        try:
            return min_size(phi, eps, t, gateset, s_max).min_size
        except NotSynthesizable:
            return None

    return cc


def self_reduce_smcsp(psi: PureState, epsilon: float, sub_oracle=None, k: int | None = None, h: int = 2) -> Bracket:
    """Bracket CC(psi, eps) from complexities of the two branches of the first qubit.

    `sub_oracle(phi, eps, t)` returns CC of an (n-1)-qubit state or None when it
    is above the oracle's search limit. Lower ends use t = 1 (the first qubit
    may serve as workspace), upper ends use t = 0.
    """
    if psi.n < 2:
        raise DimensionError("self-reduction needs n >= 2")
    cc = sub_oracle or default_state_cc()
    calib = controlled_overhead()
    if k is None:
        k = calib["k"] if psi.n == 2 else 17
    k_star = math.ceil(4 / epsilon)
    c0, c1, p0, p1 = split_first_qubit(psi)
    details = {"c0": c0, "c1": c1, "k": k, "k_star": k_star, "h": h, "k_calibration": calib, "epsilon": epsilon}
    if c0**2 < epsilon / 2 or c1**2 < epsilon / 2:
        dom = 0 if c0 >= c1 else 1
        phi = p0 if dom == 0 else p1
        lo = cc(phi, 4 * epsilon, 1)
        hi = cc(phi, epsilon / 4, 0)
        # reaching |1> on the first qubit costs one extra gate
        hi = None if hi is None else hi + dom
        details.update(case=1, dominant=dom)
        lo = 0 if lo is None else lo
        return Bracket(lo, hi, f"CC(psi_{dom}, 4eps; t=1) = {lo}", f"CC(psi_{dom}, eps/4) + {dom} = {hi}", details)
    eps_prime = min(1.0, (1 - epsilon / 4) ** k_star + epsilon)
    lows = [cc(p, eps_prime, 1) for p in (p0, p1)]
    lows = [0 if v is None else v for v in lows]
    lo = max(0, math.ceil(max(lows) / k_star - h))
    cc0, cc1 = cc(p0, epsilon, 0), cc(p1, epsilon, 0)
    hi = None if cc0 is None or cc1 is None else k * (cc0 + cc1) + 3
    details.update(case=2, eps_prime=eps_prime, cc_low=lows, cc0=cc0, cc1=cc1)
    return Bracket(
        lo,
        hi,
        f"max(0, ceil(max_i CC(psi_i, eps')/k* - h)) with eps'={eps_prime:.4g}, k*={k_star}, h={h}",
        f"k*(CC(psi_0)+CC(psi_1))+3 = {k}*({cc0}+{cc1})+3",
        details,
    )
