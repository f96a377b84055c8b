"""Sampling simulations of the verification protocols.

Each check draws from the exact outcome probabilities computed by qcore; the
measurement circuits themselves are never built. Every check gets its own
random stream derived from (seed, check index), so reports do not depend on
the order in which checks run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .qcore.fidelity import ancilla_projections, state_overlap, unitary_basis_fidelities
from .qcore.sim import func_acceptance
from .qcore.types import PartialTruthTable, PureState, QuantumCircuit, TruthTable, UnitaryMatrix


@dataclass
class Check:
    name: str
    samples: int
    negatives: int
    threshold: float  # negative ratio at or above which the check rejects
    probability: float  # exact per-sample probability of a negative outcome

    @property
    def fires(self) -> bool:
        return self.samples > 0 and self.negatives / self.samples >= self.threshold

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "negatives": self.negatives,
            "threshold": self.threshold,
            "probability": self.probability,
        }


@dataclass
class VerifierReport:
    checks: list[Check]
    verdict: str
    seed: int
    mode: str = ""
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"checks": [c.to_json() for c in self.checks], "verdict": self.verdict, "seed": self.seed, "mode": self.mode, "meta": self.meta}

    @property
    def fired(self) -> list[str]:
        return [c.name for c in self.checks if c.fires]


def _seed_of(rng) -> int:
    if rng is None:
        return 0
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(rng.integers(0, 2**62))


def check_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _ratio_threshold(samples: int, min_count: int) -> float:
    """Ratio form of 'reject when negatives >= min_count'."""
    return min_count / samples if samples else math.inf


def _report(checks: list[Check], seed: int, mode: str, **meta) -> VerifierReport:
    verdict = "Reject" if any(c.fires for c in checks) else "Accept"
    return VerifierReport(checks, verdict, seed, mode, meta)


def verify_mqcsp(T, witness: QuantumCircuit, alpha: float, beta: float, trials_per_x: int, rng=None) -> VerifierReport:
    """Accept iff every defined x yields the right bit in at least a (alpha+beta)/2 fraction of trials."""
    entries = T.bits if isinstance(T, TruthTable) else T.entries
    if T.n != witness.n:
        raise DimensionError(f"table has {T.n} inputs, witness has {witness.n}")
    seed = _seed_of(rng)
    cut = (alpha + beta) / 2
    ell = int(trials_per_x)
    need = math.ceil(cut * ell - 1e-9)  # consistent outcomes needed to pass
    reject_at = ell - need + 1
    checks = []
    for i, fx in enumerate(entries):
        if fx == 2:
            continue
        x = format(i, f"0{T.n}b") if T.n else ""
        p_good = func_acceptance(witness, x, fx)
        bad = int(check_stream(seed, i).binomial(ell, min(1.0, max(0.0, 1 - p_good))))
        checks.append(Check(f"x={x}", ell, bad, _ratio_threshold(ell, reject_at), 1 - p_good))
    return _report(checks, seed, "mqcsp", cut=cut)


def smcsp_zero_probability(psi: PureState, witness: QuantumCircuit) -> float:
    """Swap test between psi and the first n qubits of C|0>: Pr[0] = 1/2 + 1/2 ||(<psi| x I) C|0>||^2."""
    return 0.5 + 0.5 * state_overlap(witness, psi)


def verify_smcsp(psi: PureState, witness: QuantumCircuit, alpha: float, beta: float, ell: int, rng=None) -> VerifierReport:
    """Accept iff at least (1/2 + (alpha+beta)/4) * ell swap tests output 0."""
    if psi.n != witness.n:
        raise DimensionError(f"state has {psi.n} qubits, witness has {witness.n} inputs")
    seed = _seed_of(rng)
    p0 = smcsp_zero_probability(psi, witness)
    cut = 0.5 + (alpha + beta) / 4
    need = math.ceil(cut * ell - 1e-9)
    ones = int(check_stream(seed, 0).binomial(ell, min(1.0, max(0.0, 1 - p0))))
    check = Check("swap-test", ell, ones, _ratio_threshold(ell, ell - need + 1), 1 - p0)
    return _report([check], seed, "smcsp", cut=cut, zero_probability=p0)


def umcsp_threshold(n: int, beta: float) -> float:
    return 2.0 ** (-2 * n - 18) * (1 - beta) ** 4


def verify_umcsp(
    U: UnitaryMatrix,
    witness: QuantumCircuit,
    beta: float,
    poly1: int,
    poly2: int,
    rng=None,
    threshold_cap: float | None = None,
) -> VerifierReport:
    """Standard-basis check on every |a>, then coherency check on every (|a>+|b>)/sqrt2.

    A sample is negative when projecting onto the intended input state fails,
    which happens with probability 1 - fidelity. The formula threshold is
    below 1e-6 at desk scale, so a single negative rejects; passing
    `threshold_cap` replaces it with a fixed ratio and the report says so.
    """
    if U.n != witness.n:
        raise DimensionError(f"unitary acts on {U.n} qubits, witness has {witness.n} inputs")
    seed = _seed_of(rng)
    n = U.n
    d = 2**n
    fids = unitary_basis_fidelities(witness, U)
    formula = umcsp_threshold(n, beta)
    if threshold_cap is None:
        thr, mode = formula, "formula"
    else:
        thr, mode = float(threshold_cap), "threshold_cap"
    checks = []
    names = [f"basis|{format(a, f'0{n}b')}>" for a in range(d)]
    names += [f"pair|{format(a, f'0{n}b')}>+|{format(b, f'0{n}b')}>" for a in range(d) for b in range(a + 1, d)]
    for idx, (name, f) in enumerate(zip(names, fids)):
        samples = poly1 if idx < d else poly2
        p_neg = min(1.0, max(0.0, 1 - f))
        neg = int(check_stream(seed, idx).binomial(samples, p_neg))
        checks.append(Check(name, samples, neg, thr, p_neg))
    basis_only = "Reject" if any(c.fires for c in checks[:d]) else "Accept"
    return _report(checks, seed, mode, formula_threshold=formula, threshold=thr, standard_basis_only=basis_only, n=n, beta=beta)


def ancilla_state_distances(U: UnitaryMatrix, witness: QuantumCircuit) -> list[dict]:
    """For each pair a < b: delta (1 - min of the three fidelities involved) and ||chi_a - chi_b||."""
    fids = unitary_basis_fidelities(witness, U)
    chi = ancilla_projections(witness, U)
    d = 2**U.n
    out = []
    k = d
    for a in range(d):
        for b in range(a + 1, d):
            delta = max(0.0, 1 - min(fids[a], fids[b], fids[k]))
            dist = float(np.linalg.norm(chi[a] - chi[b]))
            out.append({"a": a, "b": b, "delta": delta, "distance": dist, "bound": 4 * delta**0.25})
            k += 1
    return out
