"""Layered breadth-first enumeration of circuits up to behavioural equivalence.

A circuit is represented by its action on a fixed list of probe basis states
(for example every |x, 0^t>). Two circuits with the same action, up to a
global phase, score identically under every problem and have identical
extensions, so only the first one met is kept.

Children of layer s-1 are generated in (parent index, placement index) order
and a class is kept at its first occurrence. By induction on the prefix, the
kept representative is the lexicographically smallest circuit of its class and
classes appear in lexicographic order of their representatives. The first
qualifying class in a layer is therefore the lexicographically first
qualifying circuit of that size. Classes already reached at a smaller size are
dropped, so layer s holds exactly the behaviours of minimum size s.

Two backends share this logic:

* quantum: complex amplitudes of the probe columns, keyed by a 128-bit hash of
  the phase-normalized array quantized at 1e-6;
* classical: valid when every gate is a permutation matrix. Each wire holds a
  bit mask of its values over the probe rows and gates become bitwise
  operations on those masks.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from ..errors import ResourceError
from ..qcore.gates import GateSet
from ..qcore.sim import apply_gate

DEFAULT_BUDGET = 10**9
DEFAULT_MAX_BYTES = 1_500_000_000
CHUNK_BYTES = 128_000_000
QUANT = 1e6

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, elementwise on uint64."""
    x = x ^ (x >> np.uint64(30))
    x = x * _M1
    x = x ^ (x >> np.uint64(27))
    x = x * _M2
    return x ^ (x >> np.uint64(31))


def _hash_words(words: np.ndarray) -> np.ndarray:
    """Rows of uint64 words -> two independent 64-bit hashes (128-bit key)."""
    k, w = words.shape
    h1 = np.full(k, 0x9E3779B97F4A7C15, dtype=np.uint64)
    h2 = np.full(k, 0x632BE59BD9B4E019, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for j in range(w):
            col = words[:, j]
            h1 = _mix(h1 ^ _mix(col + np.uint64(2 * j + 1)))
            h2 = _mix(h2 + _mix(col ^ np.uint64(0xD6E8FEB86659FD93 + j)))
    return h1, h2


def _packed_key(words: np.ndarray, bits_per_word: int) -> np.ndarray:
    """Exact key when all words fit in 64 bits together."""
    k, w = words.shape
    out = np.zeros(k, dtype=np.uint64)
    for j in range(w):
        out |= words[:, j].astype(np.uint64) << np.uint64(j * bits_per_word)
    return out, np.zeros(k, dtype=np.uint64)


def first_unique(k1: np.ndarray, k2: np.ndarray, exclude: "KeySet | None" = None) -> np.ndarray:
    """Indices of the first occurrence of each distinct (k1, k2) pair, ascending.

    Keys found in `exclude` are dropped; the membership test runs on the
    sorted group keys, which keeps the binary searches cache friendly.

    Sorting on k1 alone is several times faster than a two-key sort; k2 is
    checked inside each k1 group and an exact lexsort runs only when some
    group disagrees.
    """
    if len(k1) == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.argsort(k1)
    a = k1[order]
    b = k2[order]
    start = np.empty(len(a), dtype=bool)
    start[0] = True
    np.not_equal(a[1:], a[:-1], out=start[1:])
    gid = np.cumsum(start) - 1
    if np.any(b != b[start][gid]):
        order = np.lexsort((k2, k1))
        a, b = k1[order], k2[order]
        start[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    starts = np.flatnonzero(start)
    firsts = np.minimum.reduceat(order, starts)
    if exclude is not None and len(exclude):
        firsts = firsts[~exclude.contains(a[starts], b[starts])]
    return np.sort(firsts)


class KeySet:
    """Sorted set of 128-bit keys supporting vectorized membership."""

    def __init__(self):
        self.k1 = np.zeros(0, dtype=np.uint64)
        self.k2 = np.zeros(0, dtype=np.uint64)

    def __len__(self):
        return len(self.k1)

    def add(self, k1, k2):
        a = np.concatenate([self.k1, k1])
        b = np.concatenate([self.k2, k2])
        order = np.lexsort((b, a))
        self.k1, self.k2 = a[order], b[order]

    def contains(self, k1, k2) -> np.ndarray:
        if len(self.k1) == 0:
            return np.zeros(len(k1), dtype=bool)
        lo = np.searchsorted(self.k1, k1, side="left")
        hi = np.searchsorted(self.k1, k1, side="right")
        out = np.zeros(len(k1), dtype=bool)
        single = hi - lo == 1
        out[single] = self.k2[lo[single]] == k2[single]
        for i in np.flatnonzero(hi - lo > 1):
            out[i] = bool(np.any(self.k2[lo[i] : hi[i]] == k2[i]))
        return out


def quantum_keys(data: np.ndarray) -> np.ndarray:
    """Global-phase-invariant keys for a (K, D, c) complex array."""
    k = data.shape[0]
    flat = data.reshape(k, -1)
    big = np.abs(flat) > 1e-6
    first = np.argmax(big, axis=1)
    ref = flat[np.arange(k), first]
    phase = np.where(np.abs(ref) > 0, np.conj(ref) / np.maximum(np.abs(ref), 1e-300), 1.0)
    norm = flat * phase[:, None]
    q = np.empty((k, 2 * flat.shape[1]), dtype=np.int64)
    q[:, 0::2] = np.rint(norm.real * QUANT)
    q[:, 1::2] = np.rint(norm.imag * QUANT)
    return _hash_words(q.view(np.uint64))


def _uint_for(rows: int):
    for bits, dt in ((8, np.uint8), (16, np.uint16), (32, np.uint32), (64, np.uint64)):
        if rows <= bits:
            return dt, bits
    raise ResourceError(f"classical engine supports at most 64 probe rows, got {rows}", rows)


@dataclass
class Layer:
    data: np.ndarray
    parent: np.ndarray
    op: np.ndarray
    labels: np.ndarray | None = None

    def __len__(self):
        return self.data.shape[0]

    @property
    def nbytes(self) -> int:
        n = self.data.nbytes + self.parent.nbytes + self.op.nbytes
        return n + (self.labels.nbytes if self.labels is not None else 0)


@dataclass
class Pruning:
    """Component-count pruning for circuits of exactly `target` gates.

    `wires` must all end up in one connected component (through gates) for
    the output to depend on all of them. Each gate of arity q merges at most
    q components, so a child at depth d survives only if
    (#components meeting `wires`) - 1 <= (target - d) * (qmax - 1).
    """

    wires: tuple[int, ...]
    target: int


class ReachableSet:
    """Behaviour classes of circuits over `gateset` on `width` qubits, by minimum size."""

    def __init__(
        self,
        gateset: GateSet,
        width: int,
        probes: list[int],
        backend: str | None = None,
        budget: int = DEFAULT_BUDGET,
        max_bytes: int = DEFAULT_MAX_BYTES,
        pruning: Pruning | None = None,
    ):
        self.gateset = gateset
        self.width = width
        self.probes = list(probes)
        self.budget = budget
        self.max_bytes = max_bytes
        self.pruning = pruning
        if backend is None:
            backend = "classical" if gateset.is_classical and len(self.probes) <= 64 else "quantum"
        if backend == "classical" and not gateset.is_classical:
            raise ValueError("classical backend needs a gate set of permutation matrices")
        if pruning is not None and backend != "classical":
            raise ValueError("pruning is implemented for the classical backend only")
        self.backend = backend
        self.placements = gateset.placements(width)
        self.steps = 0
        # cumulative steps needed to build layers 0..s, so cached layers are charged too
        self.layer_steps = [0]
        self.layers: list[Layer] = []
        self._seen = KeySet()
        if backend == "quantum":
            self._init_quantum()
        else:
            self._init_classical()

    # ------------------------------------------------------------------ setup
    def _init_quantum(self):
        d = 2**self.width
        c = len(self.probes)
        self._mats = np.zeros((len(self.placements), d, d), dtype=complex)
        eye = np.eye(d, dtype=complex)
        for i, (g, qs) in enumerate(self.placements):
            self._mats[i] = apply_gate(eye, self.width, self.gateset.gates[g].matrix, qs)
        data = np.zeros((1, d, c), dtype=complex)
        data[0, self.probes, np.arange(c)] = 1
        self._push(data, np.zeros(1, np.int64), np.full(1, -1, np.int32), None)

    def _init_classical(self):
        rows = len(self.probes)
        self._dtype, self._bits = _uint_for(rows)
        self._rowmask = self._dtype((1 << rows) - 1) if rows < self._bits else self._dtype(np.iinfo(self._dtype).max)
        data = np.zeros((1, self.width), dtype=self._dtype)
        for w in range(self.width):
            v = 0
            for r, idx in enumerate(self.probes):
                if (idx >> (self.width - 1 - w)) & 1:
                    v |= 1 << r
            data[0, w] = v
        # each permutation gate as minterm lists per output bit
        self._gate_logic = []
        for g in self.gateset.gates:
            k = g.arity
            perm = np.argmax(np.abs(g.matrix), axis=0)  # column p maps to row perm[p]
            outs = []
            for j in range(k):
                shift = k - 1 - j
                outs.append([p for p in range(2**k) if (perm[p] >> shift) & 1])
            self._gate_logic.append(outs)
        labels = np.arange(self.width, dtype=np.int8)[None, :] if self.pruning else None
        self._push(data, np.zeros(1, np.int64), np.full(1, -1, np.int32), labels)

    # --------------------------------------------------------------- children
    def _children_quantum(self, data: np.ndarray) -> np.ndarray:
        kc = data.shape[0]
        P = len(self.placements)
        out = np.empty((kc, P) + data.shape[1:], dtype=complex)
        for i in range(P):
            out[:, i] = np.matmul(self._mats[i], data)
        return out.reshape((kc * P,) + data.shape[1:])

    def _apply_classical(self, cols: np.ndarray, g: int, qs) -> np.ndarray:
        k = len(qs)
        ins = [cols[:, q] for q in qs]
        nots = [(~c) & self._rowmask for c in ins]
        new = []
        for j, minterms in enumerate(self._gate_logic[g]):
            acc = np.zeros(cols.shape[0], dtype=self._dtype)
            for p in minterms:
                term = np.full(cols.shape[0], self._rowmask, dtype=self._dtype)
                for i in range(k):
                    term &= ins[i] if (p >> (k - 1 - i)) & 1 else nots[i]
                acc |= term
            new.append(acc)
        out = cols.copy()
        for j, q in enumerate(qs):
            out[:, q] = new[j]
        return out

    def _children_classical(self, data, labels):
        kc = data.shape[0]
        P = len(self.placements)
        out = np.empty((kc, P, self.width), dtype=self._dtype)
        lab = np.empty((kc, P, self.width), dtype=np.int8) if labels is not None else None
        for i, (g, qs) in enumerate(self.placements):
            out[:, i] = self._apply_classical(data, g, qs)
            if lab is not None:
                lab[:, i] = self._merge_labels(labels, qs)
        out = out.reshape(kc * P, self.width)
        if lab is not None:
            lab = lab.reshape(kc * P, self.width)
        return out, lab

    @staticmethod
    def _merge_labels(labels: np.ndarray, qs) -> np.ndarray:
        if len(qs) < 2:
            return labels
        sub = labels[:, list(qs)]
        m = sub.min(axis=1)
        hit = np.zeros(labels.shape, dtype=bool)
        for j in range(sub.shape[1]):
            hit |= labels == sub[:, j : j + 1]
        return np.where(hit, m[:, None], labels).astype(np.int8)

    def _keys(self, data, labels):
        if self.backend == "quantum":
            return quantum_keys(data)
        if labels is None and self.width * self._bits <= 62:
            return _packed_key(data, self._bits)
        words = data.astype(np.uint64)
        if labels is not None:
            packed = np.zeros(data.shape[0], dtype=np.uint64)
            for j in range(self.width):
                packed |= labels[:, j].astype(np.uint64) << np.uint64(4 * j)
            words = np.concatenate([words, packed[:, None]], axis=1)
        return _hash_words(words)

    def _prune_mask(self, labels: np.ndarray, depth: int) -> np.ndarray:
        pr = self.pruning
        sub = np.sort(labels[:, list(pr.wires)], axis=1)
        comps = 1 + np.count_nonzero(np.diff(sub, axis=1), axis=1)
        slack = (pr.target - depth) * (self.gateset.max_arity - 1)
        return comps - 1 <= slack

    # ------------------------------------------------------------------ layers
    def _push(self, data, parent, op, labels):
        self._seen.add(*self._keys(data, labels))
        self.layers.append(Layer(data, parent, op, labels))

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    def _row_bytes(self, prev: Layer) -> int:
        r = prev.data[:1].nbytes if len(prev) else 1
        return max(r, 1)

    def extend(self):
        prev = self.layers[-1]
        K = len(prev)
        P = len(self.placements)
        depth = len(self.layers)
        if self.pruning is not None and depth > self.pruning.target:
            K = 0
        need = K * P
        if self.steps + need > self.budget:
            raise ResourceError(
                f"enumeration of size-{depth} circuits needs {self.steps + need} steps, budget {self.budget}",
                self.steps + need,
            )
        self.steps += need
        self.layer_steps.append(self.steps)
        row = self._row_bytes(prev)
        chunk = max(1, CHUNK_BYTES // max(1, P * row))
        kept_keys, kept_pos = [], []
        for lo in range(0, K, chunk):
            hi = min(K, lo + chunk)
            if self.backend == "quantum":
                ch = self._children_quantum(prev.data[lo:hi])
                lab = None
            else:
                ch, lab = self._children_classical(prev.data[lo:hi], None if prev.labels is None else prev.labels[lo:hi])
            pos = np.arange(lo * P, hi * P, dtype=np.int64)
            if lab is not None:
                ok = self._prune_mask(lab, depth)
                ch, lab, pos = ch[ok], lab[ok], pos[ok]
            k1, k2 = self._keys(ch, lab)
            first = first_unique(k1, k2, exclude=self._seen)
            kept_keys.append((k1[first], k2[first]))
            kept_pos.append(pos[first])
        if kept_keys:
            k1 = np.concatenate([a for a, _ in kept_keys])
            k2 = np.concatenate([b for _, b in kept_keys])
            pos = np.concatenate(kept_pos)
            pos = pos[first_unique(k1, k2)]
        else:
            pos = np.zeros(0, dtype=np.int64)
        parent = pos // P
        op = (pos % P).astype(np.int32)
        est = len(pos) * row + sum(layer.nbytes for layer in self.layers)
        if est > self.max_bytes:
            raise ResourceError(f"layer {depth} would hold {len(pos)} classes (~{est / 1e9:.2f} GB), over the memory cap", len(pos))
        data, labels = self._rebuild(prev, parent, op)
        self._push(data, parent, op, labels)
        return self.layers[-1]

    def _rebuild(self, prev: Layer, parent: np.ndarray, op: np.ndarray):
        """Recompute the kept children (cheaper than holding every child in memory)."""
        if len(parent) == 0:
            shape = (0,) + prev.data.shape[1:]
            return np.zeros(shape, dtype=prev.data.dtype), (np.zeros((0, self.width), np.int8) if prev.labels is not None else None)
        data = np.empty((len(parent),) + prev.data.shape[1:], dtype=prev.data.dtype)
        labels = np.empty((len(parent), self.width), np.int8) if prev.labels is not None else None
        order = np.argsort(op, kind="stable")
        bounds = np.searchsorted(op[order], np.arange(len(self.placements) + 1))
        for i in range(len(self.placements)):
            idx = order[bounds[i] : bounds[i + 1]]
            if len(idx) == 0:
                continue
            src = prev.data[parent[idx]]
            g, qs = self.placements[i]
            if self.backend == "quantum":
                data[idx] = np.matmul(self._mats[i], src)
            else:
                data[idx] = self._apply_classical(src, g, qs)
                if labels is not None:
                    labels[idx] = self._merge_labels(prev.labels[parent[idx]], qs)
        return data, labels

    def layer(self, s: int) -> Layer:
        while len(self.layers) <= s:
            self.extend()
        if self.layer_steps[s] > self.budget:
            raise ResourceError(
                f"enumeration of size-{s} circuits needs {self.layer_steps[s]} steps, budget {self.budget}",
                self.layer_steps[s],
            )
        return self.layers[s]

    def ops_of(self, s: int, idx: int) -> tuple:
        out = []
        while s > 0:
            layer = self.layers[s]
            out.append(self.placements[int(layer.op[idx])])
            idx = int(layer.parent[idx])
            s -= 1
        return tuple(reversed(out))

    def class_counts(self) -> list[int]:
        return [len(layer) for layer in self.layers]


_ENGINES: "OrderedDict[tuple, ReachableSet]" = OrderedDict()
MAX_CACHED_ENGINES = 6


def get_engine(gateset: GateSet, width: int, probes, backend=None, budget=DEFAULT_BUDGET, pruning: Pruning | None = None) -> ReachableSet:
    """Memoized ReachableSet; purely a cache, results do not depend on it."""
    key = (gateset.fingerprint, width, tuple(probes), backend, None if pruning is None else (pruning.wires, pruning.target))
    eng = _ENGINES.get(key)
    if eng is not None:
        _ENGINES.move_to_end(key)
        eng.budget = budget
        return eng
    eng = ReachableSet(gateset, width, list(probes), backend=backend, budget=budget, pruning=pruning)
    _ENGINES[key] = eng
    while len(_ENGINES) > MAX_CACHED_ENGINES:
        _ENGINES.popitem(last=False)
    return eng


def clear_engine_cache():
    _ENGINES.clear()
