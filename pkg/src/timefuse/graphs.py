"""Stabilizer verification: do grown states match their target graphs up to
local Clifford corrections?

Post-selected photons map to qubits (h -> 0, v -> 1, detection order).  Graph
states are defined by the generators K_a = X_a prod_{b in N(a)} Z_b; a state
equals the graph state up to local Cliffords iff some per-qubit correction
makes every generator expectation +1.  The search enumerates the 24
single-qubit Cliffords per qubit with early pruning, so certificates are
found rather than assumed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fusion import FusionResult
from .tolerances import TOL


class SearchTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on qubits 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if not (0 <= a < b < self.n):
                raise ValueError(f"bad edge ({a}, {b}) for {self.n} qubits")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        return cls(n, frozenset(tuple(sorted(e)) for e in edges))

    def neighbors(self, a: int) -> tuple[int, ...]:
        out = [b if x == a else x for x, b in self.edges if a in (x, b)]
        return tuple(sorted(out))

    def adjacency(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=np.uint8)
        for a, b in self.edges:
            m[a, b] = m[b, a] = 1
        return m


def star(n: int) -> Graph:
    """Star graph with qubit 0 as the hub; its graph state is GHZ-class."""
    if n < 2:
        raise ValueError("star needs at least two qubits")
    return Graph.from_edges(n, [(0, k) for k in range(1, n)])


def path(n: int) -> Graph:
    if n < 2:
        raise ValueError("path needs at least two qubits")
    return Graph.from_edges(n, [(k, k + 1) for k in range(n - 1)])


def branched_chain(n_pairs: int) -> Graph:
    """Target family of the rotated-pair chains (creation-ordered qubits).

    The right photons of pairs 2..n form a spine 2-4-...-(2n-2); the first
    pair's photons hang off spine vertex 2, every later left photon hangs off
    the next spine vertex.  Two pairs give a star on four qubits (identical
    to the GHZ graph); three pairs give the H shape, two adjacent hubs with
    two leaves each.
    """
    if n_pairs < 2:
        raise ValueError("need at least two pairs")
    edges = [(0, 2), (1, 2)]
    for j in range(2, n_pairs):
        edges.append((2 * j - 2, 2 * j))
        edges.append((2 * j - 1, 2 * j))
    edges.append((2 * n_pairs - 2, 2 * n_pairs - 1))
    return Graph.from_edges(2 * n_pairs, edges)


@dataclass(frozen=True)
class PauliString:
    """Real-signed Pauli word in binary symplectic form."""

    x: tuple[int, ...]
    z: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.x)

    def commutes_with(self, other: "PauliString") -> bool:
        sym = sum(a * b for a, b in zip(self.x, other.z))
        sym += sum(a * b for a, b in zip(self.z, other.x))
        return sym % 2 == 0

    def support(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if self.x[q] or self.z[q])

    def word(self) -> str:
        out = []
        for xq, zq in zip(self.x, self.z):
            out.append("IXZY"[xq + 2 * zq] if xq + 2 * zq != 3 else "Y")
        return "".join(out)


@dataclass(frozen=True)
class StabilizerSet:
    generators: tuple[PauliString, ...]

    @classmethod
    def from_graph(cls, graph: Graph) -> "StabilizerSet":
        gens = []
        for a in range(graph.n):
            x = tuple(1 if q == a else 0 for q in range(graph.n))
            nbrs = set(graph.neighbors(a))
            z = tuple(1 if q in nbrs else 0 for q in range(graph.n))
            gens.append(PauliString(x, z))
        return cls(tuple(gens))

    def all_commute(self) -> bool:
        return all(
            a.commutes_with(b) for a, b in itertools.combinations(self.generators, 2)
        )

    def independent(self) -> bool:
        rows = np.array(
            [list(g.x) + list(g.z) for g in self.generators], dtype=np.uint8
        )
        return _gf2_rank(rows) == len(self.generators)


def _gf2_rank(rows: np.ndarray) -> int:
    m = rows.copy() % 2
    rank = 0
    for col in range(m.shape[1]):
        pivots = np.nonzero(m[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot = rank + pivots[0]
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


@dataclass(frozen=True)
class QubitState:
    """Dense 2^n vector; qubit 0 is the most significant bit."""

    vector: np.ndarray
    n: int

    def __post_init__(self) -> None:
        if self.vector.shape != (2**self.n,):
            raise ValueError("vector length does not match qubit count")
        if abs(np.linalg.norm(self.vector) - 1.0) > TOL.norm:
            raise ValueError("qubit state must be normalized")


def to_qubits(result: FusionResult) -> QubitState:
    """Map a post-selected fusion result to qubits, h -> |0>, v -> |1>."""
    if result.is_null:
        raise ValueError("null fusion result has no qubit representation")
    n = len(result.mode_layout)
    position = {group: i for i, group in enumerate(result.mode_layout)}
    vec = np.zeros(2**n, dtype=complex)
    for term, amp in result.state.terms.items():
        index = 0
        seen = 0
        for mode, count in term:
            if mode.envelope != 0:
                raise ValueError("state carries envelope mixing; qubit map needs s = 1")
            q = position.get((mode.spatial, mode.time_slot))
            if q is None or count != 1:
                raise ValueError("state is not post-selected to one photon per slot")
            seen += 1
            if mode.polarization:
                index |= 1 << (n - 1 - q)
        if seen != n:
            raise ValueError("state is not post-selected to one photon per slot")
        vec[index] += amp
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("empty qubit state")
    return QubitState(vec / norm, n)


def ghz_qubits(n: int) -> QubitState:
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 1.0 / math.sqrt(2.0)
    return QubitState(vec, n)


def apply_single_qubit(vector: np.ndarray, matrix: np.ndarray, qubit: int, n: int) -> np.ndarray:
    v = vector.reshape([2] * n)
    v = np.tensordot(matrix, v, axes=([1], [qubit]))
    return np.moveaxis(v, 0, qubit).reshape(-1)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_expectation(state: QubitState, pauli: PauliString) -> float:
    v = state.vector
    for q in pauli.support():
        name = "IXZY"[pauli.x[q] + 2 * pauli.z[q]]
        if pauli.x[q] and pauli.z[q]:
            name = "Y"
        v = apply_single_qubit(v, _PAULI[name], q, state.n)
    value = np.vdot(state.vector, v)
    if abs(value.imag) > 1e-9:
        raise ValueError(f"expectation {value} is not real")
    return float(value.real)


def stabilizer_expectations(state: QubitState, graph: Graph) -> list[float]:
    """Expectation of every graph-state generator; all +1 iff the state is
    exactly the graph state."""
    if state.n != graph.n:
        raise ValueError(f"state has {state.n} qubits, graph has {graph.n}")
    gens = StabilizerSet.from_graph(graph)
    return [pauli_expectation(state, g) for g in gens.generators]


@lru_cache(maxsize=1)
def single_qubit_cliffords() -> tuple[tuple[str, np.ndarray], ...]:
    """The 24 single-qubit Cliffords, labeled by a shortest word over H and S.

    Matrices are canonicalized up to global phase (first nonzero entry made
    positive real) so group elements deduplicate exactly.
    """
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
    s = np.diag([1.0, 1.0j])

    def canonical(m: np.ndarray) -> tuple:
        flat = m.reshape(-1)
        ref = flat[np.flatnonzero(np.abs(flat) > 1e-12)[0]]
        m = m * (abs(ref) / ref)
        return tuple(np.round(m.reshape(-1), 10).tolist())

    found: dict[tuple, tuple[str, np.ndarray]] = {}
    frontier = [("I", np.eye(2, dtype=complex))]
    found[canonical(frontier[0][1])] = frontier[0]
    while frontier:
        nxt = []
        for word, m in frontier:
            for gate_name, gate in (("H", h), ("S", s)):
                word2 = gate_name if word == "I" else word + gate_name
                m2 = gate @ m
                key = canonical(m2)
                if key not in found:
                    entry = (word2, m2)
                    found[key] = entry
                    nxt.append(entry)
        frontier = nxt
    assert len(found) == 24
    return tuple(sorted(found.values(), key=lambda e: (len(e[0]), e[0])))


@dataclass(frozen=True)
class LCResult:
    found: bool
    corrections: tuple[str, ...] | None

    def correction_matrices(self) -> list[np.ndarray] | None:
        if self.corrections is None:
            return None
        table = dict(single_qubit_cliffords())
        return [table[w] for w in self.corrections]


def lc_equivalent(state: QubitState, graph: Graph, max_n: int = 6) -> LCResult:
    """Search per-qubit Clifford corrections making the state the graph state.

    Qubits are assigned in detection order; after each assignment every
    generator fully supported on assigned qubits is checked, pruning the
    24^n tree hard enough that six qubits finish in seconds.
    """
    if state.n != graph.n:
        raise ValueError(f"state has {state.n} qubits, graph has {graph.n}")
    if graph.n > max_n:
        raise SearchTooLargeError(
            f"search too large: {graph.n} qubits exceeds limit {max_n}; "
            "supply corrections and use stabilizer_expectations instead"
        )
    gens = StabilizerSet.from_graph(graph).generators
    by_depth: dict[int, list[PauliString]] = {}
    for g in gens:
        by_depth.setdefault(max(g.support()), []).append(g)
    cliffords = single_qubit_cliffords()

    def search(depth: int, vector: np.ndarray, chosen: tuple[str, ...]) -> tuple[str, ...] | None:
        if depth == graph.n:
            return chosen
        for word, matrix in cliffords:
            candidate = apply_single_qubit(vector, matrix, depth, graph.n)
            ok = True
            for gen in by_depth.get(depth, ()):
                partial = QubitState.__new__(QubitState)
                object.__setattr__(partial, "vector", candidate)
                object.__setattr__(partial, "n", graph.n)
                if abs(pauli_expectation(partial, gen) - 1.0) > TOL.stabilizer:
                    ok = False
                    break
            if not ok:
                continue
            hit = search(depth + 1, candidate, chosen + (word,))
            if hit is not None:
                return hit
        return None

    corrections = search(0, state.vector, ())
    if corrections is None:
        return LCResult(False, None)
    return LCResult(True, corrections)


def apply_corrections(state: QubitState, corrections: tuple[str, ...]) -> QubitState:
    """Apply per-qubit Clifford labels (words over H and S, or 'I')."""
    if len(corrections) != state.n:
        raise ValueError("need one correction label per qubit")
    table = {w: m for w, m in single_qubit_cliffords()}
    vec = state.vector
    for q, word in enumerate(corrections):
        matrix = table.get(word)
        if matrix is None:
            raise ValueError(f"unknown Clifford label {word!r}")
        vec = apply_single_qubit(vec, matrix, q, state.n)
    return QubitState(vec, state.n)
