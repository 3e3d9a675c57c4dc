#!/usr/bin/env python3
"""Derive the graph family of the rotated-pair chains.

For each chain length this script extracts the stabilizer group of the grown
state, reduces the tableau to graph canonical form with tracked single-qubit
Cliffords, and prints the adjacency plus the per-qubit corrections that map
the state onto its graph state.  The frozen corrections used in the test
suite for 8- and 10-qubit chains were produced by this script.

Run:  python scripts/derive_graph_family.py [max_pairs]
"""

from __future__ import annotations

import sys
from itertools import product

import numpy as np

from timefuse.fusion import PHI_I, PHI_PLUS, grow_chain
from timefuse.graphs import (
    Graph,
    QubitState,
    apply_single_qubit,
    single_qubit_cliffords,
    stabilizer_expectations,
    to_qubits,
)

# Pauli products P*Q -> (R, phase); letters indexed I=0 X=1 Y=2 Z=3.
MUL = {}
for a in range(4):
    MUL[(0, a)] = (a, 1.0)
    MUL[(a, 0)] = (a, 1.0)
    MUL[(a, a)] = (0, 1.0)
MUL[(1, 2)] = (3, 1.0j)
MUL[(2, 1)] = (3, -1.0j)
MUL[(2, 3)] = (1, 1.0j)
MUL[(3, 2)] = (1, -1.0j)
MUL[(3, 1)] = (2, 1.0j)
MUL[(1, 3)] = (2, -1.0j)

# Conjugation tables: gate -> {pauli: (pauli', sign)}
CONJ = {
    "H": {0: (0, 1), 1: (3, 1), 2: (2, -1), 3: (1, 1)},
    "S": {0: (0, 1), 1: (2, 1), 2: (1, -1), 3: (3, 1)},
    "SDG": {0: (0, 1), 1: (2, -1), 2: (1, 1), 3: (3, 1)},
    "Z": {0: (0, 1), 1: (1, -1), 2: (2, -1), 3: (3, 1)},
}
GATE_MATS = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1.0, 1.0j]),
    "SDG": np.diag([1.0, -1.0j]),
    "Z": np.diag([1.0, -1.0]),
}


def pauli_matrix_word(word: tuple[int, ...]) -> list[np.ndarray]:
    mats = [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    return [mats[p] for p in word]


def apply_word(vec: np.ndarray, word: tuple[int, ...], n: int) -> np.ndarray:
    for q, mat in enumerate(pauli_matrix_word(word)):
        if word[q]:
            vec = apply_single_qubit(vec, mat, q, n)
    return vec


def stabilizer_generators(vec: np.ndarray, n: int) -> list[tuple[int, list[int]]]:
    """Scan Pauli words for stabilizers, keeping n independent generators."""
    gens: list[tuple[int, list[int]]] = []
    basis_rows: list[np.ndarray] = []

    def sym_row(word):
        x = [1 if p in (1, 2) else 0 for p in word]
        z = [1 if p in (2, 3) else 0 for p in word]
        return np.array(x + z, dtype=np.uint8)

    def independent(row):
        red = row.copy()
        for b in basis_rows:
            piv = np.nonzero(b)[0][0]
            if red[piv]:
                red ^= b
        return red

    for word in product(range(4), repeat=n):
        if not any(word):
            continue
        red = independent(sym_row(word))
        if not red.any():
            continue
        pv = apply_word(vec.copy(), word, n)
        ov = np.vdot(vec, pv)
        if abs(ov - 1) < 1e-8:
            sign = 1
        elif abs(ov + 1) < 1e-8:
            sign = -1
        else:
            continue
        gens.append((sign, list(word)))
        basis_rows.append(red)
        basis_rows.sort(key=lambda b: np.nonzero(b)[0][0])
        if len(gens) == n:
            break
    assert len(gens) == n, "state is not a stabilizer state"
    return gens


def row_multiply(g1, g2):
    sign = g1[0] * g2[0]
    word = []
    for p, q in zip(g1[1], g2[1]):
        r, phase = MUL[(p, q)]
        sign *= phase
        word.append(r)
    assert abs(sign.imag if isinstance(sign, complex) else 0) < 1e-12
    return (int(np.real(sign)), word)


def conjugate_all(gens, gate, qubit):
    out = []
    for sign, word in gens:
        p2, s2 = CONJ[gate][word[qubit]]
        w = list(word)
        w[qubit] = p2
        out.append((sign * s2, w))
    return out


def graph_canonical_form(vec: np.ndarray, n: int):
    """Reduce to graph form; returns (adjacency, per-qubit gate sequences)."""
    gens = stabilizer_generators(vec, n)
    applied: list[list[str]] = [[] for _ in range(n)]

    def xmat():
        return np.array([[1 if p in (1, 2) else 0 for p in w] for _, w in gens], dtype=np.uint8)

    def rank(m):
        m = m.copy()
        r = 0
        for c in range(m.shape[1]):
            piv = np.nonzero(m[r:, c])[0]
            if piv.size == 0:
                continue
            m[[r, r + piv[0]]] = m[[r + piv[0], r]]
            for i in range(m.shape[0]):
                if i != r and m[i, c]:
                    m[i] ^= m[r]
            r += 1
        return r

    # Step 1: Hadamards until the X block is invertible.
    guard = 0
    while rank(xmat()) < n:
        guard += 1
        assert guard < 4 * n
        # find a row that reduces to zero X part; flip one of its Z qubits
        m = xmat()
        rows = [list(w) for _, w in gens]
        # gaussian eliminate, find combination with zero x-part but nonzero z
        full = np.array(
            [[1 if p in (1, 2) else 0 for p in w] + [1 if p in (2, 3) else 0 for p in w] for w in rows],
            dtype=np.uint8,
        )
        red = full.copy()
        r = 0
        for c in range(n):
            piv = np.nonzero(red[r:, c])[0]
            if piv.size == 0:
                continue
            red[[r, r + piv[0]]] = red[[r + piv[0], r]]
            for i in range(red.shape[0]):
                if i != r and red[i, c]:
                    red[i] ^= red[r]
            r += 1
        zero_x = [i for i in range(n) if not red[i, :n].any() and red[i, n:].any()]
        q = int(np.nonzero(red[zero_x[0], n:])[0][0])
        gens = conjugate_all(gens, "H", q)
        applied[q].append("H")

    # Step 2: row reduce X to identity.
    for col in range(n):
        piv = next(i for i in range(col, n) if gens[i][1][col] in (1, 2))
        gens[col], gens[piv] = gens[piv], gens[col]
        for i in range(n):
            if i != col and gens[i][1][col] in (1, 2):
                gens[i] = row_multiply(gens[i], gens[col])

    # Step 3: clear Y on the diagonal with S-dagger.
    for q in range(n):
        if gens[q][1][q] == 2:
            gens = conjugate_all(gens, "SDG", q)
            applied[q].append("SDG")

    # Step 4: fix signs with Z.
    for q in range(n):
        if gens[q][0] < 0:
            gens = conjugate_all(gens, "Z", q)
            applied[q].append("Z")

    adj = np.zeros((n, n), dtype=np.uint8)
    for i, (sign, word) in enumerate(gens):
        assert sign == 1 and word[i] == 1
        for j, p in enumerate(word):
            if j != i:
                assert p in (0, 3), f"row {i} not in graph form"
                adj[i, j] = 1 if p == 3 else 0
    assert (adj == adj.T).all() and not adj.diagonal().any()
    return adj, applied


def clifford_label(seq: list[str]) -> str:
    """Canonical H/S word for a gate sequence (applied first-to-last)."""
    mat = np.eye(2, dtype=complex)
    for g in seq:
        mat = GATE_MATS[g] @ mat

    def canon(m):
        flat = m.reshape(-1)
        ref = flat[np.flatnonzero(np.abs(flat) > 1e-12)[0]]
        return tuple(np.round(m * (abs(ref) / ref), 10).reshape(-1).tolist())

    target = canon(mat)
    for word, m in single_qubit_cliffords():
        if canon(m) == target:
            return word
    raise RuntimeError("sequence did not land in the Clifford table")


def main() -> None:
    max_pairs = int(sys.argv[1]) if len(sys.argv) > 1 else 4
    for kind, name in ((PHI_PLUS, "plain"), (PHI_I, "rotated")):
        for n_pairs in range(2, max_pairs + 1):
            res = grow_chain(n_pairs, kind, hwp_before_pbs=(kind is PHI_I))
            state = to_qubits(res)
            adj, applied = graph_canonical_form(state.vector.copy(), state.n)
            edges = sorted(
                (i, j) for i in range(state.n) for j in range(i + 1, state.n) if adj[i, j]
            )
            labels = tuple(clifford_label(seq) for seq in applied)
            graph = Graph.from_edges(state.n, edges)
            corrected = state.vector
            for q, seq in enumerate(applied):
                for g in seq:
                    corrected = apply_single_qubit(corrected, GATE_MATS[g], q, state.n)
            checks = stabilizer_expectations(QubitState(corrected, state.n), graph)
            ok = all(abs(c - 1) < 1e-9 for c in checks)
            print(f"{name} n_pairs={n_pairs}: edges={edges}")
            print(f"  corrections={labels}  verified={ok}")


if __name__ == "__main__":
    main()
