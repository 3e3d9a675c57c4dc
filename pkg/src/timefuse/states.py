"""Sparse bosonic state vectors over polarization-labeled spatio-temporal modes.

A StateVector maps canonical BasisStates to complex amplitudes.  All terms
share one total photon number.  States are immutable once built; every
operation returns a fresh value, so sharing across threads is safe.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

import numpy as np

from .modes import BasisState, ModeCollisionError, PhotonMode
from .tolerances import TOL

_SQRT_FACT = (1.0, 1.0, math.sqrt(2.0))  # sqrt(n!) for n = 0, 1, 2


class NullStateError(ValueError):
    pass


class PhotonNumberMismatchError(ValueError):
    pass


class StateVector:
    __slots__ = ("_terms", "_photon_number")

    def __init__(self, terms: Mapping[BasisState, complex], prune: bool = True):
        cleaned: dict[BasisState, complex] = {}
        n_photons: int | None = None
        for basis, amp in terms.items():
            if prune and abs(amp) < TOL.prune_amplitude:
                continue
            if n_photons is None:
                n_photons = basis.photon_number
            elif basis.photon_number != n_photons:
                raise PhotonNumberMismatchError(
                    f"mixed photon numbers {n_photons} and {basis.photon_number}"
                )
            cleaned[basis] = complex(amp)
        if n_photons is None:
            raise NullStateError("state has no terms above the prune threshold")
        self._terms = cleaned
        self._photon_number = n_photons

    @property
    def terms(self) -> dict[BasisState, complex]:
        """Term map (treat as read-only)."""
        return self._terms

    @property
    def photon_number(self) -> int:
        return self._photon_number

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        parts = ", ".join(f"{amp:.4g} {basis}" for basis, amp in sorted(self._terms.items()))
        return f"StateVector({parts})"

    def occupied_modes(self) -> set[PhotonMode]:
        out: set[PhotonMode] = set()
        for basis in self._terms:
            out.update(basis.modes())
        return out

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._terms.values()))

    def amplitude(self, basis: BasisState) -> complex:
        return self._terms.get(basis, 0.0 + 0.0j)

    def map_modes(self, relabel) -> "StateVector":
        """Apply a mode permutation basis-state by basis-state.

        ``relabel`` maps PhotonMode -> PhotonMode and must be injective on
        the occupied modes of every term.
        """
        new_terms: dict[BasisState, complex] = {}
        for basis, amp in self._terms.items():
            occupancy = [(relabel(mode), count) for mode, count in basis]
            targets = [m for m, _ in occupancy]
            if len(set(targets)) != len(targets):
                raise ModeCollisionError("relabeling maps two modes onto one")
            new_basis = BasisState(occupancy)
            new_terms[new_basis] = new_terms.get(new_basis, 0.0) + amp
        return StateVector(new_terms)


def single_term(modes: Iterable[PhotonMode], amplitude: complex = 1.0) -> StateVector:
    return StateVector({BasisState.from_modes(modes): amplitude})


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Product state of two factors on disjoint mode sets."""
    if a.occupied_modes() & b.occupied_modes():
        raise ModeCollisionError("mode collision: tensor factors share occupied modes")
    out: dict[BasisState, complex] = {}
    for basis_a, amp_a in a.terms.items():
        for basis_b, amp_b in b.terms.items():
            merged = BasisState(tuple(basis_a) + tuple(basis_b))
            # Disjointness keeps every count at 1 or 2 within one factor, so no
            # cross-factor bosonic factors can appear; assert the invariant.
            assert merged.photon_number == a.photon_number + b.photon_number
            out[merged] = out.get(merged, 0.0) + amp_a * amp_b
    return StateVector(out)


def _check_unitary(matrix: np.ndarray) -> None:
    k = matrix.shape[0]
    if matrix.shape != (k, k):
        raise ValueError("matrix must be square")
    if not np.allclose(matrix.conj().T @ matrix, np.eye(k), atol=TOL.unitarity):
        raise ValueError("matrix is not unitary")


def apply_mode_unitary(
    state: StateVector, modes: Sequence[PhotonMode], matrix: np.ndarray
) -> StateVector:
    """Rewrite creation operators on ``modes`` through a unitary matrix.

    Column i of ``matrix`` gives the image of modes[i]:
    a†(modes[i]) -> sum_j matrix[j, i] a†(modes[j]).  Bosonic sqrt(n!)
    factors for doubly occupied modes are handled exactly.
    """
    matrix = np.asarray(matrix, dtype=complex)
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate modes in unitary application")
    if matrix.shape != (len(modes), len(modes)):
        raise ValueError("matrix shape does not match mode list")
    _check_unitary(matrix)
    index = {mode: i for i, mode in enumerate(modes)}

    out: dict[BasisState, complex] = {}
    for basis, amp in state.terms.items():
        untouched: list[tuple[PhotonMode, int]] = []
        touched: list[tuple[int, int]] = []  # (column index, count)
        for mode, count in basis:
            if mode in index:
                touched.append((index[mode], count))
            else:
                untouched.append((mode, count))
        if not touched:
            out[basis] = out.get(basis, 0.0) + amp
            continue

        # Expand the polynomial of substituted creation operators, one photon
        # at a time; monomials are sorted index tuples (operators commute).
        denom = 1.0
        for _, count in touched:
            denom *= _SQRT_FACT[count]
        poly: dict[tuple[int, ...], complex] = {(): amp / denom}
        for col, count in touched:
            for _ in range(count):
                nxt: dict[tuple[int, ...], complex] = {}
                for mono, coeff in poly.items():
                    for j in range(len(modes)):
                        w = matrix[j, col]
                        if w == 0:
                            continue
                        key = tuple(sorted(mono + (j,)))
                        nxt[key] = nxt.get(key, 0.0) + coeff * w
                poly = nxt

        for mono, coeff in poly.items():
            counts: dict[int, int] = {}
            for j in mono:
                counts[j] = counts.get(j, 0) + 1
            boson = 1.0
            for c in counts.values():
                if c > len(_SQRT_FACT) - 1:
                    from .modes import OccupancyError

                    raise OccupancyError(
                        f"unitary drives occupancy to {c} (cap 2); "
                        "circuit construction is inconsistent"
                    )
                boson *= _SQRT_FACT[c]
            occupancy = untouched + [(modes[j], c) for j, c in counts.items()]
            new_basis = BasisState(occupancy)
            out[new_basis] = out.get(new_basis, 0.0) + coeff * boson

    return StateVector(out)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """Sesquilinear <a|b> over canonical basis states."""
    if a.photon_number != b.photon_number:
        raise PhotonNumberMismatchError(
            f"photon numbers differ: {a.photon_number} vs {b.photon_number}"
        )
    small, large = (a.terms, b.terms) if len(a) <= len(b) else (b.terms, a.terms)
    total = 0.0 + 0.0j
    for basis, amp in small.items():
        other = large.get(basis)
        if other is not None:
            if small is a.terms:
                total += amp.conjugate() * other
            else:
                total += other.conjugate() * amp
    return total


def normalize(state: StateVector) -> tuple[StateVector, float]:
    """Scale to unit norm; also return the pre-normalization norm."""
    norm = state.norm()
    if norm == 0.0:
        raise NullStateError("null state cannot be normalized")
    scaled = {basis: amp / norm for basis, amp in state.terms.items()}
    return StateVector(scaled, prune=False), norm


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for unit-norm inputs."""
    return abs(inner_product(a, b)) ** 2
