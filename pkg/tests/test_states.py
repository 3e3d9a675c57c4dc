"""Sparse state-vector engine: tensor products, mode unitaries, inner products."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timefuse.modes import (
    BasisState,
    ModeCollisionError,
    OccupancyError,
    PhotonMode,
    Polarization,
    SpatialPort,
)
from timefuse.states import (
    NullStateError,
    PhotonNumberMismatchError,
    StateVector,
    apply_mode_unitary,
    inner_product,
    normalize,
    single_term,
    tensor,
)
from timefuse.fusion import PHI_PLUS, make_pair

SQRT_HALF = 1.0 / math.sqrt(2.0)
H, V = Polarization.H, Polarization.V
P1, P2, P1P, P2P = (
    SpatialPort.PORT1,
    SpatialPort.PORT2,
    SpatialPort.PORT1_PRIME,
    SpatialPort.PORT2_PRIME,
)


def mode(port, slot=0, pol=H, env=0):
    return PhotonMode(port, slot, pol, env)


def ghz4(ports_slots, amplitude=SQRT_HALF):
    terms = {}
    for pol in (H, V):
        basis = BasisState.from_modes([PhotonMode(p, s, pol) for p, s in ports_slots])
        terms[basis] = amplitude
    return StateVector(terms)


class TestBasisState:
    def test_canonical_ordering_is_insertion_independent(self):
        modes = [mode(P1, 3, V), mode(P2, 0, H), mode(P1P, 1, H, env=1)]
        for perm in itertools.permutations(modes):
            assert BasisState.from_modes(perm) == BasisState.from_modes(modes)

    def test_duplicate_modes_merge_into_counts(self):
        b = BasisState([(mode(P1), 1), (mode(P1), 1)])
        assert b.occupancy() == {mode(P1): 2}
        assert b.photon_number == 2

    def test_occupancy_cap(self):
        with pytest.raises(OccupancyError):
            BasisState([(mode(P1), 3)])


class TestTensor:
    def test_two_pair_product_has_four_half_amplitudes(self):
        # (|hh> + |vv>)(|hh> + |vv>) / 2: four terms, prefactor one half
        a = make_pair(PHI_PLUS, P1, P2, 0)
        b = make_pair(PHI_PLUS, P1P, P2P, 0)
        product = tensor(a, b)
        assert len(product.terms) == 4
        for amp in product.terms.values():
            assert amp == pytest.approx(0.5, abs=1e-12)

    def test_single_term_product(self):
        a = single_term([mode(P1)], 0.3j)
        b = single_term([mode(P2)], 0.5)
        product = tensor(a, b)
        assert len(product) == 1
        assert list(product.terms.values())[0] == pytest.approx(0.15j)

    def test_three_pair_product_matches_enumeration_oracle(self):
        # brute-force oracle: all polarization assignments, amplitude (1/sqrt2)^3
        pairs = [
            make_pair(PHI_PLUS, P1, P2, slot) for slot in (0, 1, 2)
        ]
        product = tensor(tensor(pairs[0], pairs[1]), pairs[2])
        expected = {}
        for pols in itertools.product((H, V), repeat=3):
            modes = []
            for slot, pol in enumerate(pols):
                modes.append(PhotonMode(P1, slot, pol))
                modes.append(PhotonMode(P2, slot, pol))
            expected[BasisState.from_modes(modes)] = SQRT_HALF**3
        assert set(product.terms) == set(expected)
        for basis, amp in expected.items():
            assert product.terms[basis] == pytest.approx(amp, abs=1e-15)

    def test_mode_collision_rejected(self):
        a = single_term([mode(P1)])
        b = single_term([mode(P1)])
        with pytest.raises(ModeCollisionError, match="collision"):
            tensor(a, b)


class TestApplyModeUnitary:
    def test_identity_leaves_state_unchanged(self):
        state = make_pair(PHI_PLUS, P1, P2, 0)
        out = apply_mode_unitary(state, [mode(P1), mode(P1, 0, V)], np.eye(2))
        assert out.terms == state.terms

    def test_swap_moves_photon(self):
        state = single_term([mode(P1)])
        swap = np.array([[0, 1], [1, 0]])
        out = apply_mode_unitary(state, [mode(P1), mode(P2)], swap)
        assert out.terms == {BasisState.from_modes([mode(P2)]): 1.0 + 0.0j}

    def test_balanced_mixer_squares_to_identity(self):
        # matrix-product oracle: this 50/50 mixer squared is exactly identity
        mixer = np.array([[1, 1], [1, -1]]) / math.sqrt(2.0)
        assert np.allclose(mixer @ mixer, np.eye(2), atol=1e-12)
        state = single_term([mode(P1)])
        once = apply_mode_unitary(state, [mode(P1), mode(P2)], mixer)
        twice = apply_mode_unitary(once, [mode(P1), mode(P2)], mixer)
        assert abs(inner_product(twice, state)) == pytest.approx(1.0, abs=1e-12)

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError, match="unitary"):
            apply_mode_unitary(single_term([mode(P1)]), [mode(P1), mode(P2)], np.ones((2, 2)))

    def test_duplicate_modes_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            apply_mode_unitary(single_term([mode(P1)]), [mode(P1), mode(P1)], np.eye(2))

    def test_bunched_mode_gets_sqrt2_factor(self):
        # two photons entering a balanced mixer from one mode: amplitudes of
        # |2,0>, |1,1>, |0,2> must follow the bosonic sqrt(n!) weights
        state = StateVector({BasisState([(mode(P1), 2)]): 1.0})
        mixer = np.array([[1, 1], [1, -1]]) / math.sqrt(2.0)
        out = apply_mode_unitary(state, [mode(P1), mode(P2)], mixer)
        amp20 = out.terms[BasisState([(mode(P1), 2)])]
        amp11 = out.terms[BasisState.from_modes([mode(P1), mode(P2)])]
        amp02 = out.terms[BasisState([(mode(P2), 2)])]
        assert amp20 == pytest.approx(0.5, abs=1e-12)
        assert amp02 == pytest.approx(0.5, abs=1e-12)
        assert abs(amp11) == pytest.approx(SQRT_HALF, abs=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)


class TestInnerProduct:
    def test_normalized_pair_has_unit_overlap(self):
        pair = make_pair(PHI_PLUS, P1, P2, 0)
        assert inner_product(pair, pair) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_basis_terms(self):
        layout = [(P1, 0), (P2, 0), (P1P, 0), (P2P, 0)]
        all_h = single_term([PhotonMode(p, s, H) for p, s in layout])
        all_v = single_term([PhotonMode(p, s, V) for p, s in layout])
        assert inner_product(all_h, all_v) == 0

    def test_ghz_overlap_with_hhhh_is_inverse_sqrt2(self):
        layout = [(P1, 0), (P2, 0), (P1P, 0), (P2P, 0)]
        ghz = ghz4(layout)
        all_h = single_term([PhotonMode(p, s, H) for p, s in layout])
        assert inner_product(ghz, all_h) == pytest.approx(SQRT_HALF, abs=1e-12)

    def test_photon_number_mismatch_rejected(self):
        with pytest.raises(PhotonNumberMismatchError):
            inner_product(single_term([mode(P1)]), make_pair(PHI_PLUS, P1, P2, 0))


class TestNormalize:
    def test_single_amplitude_half(self):
        state = single_term([mode(P1)], 0.5)
        unit, norm = normalize(state)
        assert norm == pytest.approx(0.5)
        assert list(unit.terms.values())[0] == pytest.approx(1.0)

    def test_postselected_pair_product_norm(self):
        # two surviving amplitudes of 1/2 each: norm^2 = 1/2, via the
        # direct sum-of-squares oracle
        layout = [(P1, 0), (P2, 0), (P1P, 0), (P2P, 0)]
        survivors = ghz4(layout, amplitude=0.5)
        oracle_norm_sq = sum(abs(a) ** 2 for a in survivors.terms.values())
        assert oracle_norm_sq == pytest.approx(0.5, abs=1e-12)
        _, norm = normalize(survivors)
        assert norm**2 == pytest.approx(oracle_norm_sq, abs=1e-15)

    def test_already_normalized_state(self):
        pair = make_pair(PHI_PLUS, P1, P2, 0)
        unit, norm = normalize(pair)
        assert norm == pytest.approx(1.0, abs=1e-12)
        assert unit.terms.keys() == pair.terms.keys()

    def test_zero_state_rejected(self):
        with pytest.raises(NullStateError):
            StateVector({})


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_three_photon_state(rng: np.random.Generator, inside, outside) -> StateVector:
    """Three photons with at most two inside the transformed mode set, so the
    two-photon occupancy cap can never be exceeded."""
    terms = {}
    for _ in range(4):
        k = rng.integers(0, 3)  # photons inside the unitary's modes
        ins = list(rng.choice(len(inside), size=k, replace=True))
        outs = list(rng.choice(len(outside), size=3 - k, replace=False))
        occupancy = [(inside[i], 1) for i in ins] + [(outside[j], 1) for j in outs]
        basis = BasisState(occupancy)
        amp = complex(rng.normal(), rng.normal())
        terms[basis] = terms.get(basis, 0) + amp
    return StateVector(terms, prune=False)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unitarity_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    inside = [mode(P1, s) for s in range(4)]
    outside = [mode(P2, s) for s in range(4)]
    state = random_three_photon_state(rng, inside, outside)
    matrix = random_unitary(rng, 4)
    out = apply_mode_unitary(state, inside, matrix)
    assert out.norm() == pytest.approx(state.norm(), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_inner_product_compatibility(seed):
    # <a (x) b | c (x) d> = <a|c><b|d> on disjoint mode sets
    rng = np.random.default_rng(seed)
    left = [mode(P1, s) for s in range(3)]
    right = [mode(P2, s) for s in range(3)]

    def rand_state(modes):
        terms = {}
        for m in modes:
            terms[BasisState.from_modes([m])] = complex(rng.normal(), rng.normal())
        return normalize(StateVector(terms, prune=False))[0]

    a, c = rand_state(left), rand_state(left)
    b, d = rand_state(right), rand_state(right)
    lhs = inner_product(tensor(a, b), tensor(c, d))
    rhs = inner_product(a, c) * inner_product(b, d)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_envelope_orthogonality():
    base = [mode(P1, 0), mode(P2, 0)]
    shifted = [mode(P1, 0), PhotonMode(P2, 0, H, envelope=1)]
    assert inner_product(single_term(base), single_term(shifted)) == 0


def test_term_insertion_order_gives_identical_maps():
    modes = [mode(P1, s, pol) for s in range(2) for pol in (H, V)]
    entries = [(BasisState.from_modes([m]), 0.5) for m in modes]
    forward = StateVector(dict(entries))
    backward = StateVector(dict(reversed(entries)))
    assert list(forward.terms) != [] and forward.terms == backward.terms
