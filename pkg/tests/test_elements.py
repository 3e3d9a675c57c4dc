"""Optical elements: PBS routing, wave plates, delay, analyzer prescriptions."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timefuse.elements import (
    Basis,
    ElementDescriptor,
    ElementKind,
    analyzer_basis,
    apply_elements,
    apply_jones,
    delay,
    hwp,
    hwp_matrix,
    pbs,
    qwp,
    qwp_matrix,
)
from timefuse.fusion import PHI_PLUS, make_pair
from timefuse.modes import BasisState, PhotonMode, Polarization, SpatialPort
from timefuse.states import inner_product, single_term, tensor

H, V = Polarization.H, Polarization.V
P1, P2, P1P, P2P = (
    SpatialPort.PORT1,
    SpatialPort.PORT2,
    SpatialPort.PORT1_PRIME,
    SpatialPort.PORT2_PRIME,
)
SQRT_HALF = 1.0 / math.sqrt(2.0)


def photon(port, pol, slot=0, env=0):
    return single_term([PhotonMode(port, slot, pol, env)])


def amplitude_of(state, modes):
    return state.terms.get(BasisState.from_modes(modes), 0.0)


class TestPBS:
    def test_h_transmits_v_reflects(self):
        out = pbs(photon(P1P, H), P1P, P2P, P1, P2, 0)
        assert amplitude_of(out, [PhotonMode(P1, 0, H)]) == 1.0
        out = pbs(photon(P1P, V), P1P, P2P, P1, P2, 0)
        assert amplitude_of(out, [PhotonMode(P2, 0, V)]) == 1.0

    def test_pair_product_splits_into_kept_and_bunched_terms(self):
        # combining the two inner photons of a two-pair product: the equal
        # polarization terms keep one photon per output, the cross terms
        # bunch both photons into a single output port
        pair1 = make_pair(PHI_PLUS, P1, P1P, 0)
        pair2 = make_pair(PHI_PLUS, P2P, P2, 0)
        state = pbs(tensor(pair1, pair2), P1P, P2P, P1P, P2P, 0)
        per_port_counts = []
        for basis in state.terms:
            ports = [m.spatial for m, _ in basis if m.spatial in (P1P, P2P)]
            per_port_counts.append(tuple(sorted(ports)))
        assert sorted(per_port_counts).count((P1P, P2P)) == 2
        bunched = [c for c in per_port_counts if c in ((P1P, P1P), (P2P, P2P))]
        assert len(bunched) == 2

    def test_applying_twice_is_identity(self):
        state = make_pair(PHI_PLUS, P1P, P2P, 0)
        once = pbs(state, P1P, P2P, P1P, P2P, 0)
        twice = pbs(once, P1P, P2P, P1P, P2P, 0)
        assert abs(inner_product(twice, state)) == pytest.approx(1.0, abs=1e-12)

    def test_port_collision_rejected(self):
        with pytest.raises(ValueError):
            pbs(photon(P1P, H), P1P, P1P, P1, P2, 0)


class TestWavePlates:
    def test_hwp_zero_degrees(self):
        out = hwp(photon(P1, H), P1, 0, 0.0)
        assert amplitude_of(out, [PhotonMode(P1, 0, H)]) == pytest.approx(1.0)
        out = hwp(photon(P1, V), P1, 0, 0.0)
        assert amplitude_of(out, [PhotonMode(P1, 0, V)]) == pytest.approx(-1.0)

    def test_hwp_22p5_makes_diagonal(self):
        out = hwp(photon(P1, H), P1, 0, 22.5)
        assert amplitude_of(out, [PhotonMode(P1, 0, H)]) == pytest.approx(SQRT_HALF)
        assert amplitude_of(out, [PhotonMode(P1, 0, V)]) == pytest.approx(SQRT_HALF)

    def test_hwp_45_exchanges_h_and_v(self):
        out = hwp(photon(P1, H), P1, 0, 45.0)
        assert abs(amplitude_of(out, [PhotonMode(P1, 0, V)])) == pytest.approx(1.0)

    def test_qwp_zero_fixes_h_up_to_phase(self):
        out = qwp(photon(P1, H), P1, 0, 0.0)
        assert abs(amplitude_of(out, [PhotonMode(P1, 0, H)])) == pytest.approx(1.0)

    def test_qwp_45_makes_circular(self):
        out = qwp(photon(P1, H), P1, 0, 45.0)
        a_h = amplitude_of(out, [PhotonMode(P1, 0, H)])
        a_v = amplitude_of(out, [PhotonMode(P1, 0, V)])
        assert abs(a_h) == pytest.approx(SQRT_HALF, abs=1e-12)
        assert abs(a_v) == pytest.approx(SQRT_HALF, abs=1e-12)
        assert a_v / a_h == pytest.approx(-1.0j, abs=1e-12)

    def test_qwp_then_inverse_is_identity(self):
        state = photon(P1, H)
        rotated = qwp(state, P1, 0, 45.0)
        undone = apply_jones(rotated, P1, 0, qwp_matrix(45.0).conj().T)
        assert abs(inner_product(undone, state)) == pytest.approx(1.0, abs=1e-12)

    def test_waveplate_matrices_unitary_at_any_angle(self):
        for angle in (-170.0, -30.0, 0.0, 12.3, 22.5, 45.0, 90.0, 133.7):
            for matrix in (hwp_matrix(angle), qwp_matrix(angle)):
                assert np.allclose(matrix.conj().T @ matrix, np.eye(2), atol=1e-12)

    def test_descriptor_validates_delay(self):
        with pytest.raises(ValueError):
            ElementDescriptor(ElementKind.DELAY, P1, 0, slot_shift=0)


class TestDelay:
    def test_slot_shift(self):
        out = delay(photon(P1, H), P1, 8)
        assert amplitude_of(out, [PhotonMode(P1, 8, H)]) == 1.0

    def test_additivity(self):
        once = delay(delay(photon(P1, H), P1, 8), P1, 8)
        twice = delay(photon(P1, H), P1, 16)
        assert once.terms == twice.terms

    def test_commutes_with_hwp_on_same_port(self):
        state = photon(P1, H)
        a = hwp(delay(state, P1, 8), P1, 8, 22.5)
        b = delay(hwp(state, P1, 0, 22.5), P1, 8)
        assert abs(inner_product(a, b)) == pytest.approx(1.0, abs=1e-12)

    def test_shift_must_be_forward(self):
        with pytest.raises(ValueError):
            delay(photon(P1, H), P1, 0)


class TestAnalyzerBasis:
    def test_hv_needs_no_elements(self):
        assert analyzer_basis(Basis.HV, P1, 0) == []

    def test_pm_analyzer_detects_p_deterministically(self):
        plus = hwp(photon(P1, H), P1, 0, 22.5)  # (h + v)/sqrt(2)
        analyzed = apply_elements(plus, analyzer_basis(Basis.PM, P1, 0))
        assert abs(amplitude_of(analyzed, [PhotonMode(P1, 0, H)])) == pytest.approx(1.0, abs=1e-12)

    def test_rl_analyzer_on_h_gives_balanced_statistics(self):
        analyzed = apply_elements(photon(P1, H), analyzer_basis(Basis.RL, P1, 0))
        p_h = abs(amplitude_of(analyzed, [PhotonMode(P1, 0, H)])) ** 2
        p_v = abs(amplitude_of(analyzed, [PhotonMode(P1, 0, V)])) ** 2
        assert p_h == pytest.approx(0.5, abs=1e-12)
        assert p_v == pytest.approx(0.5, abs=1e-12)

    def test_rl_analyzer_maps_circulars_to_detectors(self):
        # R = (h - i v)/sqrt(2) must fire the H detector deterministically
        r_state = {
            BasisState.from_modes([PhotonMode(P1, 0, H)]): SQRT_HALF,
            BasisState.from_modes([PhotonMode(P1, 0, V)]): -1j * SQRT_HALF,
        }
        from timefuse.states import StateVector

        analyzed = apply_elements(StateVector(r_state), analyzer_basis(Basis.RL, P1, 0))
        assert abs(amplitude_of(analyzed, [PhotonMode(P1, 0, H)])) == pytest.approx(1.0, abs=1e-12)


class TestGroupRelations:
    def test_hwp_squared_is_identity_up_to_phase(self):
        for angle in (0.0, 10.0, 22.5, 45.0):
            m = hwp_matrix(angle)
            assert np.allclose(m @ m, np.eye(2), atol=1e-12)

    def test_hwp_22p5_conjugates_hv_into_pm_projectors(self):
        m = hwp_matrix(22.5)
        proj_h = np.array([[1, 0], [0, 0]], dtype=complex)
        plus = np.array([1, 1]) / math.sqrt(2.0)
        assert np.allclose(m @ proj_h @ m.conj().T, np.outer(plus, plus), atol=1e-12)

    def test_disjoint_elements_commute(self):
        state = tensor(photon(P1, H), photon(P2, V))
        a = qwp(hwp(state, P1, 0, 22.5), P2, 0, 45.0)
        b = hwp(qwp(state, P2, 0, 45.0), P1, 0, 22.5)
        assert abs(inner_product(a, b)) == pytest.approx(1.0, abs=1e-12)

    def test_phase_shifter_acts_on_v_only(self):
        from timefuse.elements import phase_shift

        shifted = phase_shift(photon(P1, V), P1, 0, math.pi / 2)
        assert amplitude_of(shifted, [PhotonMode(P1, 0, V)]) == pytest.approx(1j, abs=1e-12)
        assert phase_shift(photon(P1, H), P1, 0, math.pi / 2).terms == photon(P1, H).terms

    def test_pbs_descriptor_is_applicable(self):
        descriptor = ElementDescriptor(
            ElementKind.PBS, P1P, 0, port_b=P2P, out_a=P1, out_b=P2
        )
        out = apply_elements(photon(P1P, V), [descriptor])
        assert amplitude_of(out, [PhotonMode(P2, 0, V)]) == 1.0
        with pytest.raises(ValueError, match="PBS"):
            ElementDescriptor(ElementKind.PBS, P1P, 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(-180, 180, allow_nan=False), st.sampled_from([Basis.HV, Basis.PM, Basis.RL]))
def test_elements_preserve_norm(angle, basis):
    state = hwp(photon(P1, H), P1, 0, angle / 2.0)
    state = apply_elements(state, analyzer_basis(basis, P1, 0))
    state = qwp(state, P1, 0, angle)
    assert state.norm() == pytest.approx(1.0, abs=1e-10)
