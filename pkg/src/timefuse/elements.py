"""Linear-optical elements as mode maps: PBS, wave plates, phase, delay.

Conventions (fixed so every example in the test suite is bit-reproducible):

* The PBS is a pure mode permutation, no reflection phase: h transmits
  (port_a -> out_a, port_b -> out_b) and v reflects (port_a -> out_b,
  port_b -> out_a).  Pair-preparation phases absorb the physical phase.
* HWP(theta) has the real Jones matrix [[cos 2t, sin 2t], [sin 2t, -cos 2t]].
* QWP(theta) is diag(1, i) conjugated by the rotation R(theta).
* The circular-basis analyzer is HWP(22.5) followed by QWP(45); under these
  matrices it sends (|h> - i|v>)/sqrt(2) to the H detector, which defines the
  R label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .modes import PhotonMode, Polarization, SpatialPort
from .states import StateVector, apply_mode_unitary


class ElementKind(Enum):
    PBS = "pbs"
    HWP = "hwp"
    QWP = "qwp"
    PHASE_SHIFT = "phase_shift"
    DELAY = "delay"


class Basis(Enum):
    HV = "HV"
    PM = "PM"
    RL = "RL"

    @property
    def letters(self) -> str:
        return self.value


@dataclass(frozen=True)
class ElementDescriptor:
    """One element instance: what it is, its parameter, and where it acts.

    Wave plates, phase shifters, and delays address a single (port, slot);
    a PBS addresses two input ports and two outputs at one slot.
    """

    kind: ElementKind
    port: SpatialPort
    slot: int
    angle_deg: float = 0.0      # wave plates
    phase_rad: float = 0.0      # phase shifter
    slot_shift: int = 0         # delay
    port_b: SpatialPort | None = None   # PBS second input
    out_a: SpatialPort | None = None    # PBS outputs
    out_b: SpatialPort | None = None

    def __post_init__(self) -> None:
        if self.kind in (ElementKind.HWP, ElementKind.QWP):
            _check_unitary_jones(jones_matrix(self))
        if self.kind is ElementKind.DELAY and self.slot_shift < 1:
            raise ValueError("delay must shift time forward by at least one slot")
        if self.kind is ElementKind.PBS and None in (self.port_b, self.out_a, self.out_b):
            raise ValueError("PBS descriptor needs port_b, out_a, and out_b")


def _check_unitary_jones(m: np.ndarray) -> None:
    if not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12):
        raise ValueError("wave-plate matrix is not unitary")


def hwp_matrix(angle_deg: float) -> np.ndarray:
    t = 2.0 * math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_matrix(angle_deg: float) -> np.ndarray:
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    rot = np.array([[c, -s], [s, c]], dtype=complex)
    return rot @ np.diag([1.0, 1.0j]) @ rot.conj().T


def phase_matrix(phase_rad: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1.0j * phase_rad)])


def jones_matrix(element: ElementDescriptor) -> np.ndarray:
    if element.kind is ElementKind.HWP:
        return hwp_matrix(element.angle_deg)
    if element.kind is ElementKind.QWP:
        return qwp_matrix(element.angle_deg)
    if element.kind is ElementKind.PHASE_SHIFT:
        return phase_matrix(element.phase_rad)
    raise ValueError(f"{element.kind} has no Jones matrix")


def _pol_modes(port: SpatialPort, slot: int, envelope: int) -> list[PhotonMode]:
    return [
        PhotonMode(port, slot, Polarization.H, envelope),
        PhotonMode(port, slot, Polarization.V, envelope),
    ]


def _envelopes_at(state: StateVector, port: SpatialPort, slot: int) -> set[int]:
    return {
        m.envelope
        for m in state.occupied_modes()
        if m.spatial == port and m.time_slot == slot
    }


def apply_jones(
    state: StateVector, port: SpatialPort, slot: int, matrix: np.ndarray
) -> StateVector:
    """Apply a 2x2 polarization matrix at one (port, slot), per envelope."""
    for env in sorted(_envelopes_at(state, port, slot)):
        state = apply_mode_unitary(state, _pol_modes(port, slot, env), matrix)
    return state


def hwp(state: StateVector, port: SpatialPort, slot: int, angle_deg: float) -> StateVector:
    return apply_jones(state, port, slot, hwp_matrix(angle_deg))


def qwp(state: StateVector, port: SpatialPort, slot: int, angle_deg: float) -> StateVector:
    return apply_jones(state, port, slot, qwp_matrix(angle_deg))


def phase_shift(state: StateVector, port: SpatialPort, slot: int, phase_rad: float) -> StateVector:
    return apply_jones(state, port, slot, phase_matrix(phase_rad))


def pbs(
    state: StateVector,
    port_a: SpatialPort,
    port_b: SpatialPort,
    out_a: SpatialPort,
    out_b: SpatialPort,
    slot: int,
) -> StateVector:
    """Polarizing beam splitter at one time slot: h transmits, v reflects."""
    ports = (port_a, port_b, out_a, out_b)
    if len(set(ports)) != 4 and not (port_a != port_b and out_a != out_b):
        raise ValueError("PBS ports must be pairwise usable")
    if port_a == port_b or out_a == out_b:
        raise ValueError("PBS input (and output) ports must be distinct")

    routing = {
        (port_a, Polarization.H): out_a,
        (port_b, Polarization.H): out_b,
        (port_a, Polarization.V): out_b,
        (port_b, Polarization.V): out_a,
    }

    def relabel(mode: PhotonMode) -> PhotonMode:
        if mode.time_slot != slot:
            return mode
        target = routing.get((mode.spatial, mode.polarization))
        if target is None:
            return mode
        return PhotonMode(target, slot, mode.polarization, mode.envelope)

    return state.map_modes(relabel)


def delay(state: StateVector, port: SpatialPort, slot_shift: int) -> StateVector:
    """Shift every photon in a port forward in time; lossless relabeling."""
    if slot_shift < 1:
        raise ValueError("delay must shift time forward by at least one slot")

    def relabel(mode: PhotonMode) -> PhotonMode:
        if mode.spatial != port:
            return mode
        return PhotonMode(port, mode.time_slot + slot_shift, mode.polarization, mode.envelope)

    return state.map_modes(relabel)


def analyzer_basis(basis: Basis, port: SpatialPort, slot: int) -> list[ElementDescriptor]:
    """Wave plates that map the requested basis onto HV detection.

    Elements are listed in application order.  For RL the half-wave plate
    must precede the quarter-wave plate under the Jones conventions above
    (QWP first would land the circular states on the PM axes instead).
    """
    if basis is Basis.HV:
        return []
    if basis is Basis.PM:
        return [ElementDescriptor(ElementKind.HWP, port, slot, angle_deg=22.5)]
    if basis is Basis.RL:
        return [
            ElementDescriptor(ElementKind.HWP, port, slot, angle_deg=22.5),
            ElementDescriptor(ElementKind.QWP, port, slot, angle_deg=45.0),
        ]
    raise ValueError(f"unknown basis {basis!r}")


def apply_elements(state: StateVector, elements: list[ElementDescriptor]) -> StateVector:
    for el in elements:
        if el.kind is ElementKind.DELAY:
            state = delay(state, el.port, el.slot_shift)
        elif el.kind is ElementKind.PBS:
            state = pbs(state, el.port, el.port_b, el.out_a, el.out_b, el.slot)
        else:
            state = apply_jones(state, el.port, el.slot, jones_matrix(el))
    return state
