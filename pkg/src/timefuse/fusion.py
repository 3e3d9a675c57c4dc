"""Chained PBS fusion of sequential photon pairs.

The source emits one entangled pair per generation slot: the right photon
flies straight to the fusion PBS (input port 1'), the left photon passes a
delay line of ``delay_slots`` pulse periods and reaches the other PBS input
(port 2') exactly when the next pair's right photon arrives.  Post-selecting
one photon at each PBS output per fusion slot projects the pairs onto a
growing entangled state.

Partial distinguishability between the two photons meeting at the PBS is
modeled by writing the delayed photon's wave packet as
``s * (reference envelope) + sqrt(1 - s^2) * (orthogonal envelope)``;
outcome probabilities then sum over the orthogonal envelope sectors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .modes import PhotonMode, Polarization, SpatialPort
from .states import StateVector, normalize, single_term, tensor
from .elements import delay, hwp, pbs
from .states import apply_mode_unitary

FUSION_HWP_DEG = 22.5
DEFAULT_DELAY_SLOTS = 8
DEFAULT_MAX_PAIRS = 5


@dataclass(frozen=True)
class PairKind:
    """Bell-pair family: 'phi' = hh + e^{i phase} vv, 'psi' = hv + e^{i phase} vh."""

    bell: str
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.bell not in ("phi", "psi"):
            raise ValueError(f"unknown Bell family {self.bell!r}")


PHI_PLUS = PairKind("phi", 0.0)
PSI_PLUS = PairKind("psi", 0.0)


def phi_with_phase(phase: float) -> PairKind:
    return PairKind("phi", phase)


PHI_I = phi_with_phase(math.pi / 2.0)


@dataclass(frozen=True)
class OverlapModel:
    """Envelope overlap s between the two photons meeting at the PBS.

    s is the modulus of the inner product of their temporal wave packets:
    1 = indistinguishable, 0 = fully orthogonal.
    """

    s: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"overlap must lie in [0, 1], got {self.s}")

    @classmethod
    def from_delay(cls, delta: float, sigma: float) -> "OverlapModel":
        """Gaussian wave packets offset by delta: s = exp(-delta^2 / (2 sigma^2))."""
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        return cls(math.exp(-(delta**2) / (2.0 * sigma**2)))


PERFECT_OVERLAP = OverlapModel(1.0)


@dataclass(frozen=True)
class FusionResult:
    """Post-selected state plus bookkeeping.

    ``mode_layout`` lists the (port, slot) each surviving photon occupies, in
    detection order (slot ascending; at a fusion slot, output port 2 precedes
    port 1, matching the pair-creation order of the photons).
    """

    state: StateVector | None
    success_probability: float
    n_photons: int
    mode_layout: tuple[tuple[SpatialPort, int], ...]

    @property
    def is_null(self) -> bool:
        return self.state is None


_LAYOUT_PORT_RANK = {
    SpatialPort.PORT1_PRIME: 0,
    SpatialPort.PORT2: 1,
    SpatialPort.PORT1: 2,
    SpatialPort.PORT2_PRIME: 3,
}


def layout_sorted(groups: set[tuple[SpatialPort, int]]) -> tuple[tuple[SpatialPort, int], ...]:
    return tuple(sorted(groups, key=lambda g: (g[1], _LAYOUT_PORT_RANK[g[0]])))


def make_pair(
    kind: PairKind,
    right_port: SpatialPort,
    left_port: SpatialPort,
    slot: int,
    envelope: int = 0,
) -> StateVector:
    """Two-photon Bell state with the right/left photons at the given ports."""
    if right_port == left_port:
        raise ValueError("pair photons need distinct ports")
    amp = 1.0 / math.sqrt(2.0)
    rel = amp * complex(math.cos(kind.phase), math.sin(kind.phase))

    def mode(port: SpatialPort, pol: Polarization) -> PhotonMode:
        return PhotonMode(port, slot, pol, envelope)

    h, v = Polarization.H, Polarization.V
    if kind.bell == "phi":
        first = single_term([mode(right_port, h), mode(left_port, h)], amp)
        second = single_term([mode(right_port, v), mode(left_port, v)], rel)
    else:
        first = single_term([mode(right_port, h), mode(left_port, v)], amp)
        second = single_term([mode(right_port, v), mode(left_port, h)], rel)
    merged = dict(first.terms)
    merged.update(second.terms)
    return StateVector(merged)


def postselect_one_per_port(
    state: StateVector, ports_slots: list[tuple[SpatialPort, int]]
) -> FusionResult:
    """Keep only terms with exactly one photon in each listed (port, slot).

    The photon count of a (port, slot) sums over polarization and envelope.
    Returns a null result (success 0) when nothing survives; some
    configurations legitimately never post-select.
    """
    wanted = set(ports_slots)
    total = 0.0
    kept: dict = {}
    for basis, amp in state.terms.items():
        weight = abs(amp) ** 2
        total += weight
        counts: dict[tuple[SpatialPort, int], int] = {}
        for m, c in basis:
            key = (m.spatial, m.time_slot)
            if key in wanted:
                counts[key] = counts.get(key, 0) + c
        if all(counts.get(key, 0) == 1 for key in wanted):
            kept[basis] = amp
    if total == 0.0:
        raise ValueError("cannot post-select a zero state")
    if not kept:
        return FusionResult(None, 0.0, 0, tuple(ports_slots))
    surviving = StateVector(kept, prune=False)
    success = sum(abs(a) ** 2 for a in kept.values()) / total
    normalized, _ = normalize(surviving)
    groups = {(m.spatial, m.time_slot) for m in normalized.occupied_modes()}
    return FusionResult(
        normalized, success, normalized.photon_number, layout_sorted(groups)
    )


def _mix_envelope(
    state: StateVector, port: SpatialPort, slot: int, s: float
) -> StateVector:
    """Rotate the reference envelope at (port, slot) into (s, sqrt(1-s^2))."""
    if s == 1.0:
        return state
    t = math.sqrt(max(0.0, 1.0 - s * s))
    mix = np.array([[s, -t], [t, s]], dtype=complex)
    for pol in (Polarization.H, Polarization.V):
        modes = [PhotonMode(port, slot, pol, 0), PhotonMode(port, slot, pol, 1)]
        state = apply_mode_unitary(state, modes, mix)
    return state


def _delayed_pair(
    kind: PairKind, creation_slot: int, delay_slots: int, s: float
) -> StateVector:
    """One pair with its left photon already through the delay line."""
    pair = make_pair(kind, SpatialPort.PORT1_PRIME, SpatialPort.PORT2_PRIME, creation_slot)
    pair = delay(pair, SpatialPort.PORT2_PRIME, delay_slots)
    return _mix_envelope(pair, SpatialPort.PORT2_PRIME, creation_slot + delay_slots, s)


def grow_chain(
    n_pairs: int,
    kind: PairKind = PHI_PLUS,
    overlap: OverlapModel = PERFECT_OVERLAP,
    hwp_before_pbs: bool = False,
    delay_slots: int = DEFAULT_DELAY_SLOTS,
    max_pairs: int = DEFAULT_MAX_PAIRS,
    postselect_each_fusion: bool = True,
) -> FusionResult:
    """Fuse ``n_pairs`` sequential pairs into one entangled state.

    Pair k is created at slot (k-1) * delay_slots; its delayed left photon
    meets the right photon of pair k+1 at the PBS at slot k * delay_slots.
    With ``hwp_before_pbs`` every photon passes a 22.5-degree half-wave plate
    in the PBS input arms.  Post-selection is applied after each fusion by
    default (equivalent to post-selecting once at the end, but it keeps the
    sparse state tiny); the flag exists so tests can check the equivalence.
    """
    if n_pairs < 2:
        raise ValueError("need at least two pairs to fuse")
    if n_pairs > max_pairs:
        raise ValueError(f"n_pairs {n_pairs} exceeds configured maximum {max_pairs}")

    step = delay_slots
    one_prime = SpatialPort.PORT1_PRIME
    two_prime = SpatialPort.PORT2_PRIME

    state = _delayed_pair(kind, 0, step, overlap.s)
    if hwp_before_pbs:
        state = hwp(state, one_prime, 0, FUSION_HWP_DEG)

    success = 1.0
    pending: list[tuple[SpatialPort, int]] = []
    for k in range(2, n_pairs + 1):
        creation = (k - 1) * step
        state = tensor(state, _delayed_pair(kind, creation, step, overlap.s))
        fusion_slot = creation
        if hwp_before_pbs:
            state = hwp(state, one_prime, fusion_slot, FUSION_HWP_DEG)
            state = hwp(state, two_prime, fusion_slot, FUSION_HWP_DEG)
        state = pbs(state, one_prime, two_prime, SpatialPort.PORT1, SpatialPort.PORT2, fusion_slot)
        outputs = [(SpatialPort.PORT1, fusion_slot), (SpatialPort.PORT2, fusion_slot)]
        if postselect_each_fusion:
            result = postselect_one_per_port(state, outputs)
            if result.is_null:
                return FusionResult(None, 0.0, 0, result.mode_layout)
            success *= result.success_probability
            state = result.state
        else:
            pending.extend(outputs)

    if hwp_before_pbs:
        state = hwp(state, two_prime, n_pairs * step, FUSION_HWP_DEG)

    if not postselect_each_fusion:
        result = postselect_one_per_port(state, pending)
        if result.is_null:
            return FusionResult(None, 0.0, 0, result.mode_layout)
        success = result.success_probability
        state = result.state

    layout = [(one_prime, 0)]
    for j in range(1, n_pairs):
        layout.append((SpatialPort.PORT2, j * step))
        layout.append((SpatialPort.PORT1, j * step))
    layout.append((two_prime, n_pairs * step))
    return FusionResult(state, success, 2 * n_pairs, tuple(layout))


def parity_amplitude_groups(n_photons: int) -> tuple[set[str], set[str]]:
    """Split the 2^n outcome strings by parity of the 'v' count.

    Strings use the abstract letters 'h'/'v'; rotated-basis letters map onto
    them positionally (P/R -> h, M/L -> v).
    """
    if n_photons < 2 or n_photons % 2:
        raise ValueError("need an even photon number >= 2")
    even: set[str] = set()
    odd: set[str] = set()
    for bits in itertools.product("hv", repeat=n_photons):
        word = "".join(bits)
        (odd if word.count("v") % 2 else even).add(word)
    return even, odd


@dataclass(frozen=True)
class ChainSpec:
    """Everything needed to rebuild one fusion chain."""

    n_pairs: int = 2
    kind: PairKind = PHI_PLUS
    hwp_before_pbs: bool = False
    delay_slots: int = DEFAULT_DELAY_SLOTS
    max_pairs: int = DEFAULT_MAX_PAIRS

    def build(self, overlap: OverlapModel = PERFECT_OVERLAP) -> FusionResult:
        return grow_chain(
            self.n_pairs,
            self.kind,
            overlap,
            self.hwp_before_pbs,
            self.delay_slots,
            self.max_pairs,
        )


def rotated_chain(n_pairs: int = 2, delay_slots: int = DEFAULT_DELAY_SLOTS) -> ChainSpec:
    """The rotated configuration used for the parity-interference scans:
    90-degree pair phase plus 22.5-degree half-wave plates before the PBS."""
    return ChainSpec(n_pairs, PHI_I, True, delay_slots)
