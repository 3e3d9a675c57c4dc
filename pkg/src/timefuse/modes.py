"""Optical mode labels and bosonic occupancy basis states.

A photon mode is the tuple (spatial port, time slot, polarization, envelope).
Ports 1' and 2' sit before the fusion PBS, ports 1 and 2 after it.  Time
slots count pump pulses; the delay line shifts a photon by a whole number of
slots.  Envelope indices label mutually orthogonal temporal wave packets and
are used to model partial distinguishability (index 0 is the reference
packet).
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, NamedTuple


class SpatialPort(IntEnum):
    PORT1 = 0
    PORT2 = 1
    PORT1_PRIME = 2
    PORT2_PRIME = 3

    def __str__(self) -> str:
        return {0: "1", 1: "2", 2: "1'", 3: "2'"}[int(self)]


class Polarization(IntEnum):
    H = 0
    V = 1

    def __str__(self) -> str:
        return "hv"[int(self)]


class PhotonMode(NamedTuple):
    """One bosonic mode; total ordering comes from the tuple fields."""

    spatial: SpatialPort
    time_slot: int
    polarization: Polarization
    envelope: int = 0

    def __str__(self) -> str:
        env = f"~{self.envelope}" if self.envelope else ""
        return f"{self.polarization}@({self.spatial},{self.time_slot}){env}"


# Bunching beyond two photons per mode never occurs in the fusion circuits
# this engine is built for; exceeding the cap is treated as a wiring bug.
MAX_OCCUPANCY = 2


class ModeCollisionError(ValueError):
    pass


class OccupancyError(ValueError):
    pass


class BasisState(tuple):
    """Canonical sorted tuple of (PhotonMode, count) pairs, counts in 1..2.

    Equal physical occupancies always compare equal bit-for-bit because the
    constructor sorts modes and merges duplicates.
    """

    __slots__ = ()

    def __new__(cls, occupancy: Iterable[tuple[PhotonMode, int]]) -> "BasisState":
        merged: dict[PhotonMode, int] = {}
        for mode, count in occupancy:
            if count == 0:
                continue
            if count < 0:
                raise OccupancyError(f"negative count for {mode}")
            merged[mode] = merged.get(mode, 0) + count
        for mode, count in merged.items():
            if count > MAX_OCCUPANCY:
                raise OccupancyError(
                    f"mode {mode} occupied {count} times (cap {MAX_OCCUPANCY})"
                )
        return super().__new__(cls, sorted(merged.items()))

    @classmethod
    def from_modes(cls, modes: Iterable[PhotonMode]) -> "BasisState":
        return cls((m, 1) for m in modes)

    @property
    def photon_number(self) -> int:
        return sum(count for _, count in self)

    def occupancy(self) -> dict[PhotonMode, int]:
        return dict(self)

    def modes(self) -> tuple[PhotonMode, ...]:
        """Occupied modes, each listed once regardless of count."""
        return tuple(mode for mode, _ in self)

    def __str__(self) -> str:
        return "|" + " ".join(
            str(mode) if count == 1 else f"{count}x{mode}" for mode, count in self
        ) + ">"
