"""Central numeric tolerances used across the package.

Every float comparison threshold lives here so the whole simulator can be
audited (or tightened) in one place.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    prune_amplitude: float = 1e-14      # drop sparse terms below this |amplitude|
    norm: float = 1e-12                 # unit-norm checks
    unitarity: float = 1e-10            # matrix unitarity / norm preservation
    probability_sum: float = 1e-9       # histogram normalization
    stabilizer: float = 1e-10           # stabilizer expectation == +1 checks
    distribution: float = 1e-10         # outcome-distribution equality checks


TOL = Tolerances()
