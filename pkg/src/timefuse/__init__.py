"""Temporally multiplexed multi-photon entanglement simulator.

Sequential photon pairs from a single source are fused on one polarizing
beam splitter across time slots, growing GHZ and branched-chain graph
states.  The package provides the sparse bosonic engine, the fusion
chain builder, stabilizer graph verification, a detection Monte Carlo,
and the analysis quantities (histograms, parity visibility, fidelity
bounds, nonlocality thresholds).
"""

from __future__ import annotations

from .modes import BasisState, PhotonMode, Polarization, SpatialPort
from .states import StateVector, apply_mode_unitary, inner_product, normalize, tensor
from .elements import Basis, ElementDescriptor, analyzer_basis, delay, hwp, pbs, qwp
from .fusion import (
    ChainSpec,
    FusionResult,
    OverlapModel,
    PHI_I,
    PHI_PLUS,
    PSI_PLUS,
    PairKind,
    grow_chain,
    make_pair,
    rotated_chain,
    parity_amplitude_groups,
    phi_with_phase,
    postselect_one_per_port,
)
from .graphs import (
    Graph,
    QubitState,
    StabilizerSet,
    branched_chain,
    lc_equivalent,
    stabilizer_expectations,
    star,
    to_qubits,
)
from .montecarlo import (
    ChainOutcomeModel,
    CountSummary,
    ExperimentConfig,
    analytic_rate,
    build_outcome_table,
    dead_time_study,
    find_rate_operating_point,
    run_timeline,
)
from .analysis import (
    FidelityBounds,
    Histogram,
    VisibilityResult,
    delay_scan,
    fidelity_bounds,
    histogram,
    mermin_threshold,
    parity_visibility,
    violation_check,
    white_noise_weight_for_ratio,
)

__version__ = "0.1.0"
