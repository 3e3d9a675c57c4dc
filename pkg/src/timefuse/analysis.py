"""Measured quantities: outcome histograms, parity interference, visibility,
delay scans, GHZ fidelity bounds, and the multi-particle nonlocality threshold.

Outcome strings list one letter per photon in detection order.  The first
letter of each basis (H, P, R) is the one that fires the H detector after the
analyzer plates; parity classification counts the second letters (V, M, L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping

from .elements import Basis, analyzer_basis, apply_elements
from .fusion import ChainSpec, FusionResult, OverlapModel
from .modes import SpatialPort
from .states import StateVector
from .tolerances import TOL

SECOND_LETTERS = frozenset("VML")


class BasisError(ValueError):
    pass


def outcome_order(bases: tuple[Basis, ...]) -> list[str]:
    """All outcome strings, lexicographic with the detector-H letter first."""
    return ["".join(w) for w in product(*[b.letters for b in bases])]


@dataclass(frozen=True)
class Histogram:
    """Per-outcome probabilities or counts, one basis label per photon."""

    bases: tuple[Basis, ...]
    data: dict[str, float]
    is_counts: bool = False

    def __post_init__(self) -> None:
        expected = set(outcome_order(self.bases))
        if set(self.data) - expected:
            raise ValueError("histogram contains outcomes outside the basis alphabet")
        if any(v < 0 for v in self.data.values()):
            raise ValueError("histogram entries must be nonnegative")
        if not self.is_counts:
            total = sum(self.data.values())
            if abs(total - 1.0) > TOL.probability_sum:
                raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def n_photons(self) -> int:
        return len(self.bases)

    def value(self, outcome: str) -> float:
        return self.data.get(outcome, 0.0)

    def total(self) -> float:
        return sum(self.data.values())

    def probabilities(self) -> dict[str, float]:
        total = self.total()
        return {o: self.data.get(o, 0.0) / total for o in outcome_order(self.bases)}

    def dominant_pair(self) -> tuple[str, str]:
        """Most probable outcome and its letter-wise complement."""
        probs = self.probabilities()
        top = max(probs, key=probs.get)
        flipped = "".join(
            b.letters[1 - b.letters.index(ch)] for b, ch in zip(self.bases, top)
        )
        return top, flipped


def _measure_state(result: FusionResult, bases: tuple[Basis, ...]) -> dict[str, float]:
    """Analyzer rotations followed by HV projection, per photon.

    Envelope labels are not resolved by the detectors, so probabilities sum
    over envelope configurations (orthogonal sectors add incoherently).
    """
    if result.is_null:
        raise ValueError("cannot measure a null fusion result")
    if len(bases) != len(result.mode_layout):
        raise BasisError(
            f"{len(bases)} basis labels for {len(result.mode_layout)} photons"
        )
    state: StateVector = result.state
    for basis, (port, slot) in zip(bases, result.mode_layout):
        state = apply_elements(state, analyzer_basis(basis, port, slot))

    position = {group: i for i, group in enumerate(result.mode_layout)}
    probs: dict[str, float] = {}
    for term, amp in state.terms.items():
        letters: list[str | None] = [None] * len(bases)
        for mode, count in term:
            idx = position.get((mode.spatial, mode.time_slot))
            if idx is None or count != 1 or letters[idx] is not None:
                raise ValueError("state is not one-photon-per-layout-slot")
            letters[idx] = bases[idx].letters[int(mode.polarization)]
        outcome = "".join(letters)  # type: ignore[arg-type]
        probs[outcome] = probs.get(outcome, 0.0) + abs(amp) ** 2
    return probs


def histogram(
    source: FusionResult | Mapping[str, float],
    bases: tuple[Basis, ...] | list[Basis],
    quality: float = 1.0,
) -> Histogram:
    """Outcome histogram of a fusion result, or wrap a table of raw counts.

    ``quality`` admixes white noise at the probability level:
    p -> quality * p + (1 - quality) / 2^n.  It models the overall
    two-photon source quality and multiplies the parity visibility.
    """
    if not 0.0 <= quality <= 1.0:
        raise ValueError("quality must lie in [0, 1]")
    bases = tuple(bases)
    if isinstance(source, FusionResult):
        probs = _measure_state(source, bases)
        if quality < 1.0:
            floor = (1.0 - quality) / 2 ** len(bases)
            probs = {o: quality * probs.get(o, 0.0) + floor for o in outcome_order(bases)}
        return Histogram(bases, probs)
    if quality != 1.0:
        raise ValueError("quality only applies to engine-derived histograms")
    data = {str(k): float(v) for k, v in source.items()}
    return Histogram(bases, data, is_counts=True)


def white_noise_weight_for_ratio(ratio: float, n_photons: int) -> float:
    """White-noise admixture weight that makes each dominant outcome of an
    ideal two-outcome state ``ratio`` times more likely than any other."""
    if ratio < 1.0:
        raise ValueError("ratio must be >= 1")
    half_dim = 2 ** (n_photons - 1)
    return (ratio - 1.0) / (ratio - 1.0 + half_dim)


def outcome_parity(outcome: str) -> int:
    """0 for even, 1 for odd count of second-basis letters (V/M/L)."""
    return sum(ch in SECOND_LETTERS for ch in outcome) % 2


@dataclass(frozen=True)
class VisibilityResult:
    even_sum: float
    odd_sum: float
    visibility: float
    uncertainty: float

    @classmethod
    def from_sums(cls, even: float, odd: float, is_counts: bool = False) -> "VisibilityResult":
        total = even + odd
        if total <= 0:
            raise ValueError("parity sums are empty")
        vis = abs(odd - even) / total
        unc = 2.0 * math.sqrt(even * odd) / total**1.5 if is_counts else 0.0
        return cls(even, odd, vis, unc)


def parity_visibility(hist: Histogram) -> VisibilityResult:
    """Contrast between the even and odd outcome groups.

    Requires at least one photon analyzed in a rotated basis; for the
    standard configuration the first and last photons carry HV labels because
    their rotation happens inside the circuit, which still counts.
    """
    if all(b is Basis.HV for b in hist.bases):
        raise BasisError("parity interference is undefined in the plain HV basis")
    even = sum(v for o, v in hist.data.items() if outcome_parity(o) == 0)
    odd = sum(v for o, v in hist.data.items() if outcome_parity(o) == 1)
    return VisibilityResult.from_sums(even, odd, hist.is_counts)


def default_scan_bases(spec: ChainSpec) -> tuple[Basis, ...]:
    """Measurement bases for interference scans: the two end photons are read
    in HV (rotated in-circuit when the pre-PBS plates are on), inner photons
    through PM analyzers."""
    inner = 2 * spec.n_pairs - 2
    if spec.hwp_before_pbs:
        return (Basis.HV, *([Basis.PM] * inner), Basis.HV)
    return tuple([Basis.PM] * (2 * spec.n_pairs))


@dataclass(frozen=True)
class ScanPoint:
    delay: float
    overlap: float
    even_sum: float
    odd_sum: float
    visibility: float
    uncertainty: float
    histogram: Histogram


def delay_scan(
    spec: ChainSpec,
    delays: list[float],
    sigma: float,
    bases: tuple[Basis, ...] | None = None,
    quality: float = 1.0,
    counts_per_point: int | None = None,
) -> list[ScanPoint]:
    """Rebuild the chain across path-delay values and tabulate the parity sums.

    The delay enters through the envelope overlap s = exp(-d^2 / (2 sigma^2)).
    With ``counts_per_point`` the per-point histogram is converted to expected
    integer counts so visibility uncertainties follow counting statistics.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not delays:
        raise ValueError("delay list is empty")
    if bases is None:
        bases = default_scan_bases(spec)
    points: list[ScanPoint] = []
    for d in delays:
        overlap = OverlapModel.from_delay(d, sigma)
        hist = histogram(spec.build(overlap), bases, quality=quality)
        if counts_per_point is not None:
            counts = {o: round(p * counts_per_point) for o, p in hist.probabilities().items()}
            hist = Histogram(bases, {k: float(v) for k, v in counts.items()}, is_counts=True)
        vis = parity_visibility(hist)
        points.append(
            ScanPoint(d, overlap.s, vis.even_sum, vis.odd_sum, vis.visibility, vis.uncertainty, hist)
        )
    return points


@dataclass(frozen=True)
class FidelityBounds:
    lower: float
    upper: float
    dominant_mass: float
    coherence_lower: float
    coherence_upper: float


def fidelity_bounds(hist_hv: Histogram, visibility: float) -> FidelityBounds:
    """GHZ fidelity window from the HV histogram and the parity visibility.

    F = (P_a + P_b)/2 + C with C the real coherence between the two dominant
    outcomes.  The upper value attributes all observed interference to that
    coherence (C = V/2); the lower value assumes the unwanted populations are
    maximally mutually coherent and feed the observed interference, so only
    V/2 - sum_j sqrt(p_j p_jbar) remains attributable (clamped at 0: the
    interference data cannot certify a negative coherence).
    """
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    if any(b is not Basis.HV for b in hist_hv.bases):
        raise BasisError("fidelity bounds need the HV-basis histogram")
    probs = hist_hv.probabilities()
    a, b = hist_hv.dominant_pair()
    p_a, p_b = probs[a], probs[b]
    dominant = p_a + p_b

    budget = 0.0
    seen = {a, b}
    for outcome in outcome_order(hist_hv.bases):
        if outcome in seen:
            continue
        partner = "".join("H" if ch == "V" else "V" for ch in outcome)
        seen.update((outcome, partner))
        budget += math.sqrt(probs[outcome] * probs[partner])

    cap = math.sqrt(p_a * p_b)
    c_upper = min(visibility / 2.0, cap)
    c_lower = min(max(0.0, visibility / 2.0 - budget), c_upper)
    lower = min(1.0, max(0.0, dominant / 2.0 + c_lower))
    upper = min(1.0, max(0.0, dominant / 2.0 + c_upper))
    return FidelityBounds(lower, upper, dominant, c_lower, c_upper)


def mermin_threshold(n_particles: int) -> float:
    """Minimum GHZ visibility that rules out local realism with n particles."""
    if n_particles < 2:
        raise ValueError("need at least two particles")
    return 2.0 ** (-(n_particles - 1) / 2.0)


@dataclass(frozen=True)
class ViolationResult:
    violates: bool
    margin: float
    threshold: float


def violation_check(vis: VisibilityResult, n_particles: int) -> ViolationResult:
    """Strict test of V - uncertainty > threshold, with the margin reported."""
    threshold = mermin_threshold(n_particles)
    margin = vis.visibility - vis.uncertainty - threshold
    return ViolationResult(margin > 0.0, margin, threshold)
