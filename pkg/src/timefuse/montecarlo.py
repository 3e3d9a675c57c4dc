"""Discrete-event simulation of the pulsed timeline, plus closed-form rates.

Every pump pulse may emit a pair; pairs created ``delay_slots`` pulses apart
chain at the fusion PBS.  A window of n consecutive chained pairs is a
candidate 2n-photon event: its n-1 fusions must post-select, every photon
must survive the delay line (left photons) and detection, and no detector may
be asked to fire twice within its dead time.  Registered outcomes are drawn
from an engine-derived probability table.

Randomness comes from named numpy PCG64 substreams spawned from
(seed, stream); each stream is consumed in slot order, so results are
reproducible and independent of the internal chunk size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import Basis, histogram, outcome_order
from .fusion import ChainSpec, OverlapModel, PERFECT_OVERLAP

DETECTOR_NAMES = ("1H", "1V", "2H", "2V")
_CHUNK_SLOTS = 1 << 20
_STREAMS = {
    "emission": 0,
    "right_survival": 1,
    "left_survival": 2,
    "fusion": 3,
    "outcome": 4,
    "contamination": 5,
    "extra_photons": 6,
    "singles": 7,
}

RNG_ALGORITHM = "numpy-pcg64/seedsequence(seed,stream)"


@dataclass(frozen=True)
class ExperimentConfig:
    """Physical parameters of one run."""

    rep_rate: float = 76e6
    pair_prob: float = 0.015
    delay_slots: int = 8
    delay_time: float = 105e-9
    delay_transmittance: float = 0.9
    det_efficiency: float = 0.17
    dead_time: float = 50e-9
    double_pair_factor: float = 0.0
    duration: float = 1.0
    rng_seed: int = 2026

    def __post_init__(self) -> None:
        for name in ("pair_prob", "delay_transmittance", "det_efficiency"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.rep_rate <= 0:
            raise ValueError("rep_rate must be positive")
        if self.delay_slots < 1:
            raise ValueError("delay_slots must be >= 1")
        if self.dead_time < 0 or self.delay_time <= 0:
            raise ValueError("times must be positive")
        if self.double_pair_factor < 0 or self.pair_prob + self.double_pair_factor > 1:
            raise ValueError("double_pair_factor out of range")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")

    @property
    def period(self) -> float:
        return 1.0 / self.rep_rate

    def n_slots(self) -> int:
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        return int(round(self.duration * self.rep_rate))


def default_double_pair_factor(pair_prob: float) -> float:
    """Second-order emission weight of a weak pair source, p^2/2."""
    return pair_prob**2 / 2.0


@dataclass(frozen=True)
class EventRecord:
    slot: int
    detector: str
    timestamp: float


def _click_pattern(
    outcome: str, n_pairs: int, bases: tuple[Basis, ...]
) -> tuple[tuple[int, int], ...]:
    """(fusion-stage offset, detector index) per photon of one outcome.

    Detector indices follow DETECTOR_NAMES.  The two end photons are detected
    straight at the PBS outputs, so their exit port follows their detected
    polarization (h transmits: port 1 for input 1', port 2 for input 2');
    inner photons sit at fixed output ports with analyzers in front.
    """
    clicks = []
    m = 2 * n_pairs
    for i, letter in enumerate(outcome):
        channel = bases[i].letters.index(letter)
        if i == 0:
            port, offset = (1, 0) if channel == 0 else (2, 0)
        elif i == m - 1:
            port, offset = (2, n_pairs) if channel == 0 else (1, n_pairs)
        else:
            offset = (i + 1) // 2
            port = 2 if i % 2 == 1 else 1
        clicks.append((offset, (port - 1) * 2 + channel))
    return tuple(clicks)


def _dead_time_veto(
    clicks: tuple[tuple[int, int], ...], delay_time: float, dead_time: float
) -> bool:
    """True when any detector is hit twice within the dead window."""
    by_det: dict[int, list[int]] = {}
    for offset, det in clicks:
        by_det.setdefault(det, []).append(offset)
    for offsets in by_det.values():
        offsets.sort()
        for a, b in zip(offsets, offsets[1:]):
            if (b - a) * delay_time < dead_time:
                return True
    return False


@dataclass(frozen=True)
class OutcomeTable:
    """Outcome distribution and click geometry for one chain length."""

    n_pairs: int
    bases: tuple[Basis, ...]
    outcomes: tuple[str, ...]
    probabilities: np.ndarray
    clicks: tuple[tuple[tuple[int, int], ...], ...]
    success_probability: float

    def __post_init__(self) -> None:
        total = float(self.probabilities.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome table is not normalized (sum {total})")

    def veto_mask(self, delay_time: float, dead_time: float) -> np.ndarray:
        return np.array(
            [_dead_time_veto(c, delay_time, dead_time) for c in self.clicks],
            dtype=bool,
        )

    def dead_time_loss(self, delay_time: float, dead_time: float) -> float:
        """Probability mass of outcomes lost to the dead-time veto."""
        return float(self.probabilities[self.veto_mask(delay_time, dead_time)].sum())


def build_outcome_table(
    spec: ChainSpec,
    n_pairs: int,
    inner_basis: Basis = Basis.HV,
    overlap: OverlapModel = PERFECT_OVERLAP,
    quality: float = 1.0,
) -> OutcomeTable:
    """Measure an n-pair chain and tabulate outcomes with click patterns.

    End photons are always detected in HV at the PBS (their rotation, if any,
    happens in-circuit); inner photons go through ``inner_basis`` analyzers.
    """
    chain = replace(spec, n_pairs=n_pairs)
    result = chain.build(overlap)
    bases = (Basis.HV, *([inner_basis] * (2 * n_pairs - 2)), Basis.HV)
    hist = histogram(result, bases, quality=quality)
    order = outcome_order(bases)
    probs = np.array([hist.probabilities()[o] for o in order])
    clicks = tuple(_click_pattern(o, n_pairs, bases) for o in order)
    return OutcomeTable(
        n_pairs, bases, tuple(order), probs, clicks, result.success_probability
    )


@dataclass(frozen=True)
class ChainOutcomeModel:
    """Outcome tables for chain lengths 2..max_pairs of one configuration."""

    spec: ChainSpec
    inner_basis: Basis = Basis.HV
    overlap: OverlapModel = PERFECT_OVERLAP
    quality: float = 1.0
    max_pairs: int = 3

    def tables(self) -> dict[int, OutcomeTable]:
        return {
            n: build_outcome_table(self.spec, n, self.inner_basis, self.overlap, self.quality)
            for n in range(2, self.max_pairs + 1)
        }


@dataclass
class FoldCounts:
    """Bookkeeping for one coincidence order (2n-fold)."""

    n_pairs: int
    windows: int = 0
    post_selected: int = 0
    detected: int = 0
    vetoed: int = 0
    registered: int = 0
    outcome_counts: dict[str, int] = field(default_factory=dict)

    def rate(self, duration: float) -> float:
        return self.registered / duration


@dataclass
class CountSummary:
    duration: float
    n_slots: int
    pairs_emitted: int
    double_slots: int
    fusion_attempts: int
    fusion_successes: int
    singles: dict[str, int]
    folds: dict[int, FoldCounts]
    rng_algorithm: str = RNG_ALGORITHM
    events: list[EventRecord] | None = None

    def to_lines(self) -> list[str]:
        """Key-value record, schema version in the first line."""
        lines = [
            "schema=timefuse.count_summary.v1",
            f"rng_algorithm={self.rng_algorithm}",
            f"duration_s={self.duration!r}",
            f"n_slots={self.n_slots}",
            f"pairs_emitted={self.pairs_emitted}",
            f"double_slots={self.double_slots}",
            f"fusion_attempts={self.fusion_attempts}",
            f"fusion_successes={self.fusion_successes}",
        ]
        for det in DETECTOR_NAMES:
            lines.append(f"singles.{det}={self.singles.get(det, 0)}")
        for n in sorted(self.folds):
            f = self.folds[n]
            prefix = f"fold{2 * n}"
            lines.append(f"{prefix}.windows={f.windows}")
            lines.append(f"{prefix}.post_selected={f.post_selected}")
            lines.append(f"{prefix}.detected={f.detected}")
            lines.append(f"{prefix}.vetoed={f.vetoed}")
            lines.append(f"{prefix}.registered={f.registered}")
            lines.append(f"{prefix}.rate_hz={f.rate(self.duration)!r}")
            for outcome in sorted(f.outcome_counts):
                lines.append(f"{prefix}.outcome.{outcome}={f.outcome_counts[outcome]}")
        return lines


def analytic_rate(config: ExperimentConfig, n_pairs: int) -> float:
    """Closed-form 2n-fold rate.

    rate = rep * p^n * eta^(2n) * T_delay^n * 2^-(n-1): every pair needs its
    slot to emit, all 2n photons must be detected, each left photon crosses
    the delay line once, and each of the n-1 fusions post-selects with
    probability one half.
    """
    if n_pairs < 2:
        raise ValueError("coincidences need at least two pairs")
    return (
        config.rep_rate
        * config.pair_prob**n_pairs
        * config.det_efficiency ** (2 * n_pairs)
        * config.delay_transmittance**n_pairs
        * 2.0 ** (-(n_pairs - 1))
    )


def _spawned_streams(seed: int) -> dict[str, np.random.Generator]:
    return {
        name: np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, idx))))
        for name, idx in _STREAMS.items()
    }


def run_timeline(
    config: ExperimentConfig,
    outcome_model: ChainOutcomeModel | dict[int, OutcomeTable],
    log_events: bool = False,
) -> CountSummary:
    """Slot-by-slot simulation of the full detection timeline.

    Overlapping windows inside longer chains are counted independently per
    fusion slot (a 3-pair chain contributes one sixfold and two fourfold
    candidates); fusion successes and photon survivals are sampled once per
    slot and shared between overlapping windows.  Dead-time suppression is
    applied within each candidate window from its outcome's click pattern;
    detectors are assumed recovered between separate chains, which holds for
    realistic pair probabilities.
    """
    tables = outcome_model.tables() if isinstance(outcome_model, ChainOutcomeModel) else dict(outcome_model)
    if not tables or sorted(tables) != list(range(2, max(tables) + 1)):
        raise ValueError("outcome model must cover chain lengths 2..max contiguously")
    n_slots = config.n_slots()
    step = config.delay_slots
    n_max = max(tables)
    lookahead = n_max * step

    rngs = _spawned_streams(config.rng_seed)
    p, f = config.pair_prob, config.double_pair_factor
    eta, t_delay = config.det_efficiency, config.delay_transmittance

    veto_masks = {
        n: tables[n].veto_mask(config.delay_time, config.dead_time) for n in tables
    }
    cumprobs = {n: np.cumsum(tables[n].probabilities) for n in tables}
    folds = {n: FoldCounts(n) for n in tables}
    singles_clicks = np.zeros(4, dtype=np.int64)
    pairs_emitted = 0
    double_slots = 0
    fusion_attempts = 0
    fusion_successes = 0
    events: list[EventRecord] | None = [] if log_events else None

    # Rolling buffers hold [chunk_start - lookahead, chunk_end); windows are
    # evaluated for starts inside the current chunk only, looking ahead into
    # zero padding at the very end of the run.
    emission_prev = np.zeros(lookahead, dtype=bool)
    double_prev = np.zeros(lookahead, dtype=bool)
    right_prev = np.zeros(lookahead, dtype=bool)
    left_prev = np.zeros(lookahead, dtype=bool)
    success_prev = np.zeros(lookahead, dtype=bool)

    for start in range(0, n_slots, _CHUNK_SLOTS):
        size = min(_CHUNK_SLOTS, n_slots - start)
        u = rngs["emission"].random(size)
        double_new = u < f
        emission_new = u < p + f

        emit_count = int(emission_new.sum())
        right_new = np.zeros(size, dtype=bool)
        left_new = np.zeros(size, dtype=bool)
        idx = np.flatnonzero(emission_new)
        right_new[idx] = rngs["right_survival"].random(emit_count) < eta
        left_new[idx] = rngs["left_survival"].random(emit_count) < eta * t_delay

        pairs_emitted += emit_count + int(double_new.sum())
        double_slots += int(double_new.sum())

        emission = np.concatenate([emission_prev, emission_new])
        double = np.concatenate([double_prev, double_new])
        right_ok = np.concatenate([right_prev, right_new])
        left_ok = np.concatenate([left_prev, left_new])

        # Fusion at slot t happens when pairs exist at t - step and t; sample
        # its post-selection success once, shared by every window crossing it.
        success_new = np.zeros(size, dtype=bool)
        fus_here = emission_new.copy()
        prev_emission = emission[lookahead - step : lookahead - step + size]
        fus_here &= prev_emission
        fus_idx = np.flatnonzero(fus_here)
        fusion_attempts += fus_idx.size
        succ = rngs["fusion"].random(fus_idx.size) < 0.5
        success_new[fus_idx] = succ
        fusion_successes += int(succ.sum())
        success = np.concatenate([success_prev, success_new])

        base = lookahead  # index of chunk slot 0 inside the buffers
        pad = np.zeros(lookahead, dtype=bool)
        emission_ext = np.concatenate([emission, pad])
        double_ext = np.concatenate([double, pad])
        right_ext = np.concatenate([right_ok, pad])
        left_ext = np.concatenate([left_ok, pad])
        success_ext = np.concatenate([success, pad])

        for n in sorted(tables):
            if start + (n - 1) * step >= n_slots + lookahead:
                continue
            ok = emission_ext[base : base + size].copy()
            detected = right_ext[base : base + size] & left_ext[base : base + size]
            post = np.ones(size, dtype=bool)
            contaminated = double_ext[base : base + size].copy()
            for j in range(1, n):
                sl = slice(base + j * step, base + j * step + size)
                ok &= emission_ext[sl]
                detected &= right_ext[sl] & left_ext[sl]
                post &= success_ext[sl]
                contaminated |= double_ext[sl]
            # the final left photon must click inside the run
            starts = np.flatnonzero(ok)
            starts = starts[start + starts + n * step < n_slots]
            fold = folds[n]
            fold.windows += starts.size
            post_sel = starts[post[starts]]
            fold.post_selected += post_sel.size
            good = post_sel[detected[post_sel]]
            fold.detected += good.size

            draws = rngs["outcome"].random(good.size)
            outcome_idx = np.searchsorted(cumprobs[n], draws)
            contam = contaminated[good]
            n_contam = int(contam.sum())
            if n_contam:
                uniform = rngs["contamination"].integers(
                    0, len(tables[n].outcomes), size=n_contam
                )
                outcome_idx[contam] = uniform
            vetoed = veto_masks[n][outcome_idx]
            fold.vetoed += int(vetoed.sum())
            kept = ~vetoed
            fold.registered += int(kept.sum())
            for oi in outcome_idx[kept]:
                name = tables[n].outcomes[oi]
                fold.outcome_counts[name] = fold.outcome_counts.get(name, 0) + 1
            if events is not None:
                for w, oi in zip(good[kept], outcome_idx[kept]):
                    slot0 = start + int(w)
                    for offset, det in tables[n].clicks[oi]:
                        events.append(
                            EventRecord(
                                slot0 + offset * step,
                                DETECTOR_NAMES[det],
                                slot0 * config.period + offset * config.delay_time,
                            )
                        )

        # Singles: every surviving photon clicks somewhere; doubles add two
        # extra photons with the same survival statistics.
        n_extra = int(double_new.sum())
        extra_clicks = 0
        if n_extra:
            extra = rngs["extra_photons"].random(2 * n_extra)
            extra_clicks = int((extra[:n_extra] < eta).sum())
            extra_clicks += int((extra[n_extra:] < eta * t_delay).sum())
        total_clicks = int(right_new.sum()) + int(left_new.sum()) + extra_clicks
        singles_clicks += rngs["singles"].multinomial(total_clicks, [0.25] * 4)

        emission_prev = emission[size:]
        double_prev = double[size:]
        right_prev = right_ok[size:]
        left_prev = left_ok[size:]
        success_prev = success[size:]

    if events is not None:
        events.sort(key=lambda e: (e.timestamp, e.detector, e.slot))
    return CountSummary(
        duration=config.duration,
        n_slots=n_slots,
        pairs_emitted=pairs_emitted,
        double_slots=double_slots,
        fusion_attempts=fusion_attempts,
        fusion_successes=fusion_successes,
        singles={DETECTOR_NAMES[i]: int(singles_clicks[i]) for i in range(4)},
        folds=folds,
        events=events,
    )


def dead_time_study(
    config: ExperimentConfig,
    delay_time_values: list[float],
    table: OutcomeTable,
) -> list[tuple[float, float, float]]:
    """Fourfold efficiency vs delay time, by exact enumeration.

    For each delay value, sums the probability mass of outcomes whose click
    pattern requires one detector to fire twice within the dead time.
    Returns rows (delay_time, surviving_fraction, lost_mass).
    """
    rows = []
    for dt in delay_time_values:
        lost = table.dead_time_loss(dt, config.dead_time)
        rows.append((dt, 1.0 - lost, lost))
    return rows


def spawn_worker_seeds(seed: int, n_workers: int) -> list[int]:
    """Independent 64-bit seeds for parallel parameter-grid workers."""
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1, np.uint64)[0]) for child in ss.spawn(n_workers)]


@dataclass(frozen=True)
class RateOperatingPoint:
    """Parameters found to reproduce target fourfold and sixfold rates."""

    pair_prob_fourfold: float
    pair_prob_sixfold: float
    det_efficiency: float
    delay_transmittance: float
    fourfold_hz: float
    sixfold_hz: float
    max_rel_deviation: float


def _rates_at(rep_rate: float, p: float, eta: float, t: float) -> tuple[float, float]:
    cfg = ExperimentConfig(
        rep_rate=rep_rate, pair_prob=float(p), det_efficiency=float(eta), delay_transmittance=float(t)
    )
    return float(analytic_rate(cfg, 2)), float(analytic_rate(cfg, 3))


def find_rate_operating_point(
    fourfold_hz: float,
    sixfold_hz: float,
    rep_rate: float = 76e6,
    p_range: tuple[float, float] = (0.01, 0.02),
    eta_range: tuple[float, float] = (0.10, 0.25),
    t_range: tuple[float, float] = (0.9, 1.0),
    shared_pair_prob: bool = True,
    n_grid: int = 21,
) -> RateOperatingPoint:
    """Search the stated parameter boxes for both coincidence-rate targets.

    With ``shared_pair_prob`` a single pair probability must serve both
    rates; both are then functions of p * eta^2 * T alone, so they cannot in
    general be hit exactly and the best compromise is returned.  Without it,
    the fourfold and sixfold runs may use different pump powers (hence
    different p), and the remaining parameters are solved exactly when the
    boxes allow.
    """

    def deviation(r4: float, r6: float) -> float:
        return max(
            max(r4, fourfold_hz) / min(r4, fourfold_hz),
            max(r6, sixfold_hz) / min(r6, sixfold_hz),
        ) - 1.0

    best: RateOperatingPoint | None = None
    etas = np.linspace(*eta_range, n_grid)
    ts = np.linspace(*t_range, n_grid)

    if shared_pair_prob:
        grids = [(np.linspace(*p_range, n_grid), etas, ts)]
        for _ in range(3):  # local refinement passes
            ps, es, tg = grids[-1]
            for p in ps:
                for eta in es:
                    for t in tg:
                        r4, r6 = _rates_at(rep_rate, p, eta, t)
                        dev = deviation(r4, r6)
                        if best is None or dev < best.max_rel_deviation:
                            best = RateOperatingPoint(
                                float(p), float(p), float(eta), float(t), r4, r6, float(dev)
                            )
            assert best is not None

            def shrink(value, lo, hi):
                span = (hi - lo) / 4.0
                return np.linspace(max(lo, value - span), min(hi, value + span), n_grid)

            grids.append(
                (
                    shrink(best.pair_prob_fourfold, *p_range),
                    shrink(best.det_efficiency, *eta_range),
                    shrink(best.delay_transmittance, *t_range),
                )
            )
        return best

    for eta in etas:
        for t in ts:
            # invert the closed forms for each target separately
            p4 = math.sqrt(2.0 * fourfold_hz / (rep_rate * eta**4 * t**2))
            p6 = (4.0 * sixfold_hz / (rep_rate * eta**6 * t**3)) ** (1.0 / 3.0)
            p4c = min(max(p4, p_range[0]), p_range[1])
            p6c = min(max(p6, p_range[0]), p_range[1])
            r4, _ = _rates_at(rep_rate, p4c, eta, t)
            _, r6 = _rates_at(rep_rate, p6c, eta, t)
            dev = deviation(r4, r6)
            if best is None or dev < best.max_rel_deviation:
                best = RateOperatingPoint(
                    float(p4c), float(p6c), float(eta), float(t), r4, r6, float(dev)
                )
    assert best is not None
    return best
