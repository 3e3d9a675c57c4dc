"""Analysis quantities: histograms, parity visibility, scans, bounds, thresholds."""

from __future__ import annotations

import math

import pytest

from oracles import fidelity_bound_oracle, idealized_histogram
from timefuse.analysis import (
    Basis,
    BasisError,
    Histogram,
    VisibilityResult,
    default_scan_bases,
    delay_scan,
    fidelity_bounds,
    histogram,
    mermin_threshold,
    outcome_order,
    outcome_parity,
    parity_visibility,
    violation_check,
    white_noise_weight_for_ratio,
)
from timefuse.fusion import (
    ChainSpec,
    OverlapModel,
    PHI_PLUS,
    PSI_PLUS,
    grow_chain,
    rotated_chain,
)

HV4 = tuple([Basis.HV] * 4)
ROTATED_BASES = (Basis.HV, Basis.PM, Basis.PM, Basis.HV)


class TestHistogram:
    def test_psi_fusion_concentrates_on_hvvh_and_vhhv(self):
        hist = histogram(grow_chain(2, PSI_PLUS), HV4)
        probs = hist.probabilities()
        assert probs["HVVH"] == pytest.approx(0.5, abs=1e-12)
        assert probs["VHHV"] == pytest.approx(0.5, abs=1e-12)
        assert sum(v for k, v in probs.items() if k not in ("HVVH", "VHHV")) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_phi_fusion_concentrates_on_hhhh_and_vvvv(self):
        probs = histogram(grow_chain(2, PHI_PLUS), HV4).probabilities()
        assert probs["HHHH"] == pytest.approx(0.5, abs=1e-12)
        assert probs["VVVV"] == pytest.approx(0.5, abs=1e-12)

    def test_65_to_1_ratio_reproduces_dominant_mass(self):
        weight = white_noise_weight_for_ratio(65.0, 4)
        hist = histogram(grow_chain(2, PSI_PLUS), HV4, quality=weight)
        probs = hist.probabilities()
        p_dom = probs["HVVH"] + probs["VHHV"]
        assert p_dom == pytest.approx(130.0 / 144.0, abs=1e-9)
        others = [v for k, v in probs.items() if k not in ("HVVH", "VHHV")]
        assert max(others) == pytest.approx(min(others), abs=1e-15)
        assert probs["HVVH"] / max(others) == pytest.approx(65.0, rel=1e-9)

    def test_outcome_order_puts_first_eigenstate_letters_first(self):
        order = outcome_order((Basis.PM, Basis.RL))
        assert order == ["PR", "PL", "MR", "ML"]

    def test_basis_count_mismatch_rejected(self):
        with pytest.raises(BasisError):
            histogram(grow_chain(2, PHI_PLUS), (Basis.HV, Basis.HV))

    def test_counts_table_wrapping(self):
        hist = histogram({"HVVH": 130, "VHHV": 130, "HHHH": 2}, HV4)
        assert hist.is_counts
        assert hist.total() == 262
        assert hist.dominant_pair() == ("HVVH", "VHHV")

    def test_probability_normalization_enforced(self):
        with pytest.raises(ValueError, match="sum"):
            Histogram(HV4, {"HHHH": 0.4})

    def test_alien_outcomes_rejected(self):
        with pytest.raises(ValueError):
            Histogram(HV4, {"PPPP": 1.0})


class TestParityVisibility:
    def test_ideal_ghz_in_pm_basis_has_unit_visibility(self):
        hist = histogram(grow_chain(2, PHI_PLUS), tuple([Basis.PM] * 4))
        vis = parity_visibility(hist)
        assert vis.visibility == pytest.approx(1.0, abs=1e-12)
        assert vis.odd_sum == pytest.approx(0.0, abs=1e-12)  # even group constructive here

    def test_rotated_configuration_puts_everything_in_the_odd_group(self):
        hist = histogram(rotated_chain(2).build(), ROTATED_BASES)
        vis = parity_visibility(hist)
        assert vis.even_sum == pytest.approx(0.0, abs=1e-12)
        assert vis.visibility == pytest.approx(1.0, abs=1e-12)

    def test_distinguishable_photons_lose_interference(self):
        result = rotated_chain(2).build(OverlapModel(0.0))
        vis = parity_visibility(histogram(result, ROTATED_BASES))
        assert vis.visibility == pytest.approx(0.0, abs=1e-12)

    def test_published_sums_give_published_contrast(self):
        vis = VisibilityResult.from_sums(30.5, 169.5)
        assert vis.visibility == pytest.approx(0.695, abs=1e-12)

    def test_plain_hv_histogram_rejected(self):
        hist = histogram(grow_chain(2, PHI_PLUS), HV4)
        with pytest.raises(BasisError):
            parity_visibility(hist)

    def test_count_mode_uncertainty_is_binomial(self):
        even, odd = 1232.0, 6848.0
        vis = VisibilityResult.from_sums(even, odd, is_counts=True)
        total = even + odd
        assert vis.uncertainty == pytest.approx(2 * math.sqrt(even * odd) / total**1.5)
        assert vis.uncertainty == pytest.approx(0.008, abs=5e-4)

    def test_parity_letter_classification(self):
        assert outcome_parity("HPPH") == 0
        assert outcome_parity("HMPH") == 1
        assert outcome_parity("VMLV") == 0  # V, M, L all count


class TestDelayScan:
    SIGMA = 1.0

    def scan(self, delays, **kwargs):
        return delay_scan(rotated_chain(2), delays, self.SIGMA, **kwargs)

    def test_zero_delay_is_odd_constructive_with_unit_visibility(self):
        point = self.scan([0.0])[0]
        assert point.visibility == pytest.approx(1.0, abs=1e-12)
        assert point.odd_sum > point.even_sum

    def test_large_delay_equalizes_all_sixteen_outcomes(self):
        point = self.scan([8.0])[0]
        probs = point.histogram.probabilities()
        assert len(probs) == 16
        assert max(probs.values()) - min(probs.values()) < 1e-9
        assert point.visibility == pytest.approx(0.0, abs=1e-9)

    def test_visibility_curve_is_overlap_squared(self):
        # self-consistency of the two-envelope model: V(d)/V(0) = s(d)^2
        delays = [0.0, 0.4, 0.8, 1.2, 1.6, 2.0]
        points = self.scan(delays)
        v0 = points[0].visibility
        for point in points:
            expected = math.exp(-point.delay**2 / self.SIGMA**2)
            assert point.visibility / v0 == pytest.approx(expected, abs=1e-6)

    def test_even_in_delay_and_monotone_in_magnitude(self):
        delays = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
        points = self.scan(delays)
        by_delay = {p.delay: p.visibility for p in points}
        for d in (0.5, 1.0, 2.0):
            assert by_delay[d] == pytest.approx(by_delay[-d], abs=1e-12)
        ordered = [by_delay[d] for d in (0.0, 0.5, 1.0, 2.0)]
        assert all(a >= b - 1e-12 for a, b in zip(ordered, ordered[1:]))

    def test_quality_factor_scales_visibility(self):
        point = self.scan([0.0], quality=0.695)[0]
        assert point.visibility == pytest.approx(0.695, abs=1e-12)

    def test_count_mode_gives_counting_uncertainty(self):
        point = self.scan([0.0], quality=0.695, counts_per_point=8078)[0]
        assert point.visibility == pytest.approx(0.695, abs=1e-3)
        assert point.uncertainty == pytest.approx(0.008, abs=5e-4)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            self.scan([])
        with pytest.raises(ValueError):
            delay_scan(rotated_chain(2), [0.0], sigma=0.0)

    def test_default_bases_follow_configuration(self):
        assert default_scan_bases(rotated_chain(2)) == ROTATED_BASES
        assert default_scan_bases(ChainSpec(kind=PHI_PLUS)) == tuple([Basis.PM] * 4)


def hist_from_dict(d):
    return Histogram(HV4, d)


class TestFidelityBounds:
    def test_perfect_ghz(self):
        bounds = fidelity_bounds(hist_from_dict(idealized_histogram(1.0)), 1.0)
        assert bounds.lower == pytest.approx(1.0, abs=1e-12)
        assert bounds.upper == pytest.approx(1.0, abs=1e-12)

    def test_zero_visibility_pins_both_bounds_to_population_term(self):
        hist = hist_from_dict(idealized_histogram(0.9))
        bounds = fidelity_bounds(hist, 0.0)
        assert bounds.lower == pytest.approx(0.45, abs=1e-12)
        assert bounds.upper == pytest.approx(0.45, abs=1e-12)

    def test_published_point_sits_in_the_consistency_windows(self):
        hist = hist_from_dict(idealized_histogram(130.0 / 144.0))
        bounds = fidelity_bounds(hist, 0.695)
        assert 0.70 <= bounds.lower <= 0.78  # published value 75.2%
        assert 0.76 <= bounds.upper <= 0.83  # published value 79.9%
        assert bounds.lower == pytest.approx(0.7503, abs=5e-4)
        assert bounds.upper == pytest.approx(0.7989, abs=5e-4)
        assert bounds.lower > 0.5 and bounds.upper > 0.5  # genuine entanglement

    def test_closed_forms_match_extremization_oracle_on_grid(self):
        worst = 0.0
        for p_dom in (0.80, 0.85, 0.90, 0.95, 1.0):
            for vis in (0.0, 0.2, 0.45, 0.695, 0.8):
                data = idealized_histogram(p_dom)
                closed = fidelity_bounds(hist_from_dict(data), vis)
                oracle = fidelity_bound_oracle(data, vis)
                worst = max(
                    worst,
                    abs(closed.lower - oracle.lower),
                    abs(closed.upper - oracle.upper),
                )
        assert worst < 0.005

    def test_bounds_ordered_and_monotone_in_visibility(self):
        hist = hist_from_dict(idealized_histogram(0.9))
        previous = None
        for vis in (0.0, 0.2, 0.4, 0.6, 0.8):
            bounds = fidelity_bounds(hist, vis)
            assert bounds.lower <= bounds.upper + 1e-12
            if previous is not None:
                assert bounds.lower >= previous.lower - 1e-12
                assert bounds.upper >= previous.upper - 1e-12
            previous = bounds

    def test_visibility_range_validated(self):
        hist = hist_from_dict(idealized_histogram(0.9))
        with pytest.raises(ValueError):
            fidelity_bounds(hist, 1.2)

    def test_rotated_basis_histogram_rejected(self):
        hist = histogram(grow_chain(2, PHI_PLUS), tuple([Basis.PM] * 4))
        with pytest.raises(BasisError):
            fidelity_bounds(hist, 0.5)

    def test_psi_frame_dominant_pair(self):
        data = idealized_histogram(130.0 / 144.0, dominant=("HVVH", "VHHV"))
        bounds = fidelity_bounds(hist_from_dict(data), 0.695)
        assert bounds.dominant_mass == pytest.approx(130.0 / 144.0, abs=1e-12)
        assert bounds.lower == pytest.approx(0.7503, abs=5e-4)


class TestMerminThreshold:
    def test_four_particle_value(self):
        assert mermin_threshold(4) == pytest.approx(0.353553, abs=1e-6)

    def test_two_particle_value_is_chsh(self):
        assert mermin_threshold(2) == pytest.approx(0.70711, abs=1e-5)

    def test_six_particle_value(self):
        assert mermin_threshold(6) == pytest.approx(0.17678, abs=1e-5)

    def test_strictly_decreasing(self):
        values = [mermin_threshold(n) for n in range(2, 11)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_minimum_particle_count(self):
        with pytest.raises(ValueError):
            mermin_threshold(1)


class TestViolationCheck:
    def test_published_visibility_violates_with_third_margin(self):
        vis = VisibilityResult(30.5, 169.5, 0.695, 0.008)
        result = violation_check(vis, 4)
        assert result.violates
        assert result.margin == pytest.approx(0.333, abs=0.01)

    def test_low_visibility_does_not_violate(self):
        vis = VisibilityResult(0.35, 0.65, 0.30, 0.0)
        assert not violation_check(vis, 4).violates

    def test_threshold_boundary_is_strict(self):
        vis = VisibilityResult(0.0, 1.0, mermin_threshold(4), 0.0)
        result = violation_check(vis, 4)
        assert not result.violates
        assert result.margin == pytest.approx(0.0, abs=1e-15)


def test_white_noise_weight_solves_ratio_equation():
    assert white_noise_weight_for_ratio(65.0, 4) == pytest.approx(8.0 / 9.0, abs=1e-12)
    with pytest.raises(ValueError):
        white_noise_weight_for_ratio(0.5, 4)
