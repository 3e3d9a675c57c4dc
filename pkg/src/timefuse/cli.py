"""Command-line entry point.

Subcommands wire a TOML configuration to engine runs and write versioned,
tab-separated tables plus one key-value summary per run into the output
directory.  The effective configuration (defaults resolved, seed override
applied) is echoed to ``effective_config.toml``; re-running from that echo
reproduces identical output bytes.

Exit codes: 0 success, 2 configuration error, 3 runtime or model error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, graphs, montecarlo
from .analysis import Basis
from .config import ConfigError, RunConfig, load_config, to_toml
from .fusion import FusionResult
from .tables import format_value, write_summary, write_table

SUBCOMMANDS = ("build-state", "scan-delay", "montecarlo", "verify-graph", "analyze", "rates")


def _layout_string(result: FusionResult) -> str:
    return ",".join(f"{port}:{slot}" for port, slot in result.mode_layout)


def _amplitude_rows(result: FusionResult):
    position = {g: i for i, g in enumerate(result.mode_layout)}
    rows = []
    for term, amp in result.state.terms.items():
        letters = ["?"] * len(position)
        envs = ["0"] * len(position)
        for mode, _count in term:
            idx = position[(mode.spatial, mode.time_slot)]
            letters[idx] = "hv"[int(mode.polarization)]
            envs[idx] = str(mode.envelope)
        rows.append(("".join(letters), "".join(envs), amp.real, amp.imag))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def _build_chain(cfg: RunConfig) -> FusionResult:
    if not 2 <= cfg.chain.n_pairs <= 5:
        raise ConfigError("chain.n_pairs must lie in 2..5")
    result = cfg.chain.spec().build(cfg.chain.overlap())
    if result.is_null:
        raise RuntimeError("chain never post-selects under this configuration")
    return result


def cmd_build_state(cfg: RunConfig, out: Path) -> None:
    result = _build_chain(cfg)
    write_table(out, "state_amplitudes", ["outcome", "envelopes", "real", "imag"], _amplitude_rows(result))
    write_summary(
        out,
        "state_summary",
        {
            "n_photons": result.n_photons,
            "success_probability": result.success_probability,
            "mode_layout": _layout_string(result),
            "n_terms": len(result.state.terms),
        },
    )


def cmd_scan_delay(cfg: RunConfig, out: Path) -> None:
    if cfg.scan.sigma <= 0:
        raise ConfigError("scan.sigma must be set to a positive value")
    delays = cfg.scan.delay_values()
    if not delays:
        raise ConfigError("scan.delays is empty")
    spec = cfg.chain.spec()
    bases = cfg.analysis.explicit_bases()
    counts = cfg.analysis.counts_per_point or None
    points = analysis.delay_scan(
        spec, delays, cfg.scan.sigma, bases=bases, quality=cfg.chain.quality, counts_per_point=counts
    )
    write_table(
        out,
        "fig3_parity",
        ["delay", "overlap_s", "even_sum", "odd_sum", "visibility", "uncertainty"],
        [(p.delay, p.overlap, p.even_sum, p.odd_sum, p.visibility, p.uncertainty) for p in points],
    )
    order = analysis.outcome_order(points[0].histogram.bases)
    write_table(
        out,
        "fig4_amplitudes",
        ["delay"] + order,
        [[p.delay] + [p.histogram.value(o) for o in order] for p in points],
    )
    zero = min(points, key=lambda p: abs(p.delay))
    write_summary(
        out,
        "scan_summary",
        {
            "sigma": cfg.scan.sigma,
            "n_points": len(points),
            "visibility_at_zero_delay": zero.visibility,
            "even_at_zero_delay": zero.even_sum,
            "odd_at_zero_delay": zero.odd_sum,
            "max_visibility": max(p.visibility for p in points),
        },
    )


def cmd_montecarlo(cfg: RunConfig, out: Path) -> None:
    experiment = cfg.experiment.experiment()
    model = montecarlo.ChainOutcomeModel(
        spec=cfg.chain.spec(),
        inner_basis=cfg.analysis.inner(),
        overlap=cfg.chain.overlap(),
        quality=cfg.chain.quality,
        max_pairs=cfg.experiment.max_chain_pairs,
    )
    summary = montecarlo.run_timeline(experiment, model, log_events=cfg.experiment.log_events)
    lines = summary.to_lines()
    for n in sorted(summary.folds):
        rate = montecarlo.analytic_rate(experiment, n)
        lines.append(f"fold{2 * n}.analytic_rate_hz={format_value(rate)}")
    (out / "count_summary.txt").write_text("\n".join(lines) + "\n")
    if summary.events is not None:
        write_table(
            out,
            "event_log",
            ["slot", "detector", "timestamp"],
            [(e.slot, e.detector, e.timestamp) for e in summary.events],
        )


def cmd_verify_graph(cfg: RunConfig, out: Path) -> None:
    result = _build_chain(cfg)
    n_qubits = result.n_photons
    if cfg.graph.target == "star":
        target = graphs.star(n_qubits)
    elif cfg.graph.target == "branched_chain":
        target = graphs.branched_chain(cfg.chain.n_pairs)
    elif cfg.graph.target == "path":
        target = graphs.path(n_qubits)
    else:
        raise ConfigError("graph.target must be star, branched_chain, or path")
    state = graphs.to_qubits(result)
    lc = graphs.lc_equivalent(state, target, max_n=cfg.graph.max_search_qubits)
    entries = {
        "target": cfg.graph.target,
        "n_qubits": n_qubits,
        "edges": ";".join(f"{a}-{b}" for a, b in sorted(target.edges)),
        "found": lc.found,
    }
    if lc.found:
        for q, word in enumerate(lc.corrections):
            entries[f"correction.q{q}"] = word
    write_summary(out, "graph_certificate", entries)


def cmd_analyze(cfg: RunConfig, out: Path) -> None:
    from dataclasses import replace

    result = _build_chain(cfg)
    n_photons = result.n_photons
    # Population histogram: plain HV statistics without the pre-PBS rotation,
    # i.e. in the frame where the two GHZ amplitudes are product outcomes.
    population_spec = replace(cfg.chain.spec(), hwp_before_pbs=False)
    population = population_spec.build(cfg.chain.overlap())
    hv_bases = tuple([Basis.HV] * n_photons)
    if cfg.analysis.dominant_ratio > 0:
        hv_quality = analysis.white_noise_weight_for_ratio(cfg.analysis.dominant_ratio, n_photons)
    else:
        hv_quality = cfg.chain.quality
    hist_hv = analysis.histogram(population, hv_bases, quality=hv_quality)
    if cfg.analysis.counts_per_point:
        scale = cfg.analysis.counts_per_point
        rows = [(o, round(p * scale)) for o, p in hist_hv.probabilities().items()]
        write_table(out, "fig2_histogram", ["outcome", "count"], rows)
    else:
        rows = [(o, p) for o, p in hist_hv.probabilities().items()]
        write_table(out, "fig2_histogram", ["outcome", "probability"], rows)

    bases = cfg.analysis.explicit_bases() or analysis.default_scan_bases(cfg.chain.spec())
    hist_rot = analysis.histogram(result, bases, quality=cfg.chain.quality)
    if cfg.analysis.counts_per_point:
        counts = {
            o: float(round(p * cfg.analysis.counts_per_point))
            for o, p in hist_rot.probabilities().items()
        }
        hist_rot = analysis.Histogram(bases, counts, is_counts=True)
    vis = analysis.parity_visibility(hist_rot)
    bounds = analysis.fidelity_bounds(hist_hv, vis.visibility)
    check = analysis.violation_check(vis, n_photons)
    write_summary(
        out,
        "analysis_summary",
        {
            "n_photons": n_photons,
            "even_sum": vis.even_sum,
            "odd_sum": vis.odd_sum,
            "visibility": vis.visibility,
            "uncertainty": vis.uncertainty,
            "dominant_mass": bounds.dominant_mass,
            "fidelity_lower": bounds.lower,
            "fidelity_upper": bounds.upper,
            "mermin_threshold": check.threshold,
            "violation_margin": check.margin,
            "violates_local_realism": check.violates,
        },
    )


def cmd_rates(cfg: RunConfig, out: Path) -> None:
    experiment = cfg.experiment.experiment()
    rows = []
    for n in cfg.rates.n_pairs_list:
        rate = montecarlo.analytic_rate(experiment, int(n))
        rows.append((int(n), 2 * int(n), rate, rate * 3600.0))
    write_table(out, "analytic_rates", ["n_pairs", "n_photons", "rate_hz", "rate_per_hour"], rows)
    if cfg.rates.grid_search:
        shared = montecarlo.find_rate_operating_point(
            cfg.rates.fourfold_target_hz,
            cfg.rates.sixfold_target_per_hour / 3600.0,
            rep_rate=experiment.rep_rate,
            shared_pair_prob=True,
        )
        split = montecarlo.find_rate_operating_point(
            cfg.rates.fourfold_target_hz,
            cfg.rates.sixfold_target_per_hour / 3600.0,
            rep_rate=experiment.rep_rate,
            shared_pair_prob=False,
        )
        write_summary(
            out,
            "rate_search",
            {
                "fourfold_target_hz": cfg.rates.fourfold_target_hz,
                "sixfold_target_per_hour": cfg.rates.sixfold_target_per_hour,
                "shared_p.pair_prob": shared.pair_prob_fourfold,
                "shared_p.det_efficiency": shared.det_efficiency,
                "shared_p.delay_transmittance": shared.delay_transmittance,
                "shared_p.fourfold_hz": shared.fourfold_hz,
                "shared_p.sixfold_per_hour": shared.sixfold_hz * 3600.0,
                "shared_p.max_rel_deviation": shared.max_rel_deviation,
                "split_p.pair_prob_fourfold": split.pair_prob_fourfold,
                "split_p.pair_prob_sixfold": split.pair_prob_sixfold,
                "split_p.det_efficiency": split.det_efficiency,
                "split_p.delay_transmittance": split.delay_transmittance,
                "split_p.fourfold_hz": split.fourfold_hz,
                "split_p.sixfold_per_hour": split.sixfold_hz * 3600.0,
                "split_p.max_rel_deviation": split.max_rel_deviation,
            },
        )


_HANDLERS = {
    "build-state": cmd_build_state,
    "scan-delay": cmd_scan_delay,
    "montecarlo": cmd_montecarlo,
    "verify-graph": cmd_verify_graph,
    "analyze": cmd_analyze,
    "rates": cmd_rates,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timefuse",
        description="Simulate temporally multiplexed multi-photon entanglement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="TOML configuration file")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override experiment.rng_seed")
        cmd.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.experiment.rng_seed = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "effective_config.toml").write_text(to_toml(cfg))
        _HANDLERS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # model / runtime errors
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if args.verbose:
        print(f"wrote results to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
