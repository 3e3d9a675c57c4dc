"""Run configuration: one TOML file with nested sections, strictly validated.

Unknown sections or keys are rejected so a typo in a physics parameter fails
loudly instead of silently running defaults.  The effective (defaults
resolved) configuration can be serialized back to TOML; re-running from that
echo reproduces the original run byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .analysis import Basis
from .fusion import ChainSpec, OverlapModel, PHI_PLUS, PSI_PLUS, PairKind, phi_with_phase
from .montecarlo import ExperimentConfig


class ConfigError(ValueError):
    pass


PAIR_KINDS = ("phi_plus", "psi_plus", "phi_i", "phi_phase")


@dataclass
class ChainSection:
    n_pairs: int = 2
    pair_kind: str = "phi_plus"
    pair_phase: float = 0.0
    hwp_before_pbs: bool = False
    delay_slots: int = 8
    overlap_s: float = 1.0
    quality: float = 1.0

    def kind(self) -> PairKind:
        if self.pair_kind == "phi_plus":
            return PHI_PLUS
        if self.pair_kind == "psi_plus":
            return PSI_PLUS
        if self.pair_kind == "phi_i":
            return phi_with_phase(math.pi / 2.0)
        if self.pair_kind == "phi_phase":
            return phi_with_phase(self.pair_phase)
        raise ConfigError(f"pair_kind must be one of {PAIR_KINDS}")

    def spec(self) -> ChainSpec:
        return ChainSpec(
            n_pairs=self.n_pairs,
            kind=self.kind(),
            hwp_before_pbs=self.hwp_before_pbs,
            delay_slots=self.delay_slots,
        )

    def overlap(self) -> OverlapModel:
        return OverlapModel(self.overlap_s)


@dataclass
class AnalysisSection:
    inner_basis: str = "PM"
    bases: list[str] = field(default_factory=list)
    counts_per_point: int = 0
    dominant_ratio: float = 0.0

    def inner(self) -> Basis:
        return _parse_basis(self.inner_basis)

    def explicit_bases(self) -> tuple[Basis, ...] | None:
        if not self.bases:
            return None
        return tuple(_parse_basis(b) for b in self.bases)


@dataclass
class ScanSection:
    delays: list[float] = field(default_factory=list)
    delay_range: list[float] = field(default_factory=list)
    sigma: float = 0.0

    def delay_values(self) -> list[float]:
        if self.delays and self.delay_range:
            raise ConfigError("give either scan.delays or scan.delay_range, not both")
        if self.delays:
            return [float(d) for d in self.delays]
        if self.delay_range:
            if len(self.delay_range) != 3:
                raise ConfigError("scan.delay_range must be [min, max, n_points]")
            lo, hi, n = self.delay_range
            n = int(n)
            if n < 1:
                raise ConfigError("scan.delay_range needs at least one point")
            if n == 1:
                return [float(lo)]
            stepw = (hi - lo) / (n - 1)
            return [lo + i * stepw for i in range(n)]
        raise ConfigError("scan section needs delays or delay_range")


@dataclass
class ExperimentSection:
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
    max_chain_pairs: int = 3
    log_events: bool = False

    def experiment(self, seed_override: int | None = None) -> ExperimentConfig:
        return ExperimentConfig(
            rep_rate=self.rep_rate,
            pair_prob=self.pair_prob,
            delay_slots=self.delay_slots,
            delay_time=self.delay_time,
            delay_transmittance=self.delay_transmittance,
            det_efficiency=self.det_efficiency,
            dead_time=self.dead_time,
            double_pair_factor=self.double_pair_factor,
            duration=self.duration,
            rng_seed=self.rng_seed if seed_override is None else seed_override,
        )


@dataclass
class GraphSection:
    target: str = "star"
    max_search_qubits: int = 6


@dataclass
class RatesSection:
    n_pairs_list: list[int] = field(default_factory=lambda: [2, 3])
    grid_search: bool = False
    fourfold_target_hz: float = 13.0
    sixfold_target_per_hour: float = 30.0


_SECTIONS = {
    "chain": ChainSection,
    "analysis": AnalysisSection,
    "scan": ScanSection,
    "experiment": ExperimentSection,
    "graph": GraphSection,
    "rates": RatesSection,
}


@dataclass
class RunConfig:
    chain: ChainSection = field(default_factory=ChainSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    scan: ScanSection = field(default_factory=ScanSection)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    graph: GraphSection = field(default_factory=GraphSection)
    rates: RatesSection = field(default_factory=RatesSection)


def _parse_basis(name: str) -> Basis:
    try:
        return Basis[name.upper()]
    except KeyError:
        raise ConfigError(f"unknown basis {name!r}; expected HV, PM, or RL") from None


def _coerce(section: str, name: str, expected, value):
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is int and isinstance(value, bool):
        raise ConfigError(f"{section}.{name} must be an integer")
    if expected is list:
        if not isinstance(value, list):
            raise ConfigError(f"{section}.{name} must be a list")
        return value
    if not isinstance(value, expected):
        raise ConfigError(
            f"{section}.{name} must be {expected.__name__}, got {type(value).__name__}"
        )
    return value


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = RunConfig()
    for section_name, cls in _SECTIONS.items():
        raw = data.get(section_name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"section [{section_name}] must be a table")
        known = {f.name: f.type for f in dataclass_fields(cls)}
        bad = set(raw) - set(known)
        if bad:
            raise ConfigError(f"unknown keys in [{section_name}]: {sorted(bad)}")
        target = getattr(cfg, section_name)
        for key, value in raw.items():
            current = getattr(target, key)
            expected = list if isinstance(current, list) else type(current)
            setattr(target, key, _coerce(section_name, key, expected, value))
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return parse_config(data)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)}")


def to_toml(cfg: RunConfig) -> str:
    """Serialize the effective configuration (all defaults resolved)."""
    lines: list[str] = []
    for section_name, cls in _SECTIONS.items():
        lines.append(f"[{section_name}]")
        section = getattr(cfg, section_name)
        for f in dataclass_fields(cls):
            lines.append(f"{f.name} = {_toml_value(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)
