"""Spacelike-separation timing budgets.

All arithmetic is done in integer tenths of a nanosecond so the published
margins are reproduced exactly; uncertainties compose linearly (worst case),
never in quadrature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DataFormatError, DomainError

SPEED_OF_LIGHT = 299792458.0  # m/s

__all__ = [
    "TimingSegment",
    "TimingChain",
    "SeparationScenario",
    "MarginResult",
    "chain_total",
    "light_travel_floor",
    "separation_margin",
    "symmetric_margin",
    "load_config",
    "check_config",
    "PAPER_CONFIG",
]


def _tenths(ns: float) -> int:
    return round(ns * 10)


def _ns(tenths: int) -> float:
    return tenths / 10.0


@dataclass(frozen=True)
class TimingSegment:
    label: str
    duration_ns: float
    uncertainty_ns: float = 0.0

    def __post_init__(self):
        if self.duration_ns < 0 or self.uncertainty_ns < 0:
            raise DomainError("segment times must be non-negative")


@dataclass(frozen=True)
class TimingChain:
    label: str
    segments: tuple[TimingSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise DomainError("timing chain needs at least one segment")

    @classmethod
    def from_pairs(cls, label, pairs):
        return cls(label, tuple(TimingSegment(*p) for p in pairs))


def chain_total(chain: TimingChain) -> tuple[float, float]:
    """Total duration and worst-case (linear) uncertainty, in ns."""
    total = sum(_tenths(s.duration_ns) for s in chain.segments)
    unc = sum(_tenths(s.uncertainty_ns) for s in chain.segments)
    return _ns(total), _ns(unc)


@dataclass(frozen=True)
class SeparationScenario:
    """One directed check: remote setting choice versus local readout end."""

    label: str
    distance_m: float
    position_uncertainty_m: float = 0.0
    start_offset_ns: float = 0.0   # positive when the remote side starts earlier
    offset_uncertainty_ns: float = 0.0
    measurement_ns: float = 0.0
    measurement_uncertainty_ns: float = 0.0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise DomainError("distance must be positive")
        if min(self.position_uncertainty_m, self.offset_uncertainty_ns,
               self.measurement_uncertainty_ns) < 0:
            raise DomainError("uncertainties must be non-negative")


def light_travel_floor(scenario: SeparationScenario) -> float:
    """Minimal luminal travel time (ns, 0.1 ns resolution), worst-case positions."""
    d = scenario.distance_m - 2.0 * scenario.position_uncertainty_m
    if d <= 0:
        raise DomainError("position uncertainty swallows the whole distance")
    return _ns(_tenths(d / SPEED_OF_LIGHT * 1e9))


@dataclass(frozen=True)
class MarginResult:
    label: str
    light_floor_ns: float
    measurement_total_ns: float
    margin_ns: float

    @property
    def spacelike(self) -> bool:
        return self.margin_ns > 0


def separation_margin(scenario: SeparationScenario) -> MarginResult:
    """Remaining margin before the remote choice could reach the local result.

    margin = light floor - start offset - offset uncertainty
             - (measurement duration + its uncertainty).
    A negative margin is returned (flagged), not raised.
    """
    floor = _tenths(light_travel_floor(scenario))
    meas = _tenths(scenario.measurement_ns) + _tenths(scenario.measurement_uncertainty_ns)
    margin = (floor - _tenths(scenario.start_offset_ns)
              - _tenths(scenario.offset_uncertainty_ns) - meas)
    return MarginResult(
        label=scenario.label,
        light_floor_ns=_ns(floor),
        measurement_total_ns=_ns(meas),
        margin_ns=_ns(margin),
    )


def symmetric_margin(m1: MarginResult, m2: MarginResult) -> float:
    """Common margin after delaying the earlier side to equalize both."""
    return _ns((_tenths(m1.margin_ns) + _tenths(m2.margin_ns)) // 2)


# --- published configuration and config-file handling -------------------

PAPER_CONFIG = {
    "chains": [
        {"label": "trap1", "segments": [
            ["rng request", 80, 0],
            ["aom and optical path", 217, 4],
            ["ionization and ion flight", 570, 3],
            ["detector electronics", 80, 1],
        ]},
        {"label": "trap2", "segments": [
            ["rng request", 80, 0],
            ["aom and optical path", 204, 4],
            ["ionization and ion flight", 725, 3],
            ["detector electronics", 84, 1],
        ]},
    ],
    "scenarios": [
        {"label": "qrng2 to trap1", "distance_m": 398.0,
         "position_uncertainty_m": 0.5, "start_offset_ns": 28.5,
         "offset_uncertainty_ns": 7.0, "measurement_ns": 947.0,
         "measurement_uncertainty_ns": 1.0},
        {"label": "qrng1 to trap2", "distance_m": 402.7,
         "position_uncertainty_m": 0.5, "start_offset_ns": -28.5,
         "offset_uncertainty_ns": 7.0, "measurement_ns": 1093.0,
         "measurement_uncertainty_ns": 1.0},
    ],
}


def load_config(path) -> tuple[list[TimingChain], list[SeparationScenario]]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> tuple[list[TimingChain], list[SeparationScenario]]:
    try:
        chains = [TimingChain.from_pairs(c["label"], c["segments"])
                  for c in data.get("chains", [])]
        scenarios = [SeparationScenario(**s) for s in data.get("scenarios", [])]
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"bad spacetime config: {exc}") from exc
    return chains, scenarios


def check_config(data: dict | None = None):
    """Evaluate chains and margins; returns (chain totals, margin results)."""
    chains, scenarios = parse_config(PAPER_CONFIG if data is None else data)
    totals = [(c.label, *chain_total(c)) for c in chains]
    margins = [separation_margin(s) for s in scenarios]
    return totals, margins
