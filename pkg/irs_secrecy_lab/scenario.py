"""Scenario definitions: geometry, radio parameters and the shipped presets."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .config import ConfigError, dataclass_from_dict, read_document, to_plain

PRESET_DIR = Path(__file__).parent / "presets"
PRESET_VERSION = 1

Point = tuple[float, float, float]


class ScenarioError(ConfigError):
    """Raised when a scenario violates its structural invariants."""


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Immutable experiment definition.

    Counts of IRSs, PUs, SUs and eavesdroppers follow from the position lists.
    Powers are in dBm as configured and exposed in watts through properties.
    """

    name: str = "default"
    n_pbs_antennas: int = 4
    n_sbs_antennas: int = 6
    n_elements: int = 36
    n_subchannels: int = 2

    pbs_position: Point = (300.0, 0.0, 50.0)
    sbs_position: Point = (0.0, 0.0, 50.0)
    irs_positions: tuple[Point, ...] = ((0.0, 160.0, 0.0), (150.0, 0.0, 0.0), (80.0, 80.0, 20.0))
    pu_positions: tuple[Point, ...] = ((270.0, 65.0, 0.0), (250.0, 10.0, 0.0))
    su_positions: tuple[Point, ...] = ((10.0, 150.0, 0.0), (130.0, 40.0, 0.0))
    # Estimated placements, not given as coordinates for the default layout
    eve_positions: tuple[Point, ...] = ((30.0, 130.0, 0.0), (150.0, 20.0, 0.0), (220.0, 80.0, 0.0))

    sbs_power_dbm: float = 30.0
    pbs_power_dbm: float = 30.0  # per subchannel
    noise_su_w: float = 0.01
    noise_pu_w: float = 0.01
    noise_eve_w: float = 0.01
    noise_sensing_w: float = 0.01

    sampling_rate_hz: float = 6e6
    frame_s: float = 0.1
    target_pd: float = 0.9
    max_pf: float = 0.1
    idle_priors: tuple[float, ...] = (0.8, 0.8)

    exponent_bu: float = 3.75
    exponent_br: float = 2.2
    exponent_ru: float = 2.2
    pl0_db: float = 30.0
    reference_distance_m: float = 1.0
    rician_k: float = 3.0

    pu_min_rates: tuple[float, ...] = (0.5, 0.5)
    secrecy_min_rate: float = 0.1
    interference_cap_w: float = 0.01

    @property
    def n_irs(self) -> int:
        return len(self.irs_positions)

    @property
    def n_pu(self) -> int:
        return len(self.pu_positions)

    @property
    def n_su(self) -> int:
        return len(self.su_positions)

    @property
    def n_eve(self) -> int:
        return len(self.eve_positions)

    @property
    def sbs_power_w(self) -> float:
        return dbm_to_watts(self.sbs_power_dbm)

    @property
    def pbs_power_w(self) -> float:
        return dbm_to_watts(self.pbs_power_dbm)

    @property
    def energy_budget(self) -> float:
        """Bound on the summed squared beam norms (time-power product)."""
        return self.sbs_power_w * self.frame_s

    def licensed_subchannel(self, d: int) -> int:
        """Subchannel on which PU ``d`` is licensed."""
        return d % self.n_subchannels

    def licensed_pus(self, c: int) -> list[int]:
        return [d for d in range(self.n_pu) if self.licensed_subchannel(d) == c]

    def validate(self) -> None:
        """Check structural invariants, raising ScenarioError on the first violation."""
        counts = {
            "n_pbs_antennas": self.n_pbs_antennas,
            "n_sbs_antennas": self.n_sbs_antennas,
            "n_elements": self.n_elements,
            "n_subchannels": self.n_subchannels,
            "irs_positions": self.n_irs,
            "pu_positions": self.n_pu,
            "su_positions": self.n_su,
        }
        for name, value in counts.items():
            if value < 1:
                raise ScenarioError(f"{self.name}: {name} must provide at least one entry")
        if self.n_su > self.n_subchannels:
            raise ScenarioError(
                f"{self.name}: {self.n_su} SUs cannot each occupy one of "
                f"{self.n_subchannels} subchannels"
            )
        if len(self.idle_priors) != self.n_subchannels:
            raise ScenarioError(f"{self.name}: idle_priors needs one entry per subchannel")
        if len(self.pu_min_rates) != self.n_pu:
            raise ScenarioError(f"{self.name}: pu_min_rates needs one entry per PU")
        for name, value in (("target_pd", self.target_pd), ("max_pf", self.max_pf)):
            if not 0.0 < value < 1.0:
                raise ScenarioError(f"{self.name}: {name} must lie in (0, 1)")
        if any(not 0.0 < p < 1.0 for p in self.idle_priors):
            raise ScenarioError(f"{self.name}: idle_priors must lie in (0, 1)")
        if self.frame_s <= 0 or self.sampling_rate_hz <= 0:
            raise ScenarioError(f"{self.name}: frame_s and sampling_rate_hz must be positive")
        noises = (self.noise_su_w, self.noise_pu_w, self.noise_eve_w, self.noise_sensing_w)
        if min(noises) <= 0 or self.interference_cap_w <= 0:
            raise ScenarioError(f"{self.name}: noise variances and interference cap must be positive")
        if self.rician_k < 0 or self.reference_distance_m <= 0:
            raise ScenarioError(f"{self.name}: rician_k must be >= 0 and reference distance > 0")
        if self.secrecy_min_rate < 0 or min(self.pu_min_rates) < 0:
            raise ScenarioError(f"{self.name}: minimum rates must be non-negative")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def scenario_fingerprint(scenario: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form of every physical field (name excluded)."""
    payload = to_plain(scenario)
    payload.pop("name", None)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def available_presets() -> list[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.yaml"))


def _broadcast(data: dict[str, Any], key: str, length: int) -> None:
    value = data.get(key)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        data[key] = [float(value)] * length


def scenario_from_dict(data: dict[str, Any], name: str | None = None) -> ScenarioConfig:
    """Build and validate a scenario; scalar priors and PU rate floors are broadcast."""
    data = dict(data)
    version = data.pop("preset_version", PRESET_VERSION)
    if version != PRESET_VERSION:
        raise ScenarioError(f"Unsupported preset_version {version}, expected {PRESET_VERSION}")

    defaults = ScenarioConfig()
    n_subchannels = data.get("n_subchannels", defaults.n_subchannels)
    n_pu = len(data.get("pu_positions", defaults.pu_positions))
    _broadcast(data, "idle_priors", int(n_subchannels))
    _broadcast(data, "pu_min_rates", n_pu)
    if name is not None and "name" not in data:
        data["name"] = name

    scenario = dataclass_from_dict(ScenarioConfig, data)
    scenario.validate()
    return scenario


def load_scenario(reference: str | Path, overrides: dict[str, Any] | None = None) -> ScenarioConfig:
    """
    Load a scenario from a preset name or a YAML/JSON path.

    Args:
        reference: Preset name (see ``available_presets``) or file path
        overrides: Field values applied on top of the document, e.g. ``{"n_elements": 16}``
    """
    reference = str(reference)
    if reference in available_presets():
        path = PRESET_DIR / f"{reference}.yaml"
        name = reference
    else:
        path = Path(reference)
        name = path.stem
    data = read_document(path)
    data.update(overrides or {})
    return scenario_from_dict(data, name=name)


def save_scenario(scenario: ScenarioConfig, path: Path) -> None:
    """Write a scenario document that ``load_scenario`` reads back unchanged."""
    payload = {"preset_version": PRESET_VERSION, **to_plain(scenario)}
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.dump(payload, f, default_flow_style=None, sort_keys=False)


def with_overrides(scenario: ScenarioConfig, **changes: Any) -> ScenarioConfig:
    """Copy of ``scenario`` with fields replaced and invariants re-checked."""
    updated = dataclasses.replace(scenario, **changes)
    updated.validate()
    return updated


def nearest_irs(scenario: ScenarioConfig, k: int) -> int:
    """Index of the IRS closest to SU ``k``, lowest index on ties."""
    su = scenario.su_positions[k]
    distances = [math.dist(su, irs) for irs in scenario.irs_positions]
    return min(range(len(distances)), key=lambda z: (distances[z], z))
