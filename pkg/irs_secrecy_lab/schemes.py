"""Benchmark schemes and how each one constrains the hierarchical agent."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Literal

from .actions import ActionComposite, ReflectionConfig
from .config import ConfigError
from .options import OptionCatalog
from .rates import TransmitMode
from .scenario import ScenarioConfig, nearest_irs


class SchemeId(str, Enum):
    PROPOSED = "proposed"
    AO = "ao"
    WITHOUT_IRS = "without_irs"
    RANDOM_CHOICE = "random_choice"
    FIXED_IRS = "fixed_irs"
    OPPORTUNISTIC = "opportunistic"
    NEAREST_IRS = "nearest_irs"

    @classmethod
    def parse(cls, name: str | SchemeId) -> SchemeId:
        if isinstance(name, SchemeId):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError as e:
            available = ", ".join(s.value for s in cls)
            raise ConfigError(f"Unknown scheme: {name}. Available: {available}") from e


@dataclass(frozen=True)
class SchemeProfile:
    """
    Restrictions a scheme places on the learned decision maker.

    Attributes:
        reflection: ``learned`` keeps the decoded IRS configuration, ``off`` forces every
            amplitude to zero, ``identity`` freezes ``b=1, phi=0``
        option_policy: ``learned`` uses the D3QN, ``uniform`` draws the option at random
        pairing: ``nearest`` masks options to the geometrically closest IRS per SU
        transmit_mode: rate model used by the environment
        uses_agent: False for the optimization baseline
    """

    scheme: SchemeId
    reflection: Literal["learned", "off", "identity"] = "learned"
    option_policy: Literal["learned", "uniform"] = "learned"
    pairing: Literal["free", "nearest"] = "free"
    transmit_mode: TransmitMode = "sensing_enhanced"
    uses_agent: bool = True

    def constrain(self, action: ActionComposite, scenario: ScenarioConfig) -> ActionComposite:
        if self.reflection == "off":
            return action.replace_theta(ReflectionConfig.off(scenario.n_irs, scenario.n_elements))
        if self.reflection == "identity":
            return action.replace_theta(ReflectionConfig.identity(scenario.n_irs, scenario.n_elements))
        return action

    def allowed_options(self, catalog: OptionCatalog, scenario: ScenarioConfig) -> list[int] | None:
        if self.pairing == "nearest":
            pairing = tuple(nearest_irs(scenario, k) for k in range(scenario.n_su))
            return catalog.with_pairing(pairing)
        return None


PROFILES: dict[SchemeId, SchemeProfile] = {
    SchemeId.PROPOSED: SchemeProfile(SchemeId.PROPOSED),
    SchemeId.AO: SchemeProfile(SchemeId.AO, uses_agent=False),
    SchemeId.WITHOUT_IRS: SchemeProfile(SchemeId.WITHOUT_IRS, reflection="off"),
    SchemeId.RANDOM_CHOICE: SchemeProfile(SchemeId.RANDOM_CHOICE, option_policy="uniform"),
    SchemeId.FIXED_IRS: SchemeProfile(SchemeId.FIXED_IRS, reflection="identity"),
    SchemeId.OPPORTUNISTIC: SchemeProfile(SchemeId.OPPORTUNISTIC, transmit_mode="opportunistic"),
    SchemeId.NEAREST_IRS: SchemeProfile(SchemeId.NEAREST_IRS, pairing="nearest"),
}


def profile_for(scheme: str | SchemeId) -> SchemeProfile:
    return PROFILES[SchemeId.parse(scheme)]
