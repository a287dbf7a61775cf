"""Constraint report of the secrecy-rate problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .actions import TWO_PI, ActionComposite
from .channels import ChannelSet
from .rates import RateReport, pu_rate
from .scenario import ScenarioConfig
from .sensing import SensingReport

# Relative slack tolerated on the energy budget after radial projection
ENERGY_RTOL = 1e-12


@dataclass(frozen=True)
class ConstraintReport:
    """Signed slacks (non-negative when satisfied) and validity flags."""

    pu_rate: NDArray[np.float64]  # C1 per PU
    false_alarm: float  # C2, worst sensed subchannel
    energy: float  # C3
    reflection: float  # C4/C5 amplitude bounds
    phases_valid: bool  # C5 phase range
    subchannels_valid: bool  # C6
    pairing_valid: bool  # C7
    interference: NDArray[np.float64]  # AO interference cap per subchannel
    energy_budget: float

    @property
    def min_pu_rate(self) -> float:
        return float(self.pu_rate.min()) if self.pu_rate.size else math.inf

    def structural_ok(self) -> bool:
        """C3 to C7, the constraints every emitted action satisfies by construction."""
        return (
            self.energy >= -ENERGY_RTOL * self.energy_budget
            and self.reflection >= 0.0
            and self.phases_valid
            and self.subchannels_valid
            and self.pairing_valid
        )

    def sensing_ok(self) -> bool:
        return self.false_alarm >= 0.0

    def is_feasible(self) -> bool:
        return self.structural_ok() and self.sensing_ok() and self.min_pu_rate >= 0.0


def check_constraints(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    scenario: ScenarioConfig,
    rates: RateReport | None = None,
) -> ConstraintReport:
    """Evaluate every constraint of the frame for ``action``."""
    assignment = action.assignment
    if rates is not None:
        pu_rates = np.asarray(rates.pu, dtype=float)
    else:
        pu_rates = np.array(
            [pu_rate(channels, action, sensing, d, scenario) for d in range(scenario.n_pu)]
        )
    pu_slack = pu_rates - np.asarray(scenario.pu_min_rates)

    active = [c for c in range(scenario.n_subchannels) if sensing.active(c)]
    if active:
        false_alarm = scenario.max_pf - max(sensing.false_alarm[c] for c in active)
    else:
        false_alarm = scenario.max_pf

    amplitudes, phases = action.theta.amplitudes, action.theta.phases
    reflection = float(min(amplitudes.min(), 1.0 - amplitudes.max()))
    phases_valid = bool(np.all(phases >= 0.0) and np.all(phases < TWO_PI))

    subchannels_valid = assignment.subchannels_valid()
    pairing_valid = assignment.pairing_valid()

    interference = np.full(scenario.n_subchannels, scenario.interference_cap_w)
    if subchannels_valid and pairing_valid:
        interference = interference_slack(channels, action, sensing, scenario)

    return ConstraintReport(
        pu_rate=pu_slack,
        false_alarm=float(false_alarm),
        energy=scenario.energy_budget - action.beam_energy,
        reflection=reflection,
        phases_valid=phases_valid,
        subchannels_valid=subchannels_valid,
        pairing_valid=pairing_valid,
        interference=interference,
        energy_budget=scenario.energy_budget,
    )


def interference_slack(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    scenario: ScenarioConfig,
) -> NDArray[np.float64]:
    """Cap minus the average SU power leaked into PUs licensed on each subchannel."""
    time_share = 1.0 - action.tau / scenario.frame_s
    slack = np.full(scenario.n_subchannels, scenario.interference_cap_w)
    for c in range(scenario.n_subchannels):
        k = action.assignment.su_on(c)
        if k is None:
            continue
        z = action.assignment.irs_of(k)
        busy = sensing.probs[c].p01 + sensing.probs[c].p11
        worst = 0.0
        for d in scenario.licensed_pus(c):
            leak = abs(channels.sbs_to_pu(d, z, action.theta.phi(z)) @ action.beams[k]) ** 2
            worst = max(worst, time_share * busy * leak)
        slack[c] = scenario.interference_cap_w - worst
    return slack
