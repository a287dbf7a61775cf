"""Instantaneous and sensing-averaged rates of SUs, eavesdroppers and PUs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .actions import ActionComposite, ReflectionConfig
from .channels import ChannelSet
from .scenario import ScenarioConfig
from .sensing import SensingReport, sense

TransmitMode = Literal["sensing_enhanced", "opportunistic"]


@dataclass(frozen=True)
class CaseRates:
    """Rates for (sensed, true) states; the second digit is the true PBS activity."""

    r00: float
    r10: float
    r01: float
    r11: float


@dataclass(frozen=True)
class RateReport:
    """Averaged rates of one frame."""

    su: NDArray[np.float64]  # (K,)
    eve: NDArray[np.float64]  # (M, K)
    pu: NDArray[np.float64]  # (D,)

    @property
    def max_eavesdrop(self) -> NDArray[np.float64]:
        """Strongest eavesdropping rate per SU; zero without eavesdroppers."""
        if self.eve.shape[0] == 0:
            return np.zeros_like(self.su)
        return self.eve.max(axis=0)

    @property
    def secrecy_margin(self) -> NDArray[np.float64]:
        """Unclamped per-SU secrecy ``R_k - max_m R_{m,k}``."""
        return self.su - self.max_eavesdrop

    @property
    def secrecy_per_su(self) -> NDArray[np.float64]:
        return np.maximum(self.secrecy_margin, 0.0)

    @property
    def secrecy(self) -> float:
        return float(self.secrecy_per_su.sum())


def pu_assist_irs(channels: ChannelSet, theta: ReflectionConfig, d: int) -> int:
    """IRS maximizing the PU's received PBS power under the current reflection."""
    beam = channels.pbs_beams[d]
    powers = [
        abs(channels.pbs_to_pu(d, z, theta.phi(z)) @ beam) ** 2
        for z in range(channels.pbs_irs.shape[0])
    ]
    return int(np.argmax(powers))


def _log_rate(signal: float, interference: float, noise: float) -> float:
    return float(np.log2(1.0 + signal / (interference + noise)))


def pbs_interference(
    channels: ChannelSet,
    action: ActionComposite,
    c: int,
    link: str,
    index: int,
) -> float:
    """Power leaked by active PBS beams on ``c`` into an SU or eavesdropper."""
    total = 0.0
    for d in np.flatnonzero(channels.occupancy[:, c]):
        z_d = pu_assist_irs(channels, action.theta, int(d))
        phi = action.theta.phi(z_d)
        path = (
            channels.pbs_to_su(index, z_d, phi)
            if link == "su"
            else channels.pbs_to_eve(index, z_d, phi)
        )
        total += abs(path @ channels.pbs_beams[d]) ** 2
    return total


def _case_rates(
    signal: float,
    interference: float,
    noise: float,
    time_share: float,
) -> CaseRates:
    sinr_by_true_state = {0: (signal, 0.0), 1: (signal, interference)}
    rates = {}
    for sensed in (0, 1):
        for true in (0, 1):
            s, i = sinr_by_true_state[true]
            rates[(sensed, true)] = time_share * _log_rate(s, i, noise)
    return CaseRates(rates[(0, 0)], rates[(1, 0)], rates[(0, 1)], rates[(1, 1)])


def su_rate_cases(
    channels: ChannelSet,
    action: ActionComposite,
    k: int,
    scenario: ScenarioConfig,
    power_scale: float = 1.0,
) -> CaseRates:
    """Rates of SU ``k`` in the four sensing cases on its assigned subchannel."""
    c = action.assignment.channel_of(k)
    z = action.assignment.irs_of(k)
    link = channels.sbs_to_su(k, z, action.theta.phi(z))
    signal = power_scale * abs(link @ action.beams[k]) ** 2
    interference = pbs_interference(channels, action, c, "su", k)
    time_share = 1.0 - action.tau / scenario.frame_s
    return _case_rates(signal, interference, scenario.noise_su_w, time_share)


def eve_rate_cases(
    channels: ChannelSet,
    action: ActionComposite,
    m: int,
    k: int,
    scenario: ScenarioConfig,
    power_scale: float = 1.0,
) -> CaseRates:
    """Rates at which eavesdropper ``m`` overhears SU ``k``."""
    c = action.assignment.channel_of(k)
    z = action.assignment.irs_of(k)
    link = channels.sbs_to_eve(m, z, action.theta.phi(z))
    signal = power_scale * abs(link @ action.beams[k]) ** 2
    interference = pbs_interference(channels, action, c, "eve", m)
    time_share = 1.0 - action.tau / scenario.frame_s
    return _case_rates(signal, interference, scenario.noise_eve_w, time_share)


def _opportunistic_scale(sensing: SensingReport, c: int) -> float:
    """Average-power reallocation when transmitting only in sensed-idle states."""
    idle = sensing.probs[c].sensed_idle
    return 1.0 / idle if idle > 0.0 else 0.0


def _average(cases: CaseRates, sensing: SensingReport, c: int, mode: TransmitMode) -> float:
    p = sensing.probs[c]
    if mode == "opportunistic":
        return p.p00 * cases.r00 + p.p01 * cases.r01
    return p.p00 * cases.r00 + p.p10 * cases.r10 + p.p01 * cases.r01 + p.p11 * cases.r11


def average_rates(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    scenario: ScenarioConfig,
    mode: TransmitMode = "sensing_enhanced",
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Probability-weighted SU rates (K,) and eavesdropping rates (M, K)."""
    k_count, m_count = scenario.n_su, scenario.n_eve
    su = np.zeros(k_count)
    eve = np.zeros((m_count, k_count))
    for k in range(k_count):
        c = action.assignment.channel_of(k)
        scale = _opportunistic_scale(sensing, c) if mode == "opportunistic" else 1.0
        if scale == 0.0:
            continue
        su[k] = _average(su_rate_cases(channels, action, k, scenario, scale), sensing, c, mode)
        for m in range(m_count):
            cases = eve_rate_cases(channels, action, m, k, scenario, scale)
            eve[m, k] = _average(cases, sensing, c, mode)
    return su, eve


def secrecy_rate(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    scenario: ScenarioConfig,
    mode: TransmitMode = "sensing_enhanced",
) -> float:
    """Sum over SUs of the positive part of legitimate minus strongest eavesdropping rate."""
    su, eve = average_rates(channels, action, sensing, scenario, mode)
    strongest = eve.max(axis=0) if eve.shape[0] else np.zeros_like(su)
    return float(np.maximum(su - strongest, 0.0).sum())


def pu_rate(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    d: int,
    scenario: ScenarioConfig,
    mode: TransmitMode = "sensing_enhanced",
) -> float:
    """Average rate of PU ``d`` on its licensed subchannel, with SU cross-interference."""
    c = scenario.licensed_subchannel(d)
    z_star = pu_assist_irs(channels, action.theta, d)
    signal = abs(channels.pbs_to_pu(d, z_star, action.theta.phi(z_star)) @ channels.pbs_beams[d]) ** 2

    leak = 0.0
    k = action.assignment.su_on(c)
    if k is not None:
        z_k = action.assignment.irs_of(k)
        leak = abs(channels.sbs_to_pu(d, z_k, action.theta.phi(z_k)) @ action.beams[k]) ** 2

    p = sensing.probs[c]
    noise = scenario.noise_pu_w
    if mode == "opportunistic":
        # SU silent whenever the subchannel is sensed busy
        scale = _opportunistic_scale(sensing, c)
        return p.p01 * _log_rate(signal, scale * leak, noise) + p.p11 * _log_rate(signal, 0.0, noise)
    return (p.p01 + p.p11) * _log_rate(signal, leak, noise)


def evaluate_action(
    channels: ChannelSet,
    action: ActionComposite,
    scenario: ScenarioConfig,
    mode: TransmitMode = "sensing_enhanced",
) -> tuple[SensingReport, RateReport]:
    """Sense with the action's reflection and sensing time, then average every rate."""
    sensing = sense(channels, action.theta, action.tau, scenario)
    su, eve = average_rates(channels, action, sensing, scenario, mode)
    pu = np.array([pu_rate(channels, action, sensing, d, scenario, mode) for d in range(scenario.n_pu)])
    return sensing, RateReport(su=su, eve=eve, pu=pu)
