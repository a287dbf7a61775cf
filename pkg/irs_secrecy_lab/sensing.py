"""Energy-detection spectrum sensing at the SBS, assisted by the best IRS per subchannel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .actions import ReflectionConfig
from .channels import ChannelSet
from .numerics import q_function, q_inverse
from .scenario import ScenarioConfig


@dataclass(frozen=True)
class JointProbs:
    """Probabilities of (sensed state, true state); ``p01`` is sensed idle while busy."""

    p00: float
    p01: float
    p10: float
    p11: float

    @property
    def sensed_idle(self) -> float:
        return self.p00 + self.p01

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p00, self.p01, self.p10, self.p11)


@dataclass(frozen=True)
class SensingReport:
    """Per-subchannel sensing outcome."""

    irs: tuple[int, ...]
    gamma: tuple[float, ...]
    threshold: tuple[float, ...]
    false_alarm: tuple[float, ...]
    probs: tuple[JointProbs, ...]

    def active(self, c: int) -> bool:
        """Whether the PBS signal on ``c`` has non-zero sensing SNR."""
        return self.gamma[c] > 0.0


def _check_tau(tau: float, scenario: ScenarioConfig) -> None:
    if not 0.0 < tau < scenario.frame_s:
        raise ValueError(f"Sensing time {tau} s must lie strictly inside (0, {scenario.frame_s})")


def sensing_snr(
    channels: ChannelSet,
    theta: ReflectionConfig,
    z: int,
    c: int,
    scenario: ScenarioConfig,
) -> float:
    """Sensing SNR through IRS ``z`` on subchannel ``c``; zero when no PBS beam serves ``c``."""
    beam = channels.subchannel_beam(c, scenario)
    if beam is None:
        return 0.0
    alpha = float(np.sum(np.abs(beam) ** 2)) / scenario.noise_sensing_w
    if alpha == 0.0:
        return 0.0
    matrix = channels.sensing_matrix(z, theta.phi(z))
    return float(np.sum(np.abs(matrix) ** 2)) * alpha


def detection_threshold(gamma: float, tau: float, scenario: ScenarioConfig) -> float:
    """Energy threshold meeting the target detection probability."""
    _check_tau(tau, scenario)
    samples = tau * scenario.sampling_rate_hz
    if samples < 1.0:
        raise ValueError(f"Sensing time {tau} s yields fewer than one sample")
    n_s = scenario.n_sbs_antennas
    spread = q_inverse(scenario.target_pd) * math.sqrt((2.0 * gamma + n_s) / samples)
    return (spread + gamma + n_s) * scenario.noise_sensing_w


def false_alarm_prob(
    gamma: float | NDArray[np.float64],
    tau: float | NDArray[np.float64],
    scenario: ScenarioConfig,
) -> float | NDArray[np.float64]:
    """False-alarm probability under the detection-probability-constrained threshold."""
    tau_arr = np.asarray(tau, dtype=float)
    if np.any((tau_arr <= 0.0) | (tau_arr >= scenario.frame_s)):
        raise ValueError(f"Sensing time must lie strictly inside (0, {scenario.frame_s})")
    gamma_arr = np.asarray(gamma, dtype=float)
    n_s = scenario.n_sbs_antennas
    argument = np.sqrt((2.0 * gamma_arr + 1.0) / n_s) * q_inverse(scenario.target_pd) + np.sqrt(
        tau_arr * scenario.sampling_rate_hz / n_s
    ) * gamma_arr
    return q_function(argument)


def joint_state_probs(false_alarm: float, scenario: ScenarioConfig, c: int) -> JointProbs:
    """Combine the prior of subchannel ``c`` with the detector's operating point."""
    if not 0.0 <= false_alarm <= 1.0:
        raise ValueError(f"False-alarm probability {false_alarm} outside [0, 1]")
    idle = scenario.idle_priors[c]
    busy = 1.0 - idle
    pd = scenario.target_pd
    return JointProbs(
        p00=idle * (1.0 - false_alarm),
        p01=busy * (1.0 - pd),
        p10=idle * false_alarm,
        p11=busy * pd,
    )


def sense(
    channels: ChannelSet,
    theta: ReflectionConfig,
    tau: float,
    scenario: ScenarioConfig,
) -> SensingReport:
    """Sense every subchannel with the IRS maximizing its sensing SNR (lowest index on ties)."""
    irs, gammas, thresholds, pfs, probs = [], [], [], [], []
    for c in range(scenario.n_subchannels):
        snrs = [sensing_snr(channels, theta, z, c, scenario) for z in range(scenario.n_irs)]
        best = int(np.argmax(snrs))
        gamma = snrs[best]
        pf = float(false_alarm_prob(gamma, tau, scenario))
        irs.append(best)
        gammas.append(gamma)
        thresholds.append(detection_threshold(gamma, tau, scenario))
        pfs.append(pf)
        probs.append(joint_state_probs(pf, scenario, c))
    return SensingReport(tuple(irs), tuple(gammas), tuple(thresholds), tuple(pfs), tuple(probs))
