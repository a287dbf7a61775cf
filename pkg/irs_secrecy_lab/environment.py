"""Block-fading MDP over the secrecy-rate problem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .actions import ActionComposite, ReflectionConfig, uniform_beams
from .channels import ChannelSet, draw_channels
from .config import RewardConfig
from .constraints import ConstraintReport, check_constraints
from .logging_config import logger
from .numerics import make_rng
from .options import ActionCodec, OptionCatalog
from .rates import RateReport, TransmitMode, evaluate_action
from .scenario import ScenarioConfig
from .sensing import SensingReport

# Seed-sequence key of the stream drawing the neutral option at reset
RESET_STREAM = 1_000_003


@dataclass(frozen=True)
class StepInfo:
    """Diagnostics of one evaluated frame."""

    sensing: SensingReport
    rates: RateReport
    constraints: ConstraintReport
    action: ActionComposite


@dataclass(frozen=True)
class StepResult:
    next_state: NDArray[np.float64]
    reward: float
    info: StepInfo


def compute_reward(rates: RateReport, scenario: ScenarioConfig, reward: RewardConfig) -> float:
    """Unclamped secrecy margin plus penalties on per-SU secrecy and per-PU rate shortfalls."""
    margin = float(rates.secrecy_margin.sum())
    secrecy_short = np.minimum(rates.secrecy_per_su - scenario.secrecy_min_rate, 0.0).sum()
    pu_short = np.minimum(rates.pu - np.asarray(scenario.pu_min_rates), 0.0).sum()
    return margin + reward.secrecy_penalty * float(secrecy_short) + reward.pu_penalty * float(pu_short)


def state_dim(scenario: ScenarioConfig, n_options: int, action_dim: int) -> int:
    k, m = scenario.n_su, scenario.n_eve
    return (
        2 * scenario.n_sbs_antennas * k * (1 + m)
        + n_options
        + action_dim
        + k
        + scenario.n_pu
        + m
        + 1
    )


class SecrecyEnv:
    """
    One SBS serving SUs over shared subchannels, observed frame by frame.

    State layout, in order:
      * composite SBS-to-SU channels under the last reflection and pairing, real then
        imaginary, scaled by ``sqrt(budget / noise)`` and compressed with ``asinh`` (K x N_s each)
      * the same for every (eavesdropper, SU) pair (M x K x N_s each)
      * one-hot of the last option and the last continuous action vector
      * last SU rates, PU rates, per-eavesdropper strongest rate and the secrecy rate

    Channel draws come from ``make_rng(seed, episode, step)`` so a trajectory is a pure
    function of the seed and the actions taken.
    """

    def __init__(
        self,
        scenario: ScenarioConfig,
        reward: RewardConfig | None = None,
        seed: int = 0,
        mode: TransmitMode = "sensing_enhanced",
        catalog: OptionCatalog | None = None,
    ):
        self.scenario = scenario
        self.reward_config = reward or RewardConfig()
        self.seed = seed
        self.mode = mode
        self.catalog = catalog or OptionCatalog(scenario)
        self.codec = ActionCodec(scenario, self.catalog)
        self.episode = 0
        self.step_index = 0
        self.channels: ChannelSet | None = None
        self._state: NDArray[np.float64] | None = None

    @property
    def state_dim(self) -> int:
        return state_dim(self.scenario, len(self.catalog), self.codec.dim)

    @property
    def action_dim(self) -> int:
        return self.codec.dim

    @property
    def state(self) -> NDArray[np.float64]:
        if self._state is None:
            raise RuntimeError("Environment must be reset before use")
        return self._state

    def neutral_action(self, episode: int) -> tuple[int, ActionComposite]:
        """Random option with identity reflection, equal-power beams and a tenth of the frame sensing."""
        scenario = self.scenario
        option = int(make_rng(self.seed, episode, RESET_STREAM).integers(len(self.catalog)))
        action = ActionComposite(
            assignment=self.catalog.assignment(option),
            theta=ReflectionConfig.identity(scenario.n_irs, scenario.n_elements),
            beams=uniform_beams(scenario),
            tau=scenario.frame_s / 10.0,
        )
        return option, action

    def reset(self, episode: int = 0) -> NDArray[np.float64]:
        self.episode = episode
        self.step_index = 0
        self.channels = draw_channels(self.scenario, make_rng(self.seed, episode, 0))
        option, action = self.neutral_action(episode)
        _, rates = evaluate_action(self.channels, action, self.scenario, self.mode)
        self._state = self.build_state(self.channels, option, action, self.codec.encode(action), rates)
        logger.debug(f"Reset episode {episode} (seed {self.seed}) with option {option}")
        return self._state

    def evaluate(self, action: ActionComposite) -> StepInfo:
        """Sensing, rates and constraints of ``action`` on the current block, without advancing."""
        if self.channels is None:
            raise RuntimeError("Environment must be reset before use")
        sensing, rates = evaluate_action(self.channels, action, self.scenario, self.mode)
        constraints = check_constraints(self.channels, action, sensing, self.scenario, rates)
        return StepInfo(sensing, rates, constraints, action)

    def step(
        self,
        action: ActionComposite,
        option: int | None = None,
        continuous: NDArray[np.float64] | None = None,
    ) -> StepResult:
        """Evaluate ``action`` on the current block, then draw the next block."""
        info = self.evaluate(action)
        reward = compute_reward(info.rates, self.scenario, self.reward_config)

        if option is None:
            option = self.catalog.index_of(action.assignment)
        if continuous is None:
            continuous = self.codec.encode(action)

        self.step_index += 1
        self.channels = draw_channels(
            self.scenario, make_rng(self.seed, self.episode, self.step_index)
        )
        self._state = self.build_state(self.channels, option, action, continuous, info.rates)
        return StepResult(self._state, reward, info)

    def build_state(
        self,
        channels: ChannelSet,
        option: int,
        action: ActionComposite,
        continuous: NDArray[np.float64],
        rates: RateReport,
    ) -> NDArray[np.float64]:
        scenario = self.scenario
        theta = action.theta
        pairing = action.assignment.pairing
        su_scale = np.sqrt(scenario.energy_budget / scenario.noise_su_w)
        eve_scale = np.sqrt(scenario.energy_budget / scenario.noise_eve_w)

        su = np.array(
            [channels.sbs_to_su(k, z, theta.phi(z)) for k, z in enumerate(pairing)]
        ).reshape(scenario.n_su, scenario.n_sbs_antennas) * su_scale
        eve = np.array(
            [
                channels.sbs_to_eve(m, z, theta.phi(z))
                for m in range(scenario.n_eve)
                for z in pairing
            ]
        ).reshape(scenario.n_eve * scenario.n_su, scenario.n_sbs_antennas) * eve_scale

        one_hot = np.zeros(len(self.catalog))
        one_hot[option] = 1.0
        strongest = rates.eve.max(axis=1) if rates.eve.size else np.zeros(scenario.n_eve)

        return np.concatenate(
            [
                np.arcsinh(su.real).ravel(),
                np.arcsinh(su.imag).ravel(),
                np.arcsinh(eve.real).ravel(),
                np.arcsinh(eve.imag).ravel(),
                one_hot,
                np.asarray(continuous, dtype=float),
                rates.su,
                rates.pu,
                strongest,
                [rates.secrecy],
            ]
        )
