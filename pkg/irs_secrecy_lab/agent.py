"""
Hierarchical decision maker: a D3QN picks the option (subchannels and IRS pairing),
a SAC conditioned on that option picks reflection, beams and sensing time.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import torch
import torch.nn.functional as F
from numpy.typing import NDArray

from .actions import ActionComposite
from .config import ConfigError, RewardConfig, TrainConfig, dataclass_from_dict, to_plain
from .d3qn import D3qnLearner, epsilon_greedy_select
from .environment import SecrecyEnv, state_dim
from .logging_config import logger
from .metrics import MetricsRow
from .numerics import make_rng
from .options import ActionCodec, OptionCatalog
from .replay import Experience, ReplayBuffer
from .sac import SacLearner
from .scenario import ScenarioConfig, scenario_fingerprint
from .schemes import PROFILES, SchemeId, SchemeProfile

AGENT_FORMAT_VERSION = 1
AGENT_STREAM = 2_000_003


class DivergenceError(RuntimeError):
    """A learner produced a non-finite loss."""


class AgentFormatError(ValueError):
    """An agent file is unreadable, of another format version or built for another scenario."""


@dataclass(frozen=True)
class Decision:
    option: int
    continuous: NDArray[np.float64]
    action: ActionComposite


class H2dsAgent:
    """Option learner and continuous learner sharing one replay buffer."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        config: TrainConfig | None = None,
        seed: int = 0,
        profile: SchemeProfile | None = None,
    ):
        self.scenario = scenario
        self.config = config or TrainConfig()
        self.seed = seed
        self.profile = profile or PROFILES[SchemeId.PROPOSED]
        self.catalog = OptionCatalog(scenario)
        self.codec = ActionCodec(scenario, self.catalog)
        self.n_options = len(self.catalog)
        self.state_dim = state_dim(scenario, self.n_options, self.codec.dim)
        self.allowed = self.profile.allowed_options(self.catalog, scenario)

        torch.manual_seed(seed)
        self.d3qn = D3qnLearner(self.state_dim, self.n_options, self.config)
        self.sac = SacLearner(self.state_dim + self.n_options, self.codec.dim, self.config)
        self.buffer = ReplayBuffer(self.config.buffer_capacity, self.state_dim, self.codec.dim)
        self.rng = make_rng(seed, AGENT_STREAM)
        self.generator = torch.Generator().manual_seed(seed)
        self.decisions = 0

    def _inputs(self, states: torch.Tensor, options: torch.Tensor) -> torch.Tensor:
        one_hot = F.one_hot(options, self.n_options).to(states.dtype)
        return torch.cat([states, one_hot], dim=-1)

    def select_option(self, state: NDArray[np.float64], explore: bool) -> int:
        if self.profile.option_policy == "uniform":
            pool = self.allowed if self.allowed is not None else range(self.n_options)
            return int(pool[self.rng.integers(len(pool))])
        epsilon = self.d3qn.schedule.value(self.decisions) if explore else 0.0
        return epsilon_greedy_select(state, self.d3qn.eval_net, epsilon, self.rng, self.allowed)

    def act(self, state: NDArray[np.float64], explore: bool = True) -> Decision:
        option = self.select_option(state, explore)
        inputs = self._inputs(
            torch.as_tensor(state, dtype=torch.float32).unsqueeze(0),
            torch.tensor([option]),
        )
        continuous = self.sac.act(inputs, deterministic=not explore, generator=self.generator)[0]
        vector = continuous.numpy().astype(np.float64)
        action = self.profile.constrain(self.codec.decode(option, vector), self.scenario)
        if explore:
            self.decisions += 1
        return Decision(option, vector, action)

    def remember(self, experience: Experience) -> None:
        self.buffer.push(experience)

    @property
    def ready(self) -> bool:
        return len(self.buffer) >= max(self.config.batch_size, self.config.warmup_steps)

    def learn(self, gamma: float) -> dict[str, float]:
        """One gradient round of both learners on a shared batch."""
        batch = self.buffer.sample(self.config.batch_size, self.rng)
        d3qn_loss = self.d3qn.update(batch, gamma, self.allowed)

        next_options = self.d3qn.greedy(batch.next_states, self.allowed)
        losses = self.sac.update(
            self._inputs(batch.states, batch.options),
            batch.actions,
            batch.rewards,
            self._inputs(batch.next_states, next_options),
            gamma,
            self.generator,
        )
        losses["d3qn_loss"] = d3qn_loss

        bad = [name for name, value in losses.items() if not math.isfinite(value)]
        if bad:
            raise DivergenceError(f"Non-finite {', '.join(sorted(bad))} after {self.decisions} decisions")
        return losses

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(
            {
                "format_version": AGENT_FORMAT_VERSION,
                "fingerprint": scenario_fingerprint(self.scenario),
                "scheme": self.profile.scheme.value,
                "seed": self.seed,
                "train_config": to_plain(self.config),
                "d3qn": self.d3qn.eval_net.state_dict(),
                "d3qn_target": self.d3qn.target_net.state_dict(),
                "policy": self.sac.policy.state_dict(),
                "critic": self.sac.critic.state_dict(),
                "critic_target": self.sac.target_critic.state_dict(),
                "log_alpha": self.sac.log_alpha.detach().clone(),
                "decisions": self.decisions,
                "d3qn_updates": self.d3qn.updates,
                "sac_updates": self.sac.updates,
            },
            path,
        )

    @classmethod
    def load(cls, path: Path, scenario: ScenarioConfig) -> H2dsAgent:
        """Rebuild a saved agent; the scenario must match the one it was trained on."""
        try:
            payload = torch.load(path, map_location="cpu", weights_only=True)
        except FileNotFoundError as e:
            raise AgentFormatError(f"Agent file not found: {path}") from e
        except Exception as e:
            raise AgentFormatError(f"Cannot read agent file {path}: {e}") from e

        if not isinstance(payload, dict) or payload.get("format_version") != AGENT_FORMAT_VERSION:
            raise AgentFormatError(f"{path} is not an agent file of format {AGENT_FORMAT_VERSION}")
        if payload["fingerprint"] != scenario_fingerprint(scenario):
            raise AgentFormatError(f"{path} was trained on a different scenario")

        try:
            config = dataclass_from_dict(TrainConfig, payload["train_config"])
            profile = PROFILES[SchemeId.parse(payload["scheme"])]
            agent = cls(scenario, config, int(payload["seed"]), profile)
            agent.d3qn.eval_net.load_state_dict(payload["d3qn"])
            agent.d3qn.target_net.load_state_dict(payload["d3qn_target"])
            agent.sac.policy.load_state_dict(payload["policy"])
            agent.sac.critic.load_state_dict(payload["critic"])
            agent.sac.target_critic.load_state_dict(payload["critic_target"])
        except (ConfigError, KeyError, RuntimeError) as e:
            raise AgentFormatError(f"{path} has inconsistent contents: {e}") from e
        with torch.no_grad():
            agent.sac.log_alpha.copy_(payload["log_alpha"])
        agent.decisions = int(payload["decisions"])
        agent.d3qn.updates = int(payload.get("d3qn_updates", 0))
        agent.sac.updates = int(payload.get("sac_updates", 0))
        return agent


@dataclass
class TrainingResult:
    agent: H2dsAgent
    rows: list[MetricsRow] = field(default_factory=list)
    episode_rewards: list[float] = field(default_factory=list)


def run_episodes(
    agent: H2dsAgent,
    env: SecrecyEnv,
    episodes: range,
    *,
    learn: bool,
    reward: RewardConfig,
    run_id: str = "",
    record_timing: bool = False,
    on_episode: Callable[[int, float], Any] | None = None,
) -> TrainingResult:
    """
    Roll the agent through ``episodes``.

    With ``learn`` every step is stored and followed by the configured gradient rounds;
    without it the agent acts greedily and nothing is updated.
    """
    config = agent.config
    result = TrainingResult(agent)
    phase = "train" if learn else "eval"
    scheme = agent.profile.scheme.value

    for episode in episodes:
        state = env.reset(episode)
        total = 0.0
        for step in range(config.steps_per_episode):
            started = time.perf_counter()
            decision = agent.act(state, explore=learn)
            elapsed_ms = (time.perf_counter() - started) * 1e3
            outcome = env.step(decision.action, decision.option, decision.continuous)

            if learn:
                agent.remember(
                    Experience(state, decision.option, decision.continuous, outcome.reward, outcome.next_state)
                )
                if agent.ready:
                    for _ in range(config.gradient_rounds):
                        agent.learn(reward.discount)

            result.rows.append(
                MetricsRow.from_step(
                    outcome.info,
                    outcome.reward,
                    run_id=run_id,
                    scheme=scheme,
                    seed=agent.seed,
                    phase=phase,
                    episode=episode,
                    step=step,
                    decision_ms=elapsed_ms if record_timing else 0.0,
                )
            )
            total += outcome.reward
            state = outcome.next_state

        mean_reward = total / config.steps_per_episode
        result.episode_rewards.append(mean_reward)
        logger.debug(f"[{scheme} seed {agent.seed}] {phase} episode {episode}: mean reward {mean_reward:.4f}")
        if on_episode is not None:
            on_episode(episode, mean_reward)
    return result


def train(
    scenario: ScenarioConfig,
    config: TrainConfig | None = None,
    reward: RewardConfig | None = None,
    seed: int = 0,
    profile: SchemeProfile | None = None,
    run_id: str = "",
    record_timing: bool = False,
    on_episode: Callable[[int, float], Any] | None = None,
) -> TrainingResult:
    """Train a fresh agent for ``config.episodes`` episodes and return it with its metric rows."""
    config = config or TrainConfig()
    reward = reward or RewardConfig()
    agent = H2dsAgent(scenario, config, seed, profile)
    env = SecrecyEnv(scenario, reward, seed, agent.profile.transmit_mode, agent.catalog)
    logger.info(
        f"Training {agent.profile.scheme.value} on {scenario.name} (seed {seed}, "
        f"{len(agent.catalog)} options, action dim {agent.codec.dim})"
    )
    return run_episodes(
        agent,
        env,
        range(config.episodes),
        learn=True,
        reward=reward,
        run_id=run_id,
        record_timing=record_timing,
        on_episode=on_episode,
    )


def evaluate(
    agent: H2dsAgent,
    episodes: int,
    reward: RewardConfig | None = None,
    first_episode: int | None = None,
    run_id: str = "",
    record_timing: bool = False,
) -> TrainingResult:
    """Greedy episodes on channel blocks not seen during training."""
    reward = reward or RewardConfig()
    start = agent.config.episodes if first_episode is None else first_episode
    env = SecrecyEnv(agent.scenario, reward, agent.seed, agent.profile.transmit_mode, agent.catalog)
    return run_episodes(
        agent,
        env,
        range(start, start + episodes),
        learn=False,
        reward=reward,
        run_id=run_id,
        record_timing=record_timing,
    )
