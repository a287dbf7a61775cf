"""Soft actor-critic over the squashed continuous action, conditioned on the option."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import torch
from torch import nn
from torch.distributions import Normal

from .config import TrainConfig
from .networks import GaussianPolicy, TwinCritic

# Keeps the tanh Jacobian term finite near saturation
SQUASH_EPS = 1e-6


@dataclass(frozen=True)
class SacPolicyOutput:
    mean: torch.Tensor
    log_std: torch.Tensor
    pre_tanh: torch.Tensor
    action: torch.Tensor
    log_prob: torch.Tensor


def squashed_log_prob(mean: torch.Tensor, log_std: torch.Tensor, pre_tanh: torch.Tensor) -> torch.Tensor:
    """Log density of ``tanh(u)`` for ``u ~ N(mean, exp(log_std))``, summed over dimensions."""
    normal = Normal(mean, log_std.exp())
    correction = torch.log(1.0 - torch.tanh(pre_tanh).pow(2) + SQUASH_EPS)
    return (normal.log_prob(pre_tanh) - correction).sum(dim=-1)


def sac_sample(
    policy: GaussianPolicy,
    inputs: torch.Tensor,
    generator: torch.Generator | None = None,
    noise: torch.Tensor | None = None,
) -> SacPolicyOutput:
    """Reparameterized sample; ``noise`` fixes the standard-normal draw."""
    mean, log_std = policy(inputs)
    if noise is None:
        noise = torch.randn(mean.shape, generator=generator, dtype=mean.dtype)
    pre_tanh = mean + log_std.exp() * noise
    return SacPolicyOutput(
        mean=mean,
        log_std=log_std,
        pre_tanh=pre_tanh,
        action=torch.tanh(pre_tanh),
        log_prob=squashed_log_prob(mean, log_std, pre_tanh),
    )


def sac_targets(
    rewards: torch.Tensor,
    next_inputs: torch.Tensor,
    policy: GaussianPolicy,
    target_critic: TwinCritic,
    alpha: float,
    gamma: float,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Soft Bellman targets from the minimum of the target critics."""
    with torch.no_grad():
        sample = sac_sample(policy, next_inputs, generator)
        next_q = target_critic.min_q(next_inputs, sample.action)
        return rewards + gamma * (next_q - alpha * sample.log_prob)


def sac_critic_loss(
    critic: TwinCritic,
    inputs: torch.Tensor,
    actions: torch.Tensor,
    targets: torch.Tensor,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Mean squared Bellman residual of each critic."""
    q1, q2 = critic(inputs, actions)
    return ((targets - q1) ** 2).mean(), ((targets - q2) ** 2).mean()


def sac_policy_loss(
    policy: GaussianPolicy,
    critic: TwinCritic,
    inputs: torch.Tensor,
    alpha: float,
    generator: torch.Generator | None = None,
    noise: torch.Tensor | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """``E[alpha * log pi - min Q]`` and the sampled log-probabilities."""
    sample = sac_sample(policy, inputs, generator, noise)
    q = critic.min_q(inputs, sample.action)
    return (alpha * sample.log_prob - q).mean(), sample.log_prob


def soft_update(source: nn.Module, target: nn.Module, tau: float) -> None:
    """Polyak averaging ``target <- tau * source + (1 - tau) * target``."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    with torch.no_grad():
        for target_param, param in zip(target.parameters(), source.parameters()):
            target_param.mul_(1.0 - tau).add_(param, alpha=tau)


def entropy_loss(log_alpha: torch.Tensor, log_prob: torch.Tensor, target_entropy: float) -> torch.Tensor:
    return -(log_alpha.exp() * (log_prob + target_entropy).detach()).mean()


def entropy_update(
    log_alpha: torch.Tensor,
    optimizer: torch.optim.Optimizer,
    log_prob: torch.Tensor,
    target_entropy: float,
) -> tuple[float, float]:
    """One step on the temperature; returns (loss, new alpha)."""
    loss = entropy_loss(log_alpha, log_prob, target_entropy)
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return float(loss.item()), float(log_alpha.exp().item())


class SacLearner:
    """Policy, twin critics, target critics and temperature."""

    def __init__(self, in_dim: int, action_dim: int, config: TrainConfig):
        self.policy = GaussianPolicy(in_dim, action_dim, config.sac_hidden)
        self.critic = TwinCritic(in_dim, action_dim, config.sac_hidden)
        self.target_critic = copy.deepcopy(self.critic)
        self.target_critic.requires_grad_(False)
        self.log_alpha = torch.tensor(math.log(config.initial_alpha), requires_grad=True)
        self.target_entropy = -float(action_dim)
        self.soft_tau = config.soft_tau
        self.target_period = config.sac_target_period
        self.updates = 0

        self.policy_optimizer = torch.optim.Adam(self.policy.parameters(), lr=config.policy_lr)
        self.critic_optimizer = torch.optim.Adam(self.critic.parameters(), lr=config.critic_lr)
        self.alpha_optimizer = torch.optim.Adam([self.log_alpha], lr=config.entropy_lr)

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.exp().item())

    def act(
        self,
        inputs: torch.Tensor,
        deterministic: bool = False,
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        with torch.no_grad():
            if deterministic:
                mean, _ = self.policy(inputs)
                return torch.tanh(mean)
            return sac_sample(self.policy, inputs, generator).action

    def update(
        self,
        inputs: torch.Tensor,
        actions: torch.Tensor,
        rewards: torch.Tensor,
        next_inputs: torch.Tensor,
        gamma: float,
        generator: torch.Generator | None = None,
    ) -> dict[str, float]:
        alpha = self.alpha
        targets = sac_targets(rewards, next_inputs, self.policy, self.target_critic, alpha, gamma, generator)
        q1_loss, q2_loss = sac_critic_loss(self.critic, inputs, actions, targets)
        critic_loss = q1_loss + q2_loss
        self.critic_optimizer.zero_grad()
        critic_loss.backward()
        self.critic_optimizer.step()

        policy_loss, log_prob = sac_policy_loss(self.policy, self.critic, inputs, alpha, generator)
        self.policy_optimizer.zero_grad()
        policy_loss.backward()
        self.policy_optimizer.step()

        alpha_loss, new_alpha = entropy_update(
            self.log_alpha, self.alpha_optimizer, log_prob, self.target_entropy
        )

        self.updates += 1
        if self.updates % self.target_period == 0:
            soft_update(self.critic, self.target_critic, self.soft_tau)

        return {
            "critic_loss": float(critic_loss.item()),
            "policy_loss": float(policy_loss.item()),
            "alpha_loss": alpha_loss,
            "alpha": new_alpha,
        }
