"""Dueling double deep Q-learning over the option catalog."""

from __future__ import annotations

import copy
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch
from numpy.typing import NDArray

from .config import TrainConfig
from .networks import DuelingQNetwork
from .replay import Batch


def d3qn_target(
    batch: Batch,
    eval_net: DuelingQNetwork,
    target_net: DuelingQNetwork,
    gamma: float,
    allowed: Sequence[int] | None = None,
) -> torch.Tensor:
    """``r + gamma * Q_target(s', argmax_o Q_eval(s', o))`` with the argmax over allowed options."""
    with torch.no_grad():
        next_eval = masked(eval_net(batch.next_states), allowed)
        best = next_eval.argmax(dim=1, keepdim=True)
        next_target = target_net(batch.next_states).gather(1, best).squeeze(1)
        return batch.rewards + gamma * next_target


def d3qn_loss(batch: Batch, eval_net: DuelingQNetwork, targets: torch.Tensor) -> torch.Tensor:
    q = eval_net(batch.states).gather(1, batch.options.unsqueeze(1)).squeeze(1)
    return ((targets - q) ** 2).mean()


def masked(q_values: torch.Tensor, allowed: Sequence[int] | None) -> torch.Tensor:
    """Set disallowed options to -inf."""
    if allowed is None:
        return q_values
    mask = torch.full_like(q_values, float("-inf"))
    mask[..., list(allowed)] = 0.0
    return q_values + mask


def epsilon_greedy_select(
    state: NDArray[np.float64],
    network: DuelingQNetwork,
    epsilon: float,
    rng: np.random.Generator,
    allowed: Sequence[int] | None = None,
) -> int:
    """Uniform option with probability ``epsilon``, else the greedy one (lowest index on ties)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        if allowed is None:
            return int(rng.integers(network.advantage_head.out_features))
        return int(allowed[rng.integers(len(allowed))])
    dtype = next(network.parameters()).dtype
    with torch.no_grad():
        q = network(torch.as_tensor(state, dtype=dtype).unsqueeze(0))[0]
    return int(masked(q, allowed).argmax())


@dataclass(frozen=True)
class EpsilonSchedule:
    """Linear decay from ``start`` to ``end`` over ``anneal_steps`` decisions."""

    start: float
    end: float
    anneal_steps: int

    def value(self, step: int) -> float:
        progress = min(step / self.anneal_steps, 1.0)
        return self.start + (self.end - self.start) * progress


class D3qnLearner:
    """Evaluation and target dueling networks with their optimizer."""

    def __init__(self, state_dim: int, n_options: int, config: TrainConfig):
        self.eval_net = DuelingQNetwork(state_dim, n_options, config.d3qn_hidden)
        self.target_net = copy.deepcopy(self.eval_net)
        self.target_net.requires_grad_(False)
        self.optimizer = torch.optim.Adam(self.eval_net.parameters(), lr=config.d3qn_lr)
        self.schedule = EpsilonSchedule(
            config.epsilon_start, config.epsilon_end, config.epsilon_anneal_steps
        )
        self.target_sync = config.target_sync
        self.updates = 0

    def update(self, batch: Batch, gamma: float, allowed: Sequence[int] | None = None) -> float:
        targets = d3qn_target(batch, self.eval_net, self.target_net, gamma, allowed)
        loss = d3qn_loss(batch, self.eval_net, targets)
        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        self.updates += 1
        if self.updates % self.target_sync == 0:
            self.sync()
        return float(loss.item())

    def sync(self) -> None:
        """Hard copy of the evaluation weights into the target network."""
        self.target_net.load_state_dict(self.eval_net.state_dict())

    def greedy(self, states: torch.Tensor, allowed: Sequence[int] | None = None) -> torch.Tensor:
        with torch.no_grad():
            return masked(self.eval_net(states), allowed).argmax(dim=1)
