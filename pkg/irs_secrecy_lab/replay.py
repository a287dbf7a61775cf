"""Uniform experience replay shared by both learners."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
import torch
from numpy.typing import NDArray


@dataclass(frozen=True)
class Experience:
    state: NDArray[np.float64]
    option: int
    action: NDArray[np.float64]  # squashed continuous vector in [-1, 1]
    reward: float
    next_state: NDArray[np.float64]


@dataclass(frozen=True)
class Batch:
    states: torch.Tensor
    options: torch.Tensor
    actions: torch.Tensor
    rewards: torch.Tensor
    next_states: torch.Tensor

    def __len__(self) -> int:
        return int(self.rewards.shape[0])


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest experience is overwritten first."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("Replay capacity must be positive")
        self.capacity = capacity
        self.pos = 0
        self.full = False

        self.states = np.zeros((capacity, state_dim))
        self.options = np.zeros(capacity, dtype=np.int64)
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))

    def push(self, experience: Experience) -> None:
        idx = self.pos
        self.states[idx] = experience.state
        self.options[idx] = experience.option
        self.actions[idx] = experience.action
        self.rewards[idx] = experience.reward
        self.next_states[idx] = experience.next_state

        self.pos = (self.pos + 1) % self.capacity
        if self.pos == 0:
            self.full = True

    def __len__(self) -> int:
        return self.capacity if self.full else self.pos

    def __iter__(self) -> Iterator[Experience]:
        """Stored experiences, oldest first."""
        order = range(self.pos, self.pos + self.capacity) if self.full else range(self.pos)
        for i in order:
            idx = i % self.capacity
            yield Experience(
                self.states[idx].copy(),
                int(self.options[idx]),
                self.actions[idx].copy(),
                float(self.rewards[idx]),
                self.next_states[idx].copy(),
            )

    def sample(
        self,
        batch_size: int,
        rng: np.random.Generator,
        dtype: torch.dtype = torch.float32,
    ) -> Batch:
        """Uniform batch without replacement."""
        size = len(self)
        if batch_size > size:
            raise ValueError(f"Cannot sample {batch_size} experiences from {size}")
        indices = rng.choice(size, size=batch_size, replace=False)
        return Batch(
            states=torch.as_tensor(self.states[indices], dtype=dtype),
            options=torch.as_tensor(self.options[indices]),
            actions=torch.as_tensor(self.actions[indices], dtype=dtype),
            rewards=torch.as_tensor(self.rewards[indices], dtype=dtype),
            next_states=torch.as_tensor(self.next_states[indices], dtype=dtype),
        )
