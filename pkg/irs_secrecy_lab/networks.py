"""Feed-forward networks shared by the option and continuous learners."""

from __future__ import annotations

from collections.abc import Sequence

import torch
import torch.nn.functional as F
from torch import nn

LOG_STD_MIN, LOG_STD_MAX = -20.0, 2.0


class Mlp(nn.Module):
    """Fully connected network with ReLU between layers and a linear output."""

    def __init__(self, in_dim: int, hidden: Sequence[int], out_dim: int):
        super().__init__()
        sizes = [in_dim, *hidden, out_dim]
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.layers = nn.ModuleList(nn.Linear(a, b) for a, b in zip(sizes[:-1], sizes[1:]))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for layer in self.layers[:-1]:
            x = F.relu(layer(x))
        return self.layers[-1](x)


def mlp_forward(mlp: Mlp, inputs: torch.Tensor) -> torch.Tensor:
    if inputs.shape[-1] != mlp.in_dim:
        raise ValueError(f"Expected inputs of width {mlp.in_dim}, got {inputs.shape[-1]}")
    return mlp(inputs)


def mlp_backward(
    mlp: Mlp,
    inputs: torch.Tensor,
    upstream: torch.Tensor,
) -> tuple[torch.Tensor, ...]:
    """Gradients of ``sum(upstream * mlp(inputs))`` with respect to each parameter."""
    outputs = mlp_forward(mlp, inputs)
    if upstream.shape != outputs.shape:
        raise ValueError(f"Upstream gradient shape {tuple(upstream.shape)} != {tuple(outputs.shape)}")
    return torch.autograd.grad(outputs, tuple(mlp.parameters()), grad_outputs=upstream)


def dueling_q(value: torch.Tensor, advantages: torch.Tensor) -> torch.Tensor:
    """Combine a state value with mean-centred advantages."""
    if value.dim() == advantages.dim() - 1:
        value = value.unsqueeze(-1)
    return value + advantages - advantages.mean(dim=-1, keepdim=True)


class DuelingQNetwork(nn.Module):
    """Shared trunk with value and advantage heads over the option catalog."""

    def __init__(self, state_dim: int, n_options: int, hidden: Sequence[int]):
        super().__init__()
        self.trunk = Mlp(state_dim, hidden[:-1], hidden[-1])
        self.value_head = nn.Linear(hidden[-1], 1)
        self.advantage_head = nn.Linear(hidden[-1], n_options)

    def streams(self, states: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        features = F.relu(self.trunk(states))
        return self.value_head(features), self.advantage_head(features)

    def forward(self, states: torch.Tensor) -> torch.Tensor:
        return dueling_q(*self.streams(states))


class GaussianPolicy(nn.Module):
    """Diagonal Gaussian over pre-squash actions."""

    def __init__(self, in_dim: int, action_dim: int, hidden: Sequence[int]):
        super().__init__()
        self.trunk = Mlp(in_dim, hidden[:-1], hidden[-1])
        self.mean = nn.Linear(hidden[-1], action_dim)
        self.log_std = nn.Linear(hidden[-1], action_dim)

    def forward(self, inputs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        features = F.relu(self.trunk(inputs))
        log_std = torch.clamp(self.log_std(features), LOG_STD_MIN, LOG_STD_MAX)
        return self.mean(features), log_std


class TwinCritic(nn.Module):
    def __init__(self, in_dim: int, action_dim: int, hidden: Sequence[int]):
        super().__init__()
        self.q1 = Mlp(in_dim + action_dim, hidden, 1)
        self.q2 = Mlp(in_dim + action_dim, hidden, 1)

    def forward(self, inputs: torch.Tensor, actions: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        x = torch.cat([inputs, actions], dim=-1)
        return self.q1(x).squeeze(-1), self.q2(x).squeeze(-1)

    def min_q(self, inputs: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        q1, q2 = self(inputs, actions)
        return torch.min(q1, q2)
