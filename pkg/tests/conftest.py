"""Shared fixtures for the lab test suite."""

from __future__ import annotations

from collections.abc import Callable

import pytest
import torch

from irs_secrecy_lab.actions import ActionComposite, Assignment, ReflectionConfig, uniform_beams
from irs_secrecy_lab.channels import ChannelSet, draw_channels
from irs_secrecy_lab.config import AoConfig, RunConfig, TrainConfig
from irs_secrecy_lab.numerics import make_rng
from irs_secrecy_lab.scenario import ScenarioConfig, load_scenario


@pytest.fixture
def tiny() -> ScenarioConfig:
    return load_scenario("tiny")


@pytest.fixture
def channels(tiny: ScenarioConfig) -> ChannelSet:
    return draw_channels(tiny, make_rng(7, 0, 0))


@pytest.fixture
def base_action(tiny: ScenarioConfig) -> ActionComposite:
    """SU k on subchannel k and IRS k, identity reflection, equal power, tenth-frame sensing."""
    assignment = Assignment.from_indices((0, 1), (0, 1), tiny.n_subchannels, tiny.n_irs)
    theta = ReflectionConfig.identity(tiny.n_irs, tiny.n_elements)
    return ActionComposite(assignment, theta, uniform_beams(tiny), tiny.frame_s / 10.0)


@pytest.fixture
def small_train() -> TrainConfig:
    return TrainConfig(
        episodes=2,
        steps_per_episode=3,
        batch_size=4,
        buffer_capacity=64,
        warmup_steps=4,
        d3qn_hidden=(16, 16),
        sac_hidden=(16, 16),
        target_sync=5,
        epsilon_anneal_steps=10,
    )


@pytest.fixture
def small_ao() -> AoConfig:
    return AoConfig(
        max_outer_iterations=3,
        dual_iterations=5,
        sca_iterations=3,
        sca_inner_steps=20,
        tau_grid_points=10,
    )


@pytest.fixture
def small_run(small_train: TrainConfig, small_ao: AoConfig, tmp_path) -> RunConfig:
    return RunConfig(
        scenario="tiny",
        schemes=("proposed",),
        seeds=(0,),
        eval_episodes=1,
        out_dir=str(tmp_path / "runs"),
        timing_caps=(1, 2),
        timing_decisions=2,
        train=small_train,
        ao=small_ao,
    )


@pytest.fixture
def finite_difference_check() -> Callable[..., None]:
    """Compare autograd gradients of a scalar loss with central differences, in float64."""

    def check(
        parameters: list[torch.Tensor],
        loss_fn: Callable[[], torch.Tensor],
        step: float = 1e-5,
        rtol: float = 1e-4,
        atol: float = 1e-7,
    ) -> None:
        loss = loss_fn()
        grads = torch.autograd.grad(loss, parameters)
        for param, grad in zip(parameters, grads):
            flat = param.data.view(-1)
            numeric = torch.zeros_like(flat)
            for i in range(flat.numel()):
                original = float(flat[i])
                with torch.no_grad():
                    flat[i] = original + step
                    plus = float(loss_fn())
                    flat[i] = original - step
                    minus = float(loss_fn())
                    flat[i] = original
                numeric[i] = (plus - minus) / (2.0 * step)
            assert torch.allclose(grad.reshape(-1), numeric, rtol=rtol, atol=atol), (
                f"max gradient error {float((grad.reshape(-1) - numeric).abs().max()):.3e}"
            )

    return check
