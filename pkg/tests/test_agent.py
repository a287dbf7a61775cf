"""Tests for the hierarchical agent."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest
import torch

from irs_secrecy_lab.agent import (
    AgentFormatError,
    DivergenceError,
    H2dsAgent,
    evaluate,
    train,
)
from irs_secrecy_lab.config import TrainConfig
from irs_secrecy_lab.d3qn import D3qnLearner
from irs_secrecy_lab.environment import SecrecyEnv
from irs_secrecy_lab.metrics import mean_secrecy
from irs_secrecy_lab.scenario import nearest_irs, with_overrides
from irs_secrecy_lab.schemes import SchemeId, profile_for


class TestActing:
    """Tests for single decisions."""

    def test_decision_is_feasible(self, tiny, small_train):
        """Test decision is feasible."""
        agent = H2dsAgent(tiny, small_train, seed=0)
        state = SecrecyEnv(tiny, seed=0).reset()

        decision = agent.act(state)

        assert 0 <= decision.option < len(agent.catalog)
        assert decision.continuous.shape == (agent.codec.dim,)
        assert np.all(np.abs(decision.continuous) <= 1.0)
        assert decision.action.theta.is_valid()
        assert decision.action.beam_energy <= tiny.energy_budget * (1 + 1e-12)
        assert 0.0 < decision.action.tau < tiny.frame_s
        assert agent.decisions == 1

    def test_greedy_decisions_are_repeatable(self, tiny, small_train):
        """Test greedy decisions are repeatable."""
        agent = H2dsAgent(tiny, small_train, seed=0)
        state = SecrecyEnv(tiny, seed=0).reset()

        a, b = agent.act(state, explore=False), agent.act(state, explore=False)

        assert a.option == b.option
        np.testing.assert_array_equal(a.continuous, b.continuous)
        assert agent.decisions == 0

    def test_without_irs_switches_reflection_off(self, tiny, small_train):
        """Test without IRS switches reflection off."""
        agent = H2dsAgent(tiny, small_train, seed=0, profile=profile_for("without_irs"))
        decision = agent.act(SecrecyEnv(tiny, seed=0).reset())
        np.testing.assert_array_equal(decision.action.theta.amplitudes, 0.0)

    def test_fixed_irs_keeps_identity(self, tiny, small_train):
        """Test fixed IRS keeps identity."""
        agent = H2dsAgent(tiny, small_train, seed=0, profile=profile_for(SchemeId.FIXED_IRS))
        decision = agent.act(SecrecyEnv(tiny, seed=0).reset())
        np.testing.assert_array_equal(decision.action.theta.amplitudes, 1.0)
        np.testing.assert_array_equal(decision.action.theta.phases, 0.0)

    def test_nearest_irs_restricts_pairing(self, tiny, small_train):
        """Test nearest IRS restricts pairing."""
        agent = H2dsAgent(tiny, small_train, seed=0, profile=profile_for("nearest_irs"))
        state = SecrecyEnv(tiny, seed=0).reset()
        expected = tuple(nearest_irs(tiny, k) for k in range(tiny.n_su))
        for _ in range(20):
            assert agent.act(state).action.assignment.pairing == expected


class TestTraining:
    """Tests for the training loop."""

    def test_zero_episodes(self, tiny, small_train):
        """Test zero episodes."""
        result = train(tiny, dataclasses.replace(small_train, episodes=0))
        assert result.rows == []
        assert result.episode_rewards == []

    def test_rows_and_callback(self, tiny, small_train):
        """Test rows and callback."""
        seen = []
        result = train(tiny, small_train, seed=1, on_episode=lambda e, r: seen.append(e))

        assert len(result.rows) == small_train.episodes * small_train.steps_per_episode
        assert seen == [0, 1]
        assert {row.phase for row in result.rows} == {"train"}
        assert all(row.decision_ms == 0.0 for row in result.rows)
        assert all(row.secrecy_rate >= 0.0 for row in result.rows)

    def test_same_seed_same_rows(self, tiny, small_train):
        """Test same seed same rows."""
        a = train(tiny, small_train, seed=3)
        b = train(tiny, small_train, seed=3)
        assert a.rows == b.rows
        assert a.episode_rewards == b.episode_rewards

    def test_learners_update_after_warmup(self, tiny, small_train):
        """Test learners update after warmup."""
        result = train(tiny, small_train, seed=0)
        assert result.agent.ready
        assert result.agent.sac.updates > 0

    def test_target_sync_counts_learner_updates(self, tiny, small_train):
        """Test the option target is synced on gradient updates rather than decisions."""
        config = dataclasses.replace(small_train, gradient_rounds=3, target_sync=9)
        agent = train(tiny, config, seed=0).agent

        # learning starts once the fourth experience lands: three steps of three rounds
        assert agent.decisions == 6
        assert agent.d3qn.updates == agent.sac.updates == 9
        for online, target in zip(agent.d3qn.eval_net.parameters(), agent.d3qn.target_net.parameters()):
            torch.testing.assert_close(online, target)

    def test_divergence(self, tiny, small_train, monkeypatch):
        """Test a non-finite loss raises DivergenceError."""
        monkeypatch.setattr(D3qnLearner, "update", lambda self, *args, **kwargs: float("nan"))
        with pytest.raises(DivergenceError, match="d3qn_loss"):
            train(tiny, small_train, seed=0)

    def test_evaluate_uses_unseen_blocks(self, tiny, small_train):
        """Test evaluate uses unseen blocks."""
        agent = train(tiny, small_train, seed=0).agent
        decisions = agent.decisions

        result = evaluate(agent, 2)

        assert [row.episode for row in result.rows[:: small_train.steps_per_episode]] == [2, 3]
        assert {row.phase for row in result.rows} == {"eval"}
        assert agent.decisions == decisions


class TestPersistence:
    """Tests for saving and loading agents."""

    def test_save_and_load(self, tiny, small_train, tmp_path):
        """Test save and load."""
        agent = train(tiny, small_train, seed=2).agent
        path = tmp_path / "agent.pt"
        agent.save(path)

        loaded = H2dsAgent.load(path, tiny)

        state = SecrecyEnv(tiny, seed=9).reset()
        a, b = agent.act(state, explore=False), loaded.act(state, explore=False)
        assert a.option == b.option
        np.testing.assert_allclose(a.continuous, b.continuous)
        assert loaded.decisions == agent.decisions
        assert loaded.d3qn.updates == agent.d3qn.updates
        assert loaded.config == small_train
        assert loaded.sac.alpha == pytest.approx(agent.sac.alpha)

    def test_scheme_survives(self, tiny, small_train, tmp_path):
        """Test scheme survives."""
        agent = H2dsAgent(tiny, small_train, seed=0, profile=profile_for("random_choice"))
        agent.save(tmp_path / "agent.pt")
        assert H2dsAgent.load(tmp_path / "agent.pt", tiny).profile.scheme is SchemeId.RANDOM_CHOICE

    def test_other_scenario_rejected(self, tiny, small_train, tmp_path):
        """Test other scenario rejected."""
        H2dsAgent(tiny, small_train).save(tmp_path / "agent.pt")
        with pytest.raises(AgentFormatError, match="trained on a different scenario"):
            H2dsAgent.load(tmp_path / "agent.pt", with_overrides(tiny, n_elements=8))

    def test_missing_file(self, tiny, tmp_path):
        """Test missing file."""
        with pytest.raises(AgentFormatError, match="not found"):
            H2dsAgent.load(tmp_path / "absent.pt", tiny)

    def test_wrong_format_version(self, tiny, tmp_path):
        """Test wrong format version."""
        path = tmp_path / "agent.pt"
        torch.save({"format_version": 99}, path)
        with pytest.raises(AgentFormatError, match="not an agent file of format"):
            H2dsAgent.load(path, tiny)

    def test_garbage_file(self, tiny, tmp_path):
        """Test garbage file."""
        path = tmp_path / "agent.pt"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(AgentFormatError, match="Cannot read"):
            H2dsAgent.load(path, tiny)


def _study_config(**changes) -> TrainConfig:
    base = TrainConfig(
        episodes=60,
        steps_per_episode=20,
        batch_size=32,
        buffer_capacity=5000,
        warmup_steps=64,
        d3qn_hidden=(64, 64),
        sac_hidden=(64, 64),
        target_sync=50,
        epsilon_anneal_steps=800,
    )
    return dataclasses.replace(base, **changes)


@pytest.mark.slow
class TestLearningProgress:
    """Learning studies on the tiny layout."""

    def test_beats_random_choice(self, tiny):
        """Test trained option choices beat uniformly random ones."""
        config = _study_config()
        wins = 0
        for seed in range(5):
            proposed = evaluate(train(tiny, config, seed=seed).agent, 5)
            random = evaluate(train(tiny, config, seed=seed, profile=profile_for("random_choice")).agent, 5)
            wins += mean_secrecy(proposed.rows) >= mean_secrecy(random.rows)
        assert wins >= 4

    def test_reward_rises_over_long_training(self, tiny):
        """Test late episodes earn more than early ones and beat the option and reflection baselines."""
        config = _study_config(episodes=300, steps_per_episode=10, epsilon_anneal_steps=1500)

        def final_secrecy(result) -> float:
            return mean_secrecy([row for row in result.rows if row.episode >= config.episodes - 20])

        rising = beats_random = beats_fixed = 0
        for seed in range(5):
            proposed = train(tiny, config, seed=seed)
            random = train(tiny, config, seed=seed, profile=profile_for("random_choice"))
            fixed = train(tiny, config, seed=seed, profile=profile_for("fixed_irs"))

            rising += np.mean(proposed.episode_rewards[-20:]) > np.mean(proposed.episode_rewards[:20])
            beats_random += final_secrecy(proposed) > final_secrecy(random)
            beats_fixed += final_secrecy(proposed) > final_secrecy(fixed)
        assert rising >= 4
        assert beats_random >= 4
        assert beats_fixed >= 4

    def test_more_elements_raise_secrecy(self, tiny):
        """Test sixteen elements per IRS beat four on the same seeds."""
        config = _study_config()
        large = with_overrides(tiny, n_elements=16)
        wins = 0
        for seed in range(5):
            small_rows = evaluate(train(tiny, config, seed=seed).agent, 5).rows
            large_rows = evaluate(train(large, config, seed=seed).agent, 5).rows
            wins += mean_secrecy(large_rows) > mean_secrecy(small_rows)
        assert wins >= 4
