"""Tests for scheme runs, comparison and timing."""

from __future__ import annotations

import dataclasses

import pandas as pd
import pytest

from irs_secrecy_lab.agent import H2dsAgent
from irs_secrecy_lab.bench import (
    SchemeRun,
    compare_schemes,
    emit_csv,
    final_window_secrecy,
    machine_fingerprint,
    run_id_for,
    run_scheme,
    summarize,
    time_decisions,
)
from irs_secrecy_lab.config import AoConfig, ConfigError, RunConfig, TrainConfig
from irs_secrecy_lab.metrics import METRICS_COLUMNS, MetricsRow, join_values, mean_secrecy
from irs_secrecy_lab.scenario import load_scenario, scenario_fingerprint


def _row(episode: int, secrecy: float, phase: str = "train") -> MetricsRow:
    return MetricsRow(
        run_id="r",
        scheme="proposed",
        seed=0,
        phase=phase,
        episode=episode,
        step=0,
        secrecy_rate=secrecy,
        su_rates="1",
        pu_rates="1",
        max_eavesdrop_rates="0",
        reward=secrecy,
        c1_slack=0.0,
        c2_slack=0.0,
        c3_slack=0.0,
        tau=0.01,
        decision_ms=0.0,
    )


class TestRunScheme:
    """Tests for single scheme runs."""

    def test_rows_cover_training_and_evaluation(self, tiny, small_run):
        """Test rows cover training and evaluation."""
        run = run_scheme("proposed", tiny, 0, small_run)
        phases = [row.phase for row in run.rows]
        steps = small_run.train.steps_per_episode
        assert phases.count("train") == small_run.train.episodes * steps
        assert phases.count("eval") == small_run.eval_episodes * steps
        assert {row.run_id for row in run.rows} == {run_id_for("proposed", 0, tiny)}

    def test_identical_bytes_for_identical_runs(self, tiny, small_run, tmp_path):
        """Test identical bytes for identical runs."""
        for name in ("a.csv", "b.csv"):
            emit_csv(run_scheme("random_choice", tiny, 1, small_run).rows, tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_header(self, tiny, small_run, tmp_path):
        """Test emitted CSV files carry the metric header."""
        path = tmp_path / "out" / "metrics.csv"
        emit_csv(run_scheme("without_irs", tiny, 0, small_run).rows, path)
        assert tuple(pd.read_csv(path).columns) == METRICS_COLUMNS

    def test_saves_agent(self, tiny, small_run, tmp_path):
        """Test saves agent."""
        path = tmp_path / "agent.pt"
        run_scheme("proposed", tiny, 0, small_run, agent_path=path)
        assert H2dsAgent.load(path, tiny).profile.scheme.value == "proposed"

    def test_unknown_scheme(self, tiny, small_run):
        """Test unknown scheme."""
        with pytest.raises(ConfigError, match="Unknown scheme: greedy"):
            run_scheme("greedy", tiny, 0, small_run)

    def test_run_id(self, tiny):
        """Test the run identifier format."""
        assert run_id_for("ao", 3, tiny) == f"ao-s3-{scenario_fingerprint(tiny)[:8]}"

    def test_ao_scheme(self, tiny, small_run):
        """Test the AO scheme produces rows without an agent."""
        config = dataclasses.replace(small_run, train=dataclasses.replace(small_run.train, steps_per_episode=1))
        run = run_scheme("ao", tiny, 0, config)
        assert [row.phase for row in run.rows] == ["ao"]
        assert run.final_secrecy == run.rows[0].secrecy_rate


class TestSummaries:
    """Tests for scoring and ranking."""

    def test_metric_helpers(self):
        """Test metric helpers."""
        assert join_values([1.0, 0.5, 1 / 3]) == "1;0.5;0.3333333333"
        assert join_values([]) == ""
        assert mean_secrecy([]) == 0.0

    def test_final_window_prefers_evaluation(self):
        """Test final window prefers evaluation."""
        rows = [_row(0, 5.0), _row(1, 1.0, "eval"), _row(1, 3.0, "eval")]
        assert final_window_secrecy(rows, 10) == pytest.approx(2.0)

    def test_final_window_of_training(self):
        """Test final window of training."""
        rows = [_row(e, float(e)) for e in range(6)]
        assert final_window_secrecy(rows, 2) == pytest.approx(4.5)

    def test_summarize(self):
        """Test per-scheme summary statistics."""
        runs = [
            SchemeRun("proposed", 0, [], 1.0),
            SchemeRun("proposed", 1, [], 3.0),
            SchemeRun("random_choice", 0, [], 2.5),
        ]

        summary = summarize(runs)

        assert list(summary.columns) == ["scheme", "seeds", "mean_secrecy", "std_secrecy", "rank"]
        assert summary["scheme"].tolist() == ["random_choice", "proposed"]
        assert summary["rank"].tolist() == [1, 2]
        proposed = summary.set_index("scheme").loc["proposed"]
        assert proposed["mean_secrecy"] == pytest.approx(2.0)
        assert proposed["std_secrecy"] == pytest.approx(1.0)
        assert proposed["seeds"] == 2

    def test_compare_single_scheme(self, tiny, small_run):
        """Test compare single scheme."""
        comparison = compare_schemes(small_run, tiny)

        assert len(comparison.runs) == 1
        assert comparison.summary["rank"].tolist() == [1]
        assert len(comparison.rows) == len(comparison.runs[0].rows)

    def test_compare_keeps_job_order(self, tiny, small_run):
        """Test compare keeps job order."""
        config = dataclasses.replace(small_run, schemes=("fixed_irs", "proposed"), seeds=(0, 1))
        comparison = compare_schemes(config, tiny)
        assert [(r.scheme, r.seed) for r in comparison.runs] == [
            ("fixed_irs", 0),
            ("fixed_irs", 1),
            ("proposed", 0),
            ("proposed", 1),
        ]


class TestTiming:
    """Tests for decision timing."""

    def test_columns(self, tiny, small_run):
        """Test the timing table's rows and columns."""
        frame = time_decisions(small_run, tiny)

        assert len(frame) == 2 * len(small_run.timing_caps)
        assert set(frame["scheme"]) == {"proposed", "ao"}
        assert sorted(set(frame["iteration_cap"])) == [1, 2]
        assert (frame["decisions"] == small_run.timing_decisions).all()
        assert (frame["p95_ms"] >= frame["median_ms"]).all()
        assert set(machine_fingerprint()) <= set(frame.columns)


@pytest.mark.slow
class TestTimingDirection:
    """Latency of the optimization baseline against policy inference on the default layout."""

    def test_ao_grows_with_cap_and_dwarfs_inference(self, tmp_path):
        """Test AO latency rises with every cap and stays well above a policy decision."""
        scenario = load_scenario("default")
        config = RunConfig(
            scenario="default",
            out_dir=str(tmp_path),
            timing_caps=(20, 40, 60),
            timing_decisions=3,
            ao=AoConfig(dual_iterations=5, sca_iterations=3, sca_inner_steps=50, tau_grid_points=10),
        )
        agent = H2dsAgent(scenario, TrainConfig(), seed=0)

        frame = time_decisions(config, scenario, agent)

        ao = frame[frame["scheme"] == "ao"].sort_values("iteration_cap")["median_ms"].to_numpy()
        policy = frame[frame["scheme"] == "proposed"]["median_ms"].to_numpy()
        assert all(later > earlier for earlier, later in zip(ao, ao[1:]))
        assert ao.min() > 5.0 * policy.max()
