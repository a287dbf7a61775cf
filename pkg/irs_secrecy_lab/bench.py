"""Scheme runs, multi-seed comparison, CSV emission and decision timing."""

from __future__ import annotations

import dataclasses
import platform
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import torch
from joblib import Parallel, delayed

from .agent import H2dsAgent, evaluate, train
from .ao_solver import ao_solve
from .config import RunConfig
from .environment import SecrecyEnv
from .logging_config import logger
from .metrics import METRICS_COLUMNS, METRICS_VERSION, MetricsRow, mean_secrecy
from .scenario import ScenarioConfig, load_scenario, scenario_fingerprint
from .schemes import SchemeId, profile_for


@dataclass(frozen=True)
class SchemeRun:
    scheme: str
    seed: int
    rows: list[MetricsRow]
    final_secrecy: float


def run_id_for(scheme: str, seed: int, scenario: ScenarioConfig) -> str:
    return f"{scheme}-s{seed}-{scenario_fingerprint(scenario)[:8]}"


def final_window_secrecy(rows: list[MetricsRow], final_window: int) -> float:
    """Mean secrecy over evaluation rows, else over the last ``final_window`` training episodes."""
    scored = [r for r in rows if r.phase in ("eval", "ao")]
    if scored:
        return mean_secrecy(scored)
    episodes = sorted({r.episode for r in rows})[-final_window:]
    window = set(episodes)
    return mean_secrecy(r for r in rows if r.episode in window)


def run_ao(scenario: ScenarioConfig, seed: int, config: RunConfig, run_id: str = "") -> list[MetricsRow]:
    """Solve every step of the evaluation episodes with the alternating optimization."""
    env = SecrecyEnv(scenario, config.reward, seed)
    first = config.train.episodes
    rows = []
    for episode in range(first, first + max(config.eval_episodes, 1)):
        env.reset(episode)
        for step in range(config.train.steps_per_episode):
            started = time.perf_counter()
            result = ao_solve(scenario, env.channels, config.ao)
            elapsed_ms = (time.perf_counter() - started) * 1e3
            outcome = env.step(result.action)
            rows.append(
                MetricsRow.from_step(
                    outcome.info,
                    outcome.reward,
                    run_id=run_id,
                    scheme=SchemeId.AO.value,
                    seed=seed,
                    phase="ao",
                    episode=episode,
                    step=step,
                    decision_ms=elapsed_ms if config.record_timing else 0.0,
                )
            )
    return rows


def run_scheme(
    scheme: str | SchemeId,
    scenario: ScenarioConfig,
    seed: int,
    config: RunConfig,
    agent_path: Path | None = None,
) -> SchemeRun:
    """
    Run one scheme on one seed.

    Learned schemes train for ``config.train.episodes`` episodes and then act greedily for
    ``config.eval_episodes`` episodes on unseen channel blocks; the optimization baseline
    solves each step of those same evaluation blocks.
    """
    scenario.validate()
    profile = profile_for(scheme)
    name = profile.scheme.value
    run_id = run_id_for(name, seed, scenario)
    logger.info(f"Running {name} with seed {seed}")

    if not profile.uses_agent:
        rows = run_ao(scenario, seed, config, run_id)
    else:
        trained = train(
            scenario,
            config.train,
            config.reward,
            seed,
            profile,
            run_id=run_id,
            record_timing=config.record_timing,
        )
        rows = trained.rows
        if config.eval_episodes:
            rows = rows + evaluate(
                trained.agent,
                config.eval_episodes,
                config.reward,
                run_id=run_id,
                record_timing=config.record_timing,
            ).rows
        if agent_path is not None:
            trained.agent.save(agent_path)

    return SchemeRun(name, seed, rows, final_window_secrecy(rows, config.final_window))


@dataclass(frozen=True)
class Comparison:
    runs: list[SchemeRun]
    summary: pd.DataFrame

    @property
    def rows(self) -> list[MetricsRow]:
        return [row for run in self.runs for row in run.rows]


def summarize(runs: list[SchemeRun]) -> pd.DataFrame:
    """Mean and population std of final-window secrecy per scheme, ranked best first."""
    frame = pd.DataFrame([(r.scheme, r.seed, r.final_secrecy) for r in runs], columns=["scheme", "seed", "secrecy"])
    summary = (
        frame.groupby("scheme", sort=False)["secrecy"]
        .agg(seeds="count", mean_secrecy="mean", std_secrecy=lambda s: float(np.std(s)))
        .reset_index()
    )
    summary["rank"] = summary["mean_secrecy"].rank(ascending=False, method="min").astype(int)
    return summary.sort_values(["rank", "scheme"], kind="stable").reset_index(drop=True)


def compare_schemes(config: RunConfig, scenario: ScenarioConfig | None = None) -> Comparison:
    """Fan every (scheme, seed) job out to ``config.workers`` processes; results keep job order."""
    config.validate()
    scenario = scenario or load_scenario(config.scenario, config.scenario_overrides)
    jobs = [(scheme, seed) for scheme in config.schemes for seed in config.seeds]
    runs = Parallel(n_jobs=config.workers)(
        delayed(run_scheme)(scheme, scenario, seed, config) for scheme, seed in jobs
    )
    return Comparison(list(runs), summarize(list(runs)))


def emit_csv(rows: list[MetricsRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.as_dict() for row in rows], columns=list(METRICS_COLUMNS))
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")


def machine_fingerprint() -> dict[str, str]:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "torch": torch.__version__,
        "metrics_version": str(METRICS_VERSION),
    }


def _latency_stats(samples: list[float]) -> tuple[float, float]:
    values = np.asarray(samples)
    return float(np.median(values)), float(np.percentile(values, 95))


def time_decisions(
    config: RunConfig,
    scenario: ScenarioConfig | None = None,
    agent: H2dsAgent | None = None,
) -> pd.DataFrame:
    """
    Per-decision latency of the trained policy and of the alternating optimization for
    each outer-iteration cap in ``config.timing_caps``. Channel draws are not timed.
    """
    config.validate()
    scenario = scenario or load_scenario(config.scenario, config.scenario_overrides)
    seed = config.seeds[0]
    if agent is None:
        agent = train(scenario, config.train, config.reward, seed).agent
    machine = machine_fingerprint()
    records = []

    for cap in config.timing_caps:
        env = SecrecyEnv(scenario, config.reward, seed, catalog=agent.catalog)
        state = env.reset(config.train.episodes)
        samples = []
        for _ in range(config.timing_decisions):
            started = time.perf_counter()
            decision = agent.act(state, explore=False)
            samples.append((time.perf_counter() - started) * 1e3)
            state = env.step(decision.action, decision.option, decision.continuous).next_state
        records.append((SchemeId.PROPOSED.value, cap, *_latency_stats(samples)))

        ao_config = dataclasses.replace(config.ao, max_outer_iterations=cap, early_stop=False)
        env = SecrecyEnv(scenario, config.reward, seed)
        env.reset(config.train.episodes)
        samples = []
        for _ in range(config.timing_decisions):
            started = time.perf_counter()
            result = ao_solve(scenario, env.channels, ao_config)
            samples.append((time.perf_counter() - started) * 1e3)
            env.step(result.action)
        records.append((SchemeId.AO.value, cap, *_latency_stats(samples)))
        logger.info(f"Timed {config.timing_decisions} decisions per scheme at AO cap {cap}")

    frame = pd.DataFrame(records, columns=["scheme", "iteration_cap", "median_ms", "p95_ms"])
    frame["decisions"] = config.timing_decisions
    for key, value in machine.items():
        frame[key] = value
    return frame
