"""Alternating optimization baseline: power and assignment, pairing, reflection, sensing time."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .actions import ActionComposite, Assignment, ReflectionConfig, mrt_beam, uniform_beams
from .ao_power import solve_power_block
from .ao_reflection import sca_reflection
from .channels import ChannelSet
from .config import AoConfig
from .constraints import check_constraints, interference_slack
from .logging_config import logger
from .rates import average_rates, evaluate_action
from .scenario import ScenarioConfig
from .sensing import SensingReport, false_alarm_prob, sense

TAU_GRID_LOW, TAU_GRID_HIGH = 0.01, 0.99


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    block: str
    objective: float


@dataclass(frozen=True)
class AoResult:
    action: ActionComposite
    objective: float
    trace: tuple[TraceEntry, ...]
    converged: bool
    iterations: int
    feasible: bool

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(e.iteration, e.block, e.objective) for e in self.trace],
            columns=["iteration", "block", "objective"],
        )


def ao_objective(channels: ChannelSet, action: ActionComposite, scenario: ScenarioConfig) -> float:
    _, rates = evaluate_action(channels, action, scenario)
    return rates.secrecy


def is_admissible(channels: ChannelSet, action: ActionComposite, scenario: ScenarioConfig) -> bool:
    """Sensing constraint and interference caps hold; the rest holds by construction."""
    sensing = sense(channels, action.theta, action.tau, scenario)
    report = check_constraints(channels, action, sensing, scenario)
    return report.structural_ok() and report.sensing_ok() and bool(np.all(report.interference >= 0.0))


def initial_action(channels: ChannelSet, scenario: ScenarioConfig) -> ActionComposite:
    """Identity reflection, SU k on subchannel k, strongest-IRS pairing, equal power."""
    theta = ReflectionConfig.identity(scenario.n_irs, scenario.n_elements)
    pairing = tuple(
        int(np.argmax([np.linalg.norm(channels.sbs_to_su(k, z, theta.phi(z))) for z in range(scenario.n_irs)]))
        for k in range(scenario.n_su)
    )
    assignment = Assignment.from_indices(
        tuple(range(scenario.n_su)), pairing, scenario.n_subchannels, scenario.n_irs
    )
    return ActionComposite(assignment, theta, uniform_beams(scenario), scenario.frame_s / 10.0)


def pair_irs(
    channels: ChannelSet,
    action: ActionComposite,
    scenario: ScenarioConfig,
    sensing: SensingReport | None = None,
) -> ActionComposite:
    """
    Re-pair every SU with the IRS maximizing its own secrecy rate.

    The beam keeps its power and is re-pointed along the candidate composite channel.
    Candidates breaking the SU's interference cap are skipped unless all do, in which
    case the least interfering IRS is used. SUs are independent here because an SU's
    rates and leak depend only on its own pairing.
    """
    sensing = sensing or sense(channels, action.theta, action.tau, scenario)
    pairing = list(action.assignment.pairing)
    beams = action.beams.copy()

    for k in range(scenario.n_su):
        c = action.assignment.channel_of(k)
        power = float(np.sum(np.abs(action.beams[k]) ** 2))
        scored = []
        for z in range(scenario.n_irs):
            trial_pairing = pairing.copy()
            trial_pairing[k] = z
            trial_beams = beams.copy()
            trial_beams[k] = mrt_beam(channels.sbs_to_su(k, z, action.theta.phi(z)), power)
            trial = ActionComposite(
                Assignment.from_indices(
                    action.assignment.channels, tuple(trial_pairing), scenario.n_subchannels, scenario.n_irs
                ),
                action.theta,
                trial_beams,
                action.tau,
            )
            su, eve = average_rates(channels, trial, sensing, scenario)
            strongest = eve[:, k].max() if eve.shape[0] else 0.0
            secrecy = max(su[k] - strongest, 0.0)
            slack = interference_slack(channels, trial, sensing, scenario)[c]
            scored.append((z, secrecy, slack, trial_beams[k]))

        feasible = [s for s in scored if s[2] >= 0.0]
        if feasible:
            z, _, _, beam = max(feasible, key=lambda s: (s[1], -s[0]))
        else:
            z, _, _, beam = max(scored, key=lambda s: (s[2], -s[0]))
        pairing[k] = z
        beams[k] = beam

    assignment = Assignment.from_indices(
        action.assignment.channels, tuple(pairing), scenario.n_subchannels, scenario.n_irs
    )
    return ActionComposite(assignment, action.theta, beams, action.tau)


def search_sensing_time(
    channels: ChannelSet,
    action: ActionComposite,
    scenario: ScenarioConfig,
    grid_points: int,
    objective: Callable[[float], float] | None = None,
) -> float:
    """
    Best sensing time on a uniform grid over [0.01T, 0.99T] among those meeting the
    false-alarm limit; the earliest wins ties. Without any admissible point the time
    with the lowest worst-case false-alarm probability is returned.
    """
    if grid_points < 2:
        raise ValueError("Sensing-time grid needs at least two points")
    taus = np.linspace(TAU_GRID_LOW * scenario.frame_s, TAU_GRID_HIGH * scenario.frame_s, grid_points)
    objective = objective or (lambda tau: ao_objective(channels, action.replace_tau(tau), scenario))

    report = sense(channels, action.theta, taus[0], scenario)
    active = [c for c in range(scenario.n_subchannels) if report.active(c)]
    if active:
        gammas = np.array([report.gamma[c] for c in active])
        worst_pf = np.array([np.max(false_alarm_prob(gammas, tau, scenario)) for tau in taus])
    else:
        worst_pf = np.zeros_like(taus)

    admissible = worst_pf <= scenario.max_pf
    if not admissible.any():
        tau = float(taus[int(np.argmin(worst_pf))])
        logger.warning(
            f"No sensing time meets the false-alarm limit {scenario.max_pf}; using {tau:.4g} s"
        )
        return tau

    best_tau, best_value = None, -np.inf
    for tau in taus[admissible]:
        value = objective(float(tau))
        if value > best_value:
            best_tau, best_value = float(tau), value
    return best_tau


def ao_solve(
    scenario: ScenarioConfig,
    channels: ChannelSet,
    config: AoConfig | None = None,
) -> AoResult:
    """
    Alternate the four blocks until an outer iteration gains less than the tolerance.

    The start point gets a sensing-time search and one power block. Afterwards a
    block's output replaces the current action only if the objective does not drop and
    admissibility is not lost, so the recorded trace is non-decreasing.
    """
    config = config or AoConfig()
    action = initial_action(channels, scenario)
    action = action.replace_tau(search_sensing_time(channels, action, scenario, config.tau_grid_points))
    action = solve_power_block(channels, action, scenario, config).action
    objective = ao_objective(channels, action, scenario)
    admissible = is_admissible(channels, action, scenario)
    trace = [TraceEntry(0, "init", objective)]

    blocks: list[tuple[str, Callable[[ActionComposite], ActionComposite]]] = [
        ("power", lambda a: solve_power_block(channels, a, scenario, config).action),
        ("pairing", lambda a: pair_irs(channels, a, scenario)),
        ("reflection", lambda a: a.replace_theta(sca_reflection(channels, a, scenario, config).theta)),
        (
            "sensing_time",
            lambda a: a.replace_tau(search_sensing_time(channels, a, scenario, config.tau_grid_points)),
        ),
    ]

    converged = False
    iterations = 0
    for iteration in range(1, config.max_outer_iterations + 1):
        iterations = iteration
        start = objective
        for name, block in blocks:
            candidate = block(action)
            candidate_objective = ao_objective(channels, candidate, scenario)
            candidate_admissible = is_admissible(channels, candidate, scenario)
            if candidate_objective >= objective and (candidate_admissible or not admissible):
                action, objective, admissible = candidate, candidate_objective, candidate_admissible
            trace.append(TraceEntry(iteration, name, objective))
        converged = objective - start < config.tolerance
        if converged and config.early_stop:
            break

    if not converged:
        logger.warning(f"AO stopped at the cap of {config.max_outer_iterations} outer iterations")
    logger.debug(f"AO finished after {iterations} iterations with secrecy rate {objective:.6g}")
    return AoResult(action, objective, tuple(trace), converged, iterations, admissible)


def write_trace(result: AoResult, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    result.trace_frame().to_csv(path, index=False)
