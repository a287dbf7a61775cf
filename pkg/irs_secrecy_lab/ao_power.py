"""
Beamforming and subchannel-assignment block of the alternating optimization.

For fixed reflection, pairing and sensing time the per-SU power on each subchannel
solves the KKT condition of a per-sensed-state Lagrangian; beams point along the
maximum-ratio direction of the SU's composite channel. Subchannels then go to the SUs
with the largest indicator, and projected subgradient steps price the interference
cap and the energy budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linear_sum_assignment

from .actions import ActionComposite, Assignment
from .channels import ChannelSet
from .config import AoConfig
from .constraints import interference_slack
from .logging_config import logger
from .numerics import project_to_ball
from .rates import pbs_interference, secrecy_rate
from .scenario import ScenarioConfig
from .sensing import SensingReport, sense

LN2 = math.log(2.0)

# Largest number of injective SU-to-subchannel maps enumerated exhaustively
BRUTE_FORCE_LIMIT = 720


@dataclass
class DualVars:
    """Multipliers of the interference caps and the energy budget."""

    omega: NDArray[np.float64]  # per subchannel, >= 0
    varsigma: float = 0.0  # energy budget, >= 0

    @classmethod
    def zeros(cls, n_subchannels: int) -> DualVars:
        return cls(np.zeros(n_subchannels), 0.0)

    def is_valid(self) -> bool:
        return bool(np.all(self.omega >= 0.0) and self.varsigma >= 0.0)


@dataclass(frozen=True)
class LinkGains:
    """
    Scalar model of SU ``k`` on subchannel ``c`` along a fixed beam direction.

    Index ``j`` of the pairs is the sensed state (0 idle, 1 busy). Busy-state noise folds in
    the PBS interference weighted by the probability that the channel is truly busy.
    """

    signal: float  # SU gain per unit power
    eve: float  # strongest eavesdropper gain per unit power
    noise_su: tuple[float, float]
    noise_eve: tuple[float, float]
    weights: tuple[float, float]  # time share times probability of the sensed state
    busy: tuple[float, float]  # time share times P(sensed j, truly busy)
    leak: float  # worst PU leak per unit power
    direction: NDArray[np.complex128]


@dataclass(frozen=True)
class BeamformingSolution:
    powers: NDArray[np.float64]  # (K, C)
    beams: NDArray[np.complex128]  # (K, C, N_s)
    lagrangian: NDArray[np.float64]  # (K, C), combined Lagrangian at the chosen power
    gains: tuple[tuple[LinkGains, ...], ...]  # [k][c]


def link_gains(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    k: int,
    c: int,
    scenario: ScenarioConfig,
) -> LinkGains:
    z = action.assignment.irs_of(k)
    phi = action.theta.phi(z)
    composite = channels.sbs_to_su(k, z, phi)
    norm = float(np.linalg.norm(composite))
    direction = composite.conj() / norm if norm > 0.0 else np.zeros_like(composite)

    signal = float(abs(composite @ direction) ** 2)
    eve_gains = [abs(channels.sbs_to_eve(m, z, phi) @ direction) ** 2 for m in range(scenario.n_eve)]
    strongest = int(np.argmax(eve_gains)) if eve_gains else None
    eve = float(eve_gains[strongest]) if strongest is not None else 0.0

    interference_su = pbs_interference(channels, action, c, "su", k)
    interference_eve = (
        pbs_interference(channels, action, c, "eve", strongest) if strongest is not None else 0.0
    )
    time_share = 1.0 - action.tau / scenario.frame_s
    p = sensing.probs[c]
    noise_su, noise_eve, weights, busy = [], [], [], []
    for idle_true, busy_true in ((p.p00, p.p01), (p.p10, p.p11)):
        total = idle_true + busy_true
        rho = busy_true / total if total > 0.0 else 0.0
        noise_su.append(scenario.noise_su_w + rho * interference_su)
        noise_eve.append(scenario.noise_eve_w + rho * interference_eve)
        weights.append(time_share * total)
        busy.append(time_share * busy_true)

    leaks = [abs(channels.sbs_to_pu(d, z, phi) @ direction) ** 2 for d in scenario.licensed_pus(c)]
    return LinkGains(
        signal=signal,
        eve=eve,
        noise_su=(noise_su[0], noise_su[1]),
        noise_eve=(noise_eve[0], noise_eve[1]),
        weights=(weights[0], weights[1]),
        busy=(busy[0], busy[1]),
        leak=float(max(leaks, default=0.0)),
        direction=direction,
    )


def power_price(gains: LinkGains, j: int, duals: DualVars, c: int, scenario: ScenarioConfig) -> float:
    """Dual cost per unit power of sensed-state term ``j``, with constraints normalized."""
    interference = duals.omega[c] * gains.leak * gains.busy[j] / scenario.interference_cap_w
    energy = duals.varsigma * gains.weights[j] / scenario.energy_budget
    return float(interference + energy)


def term_lagrangian(x: float, gains: LinkGains, j: int, price: float) -> float:
    """Secrecy rate of sensed state ``j`` at power ``x`` minus its dual cost."""
    su = math.log1p(gains.signal * x / gains.noise_su[j])
    eve = math.log1p(gains.eve * x / gains.noise_eve[j])
    return gains.weights[j] / LN2 * (su - eve) - price * x


def stationary_powers(gains: LinkGains, j: int, price: float) -> list[float]:
    """
    Positive roots of the stationarity condition of ``term_lagrangian``.

    Clearing denominators of ``dL/dx = 0`` leaves
    ``price*A*B x^2 + price*(A*Ne + B*Ns) x + price*Ns*Ne - w/ln2*(A*Ne - B*Ns) = 0``.
    """
    a_gain, b_gain = gains.signal, gains.eve
    n_su, n_eve = gains.noise_su[j], gains.noise_eve[j]
    drive = gains.weights[j] / LN2 * (a_gain * n_eve - b_gain * n_su)

    quadratic = price * a_gain * b_gain
    linear = price * (a_gain * n_eve + b_gain * n_su)
    constant = price * n_su * n_eve - drive

    if quadratic == 0.0:
        if linear == 0.0:
            return []
        root = -constant / linear
        return [root] if root > 0.0 else []
    discriminant = linear**2 - 4.0 * quadratic * constant
    if discriminant < 0.0:
        return []
    spread = math.sqrt(discriminant)
    roots = ((-linear + spread) / (2.0 * quadratic), (-linear - spread) / (2.0 * quadratic))
    return [r for r in roots if r > 0.0]


def _best_power(candidates: list[float], score) -> tuple[float, float]:
    best_x, best_value = 0.0, -math.inf
    for x in sorted(set(candidates)):
        value = score(x)
        if value > best_value:
            best_x, best_value = x, value
    return best_x, best_value


def beamforming_closed_form(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    duals: DualVars,
    scenario: ScenarioConfig,
) -> BeamformingSolution:
    """Per (SU, subchannel) power from the KKT roots, chosen by the combined Lagrangian."""
    k_count, c_count = scenario.n_su, scenario.n_subchannels
    cap = scenario.energy_budget
    powers = np.zeros((k_count, c_count))
    beams = np.zeros((k_count, c_count, scenario.n_sbs_antennas), dtype=complex)
    lagrangian = np.zeros((k_count, c_count))
    all_gains = []

    for k in range(k_count):
        row = []
        for c in range(c_count):
            gains = link_gains(channels, action, sensing, k, c, scenario)
            row.append(gains)
            prices = [power_price(gains, j, duals, c, scenario) for j in (0, 1)]
            candidates = [0.0, cap]
            for j in (0, 1):
                candidates.extend(r for r in stationary_powers(gains, j, prices[j]) if r < cap)
            x, value = _best_power(
                candidates,
                lambda x: sum(term_lagrangian(x, gains, j, prices[j]) for j in (0, 1)),
            )
            powers[k, c] = x
            lagrangian[k, c] = value
            beams[k, c] = math.sqrt(x) * gains.direction
        all_gains.append(tuple(row))

    return BeamformingSolution(powers, beams, lagrangian, tuple(all_gains))


def subchannel_indicator(gains: LinkGains, power: float) -> float:
    """Sum over sensed states of weight times ``(r - x dr/dx)``."""
    total = 0.0
    for j in (0, 1):
        n_su, n_eve = gains.noise_su[j], gains.noise_eve[j]
        rate = (
            math.log1p(gains.signal * power / n_su) - math.log1p(gains.eve * power / n_eve)
        ) / LN2
        slope = (
            gains.signal / (n_su + gains.signal * power) - gains.eve / (n_eve + gains.eve * power)
        ) / LN2
        total += gains.weights[j] * (rate - power * slope)
    return total


def indicator_matrix(solution: BeamformingSolution) -> NDArray[np.float64]:
    k_count, c_count = solution.powers.shape
    return np.array(
        [
            [subchannel_indicator(solution.gains[k][c], solution.powers[k, c]) for c in range(c_count)]
            for k in range(k_count)
        ]
    )


def assign_subchannels(indicator: NDArray[np.float64]) -> tuple[int, ...]:
    """
    Subchannel per SU maximizing the summed indicator, one SU per subchannel.

    The per-subchannel argmax is kept when it already gives every SU exactly one
    subchannel; otherwise small instances are enumerated lexicographically (first
    maximum wins) and larger ones go to ``linear_sum_assignment``.
    """
    h = np.asarray(indicator, dtype=float)
    k_count, c_count = h.shape
    if k_count > c_count:
        raise ValueError(f"Cannot assign {k_count} SUs to {c_count} subchannels")

    winners = h.argmax(axis=0)
    if c_count == k_count and sorted(winners.tolist()) == list(range(k_count)):
        channels_of = [0] * k_count
        for c, k in enumerate(winners):
            channels_of[int(k)] = c
        return tuple(channels_of)

    if math.perm(c_count, k_count) <= BRUTE_FORCE_LIMIT:
        best, best_value = None, -math.inf
        for candidate in itertools.permutations(range(c_count), k_count):
            value = sum(h[k, c] for k, c in enumerate(candidate))
            if value > best_value:
                best, best_value = candidate, value
        return tuple(best)

    rows, cols = linear_sum_assignment(h, maximize=True)
    channels_of = [0] * k_count
    for k, c in zip(rows, cols):
        channels_of[int(k)] = int(c)
    return tuple(channels_of)


def update_duals(
    duals: DualVars,
    interference: NDArray[np.float64],
    energy: float,
    scenario: ScenarioConfig,
    iteration: int,
    step0: float,
) -> DualVars:
    """Projected subgradient step with step size ``step0 / sqrt(iteration)`` on normalized violations."""
    if iteration < 1:
        raise ValueError("Dual iterations are counted from 1")
    step = step0 / math.sqrt(iteration)
    omega = np.maximum(
        0.0, duals.omega + step * (np.asarray(interference) / scenario.interference_cap_w - 1.0)
    )
    varsigma = max(0.0, duals.varsigma + step * (energy / scenario.energy_budget - 1.0))
    return DualVars(omega, varsigma)


def dual_value(solution: BeamformingSolution, channels_of: tuple[int, ...], duals: DualVars) -> float:
    """
    Dual function at ``duals`` for the assignment ``channels_of``.

    Each assigned link contributes its maximized Lagrangian; normalized constraints add
    one unit per multiplier.
    """
    links = sum(solution.lagrangian[k, c] for k, c in enumerate(channels_of))
    return float(links + duals.omega.sum() + duals.varsigma)


@dataclass(frozen=True)
class PowerBlockResult:
    action: ActionComposite
    objective: float
    feasible: bool
    duals: DualVars
    iterations: int
    dual_values: tuple[float, ...] = ()


def average_interference(
    gains: tuple[tuple[LinkGains, ...], ...],
    channels_of: tuple[int, ...],
    powers: NDArray[np.float64],
    n_subchannels: int,
) -> NDArray[np.float64]:
    interference = np.zeros(n_subchannels)
    for k, c in enumerate(channels_of):
        g = gains[k][c]
        interference[c] = (g.busy[0] + g.busy[1]) * g.leak * powers[k]
    return interference


def solve_power_block(
    channels: ChannelSet,
    action: ActionComposite,
    scenario: ScenarioConfig,
    config: AoConfig,
    sensing: SensingReport | None = None,
) -> PowerBlockResult:
    """
    Alternate closed-form powers, assignment and dual steps; keep the best iterate,
    preferring ones within the interference caps.

    With ``config.early_stop`` the loop ends once the dual function moves by less than
    ``config.dual_tolerance`` (relative) between consecutive iterations.
    """
    sensing = sensing or sense(channels, action.theta, action.tau, scenario)
    duals = DualVars.zeros(scenario.n_subchannels)
    pairing = action.assignment.pairing
    best: tuple[tuple[bool, float], ActionComposite, DualVars] | None = None
    dual_values: list[float] = []

    for t in range(1, config.dual_iterations + 1):
        solution = beamforming_closed_form(channels, action, sensing, duals, scenario)
        indicator = indicator_matrix(solution)
        channels_of = assign_subchannels(indicator)
        powers = np.array([solution.powers[k, c] for k, c in enumerate(channels_of)])
        beams = np.array([solution.beams[k, c] for k, c in enumerate(channels_of)])
        beams = project_to_ball(beams, scenario.energy_budget)

        assignment = Assignment.from_indices(channels_of, pairing, scenario.n_subchannels, scenario.n_irs)
        candidate = ActionComposite(assignment, action.theta, beams, action.tau)
        objective = secrecy_rate(channels, candidate, sensing, scenario)
        feasible = bool(np.all(interference_slack(channels, candidate, sensing, scenario) >= 0.0))
        key = (feasible, objective)
        if best is None or key > best[0]:
            best = (key, candidate, duals)

        dual_values.append(dual_value(solution, channels_of, duals))
        if config.early_stop and len(dual_values) > 1:
            previous = dual_values[-2]
            if abs(dual_values[-1] - previous) <= config.dual_tolerance * max(1.0, abs(previous)):
                break

        interference = average_interference(solution.gains, channels_of, powers, scenario.n_subchannels)
        duals = update_duals(duals, interference, float(powers.sum()), scenario, t, config.dual_step)

    assert best is not None
    (feasible, objective), chosen, chosen_duals = best
    if not feasible:
        logger.debug("Power block found no iterate within the interference caps")
    return PowerBlockResult(chosen, objective, feasible, chosen_duals, len(dual_values), tuple(dual_values))
