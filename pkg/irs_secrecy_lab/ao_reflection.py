"""
Reflection block of the alternating optimization.

Reflection coefficients of the paired IRSs live in the unit disk. Each SU's received
amplitude ``s = a + u^T phi`` is affine in them, so its power ``|s|^2`` admits the first
order lower bound ``|s*|^2 + 2 Re(conj(s*) (s - s*))`` around an expansion point ``s*``.
Replacing the SU powers by that bound (eavesdropper terms stay exact) gives a surrogate
that touches the secrecy margin at the expansion point; each round maximizes it by
projected gradient ascent and re-expands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from numpy.typing import NDArray

from .actions import ActionComposite, ReflectionConfig
from .channels import ChannelSet
from .config import AoConfig
from .rates import pbs_interference, secrecy_rate
from .scenario import ScenarioConfig
from .sensing import SensingReport, sense

ARMIJO_C = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-12


@dataclass(frozen=True)
class SurrogatePoint:
    """Expansion point of the SU power bound: real and imaginary parts plus the power slack."""

    mu: NDArray[np.float64]  # (K,)
    lam: NDArray[np.float64]  # (K,)
    kappa: NDArray[np.float64]  # (K,)

    @classmethod
    def at(cls, amplitudes: NDArray[np.complex128]) -> SurrogatePoint:
        s = np.asarray(amplitudes, dtype=complex)
        return cls(s.real.copy(), s.imag.copy(), np.abs(s) ** 2)

    def is_valid(self, atol: float = 1e-12) -> bool:
        return bool(np.all(self.kappa <= self.mu**2 + self.lam**2 + atol))


def taylor_lower_bound(mu, lam, mu0, lam0):
    """First order expansion of ``mu^2 + lam^2`` at ``(mu0, lam0)``; never above the function."""
    return mu0**2 + lam0**2 + 2.0 * mu0 * (mu - mu0) + 2.0 * lam0 * (lam - lam0)


@dataclass(frozen=True)
class _Link:
    direct: complex
    through: torch.Tensor  # (N_n,) complex, coefficient of phi
    noise: float
    interference: float


@dataclass(frozen=True)
class _SuTerms:
    irs_slot: int
    su: _Link
    eves: tuple[_Link, ...]
    idle: float  # time share times probability the channel is truly idle
    busy: float


@dataclass(frozen=True)
class ScaResult:
    theta: ReflectionConfig
    objective: float
    rounds: int
    history: tuple[float, ...]


def _terms(
    channels: ChannelSet,
    action: ActionComposite,
    sensing: SensingReport,
    scenario: ScenarioConfig,
    slots: dict[int, int],
) -> list[_SuTerms]:
    time_share = 1.0 - action.tau / scenario.frame_s
    terms = []
    for k in range(scenario.n_su):
        c = action.assignment.channel_of(k)
        z = action.assignment.irs_of(k)
        beam = action.beams[k]
        relay = channels.sbs_irs[z] @ beam
        su = _Link(
            direct=complex(channels.sbs_su[k] @ beam),
            through=torch.as_tensor(channels.irs_su[z, k] * relay),
            noise=scenario.noise_su_w,
            interference=pbs_interference(channels, action, c, "su", k),
        )
        eves = tuple(
            _Link(
                direct=complex(channels.sbs_eve[m] @ beam),
                through=torch.as_tensor(channels.irs_eve[z, m] * relay),
                noise=scenario.noise_eve_w,
                interference=pbs_interference(channels, action, c, "eve", m),
            )
            for m in range(scenario.n_eve)
        )
        p = sensing.probs[c]
        terms.append(
            _SuTerms(slots[z], su, eves, time_share * (p.p00 + p.p10), time_share * (p.p01 + p.p11))
        )
    return terms


def _averaged_rate(power: torch.Tensor, link: _Link, idle: float, busy: float) -> torch.Tensor:
    return (
        idle * torch.log2(1.0 + power / link.noise)
        + busy * torch.log2(1.0 + power / (link.noise + link.interference))
    )


def _amplitude(link: _Link, phi: torch.Tensor) -> torch.Tensor:
    return link.direct + (link.through * phi).sum()


def surrogate_objective(
    phi: torch.Tensor,
    terms: list[_SuTerms],
    anchors: list[complex],
) -> torch.Tensor:
    """Secrecy margin with each SU's received power replaced by its lower bound at ``anchors``."""
    total = torch.zeros((), dtype=torch.float64)
    for term, anchor in zip(terms, anchors):
        s = _amplitude(term.su, phi[term.irs_slot])
        bound = taylor_lower_bound(s.real, s.imag, anchor.real, anchor.imag).clamp(min=0.0)
        legit = _averaged_rate(bound, term.su, term.idle, term.busy)
        if term.eves:
            leaked = torch.stack(
                [
                    _averaged_rate(_amplitude(e, phi[term.irs_slot]).abs() ** 2, e, term.idle, term.busy)
                    for e in term.eves
                ]
            ).max()
        else:
            leaked = torch.zeros((), dtype=torch.float64)
        total = total + legit - leaked
    return total


def _project(phi: torch.Tensor) -> torch.Tensor:
    magnitude = phi.abs()
    return torch.where(magnitude > 1.0, phi / magnitude.clamp(min=1e-300), phi)


def _ascend(
    phi: torch.Tensor,
    terms: list[_SuTerms],
    anchors: list[complex],
    config: AoConfig,
) -> torch.Tensor:
    """Projected gradient ascent with Armijo backtracking on the surrogate."""
    step = 1.0
    for _ in range(config.sca_inner_steps):
        x = phi.detach().requires_grad_(True)
        value = surrogate_objective(x, terms, anchors)
        (grad,) = torch.autograd.grad(value, x)
        # conjugate Wirtinger gradient, the steepest ascent direction for a real objective
        direction = grad
        base = float(value)
        while step > MIN_STEP:
            trial = _project(phi + step * direction)
            with torch.no_grad():
                gained = float(surrogate_objective(trial, terms, anchors)) - base
            predicted = float(torch.real(torch.vdot(direction.flatten(), (trial - phi).flatten())))
            if gained >= ARMIJO_C * predicted and gained > 0.0:
                break
            step *= BACKTRACK
        else:
            return phi
        if gained < config.sca_tolerance:
            return trial
        phi = trial.detach()
        step = min(step / BACKTRACK, 1.0)
    return phi


def _theta_from(base: ReflectionConfig, irs: list[int], phi: NDArray[np.complex128]) -> ReflectionConfig:
    coefficients = base.coefficients.copy()
    for slot, z in enumerate(irs):
        coefficients[z] = phi[slot]
    return ReflectionConfig.from_coefficients(coefficients)


def phase_aligned_start(channels: ChannelSet, action: ActionComposite, irs: list[int]) -> NDArray[np.complex128]:
    """Unit-modulus coefficients aligning each IRS path with the direct path of its first SU."""
    start = np.ones((len(irs), channels.sbs_irs.shape[1]), dtype=complex)
    pairing = action.assignment.pairing
    for slot, z in enumerate(irs):
        k = pairing.index(z)
        beam = action.beams[k]
        through = channels.irs_su[z, k] * (channels.sbs_irs[z] @ beam)
        direct = channels.sbs_su[k] @ beam
        start[slot] = np.exp(1j * (np.angle(direct) - np.angle(through)))
    return start


def sca_reflection(
    channels: ChannelSet,
    action: ActionComposite,
    scenario: ScenarioConfig,
    config: AoConfig,
    theta_init: ReflectionConfig | None = None,
) -> ScaResult:
    """
    Improve the paired IRSs' coefficients for fixed assignment, beams and sensing time.

    Starts from ``theta_init`` and from a phase-aligned point; a round is kept only when
    the exact secrecy rate improves, so the returned objective never falls below the
    starting one.
    """
    theta0 = theta_init or action.theta
    irs = sorted(set(action.assignment.pairing))
    slots = {z: slot for slot, z in enumerate(irs)}

    def exact(theta: ReflectionConfig) -> float:
        candidate = action.replace_theta(theta)
        return secrecy_rate(channels, candidate, sense(channels, theta, action.tau, scenario), scenario)

    best_theta, best_value = theta0, exact(theta0)
    history = [best_value]
    rounds = 0
    starts = [theta0.coefficients[irs], phase_aligned_start(channels, action, irs)]

    for start in starts:
        phi = torch.as_tensor(start, dtype=torch.complex128)
        theta = _theta_from(theta0, irs, start)
        value = exact(theta)
        if value > best_value:
            best_theta, best_value = theta, value
            history.append(value)
        for _ in range(config.sca_iterations):
            rounds += 1
            current = action.replace_theta(theta)
            sensing = sense(channels, theta, action.tau, scenario)
            terms = _terms(channels, current, sensing, scenario, slots)
            anchors = [complex(_amplitude(t.su, phi[t.irs_slot])) for t in terms]
            phi_next = _ascend(phi, terms, anchors, config)
            theta_next = _theta_from(theta0, irs, phi_next.detach().numpy())
            value_next = exact(theta_next)
            if value_next <= value + config.sca_tolerance:
                break
            phi, theta, value = phi_next.detach(), theta_next, value_next
            if value > best_value:
                best_theta, best_value = theta, value
                history.append(value)

    return ScaResult(best_theta, best_value, rounds, tuple(history))
