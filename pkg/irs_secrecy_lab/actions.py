"""Decision variables of the secrecy-rate problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .scenario import ScenarioConfig

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ReflectionConfig:
    """Per-IRS amplitudes in [0, 1] and phases in [0, 2pi), both shaped (Z, N_n)."""

    amplitudes: NDArray[np.float64]
    phases: NDArray[np.float64]

    @classmethod
    def identity(cls, n_irs: int, n_elements: int) -> ReflectionConfig:
        return cls(np.ones((n_irs, n_elements)), np.zeros((n_irs, n_elements)))

    @classmethod
    def off(cls, n_irs: int, n_elements: int) -> ReflectionConfig:
        return cls(np.zeros((n_irs, n_elements)), np.zeros((n_irs, n_elements)))

    @classmethod
    def from_coefficients(cls, coefficients: NDArray[np.complex128]) -> ReflectionConfig:
        """Split complex coefficients with ``|c| <= 1`` into amplitude and phase."""
        amplitudes = np.clip(np.abs(coefficients), 0.0, 1.0)
        phases = np.mod(np.angle(coefficients), TWO_PI)
        phases = np.where(phases >= TWO_PI, 0.0, phases)
        return cls(amplitudes, phases)

    @property
    def coefficients(self) -> NDArray[np.complex128]:
        return self.amplitudes * np.exp(1j * self.phases)

    def phi(self, z: int) -> NDArray[np.complex128]:
        return self.amplitudes[z] * np.exp(1j * self.phases[z])

    def with_irs(self, z: int, amplitudes: NDArray[np.float64], phases: NDArray[np.float64]) -> ReflectionConfig:
        amp, ph = self.amplitudes.copy(), self.phases.copy()
        amp[z], ph[z] = amplitudes, phases
        return ReflectionConfig(amp, ph)

    def is_valid(self, atol: float = 0.0) -> bool:
        """Amplitude and phase ranges of C4/C5."""
        return bool(
            np.all(self.amplitudes >= -atol)
            and np.all(self.amplitudes <= 1.0 + atol)
            and np.all(self.phases >= 0.0)
            and np.all(self.phases < TWO_PI)
        )


@dataclass(frozen=True)
class Assignment:
    """Subchannel assignment ``xi`` (K x C) and IRS pairing ``zeta`` (K x Z)."""

    xi: NDArray[np.int64]
    zeta: NDArray[np.int64]

    @classmethod
    def from_indices(
        cls,
        channels_of: tuple[int, ...],
        irs_of: tuple[int, ...],
        n_subchannels: int,
        n_irs: int,
    ) -> Assignment:
        k = len(channels_of)
        xi = np.zeros((k, n_subchannels), dtype=np.int64)
        zeta = np.zeros((k, n_irs), dtype=np.int64)
        xi[np.arange(k), list(channels_of)] = 1
        zeta[np.arange(k), list(irs_of)] = 1
        return cls(xi, zeta)

    def channel_of(self, k: int) -> int:
        row = np.flatnonzero(self.xi[k])
        if row.size != 1:
            raise ValueError(f"SU {k} is not assigned exactly one subchannel")
        return int(row[0])

    def irs_of(self, k: int) -> int:
        row = np.flatnonzero(self.zeta[k])
        if row.size != 1:
            raise ValueError(f"SU {k} is not paired with exactly one IRS")
        return int(row[0])

    def su_on(self, c: int) -> int | None:
        col = np.flatnonzero(self.xi[:, c])
        return int(col[0]) if col.size else None

    @property
    def channels(self) -> tuple[int, ...]:
        return tuple(self.channel_of(k) for k in range(self.xi.shape[0]))

    @property
    def pairing(self) -> tuple[int, ...]:
        return tuple(self.irs_of(k) for k in range(self.zeta.shape[0]))

    def subchannels_valid(self) -> bool:
        """C6: one subchannel per SU, at most one SU per subchannel."""
        binary = np.isin(self.xi, (0, 1)).all()
        return bool(binary and np.all(self.xi.sum(axis=1) == 1) and np.all(self.xi.sum(axis=0) <= 1))

    def pairing_valid(self) -> bool:
        """C7: exactly one IRS per SU; an IRS may serve several SUs."""
        return bool(np.isin(self.zeta, (0, 1)).all() and np.all(self.zeta.sum(axis=1) == 1))


@dataclass(frozen=True)
class ActionComposite:
    """
    Full decision of one frame.

    ``beams[k]`` is the SBS beam of SU ``k`` on its assigned subchannel.
    """

    assignment: Assignment
    theta: ReflectionConfig
    beams: NDArray[np.complex128]  # (K, N_s)
    tau: float

    @property
    def beam_energy(self) -> float:
        return float(np.sum(np.abs(self.beams) ** 2))

    def replace_theta(self, theta: ReflectionConfig) -> ActionComposite:
        return ActionComposite(self.assignment, theta, self.beams, self.tau)

    def replace_beams(self, beams: NDArray[np.complex128]) -> ActionComposite:
        return ActionComposite(self.assignment, self.theta, beams, self.tau)

    def replace_tau(self, tau: float) -> ActionComposite:
        return ActionComposite(self.assignment, self.theta, self.beams, tau)

    def replace_assignment(self, assignment: Assignment) -> ActionComposite:
        return ActionComposite(assignment, self.theta, self.beams, self.tau)


def uniform_beams(scenario: ScenarioConfig) -> NDArray[np.complex128]:
    """Equal-power beams over SUs spending the full energy budget."""
    k, n_s = scenario.n_su, scenario.n_sbs_antennas
    per_entry = math.sqrt(scenario.energy_budget / (k * n_s))
    return np.full((k, n_s), per_entry, dtype=complex)


def mrt_beam(channel: NDArray[np.complex128], power: float) -> NDArray[np.complex128]:
    """Maximum-ratio beam of squared norm ``power`` for the row channel ``channel``."""
    norm = float(np.linalg.norm(channel))
    if norm == 0.0 or power <= 0.0:
        return np.zeros_like(channel)
    return math.sqrt(power) * channel.conj() / norm
