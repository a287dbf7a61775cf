"""Discrete option catalog and the continuous action codec of the hierarchical agent."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .actions import TWO_PI, ActionComposite, Assignment, ReflectionConfig
from .numerics import project_to_ball
from .scenario import ScenarioConfig

TAU_LOW, TAU_HIGH = 0.01, 0.99  # sensing time range as fractions of the frame


@dataclass(frozen=True)
class Option:
    """Subchannel per SU and IRS per SU."""

    channels: tuple[int, ...]
    pairing: tuple[int, ...]


class OptionCatalog:
    """All (assignment, pairing) combinations, ordered lexicographically by channels then IRSs."""

    def __init__(self, scenario: ScenarioConfig):
        if scenario.n_su > scenario.n_subchannels:
            raise ValueError("Option catalog needs at least as many subchannels as SUs")
        self.n_subchannels = scenario.n_subchannels
        self.n_irs = scenario.n_irs
        self.options: tuple[Option, ...] = tuple(
            Option(channels, pairing)
            for channels in itertools.permutations(range(scenario.n_subchannels), scenario.n_su)
            for pairing in itertools.product(range(scenario.n_irs), repeat=scenario.n_su)
        )
        self._index = {(o.channels, o.pairing): i for i, o in enumerate(self.options)}

    def __len__(self) -> int:
        return len(self.options)

    def __getitem__(self, index: int) -> Option:
        return self.options[index]

    def assignment(self, index: int) -> Assignment:
        option = self.options[index]
        return Assignment.from_indices(option.channels, option.pairing, self.n_subchannels, self.n_irs)

    def index_of(self, assignment: Assignment) -> int:
        return self._index[(assignment.channels, assignment.pairing)]

    def with_pairing(self, pairing: tuple[int, ...]) -> list[int]:
        """Indices of options using exactly ``pairing``."""
        return [i for i, o in enumerate(self.options) if o.pairing == pairing]


def build_option_catalog(scenario: ScenarioConfig) -> OptionCatalog:
    return OptionCatalog(scenario)


class ActionCodec:
    """
    Maps squashed continuous vectors in [-1, 1] to feasible actions and back.

    Layout: one reflection slot per SU (``N_n`` amplitudes then ``N_n`` phases) for the
    IRS that SU is paired with, then the real and imaginary beam blocks (K x N_s each),
    then the sensing time. Beam entries are scaled by ``sqrt(E)`` and projected onto the
    energy ball, so every feasible beam block has an exact preimage. When SUs share an IRS
    the lowest-index SU's slot configures it; IRSs without a paired SU keep the identity
    reflection.
    """

    def __init__(self, scenario: ScenarioConfig, catalog: OptionCatalog):
        self.scenario = scenario
        self.catalog = catalog
        self.n_elements = scenario.n_elements
        self.n_antennas = scenario.n_sbs_antennas
        self.n_su = scenario.n_su
        self.slot_size = 2 * scenario.n_elements
        self.beam_offset = self.n_su * self.slot_size
        # No component of a beam block inside the energy ball exceeds sqrt(E)
        self.beam_scale = math.sqrt(scenario.energy_budget)

    @property
    def dim(self) -> int:
        return self.n_su * self.slot_size + 2 * self.n_antennas * self.n_su + 1

    def decode(self, option: int, vector: NDArray[np.float64]) -> ActionComposite:
        x = np.asarray(vector, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"Continuous action must have length {self.dim}, got {x.shape}")
        x = np.clip(x, -1.0, 1.0)
        scenario = self.scenario
        assignment = self.catalog.assignment(option)

        theta = ReflectionConfig.identity(scenario.n_irs, self.n_elements)
        configured: set[int] = set()
        for k, z in enumerate(assignment.pairing):
            if z in configured:
                continue
            configured.add(z)
            slot = x[k * self.slot_size : (k + 1) * self.slot_size]
            amplitudes = (slot[: self.n_elements] + 1.0) / 2.0
            phases = math.pi * (slot[self.n_elements :] + 1.0)
            phases = np.where(phases >= TWO_PI, 0.0, phases)
            theta = theta.with_irs(z, amplitudes, phases)

        block = self.n_su * self.n_antennas
        real = x[self.beam_offset : self.beam_offset + block].reshape(self.n_su, self.n_antennas)
        imag = x[self.beam_offset + block : self.beam_offset + 2 * block].reshape(
            self.n_su, self.n_antennas
        )
        beams = project_to_ball(self.beam_scale * (real + 1j * imag), scenario.energy_budget)

        fraction = TAU_LOW + (TAU_HIGH - TAU_LOW) * (x[-1] + 1.0) / 2.0
        return ActionComposite(assignment, theta, beams, fraction * scenario.frame_s)

    def encode(self, action: ActionComposite) -> NDArray[np.float64]:
        """Continuous vector whose decoding under the action's option reproduces it."""
        x = np.zeros(self.dim)
        for k, z in enumerate(action.assignment.pairing):
            start = k * self.slot_size
            x[start : start + self.n_elements] = 2.0 * action.theta.amplitudes[z] - 1.0
            x[start + self.n_elements : start + self.slot_size] = action.theta.phases[z] / math.pi - 1.0

        block = self.n_su * self.n_antennas
        scaled = action.beams / self.beam_scale
        x[self.beam_offset : self.beam_offset + block] = scaled.real.ravel()
        x[self.beam_offset + block : self.beam_offset + 2 * block] = scaled.imag.ravel()

        fraction = action.tau / self.scenario.frame_s
        x[-1] = 2.0 * (fraction - TAU_LOW) / (TAU_HIGH - TAU_LOW) - 1.0
        return np.clip(x, -1.0, 1.0)
