"""Channel realizations of the shared-spectrum network."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .numerics import los_component, path_gain, rayleigh_channel, rician_channel
from .scenario import Point, ScenarioConfig

ComplexArray = NDArray[np.complex128]


@dataclass(frozen=True)
class ChannelSet:
    """
    One block-fading realization of every link.

    Row-vector links ``h`` act as ``h @ x``. Matrices map transmitter antennas to
    receiver elements, e.g. ``pbs_irs[z]`` is ``N_n x N_p``. ``irs_sbs[z]`` is stored
    as ``N_n x N_s`` and enters the sensing path through its Hermitian transpose.
    """

    pbs_irs: ComplexArray  # (Z, N_n, N_p)
    irs_sbs: ComplexArray  # (Z, N_n, N_s)
    pbs_sbs: ComplexArray  # (N_p, N_s)
    sbs_irs: ComplexArray  # (Z, N_n, N_s)
    sbs_su: ComplexArray  # (K, N_s)
    irs_su: ComplexArray  # (Z, K, N_n)
    pbs_su: ComplexArray  # (K, N_p)
    sbs_eve: ComplexArray  # (M, N_s)
    irs_eve: ComplexArray  # (Z, M, N_n)
    pbs_eve: ComplexArray  # (M, N_p)
    pbs_pu: ComplexArray  # (D, N_p)
    irs_pu: ComplexArray  # (Z, D, N_n)
    sbs_pu: ComplexArray  # (D, N_s)
    pbs_beams: ComplexArray  # (D, N_p), beam of PU d on its licensed subchannel
    occupancy: NDArray[np.int64]  # (D, C) delta flags

    # Composite links: direct path plus the path through IRS z with coefficients phi

    def sbs_to_su(self, k: int, z: int, phi: ComplexArray) -> ComplexArray:
        return self.sbs_su[k] + (self.irs_su[z, k] * phi) @ self.sbs_irs[z]

    def sbs_to_eve(self, m: int, z: int, phi: ComplexArray) -> ComplexArray:
        return self.sbs_eve[m] + (self.irs_eve[z, m] * phi) @ self.sbs_irs[z]

    def sbs_to_pu(self, d: int, z: int, phi: ComplexArray) -> ComplexArray:
        return self.sbs_pu[d] + (self.irs_pu[z, d] * phi) @ self.sbs_irs[z]

    def pbs_to_su(self, k: int, z: int, phi: ComplexArray) -> ComplexArray:
        return self.pbs_su[k] + (self.irs_su[z, k] * phi) @ self.pbs_irs[z]

    def pbs_to_eve(self, m: int, z: int, phi: ComplexArray) -> ComplexArray:
        return self.pbs_eve[m] + (self.irs_eve[z, m] * phi) @ self.pbs_irs[z]

    def pbs_to_pu(self, d: int, z: int, phi: ComplexArray) -> ComplexArray:
        return self.pbs_pu[d] + (self.irs_pu[z, d] * phi) @ self.pbs_irs[z]

    def sensing_matrix(self, z: int, phi: ComplexArray) -> ComplexArray:
        """``h_ps^H + g_zs^H diag(phi) H_z`` as an ``N_s x N_p`` matrix."""
        return self.pbs_sbs.conj().T + (self.irs_sbs[z].conj().T * phi) @ self.pbs_irs[z]

    def subchannel_beam(self, c: int, scenario: ScenarioConfig) -> ComplexArray | None:
        """PBS beam serving subchannel ``c``: the active PU's, else the first licensed one."""
        active = np.flatnonzero(self.occupancy[:, c])
        if active.size:
            return self.pbs_beams[int(active[0])]
        licensed = scenario.licensed_pus(c)
        if licensed:
            return self.pbs_beams[licensed[0]]
        return None


def _gain(scenario: ScenarioConfig, a: Point, b: Point, exponent: float) -> float:
    d = max(math.dist(a, b), scenario.reference_distance_m)
    return path_gain(d, exponent, scenario.pl0_db, scenario.reference_distance_m)


def _rician(
    rng: np.random.Generator,
    scenario: ScenarioConfig,
    tx: Point,
    rx: Point,
    n_tx: int,
    n_rx: int,
    exponent: float,
) -> ComplexArray:
    los = los_component(tx, rx, n_tx, n_rx)
    gain = _gain(scenario, tx, rx, exponent)
    return rician_channel(rng, n_rx, n_tx, gain, scenario.rician_k, los)


def _rayleigh_row(
    rng: np.random.Generator,
    scenario: ScenarioConfig,
    tx: Point,
    rx: Point,
    n_tx: int,
) -> ComplexArray:
    return rayleigh_channel(rng, 1, n_tx, _gain(scenario, tx, rx, scenario.exponent_bu))[0]


def draw_channels(scenario: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    """
    Draw one realization of every link and the PBS activity of the block.

    BS-to-user links (and the PBS-SBS link) are Rayleigh with ``exponent_bu``; links
    touching an IRS are Rician with ``exponent_br`` / ``exponent_ru``.
    """
    n_p, n_s, n_n = scenario.n_pbs_antennas, scenario.n_sbs_antennas, scenario.n_elements
    pbs, sbs = scenario.pbs_position, scenario.sbs_position
    irs, pus, sus, eves = (
        scenario.irs_positions,
        scenario.pu_positions,
        scenario.su_positions,
        scenario.eve_positions,
    )
    k_br, k_ru = scenario.exponent_br, scenario.exponent_ru

    pbs_irs = np.stack([_rician(rng, scenario, pbs, q, n_p, n_n, k_br) for q in irs])
    irs_sbs = np.stack(
        [_rician(rng, scenario, q, sbs, n_n, n_s, k_br).conj().T for q in irs]
    )
    pbs_sbs = rayleigh_channel(rng, n_p, n_s, _gain(scenario, pbs, sbs, scenario.exponent_bu))
    sbs_irs = np.stack([_rician(rng, scenario, sbs, q, n_s, n_n, k_br) for q in irs])

    def irs_rows(users: tuple[Point, ...]) -> ComplexArray:
        if not users:
            return np.zeros((len(irs), 0, n_n), dtype=complex)
        return np.stack(
            [np.stack([_rician(rng, scenario, q, u, n_n, 1, k_ru)[0] for u in users]) for q in irs]
        )

    def bs_rows(bs: Point, users: tuple[Point, ...], n_tx: int) -> ComplexArray:
        if not users:
            return np.zeros((0, n_tx), dtype=complex)
        return np.stack([_rayleigh_row(rng, scenario, bs, u, n_tx) for u in users])

    sbs_su, irs_su, pbs_su = bs_rows(sbs, sus, n_s), irs_rows(sus), bs_rows(pbs, sus, n_p)
    sbs_eve, irs_eve, pbs_eve = bs_rows(sbs, eves, n_s), irs_rows(eves), bs_rows(pbs, eves, n_p)
    pbs_pu, irs_pu, sbs_pu = bs_rows(pbs, pus, n_p), irs_rows(pus), bs_rows(sbs, pus, n_s)

    # Maximum-ratio PBS beams toward each PU's direct channel
    norms = np.linalg.norm(pbs_pu, axis=1, keepdims=True)
    pbs_beams = math.sqrt(scenario.pbs_power_w) * pbs_pu.conj() / np.maximum(norms, 1e-300)

    occupancy = np.zeros((scenario.n_pu, scenario.n_subchannels), dtype=np.int64)
    for c in range(scenario.n_subchannels):
        licensed = scenario.licensed_pus(c)
        busy = rng.random() < 1.0 - scenario.idle_priors[c]
        if licensed and busy:
            occupancy[licensed[int(rng.integers(len(licensed)))], c] = 1

    return ChannelSet(
        pbs_irs=pbs_irs,
        irs_sbs=irs_sbs,
        pbs_sbs=pbs_sbs,
        sbs_irs=sbs_irs,
        sbs_su=sbs_su,
        irs_su=irs_su,
        pbs_su=pbs_su,
        sbs_eve=sbs_eve,
        irs_eve=irs_eve,
        pbs_eve=pbs_eve,
        pbs_pu=pbs_pu,
        irs_pu=irs_pu,
        sbs_pu=sbs_pu,
        pbs_beams=pbs_beams,
        occupancy=occupancy,
    )
