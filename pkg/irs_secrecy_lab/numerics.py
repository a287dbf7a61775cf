"""Numerical kernels shared by the channel model, the agent and the AO solver."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

Position = Sequence[float]


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Create a seeded generator, optionally derived from extra integer keys.

    ``make_rng(seed, episode, step)`` yields an independent stream per block, so a
    draw never depends on how many numbers an earlier block consumed.
    """
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    if keys:
        return np.random.default_rng(np.random.SeedSequence([seed, *keys]))
    return np.random.default_rng(seed)


def _require_finite(x: NDArray[np.float64], name: str) -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")


def q_function(x: ArrayLike) -> float | NDArray[np.float64]:
    """Gaussian tail probability Q(x) = 0.5 * erfc(x / sqrt(2))."""
    arr = np.asarray(x, dtype=float)
    _require_finite(arr, "q_function argument")
    out = 0.5 * special.erfc(arr / SQRT2)
    return float(out) if out.ndim == 0 else out


def q_inverse(p: ArrayLike, newton_steps: int = 3) -> float | NDArray[np.float64]:
    """
    Inverse of the Gaussian tail probability.

    Starts from ``sqrt(2) * erfcinv(2p)`` and polishes with Newton steps on
    ``Q(x) - p`` whose derivative is ``-phi(x)``.
    """
    arr = np.asarray(p, dtype=float)
    _require_finite(arr, "q_inverse argument")
    if np.any((arr <= 0.0) | (arr >= 1.0)):
        raise ValueError("q_inverse requires probabilities strictly inside (0, 1)")

    x = SQRT2 * special.erfcinv(2.0 * arr)
    for _ in range(newton_steps):
        pdf = INV_SQRT_2PI * np.exp(-0.5 * x * x)
        residual = 0.5 * special.erfc(x / SQRT2) - arr
        x = x + residual / np.maximum(pdf, np.finfo(float).tiny)
    return float(x) if x.ndim == 0 else x


def path_gain(d: float, exponent: float, pl0_db: float, d0: float = 1.0) -> float:
    """
    Large-scale linear power gain at distance ``d``.

    The gain in dB is ``-pl0_db - 10 * exponent * log10(d / d0)``.
    """
    if d0 <= 0:
        raise ValueError(f"Reference distance must be positive, got {d0}")
    if d < d0:
        raise ValueError(f"Distance {d} m is below the reference distance {d0} m")
    gain_db = -pl0_db - 10.0 * exponent * math.log10(d / d0)
    return 10.0 ** (gain_db / 10.0)


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two 3-D points."""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def rayleigh_channel(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    gain: float,
) -> NDArray[np.complex128]:
    """I.i.d. circularly-symmetric complex Gaussian matrix with per-entry power ``gain``."""
    if rows <= 0 or cols <= 0:
        raise ValueError(f"Channel dimensions must be positive, got {rows}x{cols}")
    if gain < 0:
        raise ValueError(f"Channel gain must be non-negative, got {gain}")
    scale = math.sqrt(gain / 2.0)
    return scale * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))


def rician_channel(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    gain: float,
    k_factor: float,
    los_component: NDArray[np.complex128],
) -> NDArray[np.complex128]:
    """
    Rician fading matrix ``sqrt(gain) * (sqrt(K/(K+1)) LOS + sqrt(1/(K+1)) NLOS)``.

    ``k_factor=inf`` returns the pure line-of-sight channel and draws nothing.
    """
    if k_factor < 0:
        raise ValueError(f"Rician K-factor must be non-negative, got {k_factor}")
    los = np.asarray(los_component, dtype=complex)
    if los.shape != (rows, cols):
        raise ValueError(f"LOS component shape {los.shape} does not match {rows}x{cols}")

    if math.isinf(k_factor):
        return math.sqrt(gain) * los

    nlos = rayleigh_channel(rng, rows, cols, 1.0)
    los_weight = math.sqrt(k_factor / (k_factor + 1.0))
    nlos_weight = math.sqrt(1.0 / (k_factor + 1.0))
    return math.sqrt(gain) * (los_weight * los + nlos_weight * nlos)


def ula_steering(n: int, direction_cosine: float) -> NDArray[np.complex128]:
    """Half-wavelength uniform linear array response along the x axis."""
    return np.exp(-1j * math.pi * np.arange(n) * direction_cosine)


def los_component(
    tx_position: Position,
    rx_position: Position,
    n_tx: int,
    n_rx: int,
) -> NDArray[np.complex128]:
    """
    Deterministic ``n_rx x n_tx`` line-of-sight matrix from the link geometry.

    Both ends are x-axis ULAs; single-element ends contribute a unit response.
    """
    delta = np.asarray(rx_position, dtype=float) - np.asarray(tx_position, dtype=float)
    d = float(np.linalg.norm(delta))
    cosine = float(delta[0] / d) if d > 0 else 0.0
    a_tx = ula_steering(n_tx, cosine)
    a_rx = ula_steering(n_rx, -cosine)
    return np.outer(a_rx, np.conj(a_tx))


def project_to_ball(vectors: NDArray[np.complex128], radius_sq: float) -> NDArray[np.complex128]:
    """Radially scale ``vectors`` so the total squared norm is at most ``radius_sq``."""
    energy = float(np.sum(np.abs(vectors) ** 2))
    if energy <= radius_sq or energy == 0.0:
        return vectors
    return vectors * math.sqrt(radius_sq / energy)


def project_to_unit_disk(coefficients: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Per-element projection onto ``|c| <= 1``."""
    magnitude = np.abs(coefficients)
    return np.where(magnitude > 1.0, coefficients / np.maximum(magnitude, 1e-300), coefficients)
