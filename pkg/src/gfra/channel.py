"""Large-scale fading, small-scale Rayleigh fading and link budget helpers.

Everything in here returns linear-scale quantities; dB values only appear in
the parameter containers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Deployment


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss with log-normal shadowing.

    ``beta = X / (1 + PL(d0) * (d / d0)**v)`` where ``PL(d0)`` is given in dB
    and ``10*log10(X)`` is zero-mean Gaussian with std ``shadow_sigma_db``.
    """

    ref_distance_m: float = 1.0
    ref_loss_db: float = 30.0
    exponent: float = 3.8
    shadow_sigma_db: float = 8.0

    def __post_init__(self):
        if not self.ref_distance_m > 0:
            raise ValueError("ref_distance_m must be positive")
        if not self.exponent > 0:
            raise ValueError("exponent must be positive")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be non-negative")

    @property
    def ref_loss_linear(self) -> float:
        return float(db_to_linear(self.ref_loss_db))


@dataclass(frozen=True)
class RadioParams:
    tx_power_dbm: float = 17.0
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 200e3
    noise_figure_db: float = 9.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")

    @property
    def tx_power_mw(self) -> float:
        return float(db_to_linear(self.tx_power_dbm))

    @property
    def noise_power_mw(self) -> float:
        return float(db_to_linear(noise_power_dbm(self)))


def noise_power_dbm(radio: RadioParams) -> float:
    return radio.noise_psd_dbm_hz + 10.0 * np.log10(radio.bandwidth_hz) + radio.noise_figure_db


def tx_snr_linear(radio: RadioParams) -> float:
    """Uplink transmit SNR ``P_T / sigma^2`` (linear)."""
    return float(db_to_linear(radio.tx_power_dbm - noise_power_dbm(radio)))


def path_gain(distance, params: PathLossParams) -> np.ndarray:
    """Deterministic part of the large-scale gain (no shadowing)."""
    d = np.asarray(distance, dtype=float)
    return 1.0 / (1.0 + params.ref_loss_linear * (d / params.ref_distance_m) ** params.exponent)


def shadowing(shape, params: PathLossParams, rng: np.random.Generator | None) -> np.ndarray:
    if params.shadow_sigma_db == 0 or rng is None:
        return np.ones(shape)
    return 10.0 ** (params.shadow_sigma_db * rng.standard_normal(shape) / 10.0)


def large_scale_gain(ue_pos, ap_pos, params: PathLossParams,
                     rng: np.random.Generator | None = None) -> float:
    d = float(np.hypot(*(np.asarray(ue_pos, float) - np.asarray(ap_pos, float))))
    return float(path_gain(d, params) * shadowing((), params, rng))


def distances(ue_positions, ap_coords) -> np.ndarray:
    """(M, U) matrix of 2-D UE-AP distances."""
    ue = np.asarray(ue_positions, dtype=float).reshape(-1, 2)
    ap = np.asarray(ap_coords, dtype=float).reshape(-1, 2)
    diff = ap[:, None, :] - ue[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def large_scale_gains(ue_positions, ap_coords, params: PathLossParams,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Link gains ``beta[m, u]`` for every AP/UE pair, shadowed i.i.d. per link."""
    d = distances(ue_positions, ap_coords)
    return path_gain(d, params) * shadowing(d.shape, params, rng)


def complex_normal(shape, rng: np.random.Generator, variance: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(deployment: Deployment, betas, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh channel matrix of shape ``(M*S, U)``.

    Row ``m*S + s`` is antenna ``s`` of AP ``m``; column ``u`` is the stacked
    channel vector of UE ``u``.
    """
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 2 or betas.shape[0] != deployment.n_aps:
        raise ValueError(f"betas must have shape (M={deployment.n_aps}, U), got {betas.shape}")
    if np.any(betas < 0) or not np.all(np.isfinite(betas)):
        raise ValueError("betas must be finite and non-negative")
    m, u = betas.shape
    s = deployment.antennas_per_ap
    h = complex_normal((m, s, u), rng)
    return (np.sqrt(betas)[:, None, :] * h).reshape(m * s, u)
