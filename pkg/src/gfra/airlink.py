"""Preamble pool, grant-free slot synthesis, matched filtering and uplink SINR.

Preamble and AP indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (PathLossParams, RadioParams, complex_normal, draw_channel,
                      large_scale_gains, tx_snr_linear)
from .scene import Deployment, TrafficSpec, place_ues_uniform, sample_active_count

DEFAULT_SINR_CAP = 1e12


@dataclass(frozen=True, eq=False)
class PreamblePool:
    """``sequences[l]`` is preamble ``l``: a cyclic shift of one ZC root."""

    sequences: np.ndarray
    root: int

    @property
    def size(self) -> int:
        return self.sequences.shape[0]


def zadoff_chu(length: int, root: int) -> np.ndarray:
    if length < 1:
        raise ValueError("length must be positive")
    if math.gcd(root, length) != 1:
        raise ValueError(f"root {root} is not coprime with length {length}")
    n = np.arange(length)
    # odd lengths use n(n+1); even lengths need n^2 for a zero periodic autocorrelation
    arg = n * (n + 1) if length % 2 else n * n
    return np.exp(-1j * np.pi * root * arg / length)


def make_zc_pool(length: int = 20, root: int = 3) -> PreamblePool:
    z = zadoff_chu(length, root)
    seqs = np.stack([np.roll(z, -l) for l in range(length)])
    return PreamblePool(seqs, root)


@dataclass(frozen=True, eq=False)
class SlotRealization:
    """One grant-free slot.

    Attributes
    ----------
    ue_positions : (U, 2) array
    betas : (M, U) array of large-scale gains
    channel : (M*S, U) complex array
    preamble_choice : (U,) int array with values in ``0..L-1``
    n_preambles : int
    antennas_per_ap : int
    """

    ue_positions: np.ndarray
    betas: np.ndarray
    channel: np.ndarray
    preamble_choice: np.ndarray
    n_preambles: int
    antennas_per_ap: int

    @property
    def n_active(self) -> int:
        return self.preamble_choice.shape[0]

    def multiplicities(self) -> np.ndarray:
        return np.bincount(self.preamble_choice, minlength=self.n_preambles)

    def members(self, preamble: int) -> np.ndarray:
        return np.flatnonzero(self.preamble_choice == preamble)


def simulate_slot(deployment: Deployment, traffic: TrafficSpec, pathloss: PathLossParams,
                  rng: np.random.Generator, n_active: int | None = None) -> SlotRealization:
    u = sample_active_count(traffic, rng) if n_active is None else int(n_active)
    pos = place_ues_uniform(u, deployment.area, rng)
    betas = large_scale_gains(pos, deployment.ap_coords, pathloss, rng)
    g = draw_channel(deployment, betas, rng)
    choice = rng.integers(0, traffic.pool_size, size=u)
    return SlotRealization(pos, betas, g, choice, traffic.pool_size, deployment.antennas_per_ap)


def slot_from_positions(deployment: Deployment, positions, preamble_choice, pathloss: PathLossParams,
                        rng: np.random.Generator, n_preambles: int | None = None) -> SlotRealization:
    """Slot with a prescribed geometry and preamble assignment."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    choice = np.asarray(preamble_choice, dtype=int).reshape(-1)
    betas = large_scale_gains(pos, deployment.ap_coords, pathloss, rng)
    g = draw_channel(deployment, betas, rng)
    n_pre = n_preambles if n_preambles is not None else int(choice.max(initial=-1)) + 1
    return SlotRealization(pos, betas, g, choice, n_pre, deployment.antennas_per_ap)


@dataclass(frozen=True, eq=False)
class PreambleObservation:
    filtered: np.ndarray
    energy: np.ndarray
    true_multiplicity: int


def preamble_energy(filtered, antennas_per_ap: int) -> np.ndarray:
    """Per-AP received energy ``||block_m||^2 / S``; works on stacked rows too."""
    x = np.asarray(filtered)
    if x.shape[-1] % antennas_per_ap:
        raise ValueError(f"length {x.shape[-1]} is not a multiple of S={antennas_per_ap}")
    blocks = x.reshape(*x.shape[:-1], -1, antennas_per_ap)
    return (blocks.real ** 2 + blocks.imag ** 2).sum(axis=-1) / antennas_per_ap


def matched_filter(slot: SlotRealization, preamble: int, radio: RadioParams,
                   rng: np.random.Generator | None = None, noise=None) -> PreambleObservation:
    """Direct synthesis of the LS estimate for one preamble.

    ``filtered = sum_{u on preamble} g_u + n / sqrt(rho_T * L)`` with
    ``n ~ CN(0, I)``. Pass ``noise`` to fix ``n`` or ``rng=None`` for the
    noiseless limit.
    """
    if not 0 <= preamble < slot.n_preambles:
        raise ValueError(f"preamble index {preamble} outside 0..{slot.n_preambles - 1}")
    members = slot.members(preamble)
    filtered = slot.channel[:, members].sum(axis=1)
    if noise is None and rng is not None:
        noise = complex_normal(filtered.shape, rng)
    if noise is not None:
        filtered = filtered + np.asarray(noise) / np.sqrt(tx_snr_linear(radio) * slot.n_preambles)
    return PreambleObservation(filtered, preamble_energy(filtered, slot.antennas_per_ap), len(members))


def received_preamble_signal(slot: SlotRealization, pool: PreamblePool, radio: RadioParams,
                             noise=None) -> np.ndarray:
    """Full ``(M*S, L)`` received preamble block; ``noise`` is in mW-scaled units."""
    psi = pool.sequences[slot.preamble_choice]          # (U, L)
    y = np.sqrt(radio.tx_power_mw) * slot.channel @ psi
    if noise is not None:
        y = y + noise
    return y


def ls_estimate(received, pool: PreamblePool, preamble: int, radio: RadioParams) -> np.ndarray:
    p = pool.sequences[preamble]
    return received @ p.conj() / (np.sqrt(radio.tx_power_mw) * pool.size)


def sinr_terms(slot: SlotRealization, target: int, ap_set, estimate, radio: RadioParams,
               rng: np.random.Generator | None = None, data_noise=None) -> tuple[float, float, float]:
    """Signal, interference and noise powers of the conjugate-beamforming output.

    ``estimate`` may be the full ``M*S`` LS estimate or already restricted to
    ``ap_set``. The data noise has per-entry variance sigma^2; ``data_noise``
    (full length, unit variance) fixes its realisation and ``rng=None``
    together with ``data_noise=None`` gives the noiseless case. Interference
    covers every other active UE, collided or not.
    """
    aps = np.asarray(ap_set, dtype=int).reshape(-1)
    if aps.size == 0:
        raise ValueError("ap_set must be non-empty")
    s = slot.antennas_per_ap
    rows = (aps[:, None] * s + np.arange(s)[None, :]).reshape(-1)
    est = np.asarray(estimate)
    if est.shape[0] == slot.channel.shape[0]:
        est = est[rows]
    elif est.shape[0] != rows.size:
        raise ValueError("estimate length matches neither M*S nor |ap_set|*S")
    proj = est.conj() @ slot.channel[rows]               # (U,)
    power = proj.real ** 2 + proj.imag ** 2
    p_t = radio.tx_power_mw
    signal = p_t * power[target]
    # summing around the target avoids cancellation against a dominant signal
    interference = p_t * (power[:target].sum() + power[target + 1:].sum())
    if data_noise is None and rng is not None:
        data_noise = complex_normal(slot.channel.shape[0], rng)
    noise = 0.0
    if data_noise is not None:
        nbar = np.sqrt(radio.noise_power_mw) * np.asarray(data_noise)[rows]
        noise = abs(np.vdot(est, nbar)) ** 2
    return float(signal), float(interference), float(noise)


def sinr_for_ue(slot: SlotRealization, target: int, ap_set, estimate, radio: RadioParams,
                rng: np.random.Generator | None = None,
                data_noise=None) -> float:
    """Instantaneous conjugate-beamforming SINR of ``target`` over ``ap_set``.

    Arguments as for :func:`sinr_terms`. Returns ``inf`` when the
    denominator vanishes.
    """
    signal, interference, noise = sinr_terms(slot, target, ap_set, estimate, radio, rng, data_noise)
    den = interference + noise
    if den == 0:
        return math.inf
    return signal / den


def achievable_rate(sinr, bandwidth_hz: float, sinr_cap: float = DEFAULT_SINR_CAP):
    """``B_w * log2(1 + sinr)`` in bit/s, capping (infinite) SINR at ``sinr_cap``."""
    x = np.asarray(sinr, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("sinr must be non-negative")
    r = bandwidth_hz * np.log2(1.0 + np.minimum(x, sinr_cap))
    return float(r) if r.ndim == 0 else r


def asymptotic_sinr(betas, target: int, colliders) -> float:
    """Large-array SINR limit ``mean_m(beta_target)^2 / sum mean_m(beta_c)^2``."""
    b = np.asarray(betas, dtype=float)
    col = np.asarray(list(colliders), dtype=int)
    if col.size == 0:
        return math.inf
    bbar = b.mean(axis=0)
    return float(bbar[target] ** 2 / np.sum(bbar[col] ** 2))
