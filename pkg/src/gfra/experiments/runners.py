"""Experiment drivers: multiplicity confusion, rate CCDFs and the asymptotic SINR check.

Every driver takes an :class:`ExperimentConfig`, draws all randomness from
streams derived from ``config.seed`` and returns plain result objects;
``write_*`` helpers turn them into comma-separated files.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..airlink import (achievable_rate, asymptotic_sinr, matched_filter, simulate_slot,
                       slot_from_positions, sinr_terms)
from ..channel import complex_normal
from ..clustering import (match_cluster, match_cluster_by_gain, resolve_collision, select_genie,
                          top_energy_aps)
from ..multiplicity import (Dataset, MlpModel, TedModel, TrainHistory, confusion_matrix,
                            fit_multiplicity_mlp, fit_ted, gen_dataset, within_one,
                            write_confusion_csv)
from ..scene import derive_stream, make_grid_deployment
from .config import ExperimentConfig
from .modelio import check_model_matches, save_model
from .report import RateReport, versions, write_table

TRIAL_CHUNK = 50


# --- datasets and training ----------------------------------------------------

def make_dataset(cfg: ExperimentConfig) -> Dataset:
    return gen_dataset(cfg.q_samples, cfg.deployment(), cfg.traffic(), cfg.pathloss(), cfg.radio(),
                       cfg.t_max, cfg.seed, fractions=tuple(cfg.split), workers=cfg.workers)


def train_model(cfg: ExperimentConfig, dataset: Dataset) -> tuple[MlpModel, TrainHistory]:
    model, hist = fit_multiplicity_mlp(dataset, cfg.t_max, derive_stream(cfg.seed, "init"),
                                       hidden_sizes=cfg.hidden(), normalizer_kind=cfg.normalizer,
                                       config=cfg.train_config(),
                                       antennas_per_ap=cfg.antennas)
    meta = dict(model.meta, sigma_sf_db=cfg.shadow_sigma_db, seed=cfg.seed, config_hash=cfg.digest(),
                epochs=hist.epochs, stop_reason=hist.stop_reason)
    return MlpModel(model.layer_sizes, model.weights, model.biases, model.normalizer,
                    model.antennas_per_ap, meta), hist


def fit_ted_model(cfg: ExperimentConfig, dataset: Dataset) -> TedModel:
    return fit_ted(*dataset.part("train"), cfg.t_max, mode=cfg.ted_mode)


@dataclass(eq=False)
class ConfusionResult:
    dnn: np.ndarray
    ted: np.ndarray
    dnn_within_one: np.ndarray
    ted_within_one: np.ndarray
    class_counts: np.ndarray
    model: MlpModel
    ted_model: TedModel
    history: TrainHistory


def run_confusion(cfg: ExperimentConfig, dataset: Dataset | None = None) -> ConfusionResult:
    """Generate data, train the MLP, fit T-ED on the same training split and score both."""
    ds = dataset if dataset is not None else make_dataset(cfg)
    model, hist = train_model(cfg, ds)
    ted = fit_ted_model(cfg, ds)
    x, y = ds.part("test")
    k = cfg.t_max + 1
    b_dnn, b_ted = model.estimate(x), ted.estimate(x)
    return ConfusionResult(confusion_matrix(y, b_dnn, k), confusion_matrix(y, b_ted, k),
                           within_one(y, b_dnn, k), within_one(y, b_ted, k),
                           np.bincount(y, minlength=k), model, ted, hist)


def write_confusion(result: ConfusionResult, out_dir) -> list[str]:
    files = {
        "dnn_confusion.csv": lambda p: write_confusion_csv(p, result.dnn),
        "ted_confusion.csv": lambda p: write_confusion_csv(p, result.ted),
        "within_one.csv": lambda p: write_table(
            p, ["B", "n_test", "dnn", "ted"],
            [(b, int(result.class_counts[b]), float(result.dnn_within_one[b]),
              float(result.ted_within_one[b])) for b in range(len(result.class_counts))]),
        "model.bin": lambda p: save_model(result.model, p),
        "ted.txt": lambda p: open(p, "w").write(result.ted_model.to_text()),
    }
    files.update(history_files(result.history))
    for name, write in files.items():
        write(os.path.join(out_dir, name))
    return list(files)


def history_files(hist: TrainHistory) -> dict:
    def write(p):
        write_table(p, ["epoch", "train_loss", "val_loss", "grad_norm"],
                    [(i, *vals) for i, vals in enumerate(zip(hist.train_loss, hist.val_loss,
                                                             hist.grad_norm))])
    return {"training_history.csv": write}


# --- rate experiment --------------------------------------------------------------

def rate_keys(cfg: ExperimentConfig) -> list[tuple[str, int]]:
    """``(scheme, m_c)`` pairs: every scheme at ``m_c`` plus the DNN sweep over ``m_c_list``."""
    keys = [(s, cfg.m_c) for s in cfg.schemes]
    keys += [("dnn_cluster", m) for m in cfg.m_c_list if ("dnn_cluster", m) not in keys]
    return keys


def _trial_rates(cfg: ExperimentConfig, i: int, deployment, model, ted, keys) -> dict:
    rng = derive_stream(cfg.seed, ["rates", i])
    radio, pathloss, traffic = cfg.radio(), cfg.pathloss(), cfg.traffic()
    slot = simulate_slot(deployment, traffic, pathloss, rng)
    out = {k: [] for k in keys}
    m_all = np.arange(deployment.n_aps)
    s = deployment.antennas_per_ap
    for pre in np.flatnonzero(slot.multiplicities() >= 2):
        obs = matched_filter(slot, int(pre), radio, rng)
        energy = obs.energy
        b_hat = {"dnn_cluster": model.estimate(energy) if model is not None else None,
                 "ted_cluster": ted.estimate(energy) if ted is not None else None}
        clusters = {}

        def cluster_set(b, m_c):
            if (b, m_c) not in clusters:
                if b == 1:
                    clusters[b, m_c] = None
                else:
                    clusters[b, m_c] = resolve_collision(energy, b, m_c, deployment, rng,
                                                         cfg.kmeans_restarts)
            return clusters[b, m_c]

        members = slot.members(int(pre))
        noise = [complex_normal(deployment.n_antennas, rng) for _ in members]
        for t, nbar in zip(members, noise):
            for scheme, m_c in keys:
                if scheme == "all_ap":
                    aps = m_all
                elif scheme == "mc_strongest":
                    aps = top_energy_aps(energy, min(m_c, deployment.n_aps)).indices
                elif scheme == "genie":
                    if cfg.genie_gain == "instantaneous":
                        g = np.abs(slot.channel[:, t].reshape(-1, s)) ** 2
                        gains = g.sum(axis=1)
                    else:
                        gains = slot.betas[:, t]
                    aps = select_genie(gains, min(m_c, deployment.n_aps))
                else:
                    b = b_hat[scheme]
                    if b is None:
                        raise ValueError(f"scheme {scheme} needs a fitted estimator")
                    if b == 0:
                        out[scheme, m_c].append(0.0)   # missed detection: nothing is decoded
                        continue
                    cs = cluster_set(b, m_c)
                    if cs is None:
                        aps = top_energy_aps(energy, min(m_c, deployment.n_aps)).indices
                    elif cfg.cluster_match == "gain":
                        aps = cs[match_cluster_by_gain(cs, slot.betas[:, t])].ap_indices
                    else:
                        aps = cs[match_cluster(cs, slot.ue_positions[t])].ap_indices
                sig, intf, nse = sinr_terms(slot, int(t), aps, obs.filtered, radio, data_noise=nbar)
                den = intf + nse
                sinr = math.inf if den == 0 else sig / den
                out[scheme, m_c].append(float(achievable_rate(sinr, cfg.bandwidth_hz, cfg.sinr_cap)))
    return out


def run_rate_experiment(cfg: ExperimentConfig, model: MlpModel | None,
                        ted: TedModel | None = None) -> RateReport:
    """Per-collided-UE achievable rates for every scheme over ``cfg.trials`` slots.

    Trials are independent (stream ``("rates", i)``) and collected in trial
    order, so the result does not depend on ``cfg.workers``.
    """
    deployment = cfg.deployment()
    keys = rate_keys(cfg)
    if model is not None:
        check_model_matches(model, deployment.n_aps, deployment.antennas_per_ap, cfg.t_max)
    elif any(s == "dnn_cluster" for s, _ in keys):
        raise ValueError("dnn_cluster requested without a model")
    if ted is None and any(s == "ted_cluster" for s, _ in keys):
        raise ValueError("ted_cluster requested without a T-ED model")

    def chunk(start):
        parts = [_trial_rates(cfg, i, deployment, model, ted, keys)
                 for i in range(start, min(start + TRIAL_CHUNK, cfg.trials))]
        return parts

    starts = range(0, cfg.trials, TRIAL_CHUNK)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(chunk, starts))
    else:
        chunks = [chunk(s) for s in starts]
    samples = {k: [] for k in keys}
    n_collided = 0
    for parts in chunks:
        for part in parts:
            for k in keys:
                samples[k].extend(part[k])
            n_collided += len(part[keys[0]]) if keys else 0
    samples = {k: np.asarray(v, dtype=float) for k, v in samples.items()}
    return RateReport(samples, cfg.trials, n_collided)


def write_rates(report: RateReport, out_dir) -> list[str]:
    report.write_summary(os.path.join(out_dir, "rate_summary.csv"))
    report.write_ccdf(os.path.join(out_dir, "rate_ccdf.csv"))
    return ["rate_summary.csv", "rate_ccdf.csv"]


# --- asymptotic SINR ---------------------------------------------------------------

@dataclass(eq=False)
class AsymptoticRow:
    n_aps: int
    empirical: float
    asymptotic: float
    mean_sinr: float

    @property
    def rel_error(self) -> float:
        return abs(self.empirical - self.asymptotic) / self.asymptotic


@dataclass(eq=False)
class AsymptoticResult:
    rows: list = field(default_factory=list)
    note: str = ""


def run_asymptotic_check(cfg: ExperimentConfig) -> AsymptoticResult:
    """All-AP SINR of a fixed geometry against its large-M limit on refined grids.

    The target and colliders share preamble 0, the preamble is observed
    without noise and shadowing is off so the geometry stays fixed. The
    empirical value is the ratio of the fading-averaged signal power to the
    fading-averaged interference-plus-noise power.
    """
    colliders = np.asarray(cfg.asym_colliders, dtype=float).reshape(-1, 2)
    if len(colliders) == 0:
        return AsymptoticResult([], "no colliders: asymptotic SINR is unbounded, check skipped")
    pos = np.vstack([np.asarray(cfg.asym_target, dtype=float)[None, :], colliders])
    pathloss = cfg.pathloss()
    pathloss = type(pathloss)(pathloss.ref_distance_m, pathloss.ref_loss_db, pathloss.exponent, 0.0)
    radio = cfg.radio()
    result = AsymptoticResult()
    for side in cfg.asym_grid_sides:
        dep = make_grid_deployment(side, side, cfg.area, cfg.antennas)
        sig = np.empty(cfg.asym_trials)
        den = np.empty(cfg.asym_trials)
        betas = None
        for t in range(cfg.asym_trials):
            rng = derive_stream(cfg.seed, ["asymptotic", side, t])
            slot = slot_from_positions(dep, pos, np.zeros(len(pos), dtype=int), pathloss, rng,
                                       n_preambles=cfg.pool_size)
            est = matched_filter(slot, 0, radio).filtered
            s, i, n = sinr_terms(slot, 0, np.arange(dep.n_aps), est, radio, rng)
            sig[t], den[t] = s, i + n
            betas = slot.betas
        ratio = sig.mean() / den.mean()
        mean_sinr = float(np.mean(np.divide(sig, den, out=np.full_like(sig, np.inf), where=den > 0)))
        result.rows.append(AsymptoticRow(dep.n_aps, float(ratio),
                                         asymptotic_sinr(betas, 0, range(1, len(pos))), mean_sinr))
    return result


def write_asymptotic(result: AsymptoticResult, out_dir) -> list[str]:
    rows = [(r.n_aps, r.empirical, r.asymptotic, r.rel_error, r.mean_sinr) for r in result.rows]
    path = os.path.join(out_dir, "asymptotic.csv")
    write_table(path, ["M", "empirical_sinr", "asymptotic_sinr", "rel_error", "mean_inst_sinr"], rows)
    return ["asymptotic.csv"]


# --- manifest ------------------------------------------------------------------------

def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir, cfg: ExperimentConfig, command: str, files, extra=None) -> str:
    """``manifest.json``: config hash, seed, versions and output checksums."""
    info = {
        "command": command,
        "seed": cfg.seed,
        "config_hash": cfg.digest(),
        "config": cfg.to_text(),
        "versions": versions(),
        "outputs": {f: file_sha256(os.path.join(out_dir, f)) for f in files},
    }
    if extra:
        info.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
