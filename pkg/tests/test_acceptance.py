"""End-to-end acceptance gate: twelve reproduction and correctness criteria.

Each test records a one-line PASS/FAIL verdict (printed at the end of the
run) and then asserts it. Trained models are cached in the pytest cache
keyed by the configuration digest; ``pytest --cache-clear`` forces fresh
training.
"""

import itertools
import math
import os
import time

import numpy as np
import pytest

from conftest import record_acceptance
from gfra.airlink import (ls_estimate, make_zc_pool, matched_filter, received_preamble_signal,
                          simulate_slot)
from gfra.channel import complex_normal
from gfra.clustering import kmeans_cluster
from gfra.experiments import ExperimentConfig, load_model, run_asymptotic_check, save_model
from gfra.experiments.cli import main as cli_main
from gfra.experiments.report import to_db
from gfra.experiments.runners import fit_ted_model, make_dataset, run_rate_experiment, train_model
from gfra.multiplicity import TedModel, confusion_matrix, within_one
from gfra.multiplicity.mlp import init_mlp, loss_and_grad_flat, one_hot
from gfra.scene import derive_stream

pytestmark = pytest.mark.acceptance

REFERENCE_SF0 = np.array([1, 0.997, 0.979, 0.918, 0.878])
REFERENCE_SF8 = np.array([1, 0.991, 0.923, 0.838, 0.787])

DEPLOYMENTS = {1: dict(rows=10, cols=10, antennas=2),
               2: dict(rows=10, cols=10, antennas=1),
               3: dict(rows=7, cols=7, antennas=2)}


def config(dep: int, sigma: float, **kw) -> ExperimentConfig:
    return ExperimentConfig(shadow_sigma_db=sigma, seed=2024, **DEPLOYMENTS[dep], **kw)


class Trained:
    """Model, T-ED and test-split predictions for one (deployment, sigma)."""

    def __init__(self, cfg, cache_dir):
        self.cfg = cfg
        ds = make_dataset(cfg)
        path = os.path.join(cache_dir, cfg.digest()[:16])
        if os.path.exists(path + ".bin"):
            self.model = load_model(path + ".bin")
            with open(path + ".secs") as fh:
                self.train_seconds = float(fh.read())
            self.cached = True
        else:
            t0 = time.perf_counter()
            self.model, _ = train_model(cfg, ds)
            self.train_seconds = time.perf_counter() - t0
            save_model(self.model, path + ".bin")
            with open(path + ".secs", "w") as fh:
                fh.write(repr(self.train_seconds))
            self.cached = False
        self.ted = fit_ted_model(cfg, ds)
        x, self.y = ds.part("test")
        self.b_dnn = self.model.estimate(x)
        self.b_ted = self.ted.estimate(x)
        k = cfg.t_max + 1
        self.dnn = np.diag(confusion_matrix(self.y, self.b_dnn, k))
        self.ted_acc = np.diag(confusion_matrix(self.y, self.b_ted, k))
        self.within = within_one(self.y, self.b_dnn, k)
        self.counts = np.bincount(self.y, minlength=k)

    def describe(self):
        note = " (cached model)" if self.cached else ""
        return (f"training {self.train_seconds / 60:.1f} min{note}, "
                f"epochs={self.model.meta.get('epochs')}")


@pytest.fixture(scope="session")
def model_cache(request):
    return str(request.config.cache.mkdir("gfra-models"))


@pytest.fixture(scope="session")
def trained(model_cache):
    store = {}

    def get(dep, sigma):
        if (dep, sigma) not in store:
            store[dep, sigma] = Trained(config(dep, sigma), model_cache)
        return store[dep, sigma]
    return get


def fmt(a):
    return "(" + ", ".join(f"{v:.3f}" for v in a) + ")"


# --- 1-4: multiplicity estimation ---------------------------------------------------

def test_c01_confusion_sigma0(trained):
    t = trained(1, 0.0)
    err = np.abs(t.dnn - REFERENCE_SF0)
    ok = bool(np.all(err <= 0.06)) and t.train_seconds <= 30 * 60
    record_acceptance(1, ok, f"dep1 sigma=0 diag {fmt(t.dnn)} vs {fmt(REFERENCE_SF0)} "
                             f"max|err|={err.max():.3f} (tol 0.06); {t.describe()} (<= 30 min)")
    assert ok


def test_c02_confusion_sigma8(trained):
    t = trained(1, 8.0)
    err = np.abs(t.dnn - REFERENCE_SF8)
    strict = bool(np.all(err <= 0.08))
    reliable = bool(np.all(t.within >= 0.99))
    monotone = bool(np.all(np.diff(t.dnn[1:]) <= 0))
    ok = strict or (reliable and monotone)
    held = "reference match" if strict else ("fallback: reliability + monotone decrease" if ok else "neither")
    record_acceptance(2, ok, f"dep1 sigma=8 diag {fmt(t.dnn)} vs {fmt(REFERENCE_SF8)} "
                             f"max|err|={err.max():.3f} (tol 0.08); held: {held}")
    assert ok


def test_c03_plus_minus_one_reliability(trained):
    parts, ok = [], True
    for dep, sigma in ((1, 0.0), (1, 8.0), (2, 8.0), (3, 8.0)):
        t = trained(dep, sigma)
        ok &= bool(np.all(t.within >= 0.99))
        parts.append(f"dep{dep}/sf{sigma:g} min={np.nanmin(t.within):.4f}")
    record_acceptance(3, ok, "P(|B_hat-B|<=1 | B) >= 0.99: " + "; ".join(parts))
    assert ok


def test_c04_dnn_beats_ted(trained):
    t = trained(1, 8.0)
    n = t.counts
    margin = t.dnn - t.ted_acc
    se = np.sqrt(t.dnn * (1 - t.dnn) / n + t.ted_acc * (1 - t.ted_acc) / n)
    ok = bool(np.all(margin[1:] >= -1.96 * se[1:]))
    record_acceptance(4, ok, f"dep1 sigma=8 DNN {fmt(t.dnn[1:])} vs T-ED {fmt(t.ted_acc[1:])} "
                             f"margins {fmt(margin[1:])} (95% CI half-widths {fmt(1.96 * se[1:])})")
    assert ok


# --- 5-7: rate experiment ---------------------------------------------------------------

@pytest.fixture(scope="session")
def rates(trained):
    t = trained(1, 8.0)
    cfg = t.cfg.replace(trials=10_000)
    t0 = time.perf_counter()
    report = run_rate_experiment(cfg, t.model, t.ted)
    return report, time.perf_counter() - t0


def l95_db(report, scheme, m_c):
    return to_db(report.likely95(scheme, m_c))


def test_c05_mc_sweep(rates):
    rep, secs = rates
    l = {m: l95_db(rep, "dnn_cluster", m) for m in (1, 4, 16)}
    g1, g16 = l[4] - l[1], l[4] - l[16]
    ok = 13 <= g1 <= 19 and 2 <= g16 <= 6 and secs <= 20 * 60
    record_acceptance(5, ok, f"95%-likely gain M_c=4 over 1: {g1:.1f} dB (13-19), over 16: "
                             f"{g16:.1f} dB (2-6); {rep.n_collided} collided-UE samples, "
                             f"{secs / 60:.1f} min (<= 20)")
    assert ok


def test_c06_scheme_ordering(rates):
    rep, _ = rates
    order = ["genie", "dnn_cluster", "ted_cluster", "all_ap", "mc_strongest"]
    v = {s: l95_db(rep, s, 4) for s in order}
    ordered = all(v[a] >= v[b] for a, b in zip(order, order[1:]))
    gap, gain = v["genie"] - v["dnn_cluster"], v["dnn_cluster"] - v["all_ap"]
    ok = ordered and gap <= 10 and gain >= 20
    desc = ", ".join(f"{s}={v[s]:.1f}" for s in order)
    record_acceptance(6, ok, f"95%-likely dB: {desc}; genie-DNN gap {gap:.1f} dB (<=10), "
                             f"DNN-all gain {gain:.1f} dB (>=20)")
    assert ok


def test_c07_ergodic(rates):
    rep, _ = rates
    g, d, a = (rep.ergodic(s, 4) for s in ("genie", "dnn_cluster", "all_ap"))
    loss, gain = (g - d) / g, (d - a) / a
    ok = loss <= 0.12 and gain >= 1.20
    record_acceptance(7, ok, f"ergodic kbit/s genie={g / 1e3:.1f} dnn={d / 1e3:.1f} all={a / 1e3:.1f}; "
                             f"loss vs genie {100 * loss:.1f}% (<=12), gain vs all-AP "
                             f"{100 * gain:.0f}% (>=120)")
    assert ok


# --- 8-12: correctness and plumbing ---------------------------------------------------

def test_c08_gradient_check():
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(10):
        rng = derive_stream(i, "c08")
        sizes = (int(rng.integers(2, 6)), int(rng.integers(2, 8)), int(rng.integers(2, 6)),
                 int(rng.integers(2, 6)))
        theta = init_mlp(sizes, rng).flat_params()
        x = rng.normal(size=(10, sizes[0]))
        t = one_hot(rng.integers(0, sizes[-1], 10), sizes[-1])
        _, g = loss_and_grad_flat(theta, sizes, x, t)
        h = 1e-5
        fd = np.array([(loss_and_grad_flat(theta + h * e, sizes, x, t, False)[0]
                        - loss_and_grad_flat(theta - h * e, sizes, x, t, False)[0]) / (2 * h)
                       for e in np.eye(theta.size)])
        worst = max(worst, float((np.abs(g - fd) / np.maximum(np.abs(fd), 1e-3)).max()))
    secs = time.perf_counter() - t0
    ok = worst < 1e-5 and secs < 1.0
    record_acceptance(8, ok, f"max relative error {worst:.2e} (< 1e-5) over 10 nets in {secs:.2f} s")
    assert ok


def _exhaustive_wcss(pts, k):
    """Minimum WCSS over every labelling that uses all k clusters (vectorised)."""
    n = len(pts)
    tails = list(itertools.product(range(k), repeat=n - 1))
    lab = np.array([(0,) + t for t in tails], dtype=int)
    onehot = lab[:, :, None] == np.arange(k)
    counts = onehot.sum(1)
    full = np.all(counts > 0, axis=1)
    sums = np.einsum("pnk,nd->pkd", onehot[full], pts)
    between = ((sums ** 2).sum(2) / counts[full]).sum(1)
    return float((pts ** 2).sum() - between.max())


def test_c09_kmeans_oracle():
    t0 = time.perf_counter()
    hits = 0
    for i in range(1000):
        rng = derive_stream(i, "c09")
        k = int(rng.integers(1, 4))
        n = int(rng.integers(k, 11))
        pts = rng.uniform(0, 1000, size=(n, 2))
        got = kmeans_cluster(pts, k, rng, restarts=10).wcss
        hits += got <= _exhaustive_wcss(pts, k) * (1 + 1e-9) + 1e-6
    secs = time.perf_counter() - t0
    ok = hits >= 950 and secs < 60
    record_acceptance(9, ok, f"best-of-10 matches exhaustive WCSS in {hits}/1000 (>= 950), {secs:.1f} s")
    assert ok


def test_c10_signal_model():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(activation_prob=0.03)
    radio, pool = cfg.radio(), make_zc_pool(20, 3)
    gram = pool.sequences @ pool.sequences.conj().T
    ortho = float(np.abs(gram - 20 * np.eye(20)).max())
    worst = 0.0
    for i in range(5):
        rng = derive_stream(i, "c10")
        slot = simulate_slot(cfg.deployment(), cfg.traffic(), cfg.pathloss(), rng)
        n = complex_normal((cfg.deployment().n_antennas, 20), rng)
        y = received_preamble_signal(slot, pool, radio, np.sqrt(radio.noise_power_mw) * n)
        for pre in range(20):
            p = pool.sequences[pre]
            direct = matched_filter(slot, pre, radio, noise=n @ p.conj() / np.sqrt(20)).filtered
            full = ls_estimate(y, pool, pre, radio)
            worst = max(worst, float(np.abs(direct - full).max()))
    secs = time.perf_counter() - t0
    ok = worst < 1e-10 and ortho < 1e-9 and secs < 1.0
    record_acceptance(10, ok, f"paths differ by {worst:.1e} (< 1e-10), pool cross-correlation "
                              f"{ortho:.1e} (< 1e-9), {secs:.2f} s")
    assert ok


def test_c11_asymptotic():
    t0 = time.perf_counter()
    res = run_asymptotic_check(ExperimentConfig(asym_grid_sides=(5, 10, 20), asym_trials=1000))
    secs = time.perf_counter() - t0
    row = next(r for r in res.rows if r.n_aps == 400)
    ok = row.rel_error < 0.15 and secs < 300
    trend = ", ".join(f"M={r.n_aps}: {100 * r.rel_error:.1f}%" for r in res.rows)
    record_acceptance(11, ok, f"relative error {trend} (< 15% at M=400), {secs:.1f} s")
    assert ok


DET_CFG = """rows = 5
cols = 5
q_samples = 3000
max_epochs = 20
hidden_sizes = 16,8
trials = 120
"""


def test_c12_determinism(tmp_path):
    cfg = tmp_path / "det.cfg"
    cfg.write_text(DET_CFG)
    outs = []
    for workers in (1, 4):
        out = tmp_path / f"w{workers}"
        for cmd in ("confusion", "rates"):
            assert cli_main([cmd, "--config", str(cfg), "--seed", "11", "--out", str(out),
                             "--workers", str(workers)]) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    same = [(outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names]
    ok = len(names) >= 5 and all(same)
    record_acceptance(12, ok, f"{sum(same)}/{len(names)} CSV files byte-identical across 1 and 4 "
                              f"worker threads ({', '.join(names)})")
    assert ok
