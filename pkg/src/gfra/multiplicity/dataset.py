"""Labelled preamble-energy samples for training multiplicity estimators."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..airlink import preamble_energy
from ..channel import PathLossParams, RadioParams, complex_normal, path_gain, shadowing, tx_snr_linear
from ..scene import Deployment, TrafficSpec, derive_stream

SPLITS = ("train", "val", "test")
CHUNK = 2000
DATASET_MAGIC = "#gfra-dataset"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Raw per-AP energies with their true multiplicities.

    ``split`` holds 0/1/2 for train/val/test rows.
    """

    features: np.ndarray
    labels: np.ndarray
    split: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.features) == len(self.labels) == len(self.split)):
            raise ValueError("features, labels and split must have equal length")

    def __len__(self):
        return len(self.labels)

    @property
    def n_aps(self) -> int:
        return self.features.shape[1]

    def part(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        mask = self.split == SPLITS.index(name)
        return self.features[mask], self.labels[mask]

    def to_csv(self, path) -> None:
        """One header line, then ``B,E_1..E_M`` rows ordered train, val, test."""
        order = np.argsort(self.split, kind="stable")
        counts = np.bincount(self.split, minlength=3)
        meta = dict(self.meta)
        meta.update(M=self.n_aps, n_train=int(counts[0]), n_val=int(counts[1]), n_test=int(counts[2]))
        header = DATASET_MAGIC + " " + " ".join(f"{k}={v}" for k, v in meta.items())
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for i in order:
                fh.write(str(int(self.labels[i])) + ","
                         + ",".join(repr(float(e)) for e in self.features[i]) + "\n")

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path) as fh:
            header = fh.readline().split()
            if not header or header[0] != DATASET_MAGIC:
                raise ValueError(f"{path}: missing {DATASET_MAGIC} header")
            meta = dict(kv.split("=", 1) for kv in header[1:])
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        m = int(meta["M"])
        if data.shape[1] != m + 1:
            raise ValueError(f"{path}: rows have {data.shape[1] - 1} energies, header says M={m}")
        counts = [int(meta.pop(k)) for k in ("n_train", "n_val", "n_test")]
        if sum(counts) != data.shape[0]:
            raise ValueError(f"{path}: split counts do not add up to the number of rows")
        split = np.repeat(np.arange(3), counts)
        meta = {k: _parse_scalar(v) for k, v in meta.items()}
        return cls(data[:, 1:], data[:, 0].astype(int), split, meta)


def _parse_scalar(v: str):
    for typ in (int, float):
        try:
            return typ(v)
        except ValueError:
            pass
    return v


def draw_multiplicities(n: int, traffic: TrafficSpec, t_max: int, rng: np.random.Generator) -> np.ndarray:
    """Binomial(N, rho/L) multiplicities, redrawing anything above ``t_max``."""
    b = rng.binomial(traffic.n_ues_total, traffic.per_preamble_prob, size=n)
    bad = b > t_max
    while bad.any():
        b[bad] = rng.binomial(traffic.n_ues_total, traffic.per_preamble_prob, size=int(bad.sum()))
        bad = b > t_max
    return b


def synthesize_energies(multiplicities, deployment: Deployment, pathloss: PathLossParams,
                        radio: RadioParams, n_preambles: int, rng: np.random.Generator) -> np.ndarray:
    """Per-AP matched-filter energies for a batch of preambles with given multiplicities."""
    b = np.asarray(multiplicities, dtype=int)
    n, k = b.size, max(int(b.max(initial=0)), 1)
    m, s = deployment.n_aps, deployment.antennas_per_ap
    pos = rng.uniform(0.0, deployment.area.side_length, size=(n, k, 2))
    diff = deployment.ap_coords[None, :, None, :] - pos[:, None, :, :]      # (n, M, k, 2)
    d = np.hypot(diff[..., 0], diff[..., 1])
    beta = path_gain(d, pathloss) * shadowing(d.shape, pathloss, rng)
    beta *= (np.arange(k)[None, None, :] < b[:, None, None])
    h = complex_normal((n, m, s, k), rng)
    g = np.einsum("nmsk,nmk->nms", h, np.sqrt(beta))
    noise = complex_normal((n, m, s), rng) / np.sqrt(tx_snr_linear(radio) * n_preambles)
    return preamble_energy((g + noise).reshape(n, m * s), s)


def split_assignment(q: int, fractions, rng: np.random.Generator) -> np.ndarray:
    fr = np.asarray(fractions, dtype=float)
    if fr.shape != (3,) or np.any(fr < 0) or not np.isclose(fr.sum(), 1.0):
        raise ValueError("split fractions must be three non-negative numbers summing to 1")
    n_train = int(round(fr[0] * q))
    n_val = int(round(fr[1] * q))
    n_val = min(n_val, q - n_train)
    codes = np.repeat([0, 1, 2], [n_train, n_val, q - n_train - n_val])
    return codes[rng.permutation(q)]


def gen_dataset(q: int, deployment: Deployment, traffic: TrafficSpec, pathloss: PathLossParams,
                radio: RadioParams, t_max: int, seed: int, *, fractions=(0.8, 0.1, 0.1),
                workers: int = 1, stream_prefix=("dataset",)) -> Dataset:
    """Generate ``q`` i.i.d. single-preamble samples.

    Samples are produced in fixed-size chunks, each from its own derived
    stream, so the result does not depend on ``workers``.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    prefix = list(stream_prefix)
    starts = list(range(0, q, CHUNK))

    def chunk(i):
        rng = derive_stream(seed, prefix + ["chunk", i])
        n = min(CHUNK, q - starts[i])
        b = draw_multiplicities(n, traffic, t_max, rng)
        return synthesize_energies(b, deployment, pathloss, radio, traffic.pool_size, rng), b

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(chunk, range(len(starts))))
    else:
        parts = [chunk(i) for i in range(len(starts))]
    features = np.concatenate([p[0] for p in parts])
    labels = np.concatenate([p[1] for p in parts])
    split = split_assignment(q, fractions, derive_stream(seed, prefix + ["split"]))
    meta = dict(S=deployment.antennas_per_ap, t_max=t_max, N=traffic.n_ues_total,
                rho=traffic.activation_prob, L=traffic.pool_size,
                sigma_sf_db=pathloss.shadow_sigma_db, tx_power_dbm=radio.tx_power_dbm, seed=seed)
    return Dataset(features, labels, split, meta)
