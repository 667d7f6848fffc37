"""Geometry, traffic sampling and reproducible random streams.

AP indexing on a grid deployment is row-major and 0-based: AP ``m`` sits in
row ``m // cols`` and column ``m % cols``, with x growing along columns and
y growing along rows.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

Label = Union[str, int]

DEPLOYMENT_HEADER = ("ap_index", "x_m", "y_m", "antennas")


@dataclass(frozen=True)
class AreaSpec:
    """Square service area with its origin at the lower-left corner."""

    side_length: float = 1000.0

    def __post_init__(self):
        if not self.side_length > 0:
            raise ValueError(f"side_length must be positive, got {self.side_length}")

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= 0) & (pts <= self.side_length), axis=1)


@dataclass(frozen=True, eq=False)
class Deployment:
    ap_coords: np.ndarray
    antennas_per_ap: int
    area: AreaSpec = field(default_factory=AreaSpec)

    def __post_init__(self):
        coords = np.asarray(self.ap_coords, dtype=float).reshape(-1, 2)
        if self.antennas_per_ap < 1:
            raise ValueError("antennas_per_ap must be >= 1")
        if coords.shape[0] == 0:
            raise ValueError("a deployment needs at least one AP")
        if not np.all(self.area.contains(coords)):
            raise ValueError("AP coordinates must lie inside the area")
        if np.unique(coords, axis=0).shape[0] != coords.shape[0]:
            raise ValueError("two APs share a coordinate")
        coords.setflags(write=False)
        object.__setattr__(self, "ap_coords", coords)

    @property
    def n_aps(self) -> int:
        return self.ap_coords.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.n_aps * self.antennas_per_ap

    def rows_for(self, ap_indices) -> np.ndarray:
        """Antenna row indices (into an ``M*S`` stacked vector) of the given APs."""
        ap = np.asarray(ap_indices, dtype=int).reshape(-1)
        s = self.antennas_per_ap
        return (ap[:, None] * s + np.arange(s)[None, :]).reshape(-1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(DEPLOYMENT_HEADER)
            for m, (x, y) in enumerate(self.ap_coords):
                w.writerow([m, repr(float(x)), repr(float(y)), self.antennas_per_ap])

    @classmethod
    def from_csv(cls, path, area: AreaSpec | None = None) -> "Deployment":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or tuple(h.strip() for h in rows[0]) != DEPLOYMENT_HEADER:
            raise ValueError(f"{path}: expected header {','.join(DEPLOYMENT_HEADER)}")
        body = [r for r in rows[1:] if r]
        idx = [int(r[0]) for r in body]
        if idx != list(range(len(body))):
            raise ValueError(f"{path}: ap_index must run 0..M-1 in order")
        antennas = {int(r[3]) for r in body}
        if len(antennas) != 1:
            raise ValueError(f"{path}: mixed antenna counts are not supported")
        coords = np.array([[float(r[1]), float(r[2])] for r in body])
        return cls(coords, antennas.pop(), area or AreaSpec())


@dataclass(frozen=True)
class TrafficSpec:
    n_ues_total: int = 2000
    activation_prob: float = 0.01
    pool_size: int = 20

    def __post_init__(self):
        if self.n_ues_total < 1 or self.pool_size < 1:
            raise ValueError("n_ues_total and pool_size must be positive")
        if not 0.0 <= self.activation_prob <= 1.0:
            raise ValueError("activation_prob must lie in [0, 1]")
        if self.pool_size >= self.n_ues_total:
            raise ValueError("pool_size must be smaller than n_ues_total")

    @property
    def per_preamble_prob(self) -> float:
        return self.activation_prob / self.pool_size


def make_grid_deployment(rows: int, cols: int, area: AreaSpec | None = None,
                         antennas_per_ap: int = 2) -> Deployment:
    """APs at the centres of a ``rows x cols`` grid of equal cells."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be positive, got {rows}x{cols}")
    if antennas_per_ap < 1:
        raise ValueError("antennas_per_ap must be >= 1")
    area = area or AreaSpec()
    side = area.side_length
    r, c = np.divmod(np.arange(rows * cols), cols)
    coords = np.column_stack([(c + 0.5) * side / cols, (r + 0.5) * side / rows])
    return Deployment(coords, antennas_per_ap, area)


def sample_active_count(traffic: TrafficSpec, rng: np.random.Generator) -> int:
    return int(rng.binomial(traffic.n_ues_total, traffic.activation_prob))


def place_ues_uniform(count: int, area: AreaSpec, rng: np.random.Generator) -> np.ndarray:
    if count < 0:
        raise ValueError("count must be >= 0")
    return rng.uniform(0.0, area.side_length, size=(count, 2))


def _label_key(label: Label) -> int:
    if isinstance(label, (bool, np.bool_)):
        raise TypeError("boolean stream labels are ambiguous")
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("integer stream labels must be non-negative")
        return int(label)
    digest = hashlib.blake2b(str(label).encode(), digest_size=8).digest()
    # keep string keys disjoint from small integer indices
    return int.from_bytes(digest, "little") | (1 << 64)


def derive_stream(master_seed: int, path: Sequence[Label] | Label = ()) -> np.random.Generator:
    """Independent Philox stream addressed by ``(master_seed, path)``.

    The stream depends only on the seed and the path labels, never on what
    other streams have consumed, so trials can be drawn in any order or in
    parallel.

    >>> a = derive_stream(7, ["trial", 0]).standard_normal(3)
    >>> b = derive_stream(7, ["trial", 0]).standard_normal(3)
    >>> bool((a == b).all())
    True
    """
    if isinstance(path, (str, int, np.integer)):
        path = [path]
    key = tuple(_label_key(p) for p in path)
    ss = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def spawn_paths(prefix: Iterable[Label], n: int) -> list[list[Label]]:
    base = list(prefix)
    return [base + [i] for i in range(n)]
