"""Threshold energy detection (T-ED) baseline for multiplicity estimation.

Energies are sorted in descending order, mapped affinely onto [-1, 1] with
extremes taken over the training set, and averaged over APs. The class is
read off by comparing that level with midpoints between adjacent class means.

Two normalisation modes are offered. ``per_position`` (default) takes the
extremes separately for every sorted position, ``global`` uses one min/max
pair over all training energies. With linear energies spanning many decades
the global map squeezes almost every sample to -1, so its class means become
indistinguishable; it is kept for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mlp import sort_energies

TED_MODES = ("per_position", "global")


@dataclass(frozen=True, eq=False)
class TedModel:
    """Normaliser constants, per-class mean levels and decision thresholds.

    ``thresholds[B]`` is the lower edge of class ``B``; ``thresholds[0] = -1``
    and ``thresholds[t_max + 1] = inf``.
    """

    norm_min: np.ndarray
    norm_max: np.ndarray
    class_means: np.ndarray
    thresholds: np.ndarray
    mode: str = "per_position"

    @property
    def t_max(self) -> int:
        return len(self.class_means) - 1

    def normalize(self, energies) -> np.ndarray:
        x = sort_energies(energies)
        span = self.norm_max - self.norm_min
        return 2.0 * (x - self.norm_min) / span - 1.0

    def level(self, energies) -> np.ndarray:
        """Average normalised energy per AP."""
        return self.normalize(energies).mean(axis=-1)

    def estimate(self, energies):
        return predict_ted(self, energies)

    def to_text(self) -> str:
        def row(a):
            return ",".join(repr(float(v)) for v in np.ravel(a))
        lines = ["#gfra-ted 1", f"mode={self.mode}", "norm_min=" + row(self.norm_min),
                 "norm_max=" + row(self.norm_max), "class_means=" + row(self.class_means)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TedModel":
        lines = text.strip().splitlines()
        if not lines or lines[0].split()[0] != "#gfra-ted":
            raise ValueError("not a T-ED model file")
        kv = dict(line.split("=", 1) for line in lines[1:])

        def arr(key):
            return np.array([float(v) for v in kv[key].split(",")])
        lo, hi = arr("norm_min"), arr("norm_max")
        if kv["mode"] == "global":
            lo, hi = lo[0], hi[0]
        means = arr("class_means")
        return cls(lo, hi, means, _thresholds(means), kv["mode"])


def _thresholds(class_means: np.ndarray) -> np.ndarray:
    mids = (class_means[:-1] + class_means[1:]) / 2.0
    return np.concatenate([[-1.0], mids, [math.inf]])


def fit_ted(energies, labels, t_max: int, mode: str = "per_position") -> TedModel:
    """Fit T-ED on raw training energies ``(n, M)`` with labels in ``0..t_max``."""
    if mode not in TED_MODES:
        raise ValueError(f"unknown T-ED mode {mode!r}")
    x = sort_energies(energies)
    y = np.asarray(labels, dtype=int)
    if mode == "global":
        lo, hi = float(x.min()), float(x.max())
    else:
        lo, hi = x.min(axis=0), x.max(axis=0)
        # a constant position carries no information; keep it finite
        hi = np.where(hi > lo, hi, lo + 1.0)
    if not np.all(np.asarray(hi) > np.asarray(lo)):
        raise ValueError("training energies are constant; cannot normalise")
    level = (2.0 * (x - lo) / (hi - lo) - 1.0).mean(axis=1)
    means = np.empty(t_max + 1)
    for b in range(t_max + 1):
        sel = y == b
        if not sel.any():
            raise ValueError(f"no training samples for multiplicity class {b}")
        means[b] = level[sel].mean()
    return TedModel(lo, hi, means, _thresholds(means), mode)


def predict_ted(model: TedModel, energies):
    """Class ``B`` with ``Th_B < level <= Th_{B+1}``; levels at or below -1 map to 0."""
    lvl = model.level(energies)
    b = np.searchsorted(model.thresholds, lvl, side="left") - 1
    b = np.clip(b, 0, model.t_max)
    return int(b) if np.ndim(b) == 0 else b
