"""AP selection for collided users: energy shortlisting and K-means AP clustering."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .scene import Deployment

SCHEMES = ("all_ap", "mc_strongest", "ted_cluster", "dnn_cluster", "genie")


@dataclass(frozen=True, eq=False)
class ApShortlist:
    indices: np.ndarray
    coords: np.ndarray

    def __len__(self):
        return len(self.indices)


class ApCluster(NamedTuple):
    ap_indices: np.ndarray
    centroid: np.ndarray


@dataclass(frozen=True, eq=False)
class ClusterSet:
    """K-means partition of a shortlist.

    ``labels[i]`` is the cluster (0-based) of ``ap_indices[i]``.
    """

    ap_indices: np.ndarray
    labels: np.ndarray
    centroids: np.ndarray
    wcss: float
    n_iter: int = 0

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def clusters(self) -> list[ApCluster]:
        return [ApCluster(self.ap_indices[self.labels == j], self.centroids[j]) for j in range(self.k)]

    def to_csv(self, path, coords) -> None:
        """Rows ``cluster_id,ap_index,x,y`` for plotting."""
        coords = np.asarray(coords)
        with open(path, "w") as fh:
            fh.write("cluster_id,ap_index,x,y\n")
            for j in range(self.k):
                for m in self.ap_indices[self.labels == j]:
                    fh.write(f"{j},{int(m)},{coords[m, 0]!r},{coords[m, 1]!r}\n")


def top_energy_aps(energy, count: int, coords=None) -> ApShortlist:
    """The ``count`` strongest APs, strongest first; ties go to the lower index."""
    e = np.asarray(energy, dtype=float)
    if not 1 <= count <= e.size:
        raise ValueError(f"count must be in 1..{e.size}, got {count}")
    idx = np.argsort(-e, kind="stable")[:count]
    xy = np.asarray(coords)[idx] if coords is not None else np.empty((count, 0))
    return ApShortlist(idx, xy)


def lloyd(points, centroids, max_iter: int = 300):
    """Batched Lloyd iterations.

    ``centroids`` has shape ``(R, k, 2)``: R independent runs sharing the same
    points. Runs stop once no label changes. An emptied cluster is reseeded
    at the point farthest from its assigned centroid.

    Returns labels ``(R, n)``, centroids ``(R, k, 2)``, the number of
    iterations and the WCSS trace ``(iters, R)`` recorded after every update.
    """
    pts = np.asarray(points, dtype=float)
    cen = np.array(centroids, dtype=float, copy=True)
    r, k, _ = cen.shape
    n = pts.shape[0]
    labels = None
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = ((pts[None, :, None, :] - cen[:, None, :, :]) ** 2).sum(-1)     # (R, n, k)
        new = np.argmin(d2, axis=2)
        if labels is not None and np.array_equal(new, labels):
            it -= 1
            break
        labels = new
        counts = np.stack([np.bincount(labels[i], minlength=k) for i in range(r)])
        for i, j in zip(*np.nonzero(counts == 0)):
            own = d2[i, np.arange(n), labels[i]]
            own = np.where(counts[i, labels[i]] > 1, own, -1.0)  # never empty another cluster
            far = int(np.argmax(own))
            counts[i, labels[i, far]] -= 1
            labels[i, far] = j
            counts[i, j] = 1
        onehot = labels[..., None] == np.arange(k)
        sums = np.einsum("rnk,nd->rkd", onehot.astype(float), pts)
        cen = sums / counts[..., None]
        trace.append(_wcss(pts, labels, cen))
    return labels, cen, it, np.array(trace)


def _wcss(pts, labels, cen) -> np.ndarray:
    diff = pts[None, :, :] - np.take_along_axis(cen, labels[..., None], axis=1)
    return (diff ** 2).sum(axis=(1, 2))


def kmeans_cluster(points, k: int, rng: np.random.Generator, restarts: int = 10,
                   ap_indices=None, max_iter: int = 300) -> ClusterSet:
    """Best-of-``restarts`` K-means over 2-D points.

    Each restart starts from ``k`` distinct points drawn at random; the run
    with the lowest within-cluster sum of squares wins.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"cannot form {k} clusters from {n} points")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    init = np.stack([rng.choice(n, size=k, replace=False) for _ in range(restarts)])
    labels, cen, n_iter, _ = lloyd(pts, pts[init], max_iter)
    wcss = _wcss(pts, labels, cen)
    best = int(np.argmin(wcss))
    idx = np.arange(n) if ap_indices is None else np.asarray(ap_indices)
    return ClusterSet(idx, labels[best], cen[best], float(wcss[best]), n_iter)


def resolve_collision(energy, b_hat: int, m_c: int, deployment: Deployment,
                      rng: np.random.Generator, restarts: int = 10) -> list[ApCluster]:
    """Shortlist the ``m_c * b_hat`` strongest APs and split them into ``b_hat`` clusters."""
    if b_hat < 0 or m_c < 1:
        raise ValueError("need b_hat >= 0 and m_c >= 1")
    if b_hat == 0:
        return []
    count = m_c * b_hat
    if count > deployment.n_aps:
        warnings.warn(f"shortlist of {count} APs clamped to M={deployment.n_aps}", RuntimeWarning)
        count = deployment.n_aps
    short = top_energy_aps(energy, count, deployment.ap_coords)
    cs = kmeans_cluster(short.coords, min(b_hat, count), rng, restarts, ap_indices=short.indices)
    return cs.clusters()


def match_cluster(clusters, ue_pos) -> int:
    """Index of the cluster whose centroid is nearest to ``ue_pos`` (lowest on ties)."""
    if not clusters:
        raise ValueError("no clusters to match")
    cen = np.stack([c.centroid for c in clusters])
    d2 = ((cen - np.asarray(ue_pos, dtype=float)) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def assign_cluster_to_ue(clusters, ue_pos) -> np.ndarray:
    """AP set of the cluster closest to the (true) UE position; evaluation oracle."""
    return clusters[match_cluster(clusters, ue_pos)].ap_indices


def match_cluster_by_gain(clusters, gains) -> int:
    """Cluster collecting the largest total gain of the target UE."""
    g = np.asarray(gains, dtype=float)
    return int(np.argmax([g[c.ap_indices].sum() for c in clusters]))


def select_genie(gains, m_c: int) -> np.ndarray:
    """The ``m_c`` APs with the largest gains of the target UE; evaluation oracle."""
    return top_energy_aps(gains, m_c).indices


def select_mc_strongest(energy, m_c: int) -> np.ndarray:
    return top_energy_aps(energy, m_c).indices
