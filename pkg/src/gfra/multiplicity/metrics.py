from __future__ import annotations

import numpy as np


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Row-normalised confusion matrix; entry ``(B, B_hat)`` is P(B_hat | B).

    Rows of classes absent from ``y_true`` are left at zero.
    """
    t = np.asarray(y_true, dtype=int)
    p = np.asarray(y_pred, dtype=int)
    if t.size == 0:
        raise ValueError("empty test set")
    counts = np.zeros((n_classes, n_classes))
    np.add.at(counts, (t, np.clip(p, 0, n_classes - 1)), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)


def within_one(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Per-class probability that the estimate is off by at most one."""
    t = np.asarray(y_true, dtype=int)
    ok = np.abs(t - np.asarray(y_pred, dtype=int)) <= 1
    out = np.full(n_classes, np.nan)
    for b in range(n_classes):
        sel = t == b
        if sel.any():
            out[b] = ok[sel].mean()
    return out


def write_confusion_csv(path, matrix: np.ndarray) -> None:
    k = matrix.shape[0]
    with open(path, "w") as fh:
        fh.write("true_B," + ",".join(f"pred_{j}" for j in range(k)) + "\n")
        for b in range(k):
            fh.write(f"{b}," + ",".join(f"{v:.6f}" for v in matrix[b]) + "\n")
