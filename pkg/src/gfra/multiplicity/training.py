"""Full-batch SCG training with validation-based early stopping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .mlp import InputNormalizer, MlpModel, init_mlp, loss_and_grad_flat, one_hot, sort_energies
from .scg import scaled_conjugate_gradient

DEFAULT_HIDDEN = {
    "default": (128, 128, 64, 32),
    49: (64, 128, 64, 32),
}


def default_hidden_sizes(n_aps: int) -> tuple:
    return DEFAULT_HIDDEN.get(n_aps, DEFAULT_HIDDEN["default"])


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 1000
    min_gradient: float = 1e-6
    max_val_checks: int = 8
    scg_sigma: float = 1e-4
    scg_lambda_init: float = 1e-6
    fractions: tuple = (0.8, 0.1, 0.1)
    q_samples: int = 100_000

    def __post_init__(self):
        if not math.isclose(sum(self.fractions), 1.0):
            raise ValueError("split fractions must sum to 1")


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: str = ""

    @property
    def epochs(self) -> int:
        return len(self.train_loss) - 1


def train_scg(model: MlpModel, dataset: Dataset, config: TrainConfig = TrainConfig(),
              ) -> tuple[MlpModel, TrainHistory]:
    """Train ``model`` on the training split; return the best-validation parameters.

    The objective is the mean cross-entropy over the training split. Early
    stopping fires once the validation loss has been worse than its best
    value for ``max_val_checks`` consecutive epochs.
    """
    xs, ys = {}, {}
    for name in ("train", "val"):
        e, y = dataset.part(name)
        if len(y) == 0:
            raise ValueError(f"dataset has an empty {name} split")
        xs[name] = sort_energies(e) if model.normalizer is None else model.normalizer.transform(sort_energies(e))
        ys[name] = one_hot(y, model.n_classes)
    sizes = model.layer_sizes
    n_tr, n_va = len(ys["train"]), len(ys["val"])

    def objective(theta):
        loss, grad = loss_and_grad_flat(theta, sizes, xs["train"], ys["train"])
        return loss / n_tr, grad / n_tr

    def val_loss(theta):
        return loss_and_grad_flat(theta, sizes, xs["val"], ys["val"], need_grad=False)[0] / n_va

    theta0 = model.flat_params()
    f0, g0 = objective(theta0)
    hist = TrainHistory([f0], [val_loss(theta0)], [float(np.linalg.norm(g0))])
    best = {"theta": theta0.copy(), "val": hist.val_loss[0], "fails": 0}

    def callback(k, theta, f, gnorm):
        if not np.isfinite(f):
            raise FloatingPointError(f"training diverged at epoch {k} (loss={f})")
        v = val_loss(theta)
        hist.train_loss.append(float(f))
        hist.val_loss.append(float(v))
        hist.grad_norm.append(gnorm)
        if v < best["val"]:
            best.update(theta=theta.copy(), val=v, fails=0)
            hist.best_epoch = k
        elif v > best["val"]:
            best["fails"] += 1
        return best["fails"] >= config.max_val_checks

    res = scaled_conjugate_gradient(objective, theta0, max_iter=config.max_epochs,
                                    min_gradient=config.min_gradient, sigma=config.scg_sigma,
                                    lambda_init=config.scg_lambda_init, callback=callback)
    hist.stop_reason = {"callback": "validation", "max_iter": "max_epochs"}.get(res.reason, res.reason)
    return model.with_params(best["theta"]), hist


def fit_multiplicity_mlp(dataset: Dataset, t_max: int, rng: np.random.Generator, *,
                         hidden_sizes=None, normalizer_kind: str = "db_standard",
                         config: TrainConfig = TrainConfig(), antennas_per_ap: int | None = None,
                         ) -> tuple[MlpModel, TrainHistory]:
    """Fit the input normaliser on the training split, initialise and train."""
    m = dataset.n_aps
    hidden = tuple(hidden_sizes) if hidden_sizes else default_hidden_sizes(m)
    e_train, _ = dataset.part("train")
    norm = InputNormalizer.fit(sort_energies(e_train), normalizer_kind)
    s = antennas_per_ap if antennas_per_ap is not None else int(dataset.meta.get("S", 1))
    model = init_mlp((m, *hidden, t_max + 1), rng, norm, s)
    return train_scg(model, dataset, config)
