"""Feed-forward multiplicity classifier: sigmoid hidden layers, softmax output."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, logsumexp

DB_FLOOR = 1e-25  # -250 dB

NORMALIZER_KINDS = ("db_standard", "minmax", "identity")


@dataclass(frozen=True, eq=False)
class InputNormalizer:
    """Affine map applied to sorted energies before the first layer.

    ``db_standard`` works on ``10*log10(E)`` and standardises every sorted
    position with training-split statistics. ``minmax`` maps linear energies
    onto [-1, 1] with the global training extremes. ``transform`` computes
    ``(f(E) - shift) / scale``.
    """

    kind: str
    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        if self.kind not in NORMALIZER_KINDS:
            raise ValueError(f"unknown normalizer kind {self.kind!r}")
        shift = np.atleast_1d(np.asarray(self.shift, dtype=float))
        scale = np.atleast_1d(np.asarray(self.scale, dtype=float))
        if not (np.all(np.isfinite(shift)) and np.all(np.isfinite(scale))):
            raise ValueError("normalizer constants must be finite")
        if np.any(scale == 0):
            raise ValueError("normalizer scale must be non-zero")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def fit(cls, sorted_energies, kind: str = "db_standard") -> "InputNormalizer":
        x = np.asarray(sorted_energies, dtype=float)
        if kind == "db_standard":
            db = to_db(x)
            std = db.std(axis=0)
            return cls(kind, db.mean(axis=0), np.where(std > 0, std, 1.0))
        if kind == "minmax":
            lo, hi = float(x.min()), float(x.max())
            half = (hi - lo) / 2 if hi > lo else 1.0
            return cls(kind, np.array([lo + half]), np.array([half]))
        if kind == "identity":
            return cls(kind, np.zeros(1), np.ones(1))
        raise ValueError(f"unknown normalizer kind {kind!r}")

    def transform(self, sorted_energies) -> np.ndarray:
        x = np.asarray(sorted_energies, dtype=float)
        if self.kind == "db_standard":
            x = to_db(x)
        return (x - self.shift) / self.scale


def to_db(x) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(x, DB_FLOOR))


def sort_energies(energy) -> np.ndarray:
    """Descending sort along the last axis."""
    return -np.sort(-np.asarray(energy, dtype=float), axis=-1)


def build_input(energy, normalizer: InputNormalizer | None) -> np.ndarray:
    x = sort_energies(energy)
    return x if normalizer is None else normalizer.transform(x)


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Weights ``W[j]`` have shape ``(N_{j+1}, N_j)``; biases ``b[j]`` ``(N_{j+1},)``."""

    layer_sizes: tuple
    weights: list
    biases: list
    normalizer: InputNormalizer | None = None
    antennas_per_ap: int = 1
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"bad layer sizes {sizes}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("need one weight matrix and bias vector per layer transition")
        for j, (w, b) in enumerate(zip(self.weights, self.biases)):
            if np.shape(w) != (sizes[j + 1], sizes[j]) or np.shape(b) != (sizes[j + 1],):
                raise ValueError(f"layer {j}: expected W {(sizes[j + 1], sizes[j])}, b {(sizes[j + 1],)}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def t_max(self) -> int:
        return self.n_classes - 1

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flat_params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for w, b in zip(self.weights, self.biases) for a in (w, b)])

    def with_params(self, theta) -> "MlpModel":
        ws, bs = unflatten(np.asarray(theta, dtype=float), self.layer_sizes)
        return replace(self, weights=ws, biases=bs)

    def proba(self, energies) -> np.ndarray:
        """Class probabilities from raw (unsorted, linear) per-AP energies."""
        return forward(self, build_input(energies, self.normalizer))

    def estimate(self, energies):
        """Estimated multiplicity from raw per-AP energies."""
        return predict(self, build_input(energies, self.normalizer))


def unflatten(theta: np.ndarray, sizes) -> tuple[list, list]:
    ws, bs, k = [], [], 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        ws.append(theta[k:k + n_out * n_in].reshape(n_out, n_in))
        k += n_out * n_in
        bs.append(theta[k:k + n_out])
        k += n_out
    if k != theta.size:
        raise ValueError(f"parameter vector has {theta.size} entries, layout needs {k}")
    return ws, bs


def init_mlp(layer_sizes, rng: np.random.Generator, normalizer: InputNormalizer | None = None,
             antennas_per_ap: int = 1) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    sizes = tuple(int(n) for n in layer_sizes)
    ws, bs = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        lim = np.sqrt(6.0 / (n_in + n_out))
        ws.append(rng.uniform(-lim, lim, size=(n_out, n_in)))
        bs.append(np.zeros(n_out))
    return MlpModel(sizes, ws, bs, normalizer, antennas_per_ap)


def _check_input(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.n_inputs:
        raise ValueError(f"input has {x.shape[-1]} features, model expects {model.n_inputs}")
    return x


def _softmax(z):
    return np.exp(z - logsumexp(z, axis=-1, keepdims=True))


def forward(model: MlpModel, x) -> np.ndarray:
    """Output distribution over multiplicities 0..T_max for normalised input(s)."""
    a = _check_input(model, x)
    n_layers = len(model.weights)
    for j, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.T + b
        a = _softmax(z) if j == n_layers - 1 else expit(z)
    return a


def predict(model: MlpModel, x):
    """Arg-max class; ties go to the smaller multiplicity."""
    p = forward(model, x)
    idx = np.argmax(p, axis=-1)
    return int(idx) if np.ndim(idx) == 0 else idx


def one_hot(labels, n_classes: int) -> np.ndarray:
    y = np.asarray(labels, dtype=int)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def loss_and_grad_flat(theta: np.ndarray, sizes, x: np.ndarray, targets: np.ndarray,
                       need_grad: bool = True):
    """Summed cross-entropy and its gradient w.r.t. the flat parameter vector.

    ``targets`` are one-hot rows. The gradient follows the same layout as
    :meth:`MlpModel.flat_params`.
    """
    ws, bs = unflatten(theta, sizes)
    acts = [x]
    a = x
    for w, b in zip(ws[:-1], bs[:-1]):
        a = expit(a @ w.T + b)
        acts.append(a)
    z = a @ ws[-1].T + bs[-1]
    logp = z - logsumexp(z, axis=1, keepdims=True)
    loss = -float(np.sum(targets * logp))
    if not need_grad:
        return loss, None
    grads = []
    dz = np.exp(logp) - targets
    for j in range(len(ws) - 1, -1, -1):
        a_prev = acts[j]
        grads.append(dz.sum(axis=0))
        grads.append((dz.T @ a_prev).ravel())
        if j:
            dz = (dz @ ws[j]) * a_prev * (1.0 - a_prev)
    return loss, np.concatenate(grads[::-1])


def loss_and_grad(model: MlpModel, x, labels) -> tuple[float, np.ndarray]:
    """Cross-entropy summed over the batch and its backpropagated gradient."""
    x = np.atleast_2d(_check_input(model, x))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    t = one_hot(labels, model.n_classes)
    return loss_and_grad_flat(model.flat_params(), model.layer_sizes, x, t)
