"""Preamble multiplicity estimation: MLP classifier, SCG training and T-ED baseline."""

from .dataset import Dataset, gen_dataset, synthesize_energies
from .metrics import confusion_matrix, within_one, write_confusion_csv
from .mlp import (InputNormalizer, MlpModel, build_input, forward, init_mlp, loss_and_grad,
                  predict, sort_energies)
from .scg import scaled_conjugate_gradient
from .ted import TedModel, fit_ted, predict_ted
from .training import TrainConfig, TrainHistory, fit_multiplicity_mlp, default_hidden_sizes, train_scg

__all__ = [
    "Dataset", "gen_dataset", "synthesize_energies", "confusion_matrix", "within_one", "write_confusion_csv",
    "InputNormalizer", "MlpModel", "build_input", "forward", "init_mlp", "loss_and_grad",
    "predict", "sort_energies", "scaled_conjugate_gradient", "TedModel", "fit_ted",
    "predict_ted", "TrainConfig", "TrainHistory", "fit_multiplicity_mlp", "default_hidden_sizes",
    "train_scg",
]
