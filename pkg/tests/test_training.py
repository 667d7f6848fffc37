import numpy as np
import pytest

from gfra.channel import PathLossParams, RadioParams
from gfra.multiplicity import (Dataset, TrainConfig, fit_multiplicity_mlp, gen_dataset, init_mlp,
                               default_hidden_sizes, train_scg)
from gfra.multiplicity.mlp import InputNormalizer, sort_energies
from gfra.scene import AreaSpec, TrafficSpec, derive_stream, make_grid_deployment


@pytest.fixture(scope="module")
def ds():
    dep = make_grid_deployment(4, 4, AreaSpec(1000), 2)
    return gen_dataset(3000, dep, TrafficSpec(), PathLossParams(shadow_sigma_db=0), RadioParams(),
                       4, seed=1)


def test_architectures():
    assert default_hidden_sizes(100) == (128, 128, 64, 32)
    assert default_hidden_sizes(49) == (64, 128, 64, 32)


def test_fractions_must_sum_to_one():
    with pytest.raises(ValueError):
        TrainConfig(fractions=(0.5, 0.2, 0.2))


def test_training_improves_and_returns_best(ds):
    model, hist = fit_multiplicity_mlp(ds, 4, derive_stream(0, "init"), hidden_sizes=(16, 8),
                                       config=TrainConfig(max_epochs=60))
    assert hist.train_loss[hist.best_epoch] <= hist.train_loss[0]
    assert hist.val_loss[hist.best_epoch] == min(hist.val_loss)
    x, y = ds.part("test")
    assert np.mean(model.estimate(x) == y) > 0.6
    assert hist.epochs <= 60 and hist.stop_reason in ("validation", "max_epochs", "min_gradient")


def test_early_stopping_by_validation(ds):
    _, hist = fit_multiplicity_mlp(ds, 4, derive_stream(0, "init"), hidden_sizes=(16, 8),
                                   config=TrainConfig(max_epochs=1000, max_val_checks=1))
    assert hist.stop_reason == "validation"
    assert hist.val_loss[-1] > min(hist.val_loss)


def test_min_gradient_sentinel(ds):
    _, hist = fit_multiplicity_mlp(ds, 4, derive_stream(0, "init"), hidden_sizes=(8,),
                                   config=TrainConfig(min_gradient=np.inf))
    assert hist.epochs == 1 and hist.stop_reason == "min_gradient"


def test_empty_split_rejected():
    e = np.ones((4, 3))
    ds = Dataset(e, np.zeros(4, int), np.zeros(4, int))
    model = init_mlp((3, 2, 2), derive_stream(0, "e"), InputNormalizer.fit(sort_energies(e)))
    with pytest.raises(ValueError):
        train_scg(model, ds)


def test_divergence_reported(ds):
    model = init_mlp((16, 4, 5), derive_stream(0, "nan"))
    bad = model.with_params(np.full(model.n_params, np.nan))
    with pytest.raises(FloatingPointError):
        train_scg(bad, ds, TrainConfig(max_epochs=3))
