"""Train a small multiplicity classifier and compare it with threshold detection.

Uses a 5x5 grid and a reduced dataset so that training takes well under a
minute; the full-size runs go through ``gfra confusion``.

    python3 demos/02_multiplicity_estimation.py
"""

import numpy as np

from gfra.channel import PathLossParams, RadioParams
from gfra.multiplicity import confusion_matrix, fit_multiplicity_mlp, fit_ted, gen_dataset, within_one
from gfra.multiplicity.training import TrainConfig
from gfra.scene import TrafficSpec, derive_stream, make_grid_deployment

T_MAX = 4
dep = make_grid_deployment(5, 5, antennas_per_ap=2)
ds = gen_dataset(20_000, dep, TrafficSpec(), PathLossParams(shadow_sigma_db=8.0), RadioParams(),
                 T_MAX, seed=3)
print("class counts:", np.bincount(ds.labels, minlength=T_MAX + 1).tolist())

model, hist = fit_multiplicity_mlp(ds, T_MAX, derive_stream(3, "init"), hidden_sizes=(32, 16),
                                   config=TrainConfig(max_epochs=150))
print(f"trained {hist.epochs} epochs ({hist.stop_reason}), best validation loss "
      f"{min(hist.val_loss):.4f}")

e_tr, y_tr = ds.part("train")
ted = fit_ted(e_tr, y_tr, T_MAX)
e_te, y_te = ds.part("test")
for name, est in (("DNN", model.estimate(e_te)), ("T-ED", ted.estimate(e_te))):
    cm = confusion_matrix(y_te, est, T_MAX + 1)
    print(f"{name:5s} P(correct | B) = {np.round(np.diag(cm), 3).tolist()}")
    print(f"{'':5s} P(|err| <= 1 | B) = {np.round(within_one(y_te, est, T_MAX + 1), 3).tolist()}")
