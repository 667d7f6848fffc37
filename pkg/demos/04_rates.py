"""Achievable rates of collided users under the AP selection schemes.

A short run on a 5x5 grid: trains a small classifier, fits threshold
detection, then reports the 95%-likely and ergodic rate per scheme.

    python3 demos/04_rates.py
"""

from gfra.experiments import ExperimentConfig, make_dataset, run_rate_experiment, train_model
from gfra.experiments.report import to_db
from gfra.experiments.runners import fit_ted_model

cfg = ExperimentConfig(rows=5, cols=5, q_samples=20_000, max_epochs=100, hidden_sizes=(32, 16),
                       trials=400, m_c_list=(1, 2, 4), seed=5)
ds = make_dataset(cfg)
model, _ = train_model(cfg, ds)
ted = fit_ted_model(cfg, ds)
rep = run_rate_experiment(cfg, model, ted)

print(f"{rep.n_trials} slots, {rep.n_collided} collided-user samples")
print(f"{'scheme':14s} {'M_c':>3s} {'95%-likely (dB bit/s)':>22s} {'ergodic (kbit/s)':>17s}")
for scheme, m_c in rep.keys():
    print(f"{scheme:14s} {m_c:3d} {to_db(rep.likely95(scheme, m_c)):22.1f} "
          f"{rep.ergodic(scheme, m_c) / 1e3:17.1f}")
