"""All-AP SINR of a collided user as the number of APs grows.

The fading-averaged SINR with conjugate beamforming approaches a ratio of
large-scale gain sums. The gap is governed by how many APs see the user
with comparable gain, so it falls from 5x5 to 20x20 but need not fall
monotonically: on the 30x30 grid the target is 24 m from its four nearest
APs (35 m on 20x20), so those four carry more of the sum and their fading
averages out less.

    python3 demos/05_asymptotic.py
"""

from gfra.experiments import ExperimentConfig, run_asymptotic_check

res = run_asymptotic_check(ExperimentConfig(asym_grid_sides=(5, 10, 20, 30), asym_trials=500))
print(f"{'M':>5s} {'empirical':>10s} {'limit':>8s} {'rel. error':>10s}")
for r in res.rows:
    print(f"{r.n_aps:5d} {r.empirical:10.4f} {r.asymptotic:8.4f} {100 * r.rel_error:9.1f}%")
