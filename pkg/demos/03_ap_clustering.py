"""Split the strongest APs of a collided preamble into one cluster per user.

Writes ``clusters.csv`` (``cluster_id,ap_index,x,y``) next to the script for
plotting.

    python3 demos/03_ap_clustering.py
"""

import os

import numpy as np

from gfra.airlink import matched_filter, slot_from_positions
from gfra.channel import PathLossParams, RadioParams
from gfra.clustering import kmeans_cluster, match_cluster, top_energy_aps
from gfra.scene import derive_stream, make_grid_deployment

dep = make_grid_deployment(10, 10, antennas_per_ap=2)
rng = derive_stream(11, "demo")
# three users on the same preamble, far apart
users = np.array([[150.0, 200.0], [800.0, 250.0], [450.0, 850.0]])
slot = slot_from_positions(dep, users, np.zeros(3, dtype=int), PathLossParams(shadow_sigma_db=8.0), rng)
obs = matched_filter(slot, 0, RadioParams(), rng)

b_hat, m_c = 3, 4
short = top_energy_aps(obs.energy, b_hat * m_c, dep.ap_coords)
cs = kmeans_cluster(short.coords, b_hat, rng, restarts=10, ap_indices=short.indices)
print(f"shortlist of {len(short)} APs, WCSS {cs.wcss:.0f} m^2 after {cs.n_iter} iterations")
clusters = cs.clusters()
for u, pos in enumerate(users):
    c = clusters[match_cluster(clusters, pos)]
    print(f"user {u} at {pos.tolist()} -> APs {c.ap_indices.tolist()} "
          f"(centroid {np.round(c.centroid).tolist()})")

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "clusters.csv")
cs.to_csv(out, dep.ap_coords)
print("wrote", out)
