"""Simulate one grant-free slot and look at a preamble collision.

Draws active users on a 10x10 AP grid, finds a preamble picked by two or more
users and compares the per-AP energy of the matched-filter output with the
users' own large-scale gains.

    python3 demos/01_collision_slot.py
"""

import numpy as np

from gfra.airlink import make_zc_pool, matched_filter, simulate_slot
from gfra.channel import PathLossParams, RadioParams
from gfra.scene import TrafficSpec, derive_stream, make_grid_deployment

dep = make_grid_deployment(10, 10, antennas_per_ap=2)
traffic, pathloss, radio = TrafficSpec(), PathLossParams(shadow_sigma_db=8.0), RadioParams()
pool = make_zc_pool(traffic.pool_size)

# the preamble pool is orthogonal over cyclic shifts
gram = pool.sequences @ pool.sequences.conj().T
print(f"{pool.sequences.shape[0]} preambles of length {pool.sequences.shape[1]}, "
      f"max off-diagonal correlation {np.abs(gram - np.diag(np.diag(gram))).max():.1e}")

for trial in range(100):
    slot = simulate_slot(dep, traffic, pathloss, derive_stream(7, ["demo", trial]))
    mult = slot.multiplicities()
    if mult.max() >= 2:
        break
print(f"slot {trial}: {slot.n_active} active users, multiplicities {mult.tolist()}")

pre = int(np.argmax(mult))
obs = matched_filter(slot, pre, radio, derive_stream(7, ["noise", trial]))
users = slot.members(pre)
print(f"preamble {pre} is shared by users {users.tolist()}")
for u in users:
    x, y = slot.ue_positions[u]
    print(f"  user {u} at ({x:6.1f}, {y:6.1f}) m, strongest AP by gain: {int(np.argmax(slot.betas[:, u]))}")

top = np.argsort(obs.energy)[::-1][:6]
print("APs with the largest preamble energy:", top.tolist())
print("energy (dB):", np.round(10 * np.log10(obs.energy[top]), 1).tolist())
