"""Grant-free random access over distributed massive MIMO.

Preamble-collision simulation, multiplicity estimation and K-means AP
clustering for collided users.
"""

__version__ = "0.1.0"
