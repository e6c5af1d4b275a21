"""
Features for predicting an edge's sign
======================================

Degrees, embeddedness, the 16 triad counts and counts of positive/negative
edge-disjoint paths of length 3 and 4, all computed with the edge itself
hidden.
"""

import numpy as np

from noisy_clusters import FEATURE_NAMES, SignedGraph, feature_vector, greedy_disjoint_paths, \
    planted_signed_network
from noisy_clusters.features import zero_embeddedness_fraction

# x -> w (+), w -> y (+): one triad of the first type
g = SignedGraph(3, [(0, 1, 1), (0, 2, 1), (2, 1, 1)])
print(dict(zip(FEATURE_NAMES, feature_vector(g, 0, 1).as_array().tolist())))

# two routes of length 3 from 0 to 5 that share no edge
g = SignedGraph(6, [(0, 1, 1), (1, 2, 1), (2, 5, 1), (0, 3, -1), (3, 4, 1), (4, 5, 1)])
paths = greedy_disjoint_paths(g, 0, 5, 3)
print(paths.paths, "positive", paths.positive, "negative", paths.negative)

# a synthetic network with a hidden two-faction split
g, sigma = planted_signed_network(2000, 12, seed=4)
print("edges", g.edge_count, "zero-embeddedness fraction", round(zero_embeddedness_fraction(g), 4))
rows = np.array([feature_vector(g, u, v).as_array() for u, v, _ in g.edges[:200]])
print("mean P3+ / P3- on 200 edges:", rows[:, 23].mean(), rows[:, 24].mean())
