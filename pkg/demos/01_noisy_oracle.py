"""
A noisy same-cluster oracle
===========================

Each pair of nodes gets one fixed answer: +1 if they share a cluster, -1
otherwise, flipped with probability q. Asking again returns the same answer
and costs nothing.
"""

import numpy as np

from noisy_clusters import NoisyOracle, random_truth, sample_query_graph

truth = random_truth(1000, seed=1)
oracle = NoisyOracle(truth, q=0.3, seed=1)

# ask 100 000 distinct pairs and measure how often the answer lies
lo, hi = np.triu_indices(1000, 1)
lo, hi = lo[:100_000], hi[:100_000]
answers = oracle.query_many(lo, hi)
print("flip rate:", np.mean(answers != truth[lo] * truth[hi]))
print("distinct queries:", oracle.query_count)

# repeated questions are free
oracle.query(3, 7), oracle.query(7, 3)
print("after repeats:", oracle.query_count)

# a random query graph G(n, p) answers every included pair once
g = sample_query_graph(NoisyOracle(truth, 0.3, seed=2), 1000, p=0.05)
print("query graph edges:", g.edge_count, "expected about", round(0.05 * 1000 * 999 / 2))
