"""
Recovering two clusters through a mediator set
==============================================

Ask every pair between two node sets A and B. Nodes of B vote on whether two
nodes of A share a cluster; the biggest positively-voted component of A is
one cluster's seed, and everything else is sorted by majority against it.
"""

import time

from noisy_clusters import NoisyOracle, PythiaConfig, clustering_agreement, random_truth, \
    recover_pythia

n, q = 2000, 0.2
config = PythiaConfig.from_formula(n, 1 - 2 * q)
print(f"|A| = {config.size_a}, |B| = {config.size_b}, scaled to fit n: {config.flagged}")

t = time.perf_counter()
for seed in range(1, 6):
    truth = random_truth(n, seed)
    res = recover_pythia(NoisyOracle(truth, q, seed=seed), n, config)
    print(seed, "agreement", clustering_agreement(res.assignment, truth),
          "queries", res.queries, "<= bound", res.query_bound, "|C|", res.size_c)
print(f"{time.perf_counter() - t:.1f} s")
