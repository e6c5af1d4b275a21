"""
Non-adaptive recovery with path gadgets
=======================================

The queries are fixed up front as a random graph. For each node v a pair of
disjoint trees is grown from the root and from v, matched leaves are joined
by short paths, and majorities of path sign products are folded back up the
trees to estimate whether v shares the root's cluster.
"""

from noisy_clusters import NoisyOracle, PathConfig, build_gadget, clustering_agreement, \
    estimate_pair, random_truth, recover_paths, sample_query_graph
from noisy_clusters.paths import check_gadget

n, q = 1000, 0.1
theory = PathConfig.from_formula(n, 1 - 2 * q)
print("theory-sized gadget needs", theory.gadget_size(), "nodes; notes:", theory.notes)

config = PathConfig.desk_scale(n, 1 - 2 * q)
print("desk-scale branching", config.branching, "gadget size", config.gadget_size())

truth = random_truth(n, seed=3)
oracle = NoisyOracle(truth, q, seed=3)
qgraph = sample_query_graph(oracle, n, config.p)

# one gadget, inspected
gadget = build_gadget(qgraph, 0, 17, config)
check_gadget(gadget, qgraph)
print("leaf pairs:", len(gadget.leaf_pairs), "edges:", len(gadget.edges()))
print("estimate", estimate_pair(gadget, qgraph), "truth", truth[0] * truth[17])

# the full run reuses the same query graph
res = recover_paths(oracle, n, config, qgraph=qgraph)
print("agreement", clustering_agreement(res.assignment, truth), res.report())
