"""
Cross-validated sign prediction
===============================

Balanced 10-fold logistic regression over feature subsets. Runs on a
synthetic network; pass a SNAP signed edge list (or a known dataset name with
NOISY_CLUSTERS_DATA set) to use real data.
"""

import sys

from noisy_clusters import cross_validate, load_snap_edgelist, planted_signed_network, \
    resolve_dataset
from noisy_clusters.learn import FeatureCache

if len(sys.argv) > 1:
    g, rep = load_snap_edgelist(resolve_dataset(sys.argv[1]))
    print(rep.to_json())
else:
    g, _ = planted_signed_network(1500, 12, seed=5)

cache = FeatureCache(g)  # features are computed once and shared by every mask
for mask in ("All", "Classic", "Triads", "P3", "P4", "Deg"):
    r = cross_validate(g, mask, emb_threshold=0, seed=0, cache=cache)
    print(f"{mask:9s} {r.mean_accuracy:.4f} on {r.n_edges} edges")

r = cross_validate(g, "All", emb_threshold=0, emb_max=0, seed=0, cache=cache)
print(f"All, zero-embeddedness edges only: {r.mean_accuracy:.4f} on {r.n_edges} edges")
