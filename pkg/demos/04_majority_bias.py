"""
Majority votes amplify a small bias
===================================

A majority of m coins, each +1 with probability (1 + delta) / 2, has a bias
that grows like sqrt(m) * delta until it saturates at 1.
"""

from noisy_clusters.paths import exact_majority_bias, majority_bias_curve, \
    simulate_amplification

for delta in (0.05, 0.2):
    print(f"delta = {delta}")
    for m, emp in majority_bias_curve(delta, [1, 11, 101, 1001], 100_000, seed=0):
        print(f"  m={m:5d}  empirical {emp:.4f}  exact {exact_majority_bias(delta, m):.4f}")

# one level of the path estimator: 25 children with bias 0.1, edge noise 0.8
print("root bias after one level:", simulate_amplification(25, 0.1, 0.8, 100_000, seed=1))
