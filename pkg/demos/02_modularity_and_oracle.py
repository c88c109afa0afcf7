#!/usr/bin/env python3
"""Modularity basics on toy graphs.

Shows the pairwise definition, the matrix trace form, and the exhaustive
partition oracle agreeing with each other, plus the classic results:
two disjoint triangles split at Q = 0.5, and no split of a complete
graph beats leaving it whole.
"""

import numpy as np

from spamrings.modularity import (
    brute_force_best_partition,
    degree_vector,
    modularity,
    modularity_matrix,
    one_hot,
)

# two disjoint triangles
adj = np.zeros((6, 6))
for i, j in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]:
    adj[i, j] = adj[j, i] = 1.0

deg = degree_vector(adj)
print(f"degrees {deg.d}, total weight 2m = {deg.total_weight}")

split = [0, 0, 0, 1, 1, 1]
print(f"Q(triangle split)   = {modularity(adj, split):.4f}")
print(f"Q(everything as one) = {modularity(adj, [0] * 6):.4f}")

# the trace form (1/2m) Tr(C^T B C) is the same number
b = modularity_matrix(adj)
c = one_hot(split, 2)
q_trace = np.trace(c.T @ b @ c) / deg.total_weight
print(f"trace form           = {q_trace:.4f}")
print(f"row sums of B are zero: {np.allclose(b.sum(axis=1), 0)}")

labels, q_star = brute_force_best_partition(adj, 2)
print(f"\nbrute force over all 2-partitions: Q* = {q_star} at labels {labels}")

# a complete graph has no community structure: the oracle keeps it whole
k4 = np.ones((4, 4)) - np.eye(4)
labels, q_star = brute_force_best_partition(k4, 2)
print(f"K4: Q* = {q_star} with {len(set(labels))} cluster(s)")

# random sanity check: oracle never loses to a random assignment
rng = np.random.default_rng(0)
adj = np.zeros((7, 7))
for i in range(7):
    for j in range(i + 1, 7):
        if rng.random() < 0.5:
            adj[i, j] = adj[j, i] = rng.integers(1, 4)
_, q_star = brute_force_best_partition(adj, 3)
random_qs = [modularity(adj, rng.integers(0, 3, size=7)) for _ in range(200)]
print(f"\nrandom weighted graph: Q* = {q_star:.4f}, best of 200 random = {max(random_qs):.4f}")
