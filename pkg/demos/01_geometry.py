"""Polytope basics: both representations, support functions, sums and redundancy.

Run: python3 demos/01_geometry.py
"""
import numpy as np

from invkit import (
    HPolytope,
    VPolytope,
    is_subset,
    linear_map,
    minkowski_sum,
    prune_hull,
    remove_redundant_halfspaces,
    support_function,
)

# A halfspace description is normalized on construction, so tolerances mean
# the same thing for every row.
box = HPolytope.box(2.0, 2)
print("box rows:", box.n_rows, "support along (1,1):", support_function(box, [1.0, 1.0]))

# The same set as a vertex list. Support functions of vertex sets need no LP.
corners = VPolytope([[a, b] for a in (-2.0, 2.0) for b in (-2.0, 2.0)])
print("vertex support along (1,1):", support_function(corners, [1.0, 1.0]))

# Linear images and sums stay in vertex form; pruning drops interior points.
rot = np.array([[0.0, -1.0], [1.0, 0.0]])
shifted = minkowski_sum(linear_map(0.5 * rot, corners), corners)
print("sum has", shifted.n_vertices, "vertices after pruning")
cloud = VPolytope(np.vstack([corners.vertices, np.random.default_rng(0).uniform(-1, 1, (20, 2))]))
print("random interior points pruned:", cloud.n_vertices, "->", prune_hull(cloud).n_vertices)

# Redundant rows are found by one LP each and removed without changing the set.
loose = HPolytope(np.vstack([box.F, [[1.0, 1.0], [1.0, 0.0]]]), np.append(box.f, [10.0, 5.0]))
tight = remove_redundant_halfspaces(loose)
print("rows:", loose.n_rows, "->", tight.n_rows, "| same set:", is_subset(loose, tight) and is_subset(tight, loose))
