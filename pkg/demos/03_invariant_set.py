"""Compute the maximal admissible robust invariant set and cross-check it.

Run: python3 demos/03_invariant_set.py
"""
import time

from invkit import (
    brute_force_intersection,
    build_closed_loop,
    certify_invariance,
    example_system,
    existence_check,
    marpi_compute,
    same_set,
)
from invkit.geometry import polygon_vertices

clm = build_closed_loop(example_system())
t0 = time.perf_counter()
res = marpi_compute(clm, existence=existence_check(clm))
print(f"finished in {time.perf_counter() - t0:.2f} s with status {res.terminated.value}")
print("rows added per pass:", res.halfspaces_added_per_iteration)
print(f"{res.outer_iterations} passes in total, {res.passes_with_additions} of them added rows")
print("irredundant halfspaces:", res.n_halfspaces)
print("certified invariant:", certify_invariance(res.set, clm))

# The explicit intersection of the first backward reachable sets is the same polytope.
print("equals the explicit intersection up to 3 steps:", same_set(res.set, brute_force_intersection(3, clm)))

print("vertices (counter-clockwise):")
for v in polygon_vertices(res.set):
    print(f"  ({v[0]:9.4f}, {v[1]:9.4f})")
