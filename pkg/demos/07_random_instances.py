"""Contractive random instances: the finite bound N and the explicit intersection agree with the fixpoint.

Run: python3 demos/07_random_instances.py
"""
import numpy as np

from invkit import (
    ClosedLoopModel,
    Existence,
    HPolytope,
    bound_N,
    brute_force_intersection,
    existence_check,
    marpi_compute,
    same_set,
)

rng = np.random.default_rng(1)
shown = 0
while shown < 5:
    phis = []
    for _ in range(2):
        M = rng.normal(size=(2, 2))
        phis.append(M * rng.uniform(0.5, 0.85) / np.linalg.norm(M, 2))
    r = rng.uniform(1, 5, size=2)
    clm = ClosedLoopModel.from_matrices(phis, HPolytope.from_bounds(-r, r),
                                        0.05 * r.min() * np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]))
    rep = existence_check(clm)
    if rep.exists is not Existence.YES:
        continue
    bp = bound_N(clm, rep)
    if bp.N is None or bp.N > 10:
        continue
    res = marpi_compute(clm, existence=rep)
    agree = same_set(res.set, brute_force_intersection(bp.N, clm))
    print(f"phi_max {bp.phi_max:.3f}  N {bp.N:2d}  passes {res.outer_iterations}  "
          f"halfspaces {res.n_halfspaces:2d}  matches explicit intersection: {agree}")
    shown += 1
