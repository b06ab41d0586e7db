"""Constrain an output y = C x + Dmat u instead of the full state.

Run: python3 demos/05_output_constraints.py
"""
import numpy as np

from invkit import (
    OutputSpec,
    build_closed_loop,
    build_output_base,
    example_system,
    existence_check,
    marpi_compute,
    with_base_set,
)

system = example_system()
clm = build_closed_loop(system)

# Keep the second state within +-20 and the input within its bounds; the first state
# is only limited through the input rows.
out = OutputSpec(C=[[0.0, 1.0]], Dmat=[[0.0]], F_y=[[1.0], [-1.0]], f_y=[20.0, 20.0])
base = build_output_base(system, out, include_input=True)
clm_y = with_base_set(clm, base)
rep = existence_check(clm_y)
print("existence with output constraints:", rep.exists.value)

# The first state alone cannot be held within +-60: the disturbance hull reaches about 91 along it.
tight = with_base_set(clm, build_output_base(system, OutputSpec([[1.0, 0.0]], [[0.0]], [[1.0], [-1.0]], [60.0, 60.0])))
print("first state within +-60:", existence_check(tight).exists.value)
res = marpi_compute(clm_y, existence=rep)
print(f"status {res.terminated.value}, {res.n_halfspaces} halfspaces, passes {res.halfspaces_added_per_iteration}")
if res.n_halfspaces:
    from invkit.geometry import bounding_box

    lo, hi = bounding_box(res.set)
    print("bounding box:", np.round(lo, 3), np.round(hi, 3))
