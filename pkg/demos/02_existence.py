"""From problem data to a closed-loop model, then decide whether an invariant set exists.

Run: python3 demos/02_existence.py
"""
import numpy as np

from invkit import build_closed_loop, check_schur_stability, example_system, existence_check
from invkit.mrpi import phi_max
from invkit.system import UncertainSystem

system = example_system()
clm = build_closed_loop(system)
print("closed-loop vertex matrices:")
for phi in clm.phi_vertices:
    print(np.array2string(phi, precision=5))

stab = check_schur_stability(clm)
print("spectral radii:", np.round(stab.radii, 4), "| 2-norms:", np.round(stab.norms, 3))
print("largest 2-norm is", round(phi_max(clm), 3), "so a plain norm-decay tail is unavailable here")

# The hull recursion brackets f_min; existence needs a non-negative lower end.
rep = existence_check(clm)
print(f"exists: {rep.exists.value}, f_min in [{rep.f_min_lower:.4f}, {rep.f_min_upper:.4f}] after {rep.k_used} steps")
print("invariant scaling factor used for the tail:", round(rep.invariant_scale, 5))

# With a disturbance 200 times larger the first step already leaves the base set.
big = UncertainSystem(system.n, system.m, system.F_x, system.f_x, system.F_u, system.f_u,
                      system.F_d, 200 * system.f_d, system.psi_vertices, system.K)
rep = existence_check(build_closed_loop(big))
print(f"scaled disturbance: exists = {rep.exists.value}, f_min <= {rep.f_min_upper:.1f}")
