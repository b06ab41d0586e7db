"""Try to break the computed set: simulate, then search for escapes just outside it.

Run: python3 demos/04_verification.py
"""
import numpy as np

from invkit import build_closed_loop, example_system, find_escape, marpi_compute, maximality_probe, sample_trajectories

clm = build_closed_loop(example_system())
S = marpi_compute(clm).set

_, rep = sample_trajectories(S, clm, count=10_000, horizon=50, seed=0, keep_samples=False)
print(f"{rep.count} trajectories x {rep.horizon} steps: {rep.exits_S} left S, {rep.exits_S0} left S0")

# A point admissible now but outside S must be pushed out of S0 by some vertex sequence.
z = np.array([100.0, 10.0])
w = find_escape(z, clm, depth=6)
print(f"escape from {z} after {w.steps} steps via vertices {w.phi_indices}; "
      f"row {w.violated_row} violated by {w.violation:.3f}")

probe = maximality_probe(S, clm, depth=6)
print(f"{probe.n_probes} probes just outside S, escape fraction {probe.escape_fraction:.2f}")

# A strictly smaller invariant set is not maximal, but the probe cannot show that:
# its exterior band lies inside S, so nothing escapes.
probe = maximality_probe(S.scale(0.9), clm, depth=6)
print(f"0.9*S: {probe.n_probes} probes, escape fraction {probe.escape_fraction:.2f} (inconclusive, as expected)")
