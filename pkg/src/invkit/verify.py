"""Independent checks of a computed invariant set.

``certify_invariance`` is a deterministic support-function certificate.
``sample_trajectories`` tries to falsify invariance by simulation, and
``find_escape`` / ``maximality_probe`` search vertex parameter and
disturbance sequences for states that leave the base set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from invkit._parallel import pmap
from invkit.geometry import (
    EPS_SUB,
    HPolytope,
    LPStatus,
    bounding_box,
    remove_redundant_halfspaces,
    solve_lp,
    zeta,
)
from invkit.system import ClosedLoopModel

ESCAPE_DEPTH = 6
ESCAPE_CAP = 10**5
EPS_OUT = 1e-3


def invariance_margins(S: HPolytope, clm: ClosedLoopModel):
    """``h_S(phi_j^T g) + h_D(g) - c`` for every vertex ``j`` (rows) and facet ``(g, c)`` (columns)."""
    h_D = np.max(S.F @ clm.D_vertices.vertices.T, axis=1)
    out = np.empty((clm.L, S.n_rows))
    for j, phi in enumerate(clm.phi_vertices):
        out[j] = zeta(S, S.F @ phi) + h_D - S.f
    return out


def certify_invariance(S: HPolytope, clm: ClosedLoopModel, eps=EPS_SUB):
    """True iff ``phi_j S + D`` lies in ``S`` for every vertex matrix, up to ``eps`` per facet."""
    if S.n_rows == 0:
        return True
    return bool(np.all(invariance_margins(S, clm) <= eps))


@dataclass
class TrajectorySample:
    x0: np.ndarray
    lambdas: np.ndarray
    disturbances: np.ndarray
    states: np.ndarray
    horizon: int


@dataclass
class ViolationReport:
    count: int
    horizon: int
    seed: int
    exits_S: int
    exits_S0: int
    first_exits: list = field(default_factory=list)

    @property
    def clean(self):
        return self.exits_S == 0 and self.exits_S0 == 0

    def to_dict(self):
        return {
            "count": self.count,
            "horizon": self.horizon,
            "seed": self.seed,
            "exits_S": self.exits_S,
            "exits_S0": self.exits_S0,
            "first_exits": [list(map(int, e)) for e in self.first_exits],
        }


def _rejection_sample(rng, P: HPolytope, count, lo, hi, max_rounds=1000):
    out = np.empty((0, P.dim))
    for _ in range(max_rounds):
        if out.shape[0] >= count:
            break
        batch = rng.uniform(lo, hi, size=(max(4 * count, 64), P.dim))
        out = np.vstack([out, batch[P.contains(batch, tol=0.0)]])
    if out.shape[0] < count:
        raise RuntimeError("rejection sampling could not find enough interior points")
    return out[:count]


def _sample_disturbances(rng, clm: ClosedLoopModel, size):
    V = clm.D_vertices.vertices
    lo, hi = V.min(axis=0), V.max(axis=0)
    d = _rejection_sample(rng, clm.D, size, lo, hi) if np.all(hi > lo) else np.broadcast_to(lo, (size, V.shape[1])).copy()
    at_vertex = rng.random(size) < 0.5
    d[at_vertex] = V[rng.integers(V.shape[0], size=int(at_vertex.sum()))]
    return d


def sample_trajectories(S: HPolytope, clm: ClosedLoopModel, count=1000, horizon=50, seed=0,
                        keep_samples=True):
    """Simulate ``x+ = phi x + d`` from random points of ``S``.

    Parameters are random convex combinations of the vertex matrices; half
    of the disturbances sit on vertices of ``D``, the rest are uniform in
    ``D``. Returns the samples (empty list unless ``keep_samples``) and a
    :class:`ViolationReport` counting trajectories that leave ``S`` or the
    base set. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    n, L = clm.n, clm.L
    lo, hi = bounding_box(S)
    x = _rejection_sample(rng, S, count, lo, hi)
    phis = np.stack(clm.phi_vertices)
    states = np.empty((count, horizon + 1, n))
    lambdas = rng.dirichlet(np.ones(L), size=(count, horizon))
    dist = _sample_disturbances(rng, clm, count * horizon).reshape(count, horizon, n)
    states[:, 0] = x
    for t in range(horizon):
        phi_t = np.einsum("sl,lij->sij", lambdas[:, t], phis)
        x = np.einsum("sij,sj->si", phi_t, x) + dist[:, t]
        states[:, t + 1] = x
    in_S = S.contains(states, tol=EPS_SUB)
    in_S0 = clm.S0.contains(states, tol=EPS_SUB)
    out_S = ~in_S.all(axis=1)
    out_S0 = ~in_S0.all(axis=1)
    first = [(int(s), int(np.argmin(in_S[s]))) for s in np.flatnonzero(out_S)[:20]]
    report = ViolationReport(count, horizon, seed, int(out_S.sum()), int(out_S0.sum()), first)
    samples = []
    if keep_samples:
        samples = [TrajectorySample(states[s, 0], lambdas[s], dist[s], states[s], horizon) for s in range(count)]
    return samples, report


@dataclass
class EscapeWitness:
    """A vertex sequence driving ``z`` out of the base set after ``steps`` steps."""

    steps: int
    phi_indices: list
    disturbances: np.ndarray
    states: np.ndarray
    violated_row: int
    violation: float


def find_escape(z, clm: ClosedLoopModel, depth=ESCAPE_DEPTH, cap=ESCAPE_CAP, tol=1e-9) -> Optional[EscapeWitness]:
    """Exhaustive search over vertex parameter sequences of length ``<= depth``.

    For each sequence and each base-set row the worst disturbance is a
    vertex of ``D``; the search walks the rows of the ``t``-step backward
    reachable sets, and a hit is replayed forward to produce the witness.
    """
    z = np.asarray(z, dtype=float)
    if clm.L ** depth > cap:
        raise ValueError(f"{clm.L}^{depth} sequences exceed the cap {cap}")
    F0, f0 = clm.S0.F, clm.S0.f
    Dv = clm.D_vertices.vertices
    if np.any(F0 @ z - f0 > tol):
        return _witness(z, [], Dv[:0], clm, int(np.argmax(F0 @ z - f0)))
    layers = [(F0, f0)]
    F, f = F0, f0
    for t in range(1, depth + 1):
        tight = f - np.max(F @ Dv.T, axis=1)
        F = np.vstack([F @ phi for phi in clm.phi_vertices])
        f = np.tile(tight, clm.L)
        layers.append((F, f))
        viol = F @ z - f
        r = int(np.argmax(viol))
        if viol[r] > tol:
            return _decode(z, r, t, layers, clm)
    return None


def _decode(z, r, t, layers, clm):
    Dv = clm.D_vertices.vertices
    idx, ds = [], []
    for s in range(t, 0, -1):
        rows_prev = layers[s - 1][0].shape[0]
        i, r = divmod(r, rows_prev)
        g = layers[s - 1][0][r]
        idx.append(i)
        ds.append(Dv[int(np.argmax(Dv @ g))])
    return _witness(z, idx, np.array(ds).reshape(-1, clm.n), clm, r)


def _witness(z, idx, ds, clm, row):
    states = [z]
    x = z
    for i, d in zip(idx, ds):
        x = clm.phi_vertices[i] @ x + d
        states.append(x)
    viol = float(clm.S0.F[row] @ x - clm.S0.f[row])
    return EscapeWitness(len(idx), list(idx), ds, np.array(states), row, viol)


@dataclass
class ProbeReport:
    probes: np.ndarray
    escaped: np.ndarray
    depth: int

    @property
    def n_probes(self):
        return self.probes.shape[0]

    @property
    def escape_fraction(self):
        return float(self.escaped.mean()) if self.n_probes else 0.0

    @property
    def inconclusive(self):
        return self.probes[~self.escaped]


def maximality_probe(S: HPolytope, clm: ClosedLoopModel, boundary_points=4, depth=ESCAPE_DEPTH,
                     eps_out=EPS_OUT, seed=0) -> ProbeReport:
    """Push points on the facets of ``S`` outward by ``eps_out`` and search for escapes.

    Probes outside the base set are discarded. An escape certifies that the
    probe belongs to no admissible invariant set; a probe without escape at
    this depth is inconclusive, not a counterexample.
    """
    rng = np.random.default_rng(seed)
    R = remove_redundant_halfspaces(S)
    probes = []
    for g, c in zip(R.F, R.f):
        facet = HPolytope(np.vstack([R.F, -g]), np.append(R.f, -c), normalize=False)
        extremes = []
        for _ in range(max(boundary_points, 1)):
            out = solve_lp(rng.normal(size=R.dim), facet, "max")
            if out.status is LPStatus.OPTIMAL:
                extremes.append(out.point)
        if not extremes:
            continue
        extremes = np.array(extremes)
        center = extremes.mean(axis=0)
        pts = [center] + [0.5 * (e + center) for e in extremes]
        for p in pts[:boundary_points]:
            q = p + eps_out * g
            if clm.S0.contains(q, tol=0.0) and not R.contains(q, tol=0.0):
                probes.append(q)
    probes = np.array(probes).reshape(-1, clm.n)
    escaped = np.array(pmap(lambda q: find_escape(q, clm, depth) is not None, probes), dtype=bool)
    return ProbeReport(probes, escaped.reshape(-1), depth)
