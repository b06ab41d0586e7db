"""Convex-hull iterates of the minimal robust positively invariant set and the existence test.

``D_0 = {0}`` and ``D_k = conv(U_i phi_i D_{k-1}) + D``. The support of the
limit ``D_inf`` on the base-set normals decides whether a non-empty
admissible invariant set exists: it does iff ``f0 - zeta_{D_inf}(F0) >= 0``.
Finite iterates give an under-estimate of that support, so they alone can
only prove non-existence; a certified tail bound is needed to prove existence.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from invkit.exceptions import IterationCapExceeded, VertexBudgetExceeded
from invkit.geometry import (
    VPolytope,
    _full_dimensional,
    hull_halfspaces,
    linear_map,
    minkowski_sum,
    prune_hull,
    spectral_norm,
)
from invkit.system import ClosedLoopModel

logger = logging.getLogger(__name__)

VERTEX_CAP = 10_000
ITERATION_CAP = 500
MRPI_TOL = 1e-6
REL_GAP = 0.01


@dataclass
class MrpiIterate:
    """The hull ``D_k`` with its support values on the (normalized) base-set rows.

    ``tail_bound`` is the largest per-row certified gap between the support
    of ``D_k`` and that of the limit set (``inf`` when no certificate is
    available yet). ``invariant_scale`` is the smallest ``alpha`` found with
    ``phi_i (alpha D_k) + D`` inside ``alpha D_k`` for every vertex, which
    puts the limit set inside ``alpha D_k``.
    """

    k: int
    hull: VPolytope
    support_on_F0: np.ndarray
    tail_bound: float = np.inf
    invariant_scale: float = np.inf


class Existence(enum.Enum):
    YES = "yes"
    NO = "no"
    UNDECIDED = "undecided"


@dataclass
class ExistenceReport:
    f_min_lower: float
    f_min_upper: float
    exists: Existence
    k_used: int
    f_tilde: np.ndarray
    phi_max: float = np.nan
    invariant_scale: float = np.inf
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "exists": self.exists.value,
            "f_min_lower": _finite_or_str(self.f_min_lower),
            "f_min_upper": _finite_or_str(self.f_min_upper),
            "k_used": self.k_used,
            "f_tilde": [float(v) for v in self.f_tilde],
            "phi_max": _finite_or_str(self.phi_max),
            "invariant_scale": _finite_or_str(self.invariant_scale),
        }


def _finite_or_str(x):
    x = float(x)
    return x if np.isfinite(x) else str(x)


def phi_max(clm: ClosedLoopModel):
    return max(spectral_norm(p) for p in clm.phi_vertices)


def initial_iterate(clm: ClosedLoopModel) -> MrpiIterate:
    rows = clm.S0.F.shape[0]
    return MrpiIterate(0, VPolytope.origin(clm.n), np.zeros(rows))


def mrpi_hull_step(prev: MrpiIterate, clm: ClosedLoopModel, vertex_cap=VERTEX_CAP) -> MrpiIterate:
    """One step of ``D_k = conv(U_i phi_i D_{k-1}) + D``."""
    images = np.vstack([linear_map(phi, prev.hull).vertices for phi in clm.phi_vertices])
    union = prune_hull(VPolytope(images))
    if union.n_vertices > vertex_cap:
        raise VertexBudgetExceeded(f"{union.n_vertices} vertices at k={prev.k + 1}")
    hull = minkowski_sum(union, clm.D_vertices)
    if hull.n_vertices > vertex_cap:
        raise VertexBudgetExceeded(f"{hull.n_vertices} vertices at k={prev.k + 1}")
    support = np.max(clm.S0.F @ hull.vertices.T, axis=1) if clm.S0.n_rows else np.zeros(0)
    return MrpiIterate(prev.k + 1, hull, support)


def disturbance_radius(clm: ClosedLoopModel):
    """Largest Euclidean norm over the disturbance vertices."""
    return float(np.max(np.linalg.norm(clm.D_vertices.vertices, axis=1)))


def tail_bound(clm: ClosedLoopModel, k, q, phi_max_value=None):
    """Euclidean-norm bound on ``h_{D_inf}(q) - h_{D_k}(q)``.

    ``||q|| * dbar * phi_max**k / (1 - phi_max)``, ``inf`` when ``phi_max >= 1``.
    """
    pm = phi_max(clm) if phi_max_value is None else phi_max_value
    if pm >= 1:
        return np.inf
    return float(np.linalg.norm(q) * disturbance_radius(clm) * pm ** k / (1 - pm))


def invariant_scaling(clm: ClosedLoopModel, omega: VPolytope):
    """Smallest ``alpha >= 1`` making ``alpha * omega`` robustly invariant, or ``inf``.

    For each facet ``a x <= b`` of ``omega`` and each vertex matrix ``phi``,
    ``alpha * (h_{phi omega}(a) - b) + h_D(a) <= 0`` must hold. An invariant
    convex set containing the origin contains every ``D_k``, so
    ``h_{D_inf}(q) <= alpha * h_omega(q)``. Vertex matrices suffice because
    the condition is convex in ``phi``.
    """
    if omega.dim > 1 and not _full_dimensional(omega.vertices):
        return np.inf
    H = hull_halfspaces(omega)
    scale = max(1.0, float(np.max(np.abs(H.f))))
    if np.any(H.f <= 1e-12 * scale):
        return np.inf
    h_D = np.max(H.F @ clm.D_vertices.vertices.T, axis=1)
    alpha = 1.0
    for phi in clm.phi_vertices:
        slack = np.max(H.F @ phi @ omega.vertices.T, axis=1) - H.f + 1e-12 * scale
        if np.any(slack >= 0):
            return np.inf
        alpha = max(alpha, float(np.max(h_D / -slack)))
    return alpha


def _scaled_hull_tail(it: MrpiIterate, clm: ClosedLoopModel):
    alpha = invariant_scaling(clm, it.hull)
    if not np.isfinite(alpha):
        return alpha, np.full(it.support_on_F0.shape, np.inf)
    return alpha, (alpha - 1.0) * np.maximum(it.support_on_F0, 0.0)


def existence_check(clm: ClosedLoopModel, tol=MRPI_TOL, rel_gap=REL_GAP,
                    max_iter=ITERATION_CAP, vertex_cap=VERTEX_CAP) -> ExistenceReport:
    """Decide whether a non-empty admissible robust invariant set exists.

    Brackets ``f_min = min(f0 - zeta_{D_inf}(F0))`` between a certified lower
    value (finite support plus tail bound) and the finite-``k`` upper value.
    Stops with NO once the upper value is negative, with YES once the lower
    value is non-negative and the bracket is narrower than
    ``max(tol, rel_gap * f_min_upper)``, and with UNDECIDED when the support
    increments fall below ``tol`` without a decision.
    """
    f0 = clm.S0.f
    F0 = clm.S0.F
    pm = phi_max(clm)
    it = initial_iterate(clm)
    history = []
    lower, upper = -np.inf, float(np.min(f0)) if f0.size else np.inf
    alpha = np.inf
    decision = None
    while decision is None:
        if it.k >= max_iter:
            if lower >= 0:
                decision = Existence.YES
                break
            raise IterationCapExceeded(f"existence undecided after {max_iter} hull steps")
        nxt = mrpi_hull_step(it, clm, vertex_cap)
        increment = float(np.max(nxt.support_on_F0 - it.support_on_F0)) if f0.size else 0.0
        it = nxt
        if f0.size == 0:
            lower = upper = np.inf
            decision = Existence.YES
            break
        tail_2 = np.array([tail_bound(clm, it.k, q, pm) for q in F0]) if pm < 1 else np.full(f0.shape, np.inf)
        alpha, tail_s = _scaled_hull_tail(it, clm)
        tail = np.minimum(tail_2, tail_s)
        # D = {0}: every iterate is the limit already
        if np.all(clm.D_vertices.vertices == 0):
            tail = np.zeros_like(tail)
        it.tail_bound = float(np.max(tail))
        it.invariant_scale = alpha
        upper = float(np.min(f0 - it.support_on_F0))
        lower = float(np.min(f0 - it.support_on_F0 - tail))
        history.append((it.k, lower, upper, it.hull.n_vertices))
        logger.debug("k=%d f_min in [%g, %g], %d vertices", it.k, lower, upper, it.hull.n_vertices)
        if upper < 0:
            decision = Existence.NO
        elif lower >= 0 and upper - lower <= max(tol, rel_gap * upper):
            decision = Existence.YES
        elif increment < tol:
            decision = Existence.YES if lower >= 0 else Existence.UNDECIDED
    return ExistenceReport(
        f_min_lower=lower,
        f_min_upper=upper,
        exists=decision,
        k_used=it.k,
        f_tilde=f0 - it.support_on_F0,
        phi_max=pm,
        invariant_scale=alpha,
        history=history,
    )
