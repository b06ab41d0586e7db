"""Polytopes in halfspace and vertex form, and the LP-backed operations on them.

Halfspace polytopes ``{x | F x <= f}`` are normalized on construction so that
every row of ``F`` has unit Euclidean norm; all geometric tolerances below are
therefore scale free.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from invkit._parallel import pmap
from invkit.exceptions import EmptySetError, NumericalFailure, ShapeMismatch, UnboundedError

logger = logging.getLogger(__name__)

LP_TOL = 1e-9
EPS_RED = 1e-7
EPS_SUB = 1e-7
ZERO_ROW_TOL = 1e-12

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": LP_TOL,
    "dual_feasibility_tolerance": LP_TOL,
}


class HPolytope:
    """Intersection of halfspaces ``{x | F x <= f}``.

    Parameters
    ----------
    F : array_like, shape (m, n)
        Constraint normals, one halfspace per row.
    f : array_like, shape (m,)
        Offsets.
    normalize : bool
        Scale rows to unit norm. Zero rows with a non-negative offset are
        trivially satisfied and dropped; a zero row with a negative offset
        makes the polytope empty (``is_trivially_empty``) and is kept.
    """

    def __init__(self, F, f, normalize=True):
        F = np.atleast_2d(np.asarray(F, dtype=float))
        f = np.asarray(f, dtype=float).reshape(-1)
        if F.shape[0] != f.shape[0]:
            raise ShapeMismatch(f"F has {F.shape[0]} rows but f has {f.shape[0]} entries")
        norms = np.linalg.norm(F, axis=1)
        zero = norms <= ZERO_ROW_TOL
        self.is_trivially_empty = bool(np.any(f[zero] < 0))
        if normalize and F.shape[0] > 0:
            # an infeasible zero row is kept so the emptiness survives serialization
            keep = ~zero | (f < 0)
            norms = np.where(zero, 1.0, norms)
            F = F[keep] / norms[keep, None]
            f = f[keep] / norms[keep]
        F.setflags(write=False)
        f.setflags(write=False)
        self.F = F
        self.f = f
        self.dim = F.shape[1]

    @classmethod
    def from_bounds(cls, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        n = lower.size
        return cls(np.vstack([np.eye(n), -np.eye(n)]), np.concatenate([upper, -lower]))

    @classmethod
    def box(cls, radius, dim):
        """The infinity-norm ball ``{x | ||x||_inf <= radius}``."""
        r = np.broadcast_to(np.asarray(radius, dtype=float), (dim,))
        return cls.from_bounds(-r, r)

    @classmethod
    def whole_space(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def n_rows(self):
        return self.F.shape[0]

    def contains(self, x, tol=EPS_SUB):
        """Membership test; ``x`` may be a single point or an array of points (one per row)."""
        x = np.asarray(x, dtype=float)
        if self.is_trivially_empty:
            return np.zeros(x.shape[:-1], dtype=bool) if x.ndim > 1 else False
        viol = x @ self.F.T - self.f
        if x.ndim == 1:
            return bool(np.all(viol <= tol))
        return np.all(viol <= tol, axis=-1)

    def intersect(self, other):
        _check_dims(self.dim, other.dim)
        out = HPolytope(np.vstack([self.F, other.F]), np.concatenate([self.f, other.f]), normalize=False)
        out.is_trivially_empty = self.is_trivially_empty or other.is_trivially_empty
        return out

    def scale(self, alpha):
        """The set ``alpha * P`` (``alpha > 0``)."""
        out = HPolytope(self.F.copy(), alpha * self.f, normalize=False)
        out.is_trivially_empty = self.is_trivially_empty
        return out

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, rows={self.n_rows})"


class VPolytope:
    """Convex hull of a finite, non-empty list of points (one per row)."""

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.shape[0] == 0:
            raise ValueError("a VPolytope needs at least one vertex")
        V.setflags(write=False)
        self.vertices = V
        self.dim = V.shape[1]

    @classmethod
    def origin(cls, dim):
        return cls(np.zeros((1, dim)))

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    def __repr__(self):
        return f"VPolytope(dim={self.dim}, vertices={self.n_vertices})"


Polytope = Union[HPolytope, VPolytope]


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPOutcome:
    status: LPStatus
    value: Optional[float] = None
    point: Optional[np.ndarray] = None


def _check_dims(a, b):
    if a != b:
        raise ShapeMismatch(f"dimension mismatch: {a} vs {b}")


def _highs(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=(None, None)):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=_HIGHS_OPTIONS)
    if res.status == 2:
        # presolve occasionally reports unbounded problems as infeasible; confirm without it
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method="highs", options={**_HIGHS_OPTIONS, "presolve": False})
    if res.status == 0:
        return LPStatus.OPTIMAL, res
    if res.status in (2, 3):
        if "infeasible or unbounded" in res.message.lower():
            probe = linprog(np.zeros_like(c), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                            bounds=bounds, method="highs", options=_HIGHS_OPTIONS)
            if probe.status == 2:
                return LPStatus.INFEASIBLE, res
            if probe.status == 0:
                return LPStatus.UNBOUNDED, res
            raise NumericalFailure(probe.message)
        return (LPStatus.INFEASIBLE if res.status == 2 else LPStatus.UNBOUNDED), res
    raise NumericalFailure(f"LP solver status {res.status}: {res.message}")


def solve_lp(objective, constraints: HPolytope, sense="max") -> LPOutcome:
    """Optimize ``objective @ x`` over ``constraints``.

    Returns an :class:`LPOutcome`; raises :class:`NumericalFailure` when the
    solver cannot certify any of the three outcomes.
    """
    c = np.asarray(objective, dtype=float).reshape(-1)
    _check_dims(c.size, constraints.dim)
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    if constraints.is_trivially_empty:
        return LPOutcome(LPStatus.INFEASIBLE)
    sign = -1.0 if sense == "max" else 1.0
    if constraints.n_rows == 0:
        if np.any(c != 0):
            return LPOutcome(LPStatus.UNBOUNDED)
        return LPOutcome(LPStatus.OPTIMAL, 0.0, np.zeros(c.size))
    status, res = _highs(sign * c, constraints.F, constraints.f)
    if status is not LPStatus.OPTIMAL:
        return LPOutcome(status)
    x = np.asarray(res.x, dtype=float)
    return LPOutcome(LPStatus.OPTIMAL, float(c @ x), x)


def is_empty(P: HPolytope):
    return solve_lp(np.zeros(P.dim), P).status is LPStatus.INFEASIBLE


def support_function(P: Polytope, q):
    """``sup_{p in P} q @ p``; a vertex maximum for V-polytopes, an LP for H-polytopes."""
    q = np.asarray(q, dtype=float).reshape(-1)
    _check_dims(q.size, P.dim)
    if isinstance(P, VPolytope):
        return float(np.max(P.vertices @ q))
    out = solve_lp(q, P, "max")
    if out.status is LPStatus.UNBOUNDED:
        raise UnboundedError(f"polytope unbounded in direction {q}")
    if out.status is LPStatus.INFEASIBLE:
        raise EmptySetError("support function of an empty set")
    return out.value


def zeta(P: Polytope, V):
    """Stack of support values of ``P`` at every row of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[0] == 0:
        return np.zeros(0)
    _check_dims(V.shape[1], P.dim)
    if isinstance(P, VPolytope):
        return np.max(V @ P.vertices.T, axis=1)
    return np.array(pmap(lambda q: support_function(P, q), V))


def _unique_rows(X, decimals=None):
    """Unique rows in first-seen order; with ``decimals`` compare after rounding."""
    keys = X if decimals is None else np.round(X, decimals) + 0.0
    _, idx = np.unique(keys, axis=0, return_index=True)
    return X[np.sort(idx)]


def linear_map(M, P: VPolytope) -> VPolytope:
    """Image ``M P`` of a vertex polytope (exact duplicates merged)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _check_dims(M.shape[1], P.dim)
    return VPolytope(_unique_rows(P.vertices @ M.T))


def minkowski_sum(P: VPolytope, Q: VPolytope, method="auto") -> VPolytope:
    _check_dims(P.dim, Q.dim)
    sums = (P.vertices[:, None, :] + Q.vertices[None, :, :]).reshape(-1, P.dim)
    return prune_hull(VPolytope(sums), method=method)


def in_hull(point, vertices):
    """LP membership test: is ``point`` a convex combination of ``vertices``?"""
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    p = np.asarray(point, dtype=float).reshape(-1)
    k = V.shape[0]
    A_eq = np.vstack([V.T, np.ones((1, k))])
    b_eq = np.concatenate([p, [1.0]])
    status, _ = _highs(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=(0, None))
    return status is LPStatus.OPTIMAL


def _full_dimensional(X):
    if X.shape[0] <= X.shape[1]:
        return False
    centered = X - X.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return s[-1] > 1e-9 * max(1.0, s[0])


def prune_hull(P: VPolytope, method="auto") -> VPolytope:
    """Drop every point that is a convex combination of the others.

    ``method="lp"`` runs one LP membership test per point against the points
    still kept. ``"auto"`` uses Qhull when the point cloud is full
    dimensional (much faster for long recursions) and falls back to the LP
    sweep otherwise.
    """
    scale = max(1.0, float(np.max(np.abs(P.vertices))))
    X = _unique_rows(P.vertices / scale, decimals=12) * scale
    n = P.dim
    if X.shape[0] <= 1:
        return VPolytope(X)
    if n == 1:
        return VPolytope(_unique_rows(np.array([X.min(axis=0), X.max(axis=0)])))
    if method == "auto" and _full_dimensional(X):
        try:
            hull = ConvexHull(X)
            return VPolytope(X[np.sort(hull.vertices)])
        except QhullError:
            logger.debug("qhull failed, falling back to LP pruning")
    elif method not in ("auto", "lp"):
        raise ValueError(f"unknown pruning method {method!r}")
    keep = list(range(X.shape[0]))
    for i in range(X.shape[0]):
        others = [j for j in keep if j != i]
        if others and in_hull(X[i], X[others]):
            keep.remove(i)
    return VPolytope(X[keep])


def hull_halfspaces(P: VPolytope) -> HPolytope:
    """Facet description of a full-dimensional vertex polytope (via Qhull)."""
    X = prune_hull(P).vertices
    if X.shape[1] == 1:
        return HPolytope([[1.0], [-1.0]], [X.max(), -X.min()])
    if not _full_dimensional(X):
        raise ValueError("hull_halfspaces needs a full-dimensional point set")
    eq = ConvexHull(X).equations
    return HPolytope(eq[:, :-1], -eq[:, -1])


def bounding_box(P: HPolytope):
    """Coordinate-wise ``(lower, upper)`` bounds from ``2n`` LPs."""
    n = P.dim
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        hi[i] = support_function(P, e)
        lo[i] = -support_function(P, -e)
    return lo, hi


def enumerate_vertices(P: HPolytope, max_combinations=500_000) -> VPolytope:
    """Vertices of a bounded H-polytope by testing every ``n``-subset of active rows.

    Meant for small sets (disturbance polytopes); works for lower-dimensional
    polytopes such as ``{0}`` too.
    """
    from itertools import combinations
    from math import comb

    if P.is_trivially_empty or is_empty(P):
        raise EmptySetError("cannot enumerate vertices of an empty polytope")
    bounding_box(P)  # raises UnboundedError
    n, m = P.dim, P.n_rows
    if comb(m, n) > max_combinations:
        raise ValueError(f"{comb(m, n)} row subsets exceed max_combinations={max_combinations}")
    pts = []
    for rows in combinations(range(m), n):
        A = P.F[list(rows)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, P.f[list(rows)])
        if np.all(P.F @ x <= P.f + 1e-9):
            pts.append(x)
    if not pts:
        raise NumericalFailure("no vertex found for a bounded non-empty polytope")
    return prune_hull(VPolytope(np.array(pts)))


def remove_redundant_halfspaces(P: HPolytope, eps=EPS_RED) -> HPolytope:
    """Irredundant description of the same set.

    Row ``i`` is dropped when ``max F_i x - f_i`` over the remaining rows is
    ``<= eps``; ties are dropped as weakly redundant.
    """
    if P.is_trivially_empty or is_empty(P):
        raise EmptySetError("cannot reduce an empty polytope")
    F, f = np.asarray(P.F), np.asarray(P.f)
    if F.shape[0] == 0:
        return P

    # identical normals: keep the tightest offset
    keys = np.round(F, 12) + 0.0
    order = np.lexsort((f, *keys.T))
    _, first = np.unique(keys[order], axis=0, return_index=True)
    idx = np.sort(order[first])
    F, f = F[idx], f[idx]

    # rows strictly inactive on a bounding box of P can all go at once
    if F.shape[0] > 2 * P.dim:
        try:
            lo, hi = bounding_box(HPolytope(F, f, normalize=False))
        except UnboundedError:
            pass
        else:
            mid, half = (lo + hi) / 2, (hi - lo) / 2
            h_box = F @ mid + np.abs(F) @ half
            inactive = h_box < f - 1e-9 * np.maximum(1.0, np.abs(f))
            F, f = F[~inactive], f[~inactive]

    keep = np.ones(F.shape[0], dtype=bool)
    for i in range(F.shape[0]):
        keep[i] = False
        rest = HPolytope(F[keep], f[keep], normalize=False)
        out = solve_lp(F[i], rest, "max")
        if out.status is LPStatus.UNBOUNDED:
            keep[i] = True
        elif out.status is LPStatus.OPTIMAL:
            keep[i] = out.value - f[i] > eps
        else:
            raise NumericalFailure("relaxing a row of a non-empty polytope made it infeasible")
    return HPolytope(F[keep], f[keep], normalize=False)


def is_subset(P: HPolytope, Q: HPolytope, eps=EPS_SUB):
    """True iff ``P`` is contained in ``Q`` up to slack ``eps`` per halfspace of ``Q``."""
    _check_dims(P.dim, Q.dim)
    if P.is_trivially_empty or is_empty(P):
        return True
    if Q.is_trivially_empty:
        return False
    if Q.n_rows == 0:
        return True
    h = zeta(P, Q.F)
    return bool(np.all(h <= Q.f + eps))


def same_set(P: HPolytope, Q: HPolytope, eps=EPS_SUB):
    """Mutual containment."""
    return is_subset(P, Q, eps) and is_subset(Q, P, eps)


def spectral_norm(M, rtol=1e-10, max_iter=100_000):
    """Induced 2-norm by power iteration on ``M^T M``.

    Starts from the normalized all-ones vector; a second start at the
    coordinate axis of the largest column of ``M`` guards against the first
    one being orthogonal to the top singular vector.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    G = M.T @ M
    n = G.shape[0]
    if not np.any(G):
        return 0.0
    starts = [np.ones(n) / np.sqrt(n)]
    e = np.zeros(n)
    e[int(np.argmax(np.diag(G)))] = 1.0
    starts.append(e)
    best = 0.0
    for v in starts:
        lam = float(v @ G @ v)
        for _ in range(max_iter):
            w = G @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                lam = 0.0
                break
            v = w / nw
            new = float(v @ G @ v)
            if abs(new - lam) <= rtol * abs(new):
                lam = new
                break
            lam = new
        best = max(best, lam)
    return float(np.sqrt(best))


def polygon_vertices(P: HPolytope):
    """Counter-clockwise boundary vertices of a bounded 2-D H-polytope.

    Facets of the irredundant description are sorted by normal angle and
    adjacent pairs intersected.
    """
    if P.dim != 2:
        raise ShapeMismatch("polygon_vertices needs a 2-D polytope")
    R = remove_redundant_halfspaces(P)
    ang = np.arctan2(R.F[:, 1], R.F[:, 0])
    order = np.argsort(ang)
    F, f = R.F[order], R.f[order]
    pts = []
    for i in range(F.shape[0]):
        j = (i + 1) % F.shape[0]
        A = np.vstack([F[i], F[j]])
        if abs(np.linalg.det(A)) < 1e-14:
            continue
        pts.append(np.linalg.solve(A, [f[i], f[j]]))
    return np.array(pts)


def polygon_order(P: VPolytope):
    """Hull vertices of a 2-D point set in counter-clockwise order."""
    if P.dim != 2:
        raise ShapeMismatch("polygon_order needs 2-D points")
    X = prune_hull(P).vertices
    c = X.mean(axis=0)
    return X[np.argsort(np.arctan2(X[:, 1] - c[1], X[:, 0] - c[0]))]
