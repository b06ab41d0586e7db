"""Maximal admissible robust positively invariant set.

``marpi_compute`` is the precursor fixpoint: start from the base set, add
every halfspace of ``Pre(S_hat)`` that cuts the running set (one LP each),
and stop after a pass that adds nothing. ``brute_force_sk`` and
``brute_force_intersection`` build the backward reachable sets explicitly
from the vertex recursion and serve as an independent oracle.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from invkit._parallel import pmap
from invkit.exceptions import EmptySetError, RowCapExceeded
from invkit.geometry import (
    EPS_RED,
    ZERO_ROW_TOL,
    HPolytope,
    LPStatus,
    is_empty,
    remove_redundant_halfspaces,
    solve_lp,
    spectral_norm,
    support_function,
)
from invkit.mrpi import Existence, ExistenceReport, phi_max
from invkit.system import ClosedLoopModel

logger = logging.getLogger(__name__)

EPS_ADD = EPS_RED
MAX_PASSES = 1000
ROW_CAP = 10**6


class Termination(enum.Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"
    EMPTY_SET = "empty_set"


@dataclass
class MarpiResult:
    set: HPolytope
    outer_iterations: int
    halfspaces_added_per_iteration: list
    terminated: Termination
    existence: Optional[ExistenceReport] = None
    iterates: list = field(default_factory=list, repr=False)

    @property
    def passes_with_additions(self):
        return sum(1 for a in self.halfspaces_added_per_iteration if a > 0)

    @property
    def n_halfspaces(self):
        return self.set.n_rows


@dataclass
class BoundParams:
    F_bar: float
    x_bar: float
    phi_max: float
    f_min: float
    N: Optional[int]


def _disturbance_support(F, clm: ClosedLoopModel):
    if F.shape[0] == 0:
        return np.zeros(0)
    return np.max(F @ clm.D_vertices.vertices.T, axis=1)


def _pre_rows(F, f, clm: ClosedLoopModel):
    """Raw precursor rows, vertex index outer and row index inner."""
    tight = f - _disturbance_support(F, clm)
    A = np.vstack([F @ phi for phi in clm.phi_vertices])
    b = np.tile(tight, clm.L)
    return A, b


def pre_set(S: HPolytope, clm: ClosedLoopModel) -> HPolytope:
    """``{x | phi_i x + d in S for every vertex i and every d in D}``."""
    A, b = _pre_rows(S.F, S.f, clm)
    P = HPolytope(A, b)
    if P.is_trivially_empty or (np.any(P.f < 0) and is_empty(P)):
        raise EmptySetError("precursor set is empty")
    return P


def _empty_result(passes, added, iterates, existence):
    n = iterates[0].dim if iterates else 0
    empty = HPolytope(np.zeros((1, n)), [-1.0])
    return MarpiResult(empty, passes, added, Termination.EMPTY_SET, existence, iterates)


def marpi_compute(clm: ClosedLoopModel, max_passes=MAX_PASSES, eps_add=EPS_ADD, eps_red=EPS_RED,
                  final_reduction=True, parallel=False, existence=None) -> MarpiResult:
    """Fixpoint of ``S_hat <- S_hat & Pre(S_hat)`` with LP filtering of candidate rows.

    Within a pass, candidates are tested in order and accepted rows join the
    running set immediately, so later candidates see earlier additions. With
    ``parallel=True`` the candidates of one vertex block are tested against
    the set at block start and accepted rows are committed in index order;
    the converged set is the same.
    """
    S0 = clm.S0
    iterates = [S0]
    added = []
    if S0.is_trivially_empty or is_empty(S0):
        return _empty_result(0, added, iterates, existence)
    F = np.array(S0.F)
    f = np.array(S0.f)
    passes = 0
    while True:
        if passes >= max_passes:
            S = HPolytope(F, f, normalize=False)
            if final_reduction:
                S = remove_redundant_halfspaces(S, eps_red)
            return MarpiResult(S, passes, added, Termination.ITERATION_CAP, existence, iterates)
        passes += 1
        rho0 = F.shape[0]
        A, b = _pre_rows(F, f, clm)
        norms = np.linalg.norm(A, axis=1)
        zero = norms <= ZERO_ROW_TOL
        if np.any(b[zero] < 0):
            added.append(0)
            return _empty_result(passes, added, iterates, existence)
        A, b = A[~zero] / norms[~zero, None], b[~zero] / norms[~zero]

        blocks = np.array_split(np.arange(A.shape[0]), clm.L) if parallel else [np.arange(A.shape[0])]
        for block in blocks:
            if parallel:
                current = HPolytope(F, f, normalize=False)
                gammas = pmap(lambda i: _gamma(A[i], b[i], current), block)
                for i, g in zip(block, gammas):
                    if g is None:
                        added.append(F.shape[0] - rho0)
                        return _empty_result(passes, added, iterates, existence)
                    if g > eps_add:
                        F = np.vstack([F, A[i]])
                        f = np.append(f, b[i])
            else:
                for i in block:
                    g = _gamma(A[i], b[i], HPolytope(F, f, normalize=False))
                    if g is None:
                        added.append(F.shape[0] - rho0)
                        return _empty_result(passes, added, iterates, existence)
                    if g > eps_add:
                        F = np.vstack([F, A[i]])
                        f = np.append(f, b[i])
        n_added = F.shape[0] - rho0
        added.append(n_added)
        current = HPolytope(F, f, normalize=False)
        if is_empty(current):
            return _empty_result(passes, added, iterates, existence)
        iterates.append(current)
        logger.debug("pass %d: %d rows added, %d total", passes, n_added, F.shape[0])
        if n_added == 0:
            break
    S = HPolytope(F, f, normalize=False)
    if final_reduction:
        S = remove_redundant_halfspaces(S, eps_red)
    return MarpiResult(S, passes, added, Termination.CONVERGED, existence, iterates)


def _gamma(alpha, beta, S: HPolytope):
    """``max alpha z - beta`` over ``S``; ``None`` when ``S`` is empty, ``inf`` when unbounded."""
    out = solve_lp(alpha, S, "max")
    if out.status is LPStatus.INFEASIBLE:
        return None
    if out.status is LPStatus.UNBOUNDED:
        return np.inf
    return out.value - beta


def sk_rows(k, clm: ClosedLoopModel, row_cap=ROW_CAP):
    """Raw ``(F_k, f_k)`` of the ``k``-step backward reachable set from the vertex recursion.

    ``F_k = [F_{k-1} phi_1; ...; F_{k-1} phi_L]`` and
    ``f_k = 1_L kron (f_{k-1} - zeta_D(F_{k-1}))``, starting from the
    unnormalized base rows.
    """
    rows0 = clm.F0.shape[0]
    if clm.L ** k * rows0 > row_cap:
        raise RowCapExceeded(f"{clm.L}^{k} * {rows0} rows exceed the cap {row_cap}")
    F, f = np.asarray(clm.F0, dtype=float), np.asarray(clm.f0, dtype=float)
    for _ in range(k):
        F, f = _pre_rows(F, f, clm)
    return F, f


def brute_force_sk(k, clm: ClosedLoopModel, row_cap=ROW_CAP) -> HPolytope:
    F, f = sk_rows(k, clm, row_cap)
    return HPolytope(F, f)


def brute_force_intersection(N, clm: ClosedLoopModel, row_cap=ROW_CAP) -> HPolytope:
    """Irredundant form of the intersection of the backward reachable sets ``0..N``."""
    total = sum(clm.L ** k for k in range(N + 1)) * clm.F0.shape[0]
    if total > row_cap:
        raise RowCapExceeded(f"{total} stacked rows exceed the cap {row_cap}")
    Fs, fs = [], []
    F, f = np.asarray(clm.F0, dtype=float), np.asarray(clm.f0, dtype=float)
    for k in range(N + 1):
        if k:
            F, f = _pre_rows(F, f, clm)
        Fs.append(F)
        fs.append(f)
    P = HPolytope(np.vstack(Fs), np.concatenate(fs))
    return remove_redundant_halfspaces(P)


def state_bound(S0: HPolytope):
    """Upper bound on ``max ||x||_2`` over ``S0``: ``sqrt(n)`` times the largest coordinate magnitude."""
    n = S0.dim
    r = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        r = max(r, abs(support_function(S0, e)), abs(support_function(S0, -e)))
    return math.sqrt(n) * r


def bound_N(clm: ClosedLoopModel, existence: ExistenceReport) -> BoundParams:
    """Number of backward reachable sets that determine the invariant set when ``phi_max < 1``.

    ``N = floor((ln f_min - ln(F_bar x_bar)) / ln phi_max)`` clamped at 0,
    using the certified lower value of ``f_min``; ``N`` is ``None`` when
    ``phi_max >= 1`` or that lower value is not positive.
    """
    if existence.exists is not Existence.YES:
        raise ValueError("the bound needs a certified non-empty invariant set")
    F_bar = spectral_norm(clm.S0.F)
    x_bar = state_bound(clm.S0)
    pm = phi_max(clm)
    f_min = max(float(existence.f_min_lower), 0.0)
    N = None
    if pm < 1 and f_min > 0:
        if pm == 0:
            N = 0
        else:
            ratio = (math.log(f_min) - math.log(F_bar * x_bar)) / math.log(pm)
            N = max(0, math.floor(ratio))
    return BoundParams(F_bar, x_bar, pm, f_min, N)
