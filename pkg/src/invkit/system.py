"""Uncertain linear systems and their closed-loop autonomous form.

The plant ``x+ = A x + B u + d`` has ``[A B]`` in the convex hull of ``L``
vertex matrices and ``d`` in a disturbance polytope. Under ``u = K x`` the
closed loop is ``x+ = phi x + d`` with ``phi`` in the hull of
``A_i + B_i K``, and the admissible base set is ``{x | x in X, K x in U}``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from invkit.exceptions import OriginExcluded, ShapeMismatch
from invkit.geometry import HPolytope, VPolytope, enumerate_vertices, spectral_norm

logger = logging.getLogger(__name__)


def _matrix(a, name, shape=None):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} must be a matrix")
    if shape is not None:
        for got, want in zip(a.shape, shape):
            if want is not None and got != want:
                raise ShapeMismatch(f"{name} has shape {a.shape}, expected {shape}")
    return a


def _vector(a, name, size):
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size != size:
        raise ShapeMismatch(f"{name} has {a.size} entries, expected {size}")
    return a


def _origin_inside(f, name):
    if np.any(f < 0):
        raise OriginExcluded(f"{name} has negative offsets, so the set excludes the origin")


@dataclass
class UncertainSystem:
    """Problem data: constraint sets, parameter vertices ``psi_i = [A_i B_i]`` and gain ``K``.

    ``D_vertices`` is filled in from ``(F_d, f_d)`` when not given.
    """

    n: int
    m: int
    F_x: np.ndarray
    f_x: np.ndarray
    F_u: np.ndarray
    f_u: np.ndarray
    F_d: np.ndarray
    f_d: np.ndarray
    psi_vertices: list
    K: np.ndarray
    D_vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        n, m = int(self.n), int(self.m)
        if n < 1 or m < 0:
            raise ShapeMismatch("need n >= 1 and m >= 0")
        self.n, self.m = n, m
        self.F_x = _matrix(self.F_x, "F_x", (None, n)) if np.size(self.F_x) else np.zeros((0, n))
        self.f_x = _vector(self.f_x, "f_x", self.F_x.shape[0])
        self.F_u = _matrix(self.F_u, "F_u", (None, m)) if np.size(self.F_u) else np.zeros((0, m))
        self.f_u = _vector(self.f_u, "f_u", self.F_u.shape[0])
        self.F_d = _matrix(self.F_d, "F_d", (None, n))
        self.f_d = _vector(self.f_d, "f_d", self.F_d.shape[0])
        if len(self.psi_vertices) < 1:
            raise ShapeMismatch("need at least one parameter vertex")
        self.psi_vertices = [_matrix(p, f"psi[{i}]", (n, n + m)) for i, p in enumerate(self.psi_vertices)]
        self.K = _matrix(self.K, "K", (m, n)) if m else np.zeros((0, n))
        for f, name in ((self.f_x, "X"), (self.f_u, "U"), (self.f_d, "D")):
            _origin_inside(f, name)
        if self.D_vertices is None:
            self.D_vertices = enumerate_vertices(self.D).vertices
        else:
            self.D_vertices = _matrix(self.D_vertices, "D_vertices", (None, n))

    @property
    def L(self):
        return len(self.psi_vertices)

    @property
    def X(self):
        return HPolytope(self.F_x, self.f_x)

    @property
    def U(self):
        return HPolytope(self.F_u, self.f_u)

    @property
    def D(self):
        return HPolytope(self.F_d, self.f_d)


@dataclass
class OutputSpec:
    """Output ``y = C x + Dmat u`` constrained to ``{y | F_y y <= f_y}``."""

    C: np.ndarray
    Dmat: np.ndarray
    F_y: np.ndarray
    f_y: np.ndarray

    def __post_init__(self):
        self.C = _matrix(self.C, "C")
        o = self.C.shape[0]
        self.Dmat = _matrix(self.Dmat, "Dmat", (o, None))
        self.F_y = np.asarray(self.F_y, dtype=float).reshape(-1, o)
        self.f_y = _vector(self.f_y, "f_y", self.F_y.shape[0])


@dataclass
class ClosedLoopModel:
    """Autonomous model ``x+ = phi x + d``: vertex matrices, base set and disturbance."""

    phi_vertices: tuple
    F0: np.ndarray
    f0: np.ndarray
    D: HPolytope
    D_vertices: VPolytope
    S0: HPolytope = field(init=False)

    def __post_init__(self):
        self.phi_vertices = tuple(np.asarray(p, dtype=float) for p in self.phi_vertices)
        self.S0 = HPolytope(self.F0, self.f0)

    @property
    def n(self):
        return self.F0.shape[1]

    @property
    def L(self):
        return len(self.phi_vertices)

    @classmethod
    def from_matrices(cls, phi_vertices, S0: HPolytope, D_vertices):
        """Build directly from closed-loop data; ``D_vertices`` are points of the disturbance set."""
        Dv = VPolytope(D_vertices)
        if S0.dim != Dv.dim:
            raise ShapeMismatch("S0 and disturbance dimensions differ")
        from invkit.geometry import hull_halfspaces, _full_dimensional

        if Dv.dim > 1 and not _full_dimensional(Dv.vertices):
            D = _degenerate_hrep(Dv)
        else:
            D = hull_halfspaces(Dv)
        return cls(phi_vertices, np.asarray(S0.F), np.asarray(S0.f), D, Dv)


def _degenerate_hrep(Dv: VPolytope):
    """Halfspaces of a flat point set: two-sided rows for the affine hull plus the hull inside it."""
    from invkit.geometry import hull_halfspaces

    pts = Dv.vertices
    c = pts.mean(axis=0)
    _, sv, Vt = np.linalg.svd(pts - c)
    tol = 1e-10 * max(1.0, float(np.abs(pts).max()))
    r = int(np.sum(sv > tol))
    basis, normal = Vt[:r], Vt[r:]
    F = [normal, -normal]
    f = [normal @ c, -(normal @ c)]
    if r:
        local = (pts - c) @ basis.T
        if r == 1:
            G, g = np.array([[1.0], [-1.0]]), np.array([local.max(), -local.min()])
        else:
            H = hull_halfspaces(VPolytope(local))
            G, g = H.F, H.f
        F.append(G @ basis)
        f.append(g + G @ basis @ c)
    return HPolytope(np.vstack(F), np.concatenate(f))


def build_closed_loop(sys: UncertainSystem) -> ClosedLoopModel:
    """``phi_i = A_i + B_i K`` and ``S0 = {x | [F_x; F_u K] x <= [f_x; f_u]}``."""
    n = sys.n
    phis = [psi[:, :n] + psi[:, n:] @ sys.K for psi in sys.psi_vertices]
    F0 = np.vstack([sys.F_x, sys.F_u @ sys.K])
    f0 = np.concatenate([sys.f_x, sys.f_u])
    _origin_inside(f0, "S0")
    return ClosedLoopModel(tuple(phis), F0, f0, sys.D, VPolytope(sys.D_vertices))


def build_output_base(sys: UncertainSystem, out: OutputSpec, include_input=False) -> HPolytope:
    """Base set for output constraints: ``F_y (C + Dmat K) x <= f_y``, optionally with ``F_u K x <= f_u``."""
    if out.C.shape[1] != sys.n or out.Dmat.shape[1] != sys.m:
        raise ShapeMismatch("output matrices incompatible with the system dimensions")
    F0 = out.F_y @ (out.C + out.Dmat @ sys.K)
    f0 = out.f_y
    if include_input:
        F0 = np.vstack([F0, sys.F_u @ sys.K])
        f0 = np.concatenate([f0, sys.f_u])
    _origin_inside(f0, "output base set")
    return HPolytope(F0, f0)


def with_base_set(clm: ClosedLoopModel, S0: HPolytope) -> ClosedLoopModel:
    """Same dynamics and disturbance, different admissible base set."""
    return ClosedLoopModel(clm.phi_vertices, np.asarray(S0.F), np.asarray(S0.f), clm.D, clm.D_vertices)


def eigen_radius_2x2(M):
    """Spectral radius of a 2x2 matrix from the roots of its characteristic polynomial."""
    M = np.asarray(M, dtype=float)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = tr * tr / 4 - det
    if disc >= 0:
        r = np.sqrt(disc)
        return float(max(abs(tr / 2 + r), abs(tr / 2 - r)))
    return float(np.sqrt(det))


@dataclass
class StabilityReport:
    radii: list
    norms: list
    warnings: list

    @property
    def all_schur(self):
        return all(r < 1 for r in self.radii)


def check_schur_stability(clm: ClosedLoopModel) -> StabilityReport:
    """Per-vertex spectral radii and 2-norms; warns, never raises.

    Vertex-wise Schur stability is necessary but not sufficient for a
    quadratically stabilizing gain, so this is a sanity check only. The
    radius is exact for ``n = 2``; in other dimensions the 2-norm stands in
    as an upper bound, so a warning there may be conservative.
    """
    radii, norms, warns = [], [], []
    for i, phi in enumerate(clm.phi_vertices):
        nrm = spectral_norm(phi)
        r = eigen_radius_2x2(phi) if clm.n == 2 else nrm
        radii.append(r)
        norms.append(nrm)
        if r >= 1:
            msg = f"vertex {i}: spectral radius {r:.6g} >= 1"
            warns.append(msg)
            logger.warning(msg)
    return StabilityReport(radii, norms, warns)


def example_system() -> UncertainSystem:
    """Second-order system with three parameter vertices, used in tests and demos.

    Box constraints ``|x|_inf <= 100``, ``|u| <= 100``, ``|d|_inf <= 2``.
    """
    psi = [
        [[0.6, 2.0, -1.0], [-0.1, -6.3, -1.2]],
        [[0.9, 2.11, 2.5], [-0.13, -5.2, -0.96]],
        [[-0.3, 2.05, 0.0], [-0.12, -4.12, -1.0]],
    ]
    box2 = np.vstack([np.eye(2), -np.eye(2)])
    return UncertainSystem(
        n=2, m=1,
        F_x=box2, f_x=np.full(4, 100.0),
        F_u=np.array([[1.0], [-1.0]]), f_u=np.full(2, 100.0),
        F_d=box2, f_d=np.full(4, 2.0),
        psi_vertices=psi,
        K=[[-0.1112, -4.8498]],
    )
