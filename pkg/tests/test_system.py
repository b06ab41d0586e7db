import numpy as np
import pytest

from invkit import (
    ClosedLoopModel,
    HPolytope,
    OriginExcluded,
    OutputSpec,
    ShapeMismatch,
    UncertainSystem,
    build_closed_loop,
    build_output_base,
    check_schur_stability,
    example_system,
    with_base_set,
)
from invkit.system import eigen_radius_2x2

BOX2 = np.vstack([np.eye(2), -np.eye(2)])


def small_system(**over):
    kw = dict(n=2, m=1, F_x=BOX2, f_x=np.ones(4), F_u=[[1.0], [-1.0]], f_u=[1.0, 1.0],
              F_d=BOX2, f_d=np.full(4, 0.1), psi_vertices=[np.hstack([0.5 * np.eye(2), [[1.0], [0.0]]])],
              K=[[0.0, 0.0]])
    kw.update(over)
    return UncertainSystem(**kw)


def test_example_first_vertex_matrix():
    clm = build_closed_loop(example_system())
    np.testing.assert_allclose(clm.phi_vertices[0], [[0.7112, 6.8498], [0.03344, -0.48024]], atol=1e-12)


def test_example_base_rows():
    clm = build_closed_loop(example_system())
    assert clm.F0.shape == (6, 2)
    assert clm.L == 3 and clm.n == 2
    np.testing.assert_allclose(clm.F0[4], [-0.1112, -4.8498])


def test_zero_gain_keeps_open_loop_and_drops_input_rows():
    clm = build_closed_loop(small_system())
    np.testing.assert_allclose(clm.phi_vertices[0], 0.5 * np.eye(2))
    assert clm.F0.shape[0] == 6
    assert clm.S0.n_rows == 4


def test_rebuild_bit_identical():
    a = build_closed_loop(example_system())
    b = build_closed_loop(example_system())
    for p, q in zip(a.phi_vertices, b.phi_vertices):
        assert np.array_equal(p, q)
    assert np.array_equal(a.F0, b.F0) and np.array_equal(a.f0, b.f0)


def test_dynamics_shapes():
    clm = build_closed_loop(example_system())
    lam = np.array([0.2, 0.5, 0.3])
    phi = sum(l * p for l, p in zip(lam, clm.phi_vertices))
    x = phi @ np.ones(2) + clm.D_vertices.vertices[0]
    assert x.shape == (2,)


def test_negative_offset_rejected():
    with pytest.raises(OriginExcluded):
        small_system(f_x=[1.0, 1.0, -0.1, 1.0])


def test_shape_errors():
    with pytest.raises(ShapeMismatch):
        small_system(psi_vertices=[np.eye(2)])
    with pytest.raises(ShapeMismatch):
        small_system(K=[[1.0, 2.0, 3.0]])
    with pytest.raises(ShapeMismatch):
        small_system(psi_vertices=[])


def test_disturbance_vertices_enumerated():
    s = small_system()
    assert s.D_vertices.shape == (4, 2)


def test_output_base_reduces_to_state_rows():
    s = example_system()
    out = OutputSpec(np.eye(2), np.zeros((2, 1)), s.F_x, s.f_x)
    P = build_output_base(s, out)
    np.testing.assert_allclose(P.F, HPolytope(s.F_x, s.f_x).F)


def test_output_base_with_input_rows():
    s = example_system()
    out = OutputSpec(np.eye(2), np.zeros((2, 1)), s.F_x, s.f_x)
    assert build_output_base(s, out, include_input=True).n_rows == 6


def test_output_base_random_matches_dense_product():
    rng = np.random.default_rng(0)
    s = example_system()
    C, Dm = rng.normal(size=(2, 2)), rng.normal(size=(2, 1))
    Fy, fy = rng.normal(size=(3, 2)), rng.uniform(1, 2, size=3)
    P = build_output_base(s, OutputSpec(C, Dm, Fy, fy))
    raw = np.array([[sum(Fy[i, k] * (C[k, j] + Dm[k, 0] * s.K[0, j]) for k in range(2)) for j in range(2)]
                    for i in range(3)])
    norms = np.linalg.norm(raw, axis=1)
    np.testing.assert_allclose(P.F, raw / norms[:, None], atol=1e-12)
    np.testing.assert_allclose(P.f, fy / norms, atol=1e-12)


def test_output_base_without_rows_is_whole_space():
    s = example_system()
    P = build_output_base(s, OutputSpec(np.eye(2), np.zeros((2, 1)), np.zeros((0, 2)), np.zeros(0)))
    assert P.n_rows == 0


def test_output_base_shape_mismatch():
    s = example_system()
    with pytest.raises(ShapeMismatch):
        build_output_base(s, OutputSpec(np.eye(3), np.zeros((3, 1)), np.eye(3), np.ones(3)))


def test_with_base_set():
    clm = build_closed_loop(example_system())
    c2 = with_base_set(clm, HPolytope.box(5.0, 2))
    assert c2.S0.n_rows == 4
    assert all(np.array_equal(a, b) for a, b in zip(c2.phi_vertices, clm.phi_vertices))


def test_from_matrices_singleton_disturbance():
    clm = ClosedLoopModel.from_matrices([np.eye(2) * 0.5], HPolytope.box(1.0, 2), np.zeros((1, 2)))
    assert clm.D.contains(np.zeros(2)) and not clm.D.contains(np.array([1e-3, 0.0]))


class TestStability:
    def _clm(self, phi):
        return ClosedLoopModel.from_matrices([phi], HPolytope.box(1.0, 2), np.zeros((1, 2)))

    def test_zero(self):
        rep = check_schur_stability(self._clm(np.zeros((2, 2))))
        assert rep.radii == [0.0] and rep.all_schur and not rep.warnings

    def test_identity_warns(self):
        rep = check_schur_stability(self._clm(np.eye(2)))
        assert rep.radii[0] == pytest.approx(1.0) and rep.warnings

    def test_example_vertices_schur(self):
        rep = check_schur_stability(build_closed_loop(example_system()))
        assert rep.all_schur
        for phi, r in zip(build_closed_loop(example_system()).phi_vertices, rep.radii):
            assert r == pytest.approx(np.max(np.abs(np.linalg.eigvals(phi))), rel=1e-12)

    def test_complex_pair(self):
        assert eigen_radius_2x2([[0.0, -0.5], [0.5, 0.0]]) == pytest.approx(0.5)

    def test_higher_dimension_uses_norm_bound(self):
        phi = np.diag([0.5, 0.2, 0.1])
        clm = ClosedLoopModel.from_matrices([phi], HPolytope.box(1.0, 3), np.zeros((1, 3)))
        assert check_schur_stability(clm).radii[0] == pytest.approx(0.5)


def test_from_matrices_segment_disturbance():
    clm = ClosedLoopModel.from_matrices([np.eye(2) * 0.5], HPolytope.box(1.0, 2), [[2.0, 1.0], [-2.0, 1.0]])
    assert clm.D.contains(np.array([0.5, 1.0]))
    assert not clm.D.contains(np.array([0.5, 1.1])) and not clm.D.contains(np.array([2.1, 1.0]))


def test_from_matrices_flat_polygon_in_space():
    pts = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]
    clm = ClosedLoopModel.from_matrices([np.eye(3) * 0.5], HPolytope.box(3.0, 3), pts)
    assert clm.D.contains(np.array([0.2, 0.2, 1.0]))
    assert not clm.D.contains(np.array([0.6, 0.6, 1.0])) and not clm.D.contains(np.array([0.2, 0.2, 1.01]))
