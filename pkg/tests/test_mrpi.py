import numpy as np
import pytest

from invkit import (
    ClosedLoopModel,
    Existence,
    HPolytope,
    IterationCapExceeded,
    VertexBudgetExceeded,
    build_closed_loop,
    example_system,
    existence_check,
    initial_iterate,
    mrpi_hull_step,
    support_function,
    tail_bound,
)
from invkit.mrpi import invariant_scaling, phi_max

import oracles

BOXV = np.array([[a, b] for a in (-1.0, 1.0) for b in (-1.0, 1.0)])


def test_first_step_is_disturbance_set(worked_clm):
    it = mrpi_hull_step(initial_iterate(worked_clm), worked_clm)
    assert it.k == 1
    assert {tuple(v) for v in it.hull.vertices} == {tuple(v) for v in worked_clm.D_vertices.vertices}


def test_zero_dynamics_fix_the_hull():
    clm = ClosedLoopModel.from_matrices([np.zeros((2, 2))], HPolytope.box(5.0, 2), BOXV)
    it = initial_iterate(clm)
    for _ in range(4):
        it = mrpi_hull_step(it, clm)
        assert {tuple(v) for v in it.hull.vertices} == {tuple(v) for v in BOXV}


def test_second_step_supports_grow(worked_clm):
    it1 = mrpi_hull_step(initial_iterate(worked_clm), worked_clm)
    it2 = mrpi_hull_step(it1, worked_clm)
    for q in worked_clm.S0.F:
        assert support_function(it2.hull, q) > support_function(it1.hull, q)
    np.testing.assert_allclose(it2.support_on_F0, [support_function(it2.hull, q) for q in worked_clm.S0.F])


def test_vertex_cap(worked_clm):
    it = initial_iterate(worked_clm)
    with pytest.raises(VertexBudgetExceeded):
        for _ in range(10):
            it = mrpi_hull_step(it, worked_clm, vertex_cap=5)


def test_tail_closed_form():
    clm = ClosedLoopModel.from_matrices([0.5 * np.eye(2)], HPolytope.box(5.0, 2), [[2.0, 0.0], [-2.0, 0.0]])
    assert tail_bound(clm, 1, np.array([1.0, 0.0])) == pytest.approx(2.0)
    vals = [tail_bound(clm, k, np.array([1.0, 0.0])) for k in range(10)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_tail_infinite_when_not_contractive(worked_clm):
    assert phi_max(worked_clm) > 1
    assert tail_bound(worked_clm, 5, np.array([1.0, 0.0])) == np.inf


@pytest.mark.parametrize("seed", range(4))
def test_tail_covers_later_iterates(seed):
    clm, _, _ = oracles.random_stable_instance(np.random.default_rng(50 + seed))
    its = [initial_iterate(clm)]
    for _ in range(12):
        its.append(mrpi_hull_step(its[-1], clm))
    for q in np.random.default_rng(seed).normal(size=(10, 2)):
        for k in range(7):
            assert support_function(its[k + 5].hull, q) <= support_function(its[k].hull, q) + tail_bound(clm, k, q)


def test_invariant_scaling_encloses_limit(worked_clm):
    it = initial_iterate(worked_clm)
    for _ in range(30):
        it = mrpi_hull_step(it, worked_clm)
    alpha = invariant_scaling(worked_clm, it.hull)
    assert 1.0 <= alpha < 1.1
    far = it
    for _ in range(30):
        far = mrpi_hull_step(far, worked_clm)
    for q in worked_clm.S0.F:
        assert support_function(far.hull, q) <= alpha * support_function(it.hull, q) + 1e-9


def test_no_disturbance_is_yes_with_base_offsets():
    clm = ClosedLoopModel.from_matrices([0.5 * np.eye(2)], HPolytope.box(3.0, 2), np.zeros((1, 2)))
    rep = existence_check(clm)
    assert rep.exists is Existence.YES
    assert rep.f_min_lower == pytest.approx(3.0) and rep.f_min_upper == pytest.approx(3.0)


def test_worked_example_yes(worked_clm):
    rep = existence_check(worked_clm)
    assert rep.exists is Existence.YES
    assert 0 <= rep.f_min_lower <= rep.f_min_upper
    assert all(lo <= up for _, lo, up, _ in rep.history)
    assert np.isfinite(rep.invariant_scale)


def test_scaled_disturbance_no_after_one_step(worked_system):
    s = worked_system
    from invkit.system import UncertainSystem

    big = UncertainSystem(s.n, s.m, s.F_x, s.f_x, s.F_u, s.f_u, s.F_d, 200 * s.f_d, s.psi_vertices, s.K)
    rep = existence_check(build_closed_loop(big))
    assert rep.exists is Existence.NO and rep.k_used == 1
    assert rep.f_min_upper < 0


def test_undecided_when_no_certificate_and_flat():
    # unit-norm rotation: supports keep growing slowly, no contraction certificate
    th = 0.3
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    clm = ClosedLoopModel.from_matrices([R], HPolytope.box(100.0, 2), 0.01 * BOXV)
    with pytest.raises(IterationCapExceeded):
        existence_check(clm, max_iter=15)


def test_report_serializes(worked_clm):
    d = existence_check(worked_clm).to_dict()
    assert d["exists"] == "yes" and isinstance(d["f_tilde"], list)
