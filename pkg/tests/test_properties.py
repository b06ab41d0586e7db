"""Randomized checks of the structural invariants of the set recursions."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from invkit import (
    ClosedLoopModel,
    Existence,
    HPolytope,
    Termination,
    brute_force_intersection,
    certify_invariance,
    existence_check,
    is_subset,
    marpi_compute,
    pre_set,
    sample_trajectories,
)

import oracles

few = settings(max_examples=25, deadline=None, derandomize=True)
seeds = st.integers(0, 2**31)


@few
@given(seeds)
def test_converged_set_is_admissible_and_invariant(seed):
    clm, ex, _ = oracles.random_stable_instance(np.random.default_rng(seed))
    res = marpi_compute(clm, existence=ex)
    assert res.terminated is Termination.CONVERGED
    assert is_subset(res.set, clm.S0)
    assert is_subset(res.set, pre_set(res.set, clm))
    assert certify_invariance(res.set, clm)


@few
@given(seeds)
def test_running_sets_shrink_and_match_intersections(seed):
    clm, ex, _ = oracles.random_stable_instance(np.random.default_rng(seed))
    res = marpi_compute(clm, existence=ex)
    for k, (a, b) in enumerate(zip(res.iterates, res.iterates[1:])):
        assert is_subset(b, a)
        if k + 1 <= 3:
            oracle = brute_force_intersection(k + 1, clm)
            assert is_subset(b, oracle) and is_subset(oracle, b)


@few
@given(seeds)
def test_bracket_valid(seed):
    clm, ex, _ = oracles.random_stable_instance(np.random.default_rng(seed))
    assert ex.f_min_lower <= ex.f_min_upper
    for _, lo, up, _ in ex.history:
        assert lo <= up


@few
@given(seeds)
def test_no_verdict_is_sound(seed):
    rng = np.random.default_rng(seed)
    clm, _, _ = oracles.random_stable_instance(rng)
    # blow up the disturbance until the first hull step already violates a base row
    scale = 2.0 * np.max(clm.S0.f) / np.min(np.abs(clm.D_vertices.vertices).max(axis=0))
    big = ClosedLoopModel.from_matrices(clm.phi_vertices, clm.S0, clm.D_vertices.vertices * scale)
    rep = existence_check(big)
    assert rep.exists is Existence.NO
    assert marpi_compute(big).terminated is Termination.EMPTY_SET


@settings(max_examples=10, deadline=None, derandomize=True)
@given(seeds)
def test_sampled_trajectories_stay_inside(seed):
    clm, ex, _ = oracles.random_stable_instance(np.random.default_rng(seed))
    res = marpi_compute(clm, existence=ex)
    _, rep = sample_trajectories(res.set, clm, count=300, horizon=30, seed=seed % 1000, keep_samples=False)
    assert rep.clean


@few
@given(seeds)
def test_identity_dynamics_without_disturbance_keep_any_base_set(seed):
    P = oracles.random_polytope(np.random.default_rng(seed), 2, extra=4)
    clm = ClosedLoopModel.from_matrices([np.eye(2)], P, np.zeros((1, 2)))
    res = marpi_compute(clm)
    assert res.outer_iterations == 1
    assert is_subset(res.set, P) and is_subset(P, res.set)
    assert isinstance(res.set, HPolytope)
