import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from imitab.datasets import build_visit_index, index_for, sample_dataset, split_dataset
from imitab.exceptions import EmptyDataset, InvalidParameter, NotInPiMimic, SolverGuardExceeded, StochasticExpert
from imitab.harness.verify import enumerated_event_probabilities, finite_difference_error, random_policy
from imitab.instances import make_lb_known_transition, make_random, perturb_dynamics
from imitab.learners import behavior_cloning, is_in_pi_mimic
from imitab.mdp import occupancy
from imitab.mimic_md import (
    augmented_occupancy,
    empirical_event_fractions,
    event_probabilities,
    fit_mimic_md,
    free_parameterization,
    md_objective,
    md_subgradient,
    project_simplex,
    solve_opt_exact,
    solve_opt_subgradient,
)
from imitab.mimic_md.events import l1_distance
from imitab.models import EventTable, ExpertKind, Policy, SolverSpec
from imitab.utils.rng import make_rng


def _problem(seed: int, S: int = 3, A: int = 2, H: int = 3, N: int = 4):
    bundle = make_random(S, A, H, seed)
    dynamics = bundle.mdp.dynamics
    dataset = sample_dataset(dynamics, bundle.expert, N, seed + 1)
    split = split_dataset(dataset, seed + 2)
    index_d1 = index_for(split.d1, dynamics, deterministic=True)
    target = empirical_event_fractions(split.d2, index_d1)
    return bundle, dynamics, index_d1, target


def test_flag_mass_adds_up_to_occupancy():
    bundle, dynamics, index_d1, _ = _problem(3)
    policy = random_policy(make_rng(0), 3, 3, 2)
    g = augmented_occupancy(dynamics, policy, index_d1.visited_mask).g
    np.testing.assert_allclose(g.sum(axis=-1), occupancy(dynamics, policy).state_occ, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_flag_is_monotone(seed):
    bundle, dynamics, index_d1, _ = _problem(seed)
    g = augmented_occupancy(dynamics, bundle.expert, index_d1.visited_mask).g
    flagged = g[:, :, 1].sum(axis=1)
    assert np.all(np.diff(flagged) >= -1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_event_probabilities_match_enumeration(seed):
    bundle, dynamics, index_d1, _ = _problem(seed)
    policy = random_policy(make_rng(seed), 3, 3, 2)
    np.testing.assert_allclose(
        event_probabilities(dynamics, policy, index_d1).probs,
        enumerated_event_probabilities(dynamics, policy, index_d1),
        atol=1e-12,
    )


def test_empirical_event_fractions_by_hand(dataset_of):
    index_d1 = build_visit_index(dataset_of(2, [(0, 0), (0, 0)]), 2, 2, 2, deterministic=True)
    d2 = dataset_of(2, [(1, 1), (0, 0)], [(0, 0), (1, 0)])
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = 0.5
    expected[1, 0, 0] = 0.5
    expected[1, 1, 0] = 0.5
    np.testing.assert_array_equal(empirical_event_fractions(d2, index_d1).probs, expected)


def test_empty_d2_rejected(dataset_of):
    index_d1 = build_visit_index(dataset_of(1, [(0, 0)]), 1, 1, 1)
    with pytest.raises(EmptyDataset):
        empirical_event_fractions(dataset_of(1), index_d1)


def test_objective_requires_membership():
    bundle, dynamics, index_d1, target = _problem(5)
    pinned = behavior_cloning(index_d1)
    assert md_objective(dynamics, pinned, index_d1, target) >= 0.0
    (t, s), *_ = zip(*np.nonzero(index_d1.visited_mask))
    dists = np.array(pinned.dists, copy=True)
    dists[t, s] = 1.0 / 2
    with pytest.raises(NotInPiMimic):
        md_objective(dynamics, Policy(dists), index_d1, target)


def test_subgradient_objective_matches_l1():
    bundle, dynamics, index_d1, target = _problem(6)
    policy = random_policy(make_rng(1), 3, 3, 2)
    objective, grad = md_subgradient(dynamics, policy, index_d1.visited_mask, target)
    assert objective == pytest.approx(l1_distance(event_probabilities(dynamics, policy, index_d1), target), abs=1e-12)
    assert grad.shape == policy.shape


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_matches_finite_differences(seed):
    assert finite_difference_error(seed) < 1e-4


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 3), elements=st.floats(-5, 5)))
def test_projection_lands_on_simplex(v):
    p = project_simplex(v)
    assert np.all(p >= 0)
    np.testing.assert_allclose(p.sum(axis=-1), 1.0, atol=1e-9)
    np.testing.assert_allclose(project_simplex(p), p, atol=1e-9)


def test_projection_examples():
    projected = project_simplex(np.array([[0.5, 0.5], [2.0, 0.0], [0.0, 0.0]]))
    np.testing.assert_allclose(projected, [[0.5, 0.5], [1.0, 0.0], [0.5, 0.5]])


def _brute_force_optimum(dynamics, index_d1, target) -> float:
    param = free_parameterization(index_d1)
    eye = np.eye(dynamics.num_actions)
    best = np.inf
    for combo in itertools.product(range(dynamics.num_actions), repeat=len(param.free_cells)):
        candidate = param.policy(eye[list(combo)])
        best = min(best, l1_distance(event_probabilities(dynamics, candidate, index_d1), target))
    return best


@pytest.mark.parametrize("seed", range(8))
def test_exact_solver_matches_brute_force(seed):
    _, dynamics, index_d1, target = _problem(seed, S=3, A=2, H=3, N=4)
    policy, objective = solve_opt_exact(dynamics, index_d1, target)
    assert objective == pytest.approx(_brute_force_optimum(dynamics, index_d1, target), abs=1e-12)
    assert is_in_pi_mimic(policy, index_d1)
    assert policy.is_deterministic


@pytest.mark.parametrize("seed", range(5))
def test_exact_solver_beats_the_expert(seed):
    bundle, dynamics, index_d1, target = _problem(seed, N=6)
    _, objective = solve_opt_exact(dynamics, index_d1, target)
    assert objective <= md_objective(dynamics, bundle.expert, index_d1, target) + 1e-12


def test_planted_target_is_recovered():
    bundle, dynamics, index_d1, _ = _problem(9, N=4)
    planted = event_probabilities(dynamics, bundle.expert, index_d1)
    policy, objective = solve_opt_exact(dynamics, index_d1, planted)
    assert objective == pytest.approx(0.0, abs=1e-12)


def test_guard_refuses_large_enumeration():
    _, dynamics, index_d1, target = _problem(2, S=3, A=2, H=3, N=2)
    with pytest.raises(SolverGuardExceeded):
        solve_opt_exact(dynamics, index_d1, target, guard_bits=0)


def test_action_independent_cells_are_solved_in_closed_form():
    bundle = make_lb_known_transition(6, 3, 6, 8, seed=0)
    dynamics = bundle.mdp.dynamics
    fit = fit_mimic_md(dynamics, sample_dataset(dynamics, bundle.expert, 8, 1), 2, SolverSpec("exact", guard_bits=1))
    assert fit.epsilon == 0.0
    assert is_in_pi_mimic(fit.policy, fit.index_d1)


@pytest.mark.parametrize("seed", range(4))
def test_subgradient_close_to_exact(seed):
    _, dynamics, index_d1, target = _problem(seed, N=4)
    _, exact = solve_opt_exact(dynamics, index_d1, target)
    policy, approx = solve_opt_subgradient(dynamics, index_d1, target, seed=seed)
    assert approx <= exact + 1e-3
    assert is_in_pi_mimic(policy, index_d1)


def test_subgradient_is_deterministic():
    _, dynamics, index_d1, target = _problem(1)
    first = solve_opt_subgradient(dynamics, index_d1, target, restarts=3, steps=50, seed=4)
    second = solve_opt_subgradient(dynamics, index_d1, target, restarts=3, steps=50, seed=4)
    assert first[1] == second[1]
    np.testing.assert_array_equal(first[0].dists, second[0].dists)


def test_fit_mimic_md_end_to_end():
    bundle = make_random(3, 2, 3, 4)
    dynamics = bundle.mdp.dynamics
    dataset = sample_dataset(dynamics, bundle.expert, 6, 5)
    fit = fit_mimic_md(dynamics, dataset, 6)
    assert len(fit.split.d1) == 3 and len(fit.split.d2) == 3
    assert is_in_pi_mimic(fit.policy, fit.index_d1)
    assert fit.objective == pytest.approx(
        l1_distance(event_probabilities(dynamics, fit.policy, fit.index_d1), fit.target), abs=1e-12
    )

    certified = fit_mimic_md(dynamics, dataset, 6, SolverSpec("subgradient", restarts=2, steps=100, certify=True))
    assert certified.epsilon is not None and certified.epsilon >= 0.0
    uncertified = fit_mimic_md(dynamics, dataset, 6, SolverSpec("subgradient", restarts=2, steps=100))
    assert uncertified.epsilon is None


def test_fit_needs_a_trajectory():
    bundle = make_random(2, 2, 2, 0)
    dataset = sample_dataset(bundle.mdp.dynamics, bundle.expert, 0, 0)
    with pytest.raises(EmptyDataset, match="nonempty D2"):
        fit_mimic_md(bundle.mdp.dynamics, dataset, 0)


def test_fit_with_single_trajectory():
    # floor(1/2) = 0 trajectories go to D1, the one trajectory lands in D2
    bundle = make_random(2, 2, 2, 0)
    dynamics = bundle.mdp.dynamics
    dataset = sample_dataset(dynamics, bundle.expert, 1, 0)
    fit = fit_mimic_md(dynamics, dataset, 0)
    assert len(fit.split.d1) == 0
    assert len(fit.split.d2) == 1
    assert is_in_pi_mimic(fit.policy, fit.index_d1)
    np.testing.assert_allclose(fit.policy.dists.sum(axis=-1), 1.0)
    assert fit.objective >= 0.0


@pytest.mark.parametrize("restarts, steps", [(0, 10), (2, -1)])
def test_subgradient_rejects_bad_schedule(restarts, steps):
    _, dynamics, index_d1, target = _problem(1)
    with pytest.raises(InvalidParameter):
        solve_opt_subgradient(dynamics, index_d1, target, restarts, steps, 0)


def test_event_fractions_track_event_probabilities():
    bundle, dynamics, index_d1, _ = _problem(5, N=6)
    n = 4000
    d2 = sample_dataset(dynamics, bundle.expert, n, 99)
    p = event_probabilities(dynamics, bundle.expert, index_d1).probs
    fractions = empirical_event_fractions(d2, index_d1).probs
    # each entry is the mean of n Bernoulli(p) indicators
    stderr = np.sqrt(p * (1.0 - p) / n)
    assert np.all(np.abs(fractions - p) <= 4.0 * stderr + 1e-12)


def test_planning_dynamics_change_only_the_objective_model():
    bundle = make_random(3, 2, 3, 8)
    dynamics = bundle.mdp.dynamics
    dataset = sample_dataset(dynamics, bundle.expert, 6, 1)
    planning = perturb_dynamics(dynamics, 0.3, 2)
    exact = fit_mimic_md(dynamics, dataset, 3)
    approximate = fit_mimic_md(dynamics, dataset, 3, planning=planning)
    assert approximate.split == exact.split
    np.testing.assert_array_equal(approximate.target.probs, exact.target.probs)
    assert is_in_pi_mimic(approximate.policy, exact.index_d1)


def test_stochastic_expert_rejected():
    bundle = make_random(2, 3, 2, 0, ExpertKind("stochastic"))
    dataset = sample_dataset(bundle.mdp.dynamics, bundle.expert, 30, 0)
    with pytest.raises(StochasticExpert):
        fit_mimic_md(bundle.mdp.dynamics, dataset, 0)


def test_event_table_of_target_is_a_subprobability():
    _, _, index_d1, target = _problem(7, N=8)
    assert isinstance(target, EventTable)
    assert np.all(target.probs.sum(axis=(1, 2)) <= 1.0 + 1e-12)
