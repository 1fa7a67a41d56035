"""
Exact risk functionals. Every quantity here is computed from occupancy measures or the
augmented (state, flag) recursion, never by sampling.
"""

import numpy as np

from imitab.exceptions import EmptyDataset, InvalidParameter
from imitab.learners import require_deterministic
from imitab.mdp import check_dimensions, occupancy, value
from imitab.mimic_md.events import augmented_occupancy
from imitab.models import UNVISITED, MdpDynamics, Policy, ReductionGap, TabularMdp, VisitIndex


def _expert_action_mass(expert: Policy, learner: Policy) -> np.ndarray:
    """[H][S] probability the learner puts on the expert's action."""
    actions = expert.deterministic_actions()
    return np.take_along_axis(learner.dists, actions[..., None], axis=-1)[..., 0]


def pop_01_risk(mdp: MdpDynamics, expert: Policy, learner: Policy) -> float:
    check_dimensions(mdp, learner)
    state_occ = occupancy(mdp, expert).state_occ
    return float(np.sum(state_occ * (1.0 - _expert_action_mass(expert, learner))) / mdp.horizon)


def emp_01_risk(index: VisitIndex, learner: Policy) -> float:
    require_deterministic(index)
    if index.num_trajectories == 0:
        raise EmptyDataset("empirical risk of an empty dataset is undefined")
    visited = index.expert_action != UNVISITED
    state_freq = index.counts.sum(axis=-1) / index.num_trajectories
    expert_mass = np.take_along_axis(learner.dists, np.maximum(index.expert_action, 0)[..., None], axis=-1)[..., 0]
    return float(np.sum(np.where(visited, state_freq * (1.0 - expert_mass), 0.0)) / index.horizon)


def pop_tv_risk(mdp: MdpDynamics, expert: Policy, learner: Policy) -> float:
    check_dimensions(mdp, learner)
    state_occ = occupancy(mdp, expert).state_occ
    tv = 0.5 * np.abs(learner.dists - expert.dists).sum(axis=-1)
    return float(np.sum(state_occ * tv) / mdp.horizon)


def reduction_gap(mdp: TabularMdp, expert: Policy, learner: Policy) -> ReductionGap:
    """J(expert) - J(learner) against min{H, H^2 * TV risk}."""
    lhs = value(mdp, expert) - value(mdp, learner)
    rhs = min(float(mdp.horizon), mdp.horizon**2 * pop_tv_risk(mdp, expert, learner))
    return ReductionGap(lhs=lhs, rhs=rhs)


def unobserved_visit_probability(mdp: MdpDynamics, policy: Policy, index: VisitIndex) -> float:
    g = augmented_occupancy(mdp, policy, index.visited_mask).g
    return float(g[-1, :, 1].sum())


def flagged_reward(mdp: TabularMdp, policy: Policy, index: VisitIndex) -> float:
    """Expected reward collected at times when the trajectory has already left the visited sets."""
    g = augmented_occupancy(mdp, policy, index.visited_mask).g
    return float(np.einsum("ts,tsa,tsa->", g[:, :, 1], policy.dists, mdp.rewards))


def decomposition_gap(mdp: TabularMdp, expert: Policy, learner: Policy, index: VisitIndex) -> float:
    """
    |(J(expert) - J(learner)) - (flagged_reward(expert) - flagged_reward(learner))|.

    Zero whenever the learner copies the expert at every visited (t, s): both policies
    then collect the same reward before the trajectory first leaves the visited sets.
    """
    value_gap = value(mdp, expert) - value(mdp, learner)
    flagged_gap = flagged_reward(mdp, expert, index) - flagged_reward(mdp, learner, index)
    return abs(value_gap - flagged_gap)


def expected_unobserved_mass(mdp: MdpDynamics, expert: Policy, n: int) -> float:
    """
    Expectation over an n-trajectory expert dataset of the per-time missing mass of the
    expert's state distribution, averaged over time; bounds the population 0-1 risk of
    every learner that copies the expert on visited states.
    """
    if n < 0:
        raise InvalidParameter(f"dataset size must be nonnegative, got {n}")
    state_occ = occupancy(mdp, expert).state_occ
    return float(np.sum(state_occ * (1.0 - state_occ) ** n) / mdp.horizon)


def compounding_loss(horizon: int, eps: float) -> float:
    """
    Suboptimality of a learner that leaves the expert with probability eps at each step
    when the first departure forfeits every remaining reward.
    """
    if not 0.0 <= eps <= 1.0:
        raise InvalidParameter(f"per-step error must lie in [0, 1], got {eps}")
    t = np.arange(1, horizon + 1)
    return float(np.sum((horizon - t + 1) * eps * (1.0 - eps) ** (t - 1)))
