"""
Offline learners: behavior cloning (a member of the mimic class) and Mimic-Emp, plus the
active behavior-cloning wrapper. Learners only ever see a VisitIndex or oracle answers,
never rewards.
"""

import numpy as np

from imitab.datasets import ActiveOracle, active_collect, follow_oracle, index_for
from imitab.exceptions import InvalidParameter, StochasticExpert
from imitab.models import (
    MULTI_ACTION,
    UNVISITED,
    Completion,
    MdpDynamics,
    Policy,
    VisitIndex,
)

UNIFORM_COMPLETION = Completion("uniform")


def require_deterministic(index: VisitIndex) -> None:
    if not index.is_deterministic:
        t, s = np.argwhere(index.expert_action == MULTI_ACTION)[0]
        raise StochasticExpert(f"multiple expert actions observed at t={t}, s={s}: stochastic expert; use mimic_emp")


def _completion_dists(index: VisitIndex, completion: Completion) -> np.ndarray:
    shape = (index.horizon, index.num_states, index.num_actions)
    if completion.kind == "uniform":
        return np.full(shape, 1.0 / index.num_actions)
    if completion.kind == "fixed_action":
        if not 0 <= completion.action < index.num_actions:
            raise InvalidParameter(f"completion action {completion.action} outside A={index.num_actions}")
        return np.broadcast_to(np.eye(index.num_actions)[completion.action], shape).copy()
    raise InvalidParameter(f"unknown completion {completion.kind!r}")


def behavior_cloning(index: VisitIndex, completion: Completion = UNIFORM_COMPLETION) -> Policy:
    require_deterministic(index)
    dists = _completion_dists(index, completion)
    visited = index.expert_action != UNVISITED
    dists[visited] = np.eye(index.num_actions)[index.expert_action[visited]]
    return Policy(dists)


def mimic_emp(index: VisitIndex) -> Policy:
    totals = index.counts.sum(axis=-1, keepdims=True)
    uniform = np.full(index.counts.shape, 1.0 / index.num_actions)
    return Policy(np.where(totals > 0, index.counts / np.maximum(totals, 1), uniform))


def is_in_pi_mimic(policy: Policy, index: VisitIndex) -> bool:
    require_deterministic(index)
    visited = index.expert_action != UNVISITED
    pinned = np.eye(index.num_actions)[index.expert_action[visited]]
    return bool(np.array_equal(policy.dists[visited], pinned))


def active_bc(
    mdp: MdpDynamics, oracle: ActiveOracle, n_episodes: int, seed: int, completion: Completion = UNIFORM_COMPLETION
) -> Policy:
    dataset, _ = active_collect(mdp, follow_oracle, oracle, n_episodes, seed)
    return behavior_cloning(index_for(dataset, mdp, deterministic=True), completion)
