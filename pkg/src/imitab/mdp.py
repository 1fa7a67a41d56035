"""
Exact finite-horizon evaluation of tabular episodic MDPs.

Time is 0-based in code: index t here is time t+1 in the usual 1..H notation.
`value` and `occupancy` are two independent computations of the same policy value
(backward DP and forward state distributions); tests hold them against each other
and against exhaustive trajectory enumeration.
"""

from typing import Iterator

import numpy as np

from imitab.exceptions import DimensionMismatch
from imitab.models import (
    PROBABILITY_TOLERANCE,
    MdpDynamics,
    OccupancyTable,
    Policy,
    TabularMdp,
    Trajectory,
    Violation,
)
from imitab.utils.rng import draw_index, make_rng


def _cell(index: tuple) -> str:
    return str([int(i) for i in index])


def _simplex_violations(name: str, dists: np.ndarray, tolerance: float) -> list[Violation]:
    violations: list[Violation] = []
    # a single distribution sums to a 0-d residual
    residuals = np.atleast_1d(dists.sum(axis=-1) - 1.0)
    for index in zip(*np.nonzero(np.abs(residuals) > tolerance)):
        location = name if dists.ndim == 1 else f"{name}{_cell(index)}"
        total = float(residuals[index] + 1.0)
        violations.append(Violation(location, float(residuals[index]), f"{name} sum = {total:.12g}"))
    for index in zip(*np.nonzero(dists < 0)):
        violations.append(Violation(f"{name}{_cell(index)}", float(dists[index]), f"negative {name} entry"))
    return violations


def validate_mdp(mdp: TabularMdp, tolerance: float = PROBABILITY_TOLERANCE) -> list[Violation]:
    violations = _simplex_violations("rho", mdp.rho, tolerance)
    violations += _simplex_violations("transitions", mdp.transitions, tolerance)
    for index in zip(*np.nonzero((mdp.rewards < 0) | (mdp.rewards > 1))):
        reward = float(mdp.rewards[index])
        residual = reward if reward < 0 else reward - 1.0
        violations.append(Violation(f"rewards{_cell(index)}", residual, f"reward {reward} outside [0, 1]"))
    return violations


def validate_policy(policy: Policy, tolerance: float = PROBABILITY_TOLERANCE) -> list[Violation]:
    return _simplex_violations("dists", policy.dists, tolerance)


def check_dimensions(mdp: MdpDynamics, policy: Policy) -> None:
    if policy.shape != mdp.shape:
        raise DimensionMismatch(f"policy has shape {policy.shape}, MDP expects [H][S][A] = {list(mdp.shape)}")


def value(mdp: TabularMdp, policy: Policy) -> float:
    """J(pi) by backward dynamic programming."""
    check_dimensions(mdp, policy)
    v_next = np.zeros(mdp.num_states)
    for t in reversed(range(mdp.horizon)):
        q = np.array(mdp.rewards[t], copy=True)
        if t < mdp.horizon - 1:
            q += np.einsum("sap,p->sa", mdp.transitions[t], v_next)
        v_next = np.einsum("sa,sa->s", policy.dists[t], q)
    return float(mdp.rho @ v_next)


def occupancy(mdp: MdpDynamics, policy: Policy) -> OccupancyTable:
    check_dimensions(mdp, policy)
    state_occ = np.zeros((mdp.horizon, mdp.num_states))
    state_occ[0] = mdp.rho
    for t in range(mdp.horizon - 1):
        state_occ[t + 1] = np.einsum("s,sa,sap->p", state_occ[t], policy.dists[t], mdp.transitions[t])
    state_action_occ = state_occ[:, :, None] * policy.dists
    return OccupancyTable(state_occ=state_occ, state_action_occ=state_action_occ)


def value_from_occupancy(mdp: TabularMdp, policy: Policy) -> float:
    return float(np.sum(occupancy(mdp, policy).state_action_occ * mdp.rewards))


def rollout(mdp: MdpDynamics, policy: Policy, rng_seed: int) -> Trajectory:
    check_dimensions(mdp, policy)
    rng = make_rng(rng_seed)
    steps: list[tuple[int, int]] = []
    state = draw_index(rng, mdp.rho)
    for t in range(mdp.horizon):
        action = draw_index(rng, policy.dists[t, state])
        steps.append((state, action))
        if t < mdp.horizon - 1:
            state = draw_index(rng, mdp.transitions[t, state, action])
    return Trajectory(tuple(steps))


def trajectory_probability(mdp: MdpDynamics, policy: Policy, trajectory: Trajectory) -> float:
    (state, action), *rest = trajectory.steps
    prob = mdp.rho[state] * policy.dists[0, state, action]
    for t, (next_state, next_action) in enumerate(rest):
        prob *= mdp.transitions[t, state, action, next_state] * policy.dists[t + 1, next_state, next_action]
        state, action = next_state, next_action
    return float(prob)


def enumerate_trajectories(mdp: MdpDynamics, policy: Policy) -> Iterator[tuple[Trajectory, float]]:
    """Every trajectory with nonzero probability, depth first in lexicographic order."""
    check_dimensions(mdp, policy)

    def extend(prefix: tuple[tuple[int, int], ...], state_probs: np.ndarray, prob: float):
        t = len(prefix)
        for state in np.flatnonzero(state_probs):
            for action in np.flatnonzero(policy.dists[t, state]):
                p = prob * state_probs[state] * policy.dists[t, state, action]
                steps = prefix + ((int(state), int(action)),)
                if t == mdp.horizon - 1:
                    yield Trajectory(steps), float(p)
                else:
                    yield from extend(steps, mdp.transitions[t, state, action], p)

    yield from extend((), mdp.rho, 1.0)


def value_by_enumeration(mdp: TabularMdp, policy: Policy) -> float:
    return sum(
        prob * sum(mdp.rewards[t, s, a] for t, (s, a) in enumerate(trajectory.steps))
        for trajectory, prob in enumerate_trajectories(mdp, policy)
    )
