"""
Event-set probabilities for Mimic-MD.

The event T_t(s, a) holds for a trajectory that is at (s, a) at time t and, at some
time tau <= t, stood at a state nobody in D1 visited at time tau. Its probability under
a policy is read off an augmented forward recursion over (state, flag) where the flag
records whether that has happened yet.
"""

import numpy as np

from imitab.exceptions import EmptyDataset, NotInPiMimic
from imitab.learners import is_in_pi_mimic
from imitab.mdp import check_dimensions
from imitab.models import (
    AugmentedOccupancy,
    Dataset,
    EventTable,
    MdpDynamics,
    Policy,
    VisitIndex,
)


def augmented_occupancy(mdp: MdpDynamics, policy: Policy, visited_mask: np.ndarray) -> AugmentedOccupancy:
    check_dimensions(mdp, policy)
    fresh = ~visited_mask
    g = np.zeros((mdp.horizon, mdp.num_states, 2))
    g[0, :, 0] = mdp.rho * ~fresh[0]
    g[0, :, 1] = mdp.rho * fresh[0]
    for t in range(mdp.horizon - 1):
        flow = np.einsum("sf,sa,sap->pf", g[t], policy.dists[t], mdp.transitions[t])
        g[t + 1, :, 0] = flow[:, 0] * ~fresh[t + 1]
        g[t + 1, :, 1] = flow[:, 1] + flow[:, 0] * fresh[t + 1]
    return AugmentedOccupancy(g)


def event_probabilities(mdp: MdpDynamics, policy: Policy, index_d1: VisitIndex) -> EventTable:
    g = augmented_occupancy(mdp, policy, index_d1.visited_mask).g
    return EventTable(g[:, :, 1, None] * policy.dists)


def empirical_event_fractions(d2: Dataset, index_d1: VisitIndex) -> EventTable:
    if len(d2) == 0:
        raise EmptyDataset("empirical event fractions need at least one trajectory in D2")
    steps = d2.as_array()
    states, actions = steps[..., 0], steps[..., 1]
    times = np.broadcast_to(np.arange(d2.horizon), states.shape)
    left = ~index_d1.visited_mask[times, states]
    # flag is monotone along each trajectory
    flagged = np.logical_or.accumulate(left, axis=1)
    counts = np.zeros((index_d1.horizon, index_d1.num_states, index_d1.num_actions))
    np.add.at(counts, (times[flagged], states[flagged], actions[flagged]), 1.0)
    return EventTable(counts / len(d2))


def l1_distance(table: EventTable, target: EventTable) -> float:
    return float(np.abs(table.probs - target.probs).sum())


def md_objective(mdp: MdpDynamics, candidate: Policy, index_d1: VisitIndex, target: EventTable) -> float:
    if not is_in_pi_mimic(candidate, index_d1):
        raise NotInPiMimic("candidate does not play the observed expert action at every D1-visited (t, s)")
    return l1_distance(event_probabilities(mdp, candidate, index_d1), target)


def md_subgradient(
    mdp: MdpDynamics, policy: Policy, visited_mask: np.ndarray, target: EventTable
) -> tuple[float, np.ndarray]:
    """
    Objective and a subgradient with respect to every entry pi_t(a|s), by one forward
    pass and one adjoint pass. lam[s, f] is the derivative of the objective with respect
    to the augmented mass g_t(s, f); the sign of each |.| term is taken as 0 at exact zeros.
    """
    fresh = ~visited_mask
    g = augmented_occupancy(mdp, policy, visited_mask).g
    residual = g[:, :, 1, None] * policy.dists - target.probs
    signs = np.sign(residual)

    grad = np.zeros(policy.shape)
    carry = np.zeros((mdp.num_states, mdp.num_actions, 2))
    for t in reversed(range(mdp.horizon)):
        grad[t] = g[t, :, 1, None] * (signs[t] + carry[:, :, 1]) + g[t, :, 0, None] * carry[:, :, 0]
        lam = np.einsum("sa,saf->sf", policy.dists[t], carry)
        lam[:, 1] += np.einsum("sa,sa->s", policy.dists[t], signs[t])
        if t > 0:
            # a flag-0 arrival at a fresh state is raised to flag 1
            arrival = np.stack([np.where(fresh[t], lam[:, 1], lam[:, 0]), lam[:, 1]], axis=1)
            carry = np.einsum("sap,pf->saf", mdp.transitions[t - 1], arrival)
    return float(np.abs(residual).sum()), grad
