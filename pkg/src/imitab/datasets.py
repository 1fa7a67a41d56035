from typing import Callable, Protocol

import numpy as np

from imitab.exceptions import DimensionMismatch, IndexOutOfRange, InconsistentExpert
from imitab.mdp import rollout
from imitab.models import (
    MULTI_ACTION,
    UNVISITED,
    Dataset,
    MdpDynamics,
    Policy,
    SplitPair,
    Trajectory,
    VisitIndex,
)
from imitab.utils.rng import child_seed, draw_index, make_rng


def sample_dataset(mdp: MdpDynamics, expert: Policy, n: int, seed: int) -> Dataset:
    return Dataset(
        horizon=mdp.horizon,
        trajectories=tuple(rollout(mdp, expert, child_seed(seed, i)) for i in range(n)),
    )


def build_visit_index(
    dataset: Dataset, num_states: int, num_actions: int, horizon: int, *, deterministic: bool = False
) -> VisitIndex:
    """
    :param deterministic:
        the expert is declared deterministic; two different actions observed at one (t, s)
        raise InconsistentExpert instead of leaving the MULTI_ACTION marker
    """
    lengths = sorted({len(t) for t in dataset.trajectories} - {horizon})
    if lengths:
        raise IndexOutOfRange(f"dataset holds trajectories of length {lengths}, expected {horizon}")
    steps = dataset.as_array()
    if steps.shape[1:] != (horizon, 2):
        raise IndexOutOfRange(f"dataset trajectories have shape {steps.shape[1:]}, expected ({horizon}, 2)")
    states, actions = steps[..., 0], steps[..., 1]
    if np.any((states < 0) | (states >= num_states)) or np.any((actions < 0) | (actions >= num_actions)):
        raise IndexOutOfRange(f"trajectory indices outside S={num_states}, A={num_actions}")

    counts = np.zeros((horizon, num_states, num_actions), dtype=np.int64)
    times = np.broadcast_to(np.arange(horizon), states.shape)
    np.add.at(counts, (times, states, actions), 1)

    observed = (counts > 0).sum(axis=-1)
    expert_action = np.where(observed == 1, counts.argmax(axis=-1), UNVISITED)
    expert_action[observed > 1] = MULTI_ACTION
    if deterministic and np.any(observed > 1):
        t, s = np.argwhere(observed > 1)[0]
        raise InconsistentExpert(
            f"declared-deterministic expert played actions {np.flatnonzero(counts[t, s]).tolist()} at t={t}, s={s}"
        )
    return VisitIndex(
        num_states=num_states,
        num_actions=num_actions,
        horizon=horizon,
        counts=counts,
        expert_action=expert_action,
    )


def index_for(dataset: Dataset, mdp: MdpDynamics, *, deterministic: bool = False) -> VisitIndex:
    return build_visit_index(dataset, mdp.num_states, mdp.num_actions, mdp.horizon, deterministic=deterministic)


def split_dataset(dataset: Dataset, seed: int) -> SplitPair:
    permutation = make_rng(seed).permutation(len(dataset)).tolist()
    shuffled = tuple(dataset.trajectories[i] for i in permutation)
    half = len(dataset) // 2
    return SplitPair(
        d1=Dataset(dataset.horizon, shuffled[:half]),
        d2=Dataset(dataset.horizon, shuffled[half:]),
        permutation=tuple(permutation),
    )


class ActiveOracle:
    """Answers pi*_t(.|s) at the learner's current state and logs every query."""

    def __init__(self, expert: Policy):
        self._expert = expert
        self.query_log: list[tuple[int, int]] = []

    @property
    def shape(self) -> tuple[int, int, int]:
        return self._expert.shape

    def query(self, t: int, state: int) -> np.ndarray:
        self.query_log.append((t, state))
        return np.array(self._expert.dists[t, state], copy=True)


class LearnerStrategy(Protocol):
    def __call__(self, history: tuple[tuple[int, int], ...], t: int, state: int, answer: np.ndarray) -> np.ndarray:
        ...


def follow_oracle(history: tuple[tuple[int, int], ...], t: int, state: int, answer: np.ndarray) -> np.ndarray:
    return answer


def fixed_action_strategy(action: int) -> Callable[..., np.ndarray]:
    def strategy(history: tuple[tuple[int, int], ...], t: int, state: int, answer: np.ndarray) -> np.ndarray:
        return np.eye(len(answer))[action]

    return strategy


def active_collect(
    mdp: MdpDynamics, learner_strategy: LearnerStrategy, oracle: ActiveOracle, n_episodes: int, seed: int
) -> tuple[Dataset, tuple[np.ndarray, ...]]:
    """
    Runs n_episodes interactions; episode e draws from child_seed(seed, e) in the same
    order as `rollout` (initial state, then action and next state per step), so following
    the oracle reproduces `sample_dataset` trajectories exactly.

    Returns the collected dataset and, per episode, the [H][A] oracle answers at the
    visited states.
    """
    if oracle.shape != mdp.shape:
        raise DimensionMismatch(f"oracle expert has shape {oracle.shape}, MDP expects {mdp.shape}")
    trajectories: list[Trajectory] = []
    answers: list[np.ndarray] = []
    for episode in range(n_episodes):
        rng = make_rng(child_seed(seed, episode))
        steps: list[tuple[int, int]] = []
        episode_answers = np.zeros((mdp.horizon, mdp.num_actions))
        state = draw_index(rng, mdp.rho)
        for t in range(mdp.horizon):
            episode_answers[t] = oracle.query(t, state)
            action = draw_index(rng, learner_strategy(tuple(steps), t, state, episode_answers[t]))
            steps.append((state, action))
            if t < mdp.horizon - 1:
                state = draw_index(rng, mdp.transitions[t, state, action])
        trajectories.append(Trajectory(tuple(steps)))
        answers.append(episode_answers)
    return Dataset(mdp.horizon, tuple(trajectories)), tuple(answers)
