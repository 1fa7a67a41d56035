from pathlib import Path

import numpy as np
import pytest

from imitab.models import AppConfig, Dataset, SolverSpec, TabularMdp, Trajectory


@pytest.fixture
def two_step_mdp() -> TabularMdp:
    """
    Starts in state 0. Action 0 there pays 1 and moves to state 1, action 1 pays nothing
    and stays; state 1 pays 1 for either action at the last step.
    """
    transitions = np.zeros((1, 2, 2, 2))
    transitions[0, 0, 0] = [0.0, 1.0]
    transitions[0, 0, 1] = [1.0, 0.0]
    transitions[0, 1, :] = [0.5, 0.5]
    rewards = np.zeros((2, 2, 2))
    rewards[0, 0, 0] = 1.0
    rewards[1, 1, :] = 1.0
    return TabularMdp(num_states=2, num_actions=2, horizon=2, rho=[1.0, 0.0], transitions=transitions, rewards=rewards)


@pytest.fixture
def app_config(tmp_path: Path) -> AppConfig:
    return AppConfig(
        workers=1,
        log_level="WARNING",
        output_dir=tmp_path,
        solver=SolverSpec(),
        bootstrap_resamples=200,
        confidence_level=0.95,
        probability_tolerance=1e-9,
    )


@pytest.fixture
def dataset_of():
    def build(horizon: int, *trajectories: list[tuple[int, int]]) -> Dataset:
        return Dataset(horizon, tuple(Trajectory(tuple(steps)) for steps in trajectories))

    return build
