import numpy as np

from imitab.instances.base import LowerBoundFamily
from imitab.models import TabularMdp


class NoInteraction(LowerBoundFamily):
    """
    Any non-expert action sends the episode to the absorbing bad state (index S-1) where
    no reward is paid; the expert action at a good state renews the initial distribution
    rho = (zeta, ..., zeta, 1 - (S-2) zeta, 0).
    """

    tag = "no_interaction"
    min_states = 3

    @property
    def notes(self) -> dict:
        return {"bad_state": self.num_states - 1}

    def initial_distribution(self) -> np.ndarray:
        S = self.num_states
        rho = np.full(S, self.zeta)
        rho[S - 2] = 1.0 - (S - 2) * self.zeta
        rho[S - 1] = 0.0
        return rho

    def build_mdp(self, rng: np.random.Generator, expert_actions: np.ndarray) -> TabularMdp:
        S, A, H = self.num_states, self.num_actions, self.horizon
        bad = S - 1
        rho = self.initial_distribution()

        transitions = np.zeros((H - 1, S, A, S))
        transitions[..., bad] = 1.0
        t, s = np.meshgrid(np.arange(H - 1), np.arange(bad), indexing="ij")
        transitions[t, s, expert_actions[: H - 1, :bad]] = rho

        rewards = np.zeros((H, S, A))
        t, s = np.meshgrid(np.arange(H), np.arange(bad), indexing="ij")
        rewards[t, s, expert_actions[:, :bad]] = 1.0
        return TabularMdp(num_states=S, num_actions=A, horizon=H, rho=rho, transitions=transitions, rewards=rewards)
