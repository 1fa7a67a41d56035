import numpy as np

from imitab.instances.base import LowerBoundFamily
from imitab.models import TabularMdp


class KnownTransition(LowerBoundFamily):
    """Every state is absorbing; reward 1 exactly for the expert action."""

    tag = "known_transition"
    min_states = 2

    def initial_distribution(self) -> np.ndarray:
        rho = np.full(self.num_states, self.zeta)
        rho[-1] = 1.0 - (self.num_states - 1) * self.zeta
        return rho

    def build_mdp(self, rng: np.random.Generator, expert_actions: np.ndarray) -> TabularMdp:
        S, A, H = self.num_states, self.num_actions, self.horizon
        stay = np.broadcast_to(np.eye(S)[:, None, :], (H - 1, S, A, S))
        return TabularMdp(
            num_states=S,
            num_actions=A,
            horizon=H,
            rho=self.initial_distribution(),
            transitions=stay,
            rewards=np.eye(A)[expert_actions],
        )
