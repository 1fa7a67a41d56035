import numpy as np

from imitab.exceptions import InvalidParameter
from imitab.instances.base import InstanceFamily
from imitab.models import MdpDynamics, Policy, TabularMdp
from imitab.utils.rng import make_rng


def _normalized(variates: np.ndarray) -> np.ndarray:
    return variates / variates.sum(axis=-1, keepdims=True)


class RandomMdp(InstanceFamily):
    """
    Transitions and rho are normalized exponential variates (uniform on the simplex),
    rewards are uniform in [0, 1]. A stochastic expert normalizes gamma(alpha) variates
    per (t, s), so large alpha concentrates it near uniform.
    """

    tag = "random"

    def validate(self) -> None:
        if min(self.num_states, self.num_actions, self.horizon) < 1:
            raise InvalidParameter(f"random instances need positive dimensions, got {self.params}")
        if self.expert_kind.kind == "stochastic" and not self.expert_kind.concentration > 0:
            raise InvalidParameter(f"concentration must be positive, got {self.expert_kind.concentration}")

    def draw_expert(self, rng: np.random.Generator) -> Policy:
        if self.expert_kind.kind == "deterministic":
            return super().draw_expert(rng)
        shape = (self.horizon, self.num_states, self.num_actions)
        return Policy(_normalized(rng.gamma(self.expert_kind.concentration, size=shape)))

    def build_mdp(self, rng: np.random.Generator, expert_actions: np.ndarray) -> TabularMdp:
        S, A, H = self.num_states, self.num_actions, self.horizon
        return TabularMdp(
            num_states=S,
            num_actions=A,
            horizon=H,
            rho=_normalized(rng.standard_exponential(S)),
            transitions=_normalized(rng.standard_exponential((H - 1, S, A, S))),
            rewards=rng.random((H, S, A)),
        )


def perturb_dynamics(dynamics: MdpDynamics, noise: float, seed: int) -> MdpDynamics:
    """Mixes every transition row with a random row: (1 - noise) P + noise Q."""
    if not 0.0 <= noise <= 1.0:
        raise InvalidParameter(f"planning noise must lie in [0, 1], got {noise}")
    rows = _normalized(make_rng(seed).standard_exponential(dynamics.transitions.shape))
    return MdpDynamics(
        num_states=dynamics.num_states,
        num_actions=dynamics.num_actions,
        horizon=dynamics.horizon,
        rho=dynamics.rho,
        transitions=(1.0 - noise) * dynamics.transitions + noise * rows,
    )
