import numpy as np

from imitab.exceptions import InvalidParameter
from imitab.models import ExpertKind, InstanceBundle, Policy, TabularMdp
from imitab.utils.rng import make_rng


class InstanceFamily:
    tag: str = ""

    def __init__(
        self,
        num_states: int,
        num_actions: int,
        horizon: int,
        num_trajectories: int = 1,
        expert_kind: ExpertKind = ExpertKind(),
    ):
        self.num_states = num_states
        self.num_actions = num_actions
        self.horizon = horizon
        self.num_trajectories = num_trajectories
        self.expert_kind = expert_kind
        self.validate()

    @property
    def params(self) -> dict:
        return {"S": self.num_states, "A": self.num_actions, "H": self.horizon, "N": self.num_trajectories}

    @property
    def notes(self) -> dict:
        """Layout conventions recorded in the instance manifest."""
        return {}

    def validate(self) -> None:
        raise NotImplementedError()

    def build_mdp(self, rng: np.random.Generator, expert_actions: np.ndarray) -> TabularMdp:
        raise NotImplementedError()

    def draw_expert(self, rng: np.random.Generator) -> Policy:
        """One draw from the uniform prior over deterministic experts."""
        actions = rng.integers(0, self.num_actions, size=(self.horizon, self.num_states))
        return Policy.from_actions(actions, self.num_actions)

    def build(self, seed: int) -> InstanceBundle:
        rng = make_rng(seed)
        expert = self.draw_expert(rng)
        mdp = self.build_mdp(rng, expert.dists.argmax(axis=-1))
        return InstanceBundle(mdp=mdp, expert=expert, family=self.tag, seed=seed, params=self.params, notes=self.notes)


class LowerBoundFamily(InstanceFamily):
    """Constructions whose initial distribution puts mass 1/(N+1) on most states."""

    min_states: int = 2

    @property
    def zeta(self) -> float:
        return 1.0 / (self.num_trajectories + 1)

    def initial_distribution(self) -> np.ndarray:
        raise NotImplementedError()

    def validate(self) -> None:
        if self.num_states < self.min_states or self.num_actions < 2 or self.num_trajectories < 1 or self.horizon < 1:
            raise InvalidParameter(
                f"{self.tag} needs S >= {self.min_states}, A >= 2, H >= 1, N >= 1; got {self.params}"
            )
        if self.expert_kind.kind != "deterministic":
            raise InvalidParameter(f"{self.tag} draws deterministic experts only")
        # the bulk state takes whatever mass the zeta states leave
        if self.initial_distribution().min() < 0:
            raise InvalidParameter(f"{self.tag} initial distribution is negative for {self.params}; increase N")
