from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from imitab.exceptions import DimensionMismatch, StochasticExpert

PROBABILITY_TOLERANCE = 1e-9

# markers stored in VisitIndex.expert_action
UNVISITED = -1
MULTI_ACTION = -2


def frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _check_shape(name: str, array: np.ndarray, shape: tuple[int, ...]) -> None:
    if array.shape != shape:
        raise DimensionMismatch(f"{name} has shape {array.shape}, expected {shape}")


@dataclass(frozen=True, eq=False)
class MdpDynamics:
    """Reward-free view of an episodic MDP: what a learner is allowed to see.

    transitions[t] holds P_{t+1}(.|s, a) for t = 0..H-2 (0-based time), so there is
    no transition after the last action.
    """

    num_states: int
    num_actions: int
    horizon: int
    rho: np.ndarray
    transitions: np.ndarray

    def __post_init__(self):
        if min(self.num_states, self.num_actions, self.horizon) < 1:
            raise DimensionMismatch(
                f"dimensions must be positive, got S={self.num_states} A={self.num_actions} H={self.horizon}"
            )
        object.__setattr__(self, "rho", frozen_array(self.rho))
        transitions = np.asarray(self.transitions, dtype=float)
        if transitions.size == 0 and self.horizon == 1:
            transitions = np.zeros((0, self.num_states, self.num_actions, self.num_states))
        object.__setattr__(self, "transitions", frozen_array(transitions))
        _check_shape("rho", self.rho, (self.num_states,))
        _check_shape(
            "transitions", self.transitions, (self.horizon - 1, self.num_states, self.num_actions, self.num_states)
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.horizon, self.num_states, self.num_actions


@dataclass(frozen=True, eq=False)
class TabularMdp(MdpDynamics):
    rewards: np.ndarray

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "rewards", frozen_array(self.rewards))
        _check_shape("rewards", self.rewards, (self.horizon, self.num_states, self.num_actions))

    @property
    def dynamics(self) -> MdpDynamics:
        return MdpDynamics(
            num_states=self.num_states,
            num_actions=self.num_actions,
            horizon=self.horizon,
            rho=self.rho,
            transitions=self.transitions,
        )


@dataclass(frozen=True, eq=False)
class Policy:
    """Non-stationary stochastic policy, dists[t, s] is pi_{t+1}(.|s)."""

    dists: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dists", frozen_array(self.dists))
        if self.dists.ndim != 3:
            raise DimensionMismatch(f"policy dists must be [H][S][A], got shape {self.dists.shape}")

    @classmethod
    def uniform(cls, horizon: int, num_states: int, num_actions: int) -> "Policy":
        return cls(np.full((horizon, num_states, num_actions), 1.0 / num_actions))

    @classmethod
    def from_actions(cls, actions: np.ndarray, num_actions: int) -> "Policy":
        actions = np.asarray(actions, dtype=np.int64)
        return cls(np.eye(num_actions)[actions])

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.dists.shape  # type: ignore

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(self.dists.max(axis=-1) == 1.0))

    def deterministic_actions(self) -> np.ndarray:
        if not self.is_deterministic:
            raise StochasticExpert("policy is not a point mass at every (t, s)")
        return self.dists.argmax(axis=-1)


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[tuple[int, int], ...]

    @property
    def states(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.steps)

    @property
    def actions(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True, eq=False)
class OccupancyTable:
    state_occ: np.ndarray
    state_action_occ: np.ndarray


@dataclass(frozen=True)
class Violation:
    location: str
    residual: float
    message: str


@dataclass(frozen=True)
class Dataset:
    horizon: int
    trajectories: tuple[Trajectory, ...] = ()

    def __len__(self) -> int:
        return len(self.trajectories)

    def as_array(self) -> np.ndarray:
        """[N][H][2] integer array of (state, action) pairs."""
        if len(self.trajectories) == 0:
            return np.zeros((0, self.horizon, 2), dtype=np.int64)
        return np.array([t.steps for t in self.trajectories], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class VisitIndex:
    num_states: int
    num_actions: int
    horizon: int
    counts: np.ndarray
    expert_action: np.ndarray

    @property
    def num_trajectories(self) -> int:
        return int(self.counts[0].sum()) if self.horizon > 0 else 0

    @property
    def visited_mask(self) -> np.ndarray:
        return self.counts.sum(axis=-1) > 0

    @property
    def visited(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(np.flatnonzero(row).tolist()) for row in self.visited_mask)

    @property
    def is_deterministic(self) -> bool:
        return not bool(np.any(self.expert_action == MULTI_ACTION))


@dataclass(frozen=True)
class SplitPair:
    d1: Dataset
    d2: Dataset
    permutation: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class EventTable:
    probs: np.ndarray


@dataclass(frozen=True, eq=False)
class AugmentedOccupancy:
    """g[t, s, flag]; flag = 1 once some tau <= t had s_tau outside the visited set."""

    g: np.ndarray


@dataclass(frozen=True, eq=False)
class FreeParameterization:
    free_cells: tuple[tuple[int, int], ...]
    pinned: Policy

    def policy(self, values: np.ndarray) -> Policy:
        dists = np.array(self.pinned.dists, copy=True)
        for (t, s), row in zip(self.free_cells, values):
            dists[t, s] = row
        return Policy(dists)


@dataclass(frozen=True)
class Completion:
    kind: Literal["uniform", "fixed_action"] = "uniform"
    action: int = 0


@dataclass(frozen=True)
class ExpertKind:
    kind: Literal["deterministic", "stochastic"] = "deterministic"
    concentration: float = 1.0


@dataclass(frozen=True)
class SolverSpec:
    kind: Literal["exact", "subgradient"] = "exact"
    restarts: int = 8
    steps: int = 500
    step_constant: float = 0.5
    guard_bits: int = 24
    certify: bool = False
    workers: int = 1


@dataclass(frozen=True, eq=False)
class MimicMdFit:
    policy: Policy
    objective: float
    epsilon: float | None
    split: SplitPair
    target: EventTable
    index_d1: VisitIndex


@dataclass(frozen=True, eq=False)
class InstanceBundle:
    mdp: TabularMdp
    expert: Policy
    family: str
    seed: int
    params: dict
    notes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ReductionGap:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + PROBABILITY_TOLERANCE


@dataclass(frozen=True)
class Min2Check:
    n: int
    bound: float
    worst: float
    passed: bool


@dataclass(frozen=True)
class TailCheck:
    threshold: float
    expected: float
    coverage: float
    delta: float

    @property
    def passed(self) -> bool:
        return self.coverage <= self.delta


@dataclass(frozen=True)
class BoundRecord:
    name: str
    inputs: dict
    value: float


@dataclass(frozen=True)
class ExperimentConfig:
    family: Literal["no_interaction", "known_transition", "random"]
    algorithm: Literal["bc", "mimic_emp", "mimic_md", "active_bc"]
    sweep_axis: Literal["N", "H", "S"]
    grid: tuple[int, ...]
    num_states: int
    num_actions: int
    horizon: int
    num_trajectories: int
    replicates: int = 1
    base_seed: int = 0
    expert_kind: ExpertKind = ExpertKind()
    completion: Completion = Completion()
    solver: SolverSpec = SolverSpec()
    planning_noise: float = 0.0
    workers: int = 1
    timing: bool = False
    output: Path | None = None

    def point(self, x: int) -> tuple[int, int, int, int]:
        """(S, A, H, N) at sweep value x."""
        dims = {"S": self.num_states, "H": self.horizon, "N": self.num_trajectories}
        dims[self.sweep_axis] = x
        return dims["S"], self.num_actions, dims["H"], dims["N"]


CSV_COLUMNS = (
    "family",
    "algo",
    "S",
    "A",
    "H",
    "N",
    "replicate",
    "seed",
    "suboptimality",
    "pop01",
    "tv",
    "objective",
    "epsilon",
    "status",
    "wall_ms",
)


@dataclass(frozen=True)
class ExperimentResult:
    family: str
    algo: str
    num_states: int
    num_actions: int
    horizon: int
    num_trajectories: int
    replicate: int
    seed: int
    suboptimality: float | None
    pop01: float | None
    tv: float | None
    objective: float | None = None
    epsilon: float | None = None
    status: str = "ok"
    wall_ms: int = 0

    def axis_value(self, axis: Literal["N", "H", "S"]) -> int:
        return {"N": self.num_trajectories, "H": self.horizon, "S": self.num_states}[axis]

    def as_row(self) -> tuple:
        return (
            self.family,
            self.algo,
            self.num_states,
            self.num_actions,
            self.horizon,
            self.num_trajectories,
            self.replicate,
            self.seed,
            self.suboptimality,
            self.pop01,
            self.tv,
            self.objective,
            self.epsilon,
            self.status,
            self.wall_ms,
        )


@dataclass(frozen=True)
class RatePoint:
    x: int
    mean: float
    stderr: float
    count: int
    excluded: bool = False


@dataclass(frozen=True)
class RateFit:
    x_axis: Literal["N", "H", "S"]
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    points: tuple[RatePoint, ...]


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    suite: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True)
class AppConfig:
    workers: int
    log_level: str
    output_dir: Path
    solver: SolverSpec
    bootstrap_resamples: int
    confidence_level: float
    probability_tolerance: float
