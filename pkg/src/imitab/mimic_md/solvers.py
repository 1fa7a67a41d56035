"""
Solvers for the Mimic-MD minimum-distance problem over policies that copy the expert on
every (t, s) visited in D1, plus the end-to-end learner.
"""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from loguru import logger

from imitab.datasets import index_for, split_dataset
from imitab.exceptions import EmptyDataset, InvalidParameter, SolverGuardExceeded
from imitab.learners import behavior_cloning
from imitab.mimic_md.events import (
    augmented_occupancy,
    empirical_event_fractions,
    event_probabilities,
    l1_distance,
    md_subgradient,
)
from imitab.models import (
    UNVISITED,
    Dataset,
    EventTable,
    FreeParameterization,
    MdpDynamics,
    MimicMdFit,
    Policy,
    SolverSpec,
    VisitIndex,
)
from imitab.utils.rng import child_seed, make_rng

TIE_TOLERANCE = 1e-12


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.atleast_2d(v)
    n = v.shape[-1]
    u = -np.sort(-v, axis=-1)
    cssv = np.cumsum(u, axis=-1) - 1.0
    positive = u - cssv / np.arange(1, n + 1) > 0
    rho = n - 1 - np.argmax(positive[:, ::-1], axis=-1)
    theta = cssv[np.arange(len(v)), rho] / (rho + 1.0)
    return np.maximum(v - theta[:, None], 0.0)


def free_parameterization(index_d1: VisitIndex) -> FreeParameterization:
    pinned = behavior_cloning(index_d1)
    free_cells = tuple((int(t), int(s)) for t, s in np.argwhere(index_d1.expert_action == UNVISITED))
    return FreeParameterization(free_cells=free_cells, pinned=pinned)


def _is_coupled(mdp: MdpDynamics, t: int, s: int) -> bool:
    """Whether the action at (t, s) can change where the episode goes next."""
    if t == mdp.horizon - 1:
        return False
    rows = mdp.transitions[t, s]
    return not bool(np.all(rows == rows[0]))


def solve_opt_exact(
    mdp: MdpDynamics, index_d1: VisitIndex, target: EventTable, guard_bits: int = 24
) -> tuple[Policy, float]:
    """
    Global minimizer over deterministic completions of the free cells.

    Free cells whose action leaves the next-state distribution unchanged touch only their
    own objective terms, so they are set per cell in closed form; only the remaining
    coupled cells are enumerated, in lexicographic (t, s, a) order. Ties keep the first
    completion found and the lowest action index.
    """
    param = free_parameterization(index_d1)
    coupled = [i for i, (t, s) in enumerate(param.free_cells) if _is_coupled(mdp, t, s)]
    local = sorted(set(range(len(param.free_cells))) - set(coupled))
    bits = len(coupled) * math.log2(mdp.num_actions)
    if bits > guard_bits:
        raise SolverGuardExceeded(
            f"{len(coupled)} coupled free cells need 2^{bits:.1f} completions (guard 2^{guard_bits}); "
            "use the subgradient solver"
        )

    eye = np.eye(mdp.num_actions)
    visited_mask = index_d1.visited_mask
    values = np.tile(eye[0], (len(param.free_cells), 1))
    best_policy, best_objective = param.pinned, math.inf
    for combo in itertools.product(range(mdp.num_actions), repeat=len(coupled)):
        if coupled:
            values[coupled] = eye[list(combo)]
        if local:
            g = augmented_occupancy(mdp, param.policy(values), visited_mask).g
            for i in local:
                t, s = param.free_cells[i]
                costs = np.abs(g[t, s, 1] * eye - target.probs[t, s]).sum(axis=1)
                values[i] = eye[np.flatnonzero(costs <= costs.min() + TIE_TOLERANCE)[0]]
        candidate = param.policy(values)
        objective = l1_distance(event_probabilities(mdp, candidate, index_d1), target)
        if objective < best_objective - TIE_TOLERANCE:
            best_policy, best_objective = candidate, objective
    return best_policy, best_objective


def _run_restart(
    mdp: MdpDynamics,
    param: FreeParameterization,
    visited_mask: np.ndarray,
    target: EventTable,
    steps: int,
    step_constant: float,
    seed: int,
    restart: int,
) -> tuple[float, int, np.ndarray]:
    cells = tuple(np.array(param.free_cells).T)
    num_cells, num_actions = len(param.free_cells), mdp.num_actions
    values = (
        np.full((num_cells, num_actions), 1.0 / num_actions)
        if restart == 0
        else make_rng(seed).dirichlet(np.ones(num_actions), size=num_cells)
    )
    best_objective, best_values = math.inf, values
    for k in range(1, steps + 1):
        objective, grad = md_subgradient(mdp, param.policy(values), visited_mask, target)
        if objective < best_objective:
            best_objective, best_values = objective, values
        values = project_simplex(values - step_constant / math.sqrt(k) * grad[cells])

    rounded = np.eye(num_actions)[values.argmax(axis=-1)]
    for candidate in (values, rounded):
        objective, _ = md_subgradient(mdp, param.policy(candidate), visited_mask, target)
        if objective < best_objective:
            best_objective, best_values = objective, candidate
    return best_objective, restart, best_values


def solve_opt_subgradient(
    mdp: MdpDynamics,
    index_d1: VisitIndex,
    target: EventTable,
    restarts: int = 8,
    steps: int = 500,
    seed: int = 0,
    *,
    step_constant: float = 0.5,
    workers: int = 1,
) -> tuple[Policy, float]:
    """
    Projected subgradient descent on the free simplex cells with step c/sqrt(k).
    Restart 0 starts from the uniform completion, the others from seeded random points;
    the best exact objective over every iterate of every restart wins, ties going to the
    lower restart index.
    """
    if restarts < 1 or steps < 0:
        raise InvalidParameter(f"subgradient solver needs restarts >= 1 and steps >= 0, got {restarts} and {steps}")
    param = free_parameterization(index_d1)
    if not param.free_cells:
        return param.pinned, l1_distance(event_probabilities(mdp, param.pinned, index_d1), target)

    jobs = [
        (mdp, param, index_d1.visited_mask, target, steps, step_constant, child_seed(seed, r), r)
        for r in range(restarts)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_restart, *zip(*jobs)))
    else:
        results = [_run_restart(*job) for job in jobs]
    for objective, restart, _ in results:
        logger.debug(f"subgradient restart {restart}: objective {objective:.6g}")
    objective, _, values = min(results, key=lambda r: (r[0], r[1]))
    return param.policy(values), objective


def fit_mimic_md(
    mdp: MdpDynamics,
    dataset: Dataset,
    seed: int,
    solver: SolverSpec = SolverSpec(),
    *,
    planning: MdpDynamics | None = None,
) -> MimicMdFit:
    """
    :param planning:
        dynamics used to compute event probabilities inside the objective when the learner
        only knows the transitions approximately; defaults to `mdp`
    """
    index_for(dataset, mdp, deterministic=True)
    split = split_dataset(dataset, seed)
    if len(split.d2) == 0:
        raise EmptyDataset(f"Mimic-MD needs a nonempty D2, got {len(dataset)} trajectories")
    index_d1 = index_for(split.d1, mdp, deterministic=True)
    target = empirical_event_fractions(split.d2, index_d1)
    model = planning if planning is not None else mdp

    epsilon: float | None
    if solver.kind == "exact":
        policy, objective = solve_opt_exact(model, index_d1, target, solver.guard_bits)
        epsilon = 0.0
    else:
        policy, objective = solve_opt_subgradient(
            model,
            index_d1,
            target,
            solver.restarts,
            solver.steps,
            child_seed(seed, 1),
            step_constant=solver.step_constant,
            workers=solver.workers,
        )
        epsilon = None
        if solver.certify:
            try:
                _, optimum = solve_opt_exact(model, index_d1, target, solver.guard_bits)
                epsilon = max(0.0, objective - optimum)
            except SolverGuardExceeded:
                logger.debug("instance exceeds the enumeration guard, epsilon left uncertified")
    return MimicMdFit(
        policy=policy, objective=objective, epsilon=epsilon, split=split, target=target, index_d1=index_d1
    )


def mimic_md(
    mdp: MdpDynamics, dataset: Dataset, seed: int, solver: SolverSpec = SolverSpec()
) -> Policy:
    return fit_mimic_md(mdp, dataset, seed, solver).policy
