"""
Verification suites: fixed-seed checks of the exact evaluators against trajectory
enumeration, of the bound calculators against arithmetic fixtures, and of the
inequalities the learners' guarantees rest on. Each check reports the measured
quantity next to the threshold it must not exceed.
"""

import math
from typing import Callable

import numpy as np
from loguru import logger

from imitab.analytics import (
    bound_bc_expected,
    bound_bc_highprob,
    bound_mimic_emp,
    bound_mimic_md_expected,
    decomposition_gap,
    expected_missing_mass,
    expected_unobserved_mass,
    min2_bound,
    min2_grid_check,
    missing_mass_sample,
    pop_01_risk,
    pop_tv_risk,
    reduction_gap,
    tail_check,
    unobserved_visit_probability,
)
from imitab.datasets import index_for, sample_dataset
from imitab.exceptions import InvalidParameter
from imitab.instances import KnownTransition, NoInteraction, make_random
from imitab.learners import behavior_cloning, mimic_emp
from imitab.mdp import enumerate_trajectories, occupancy, value, value_by_enumeration, value_from_occupancy
from imitab.mimic_md import event_probabilities, fit_mimic_md, md_subgradient, solve_opt_subgradient
from imitab.mimic_md.events import l1_distance
from imitab.models import (
    Check,
    EventTable,
    ExpertKind,
    MdpDynamics,
    Policy,
    SolverSpec,
    VerifyReport,
    VisitIndex,
)
from imitab.utils.rng import child_seed, make_rng

ORACLE_TOLERANCE = 1e-9


def _check(name: str, measured: float, threshold: float, detail: str = "") -> Check:
    passed = bool(measured <= threshold)
    if not passed:
        logger.warning(f"check {name} failed: {measured:.6g} > {threshold:.6g} {detail}")
    return Check(name=name, measured=float(measured), threshold=float(threshold), passed=passed, detail=detail)


def random_policy(rng: np.random.Generator, horizon: int, num_states: int, num_actions: int) -> Policy:
    weights = rng.random((horizon, num_states, num_actions)) + 0.05
    return Policy(weights / weights.sum(axis=-1, keepdims=True))


def enumerated_pop_01_risk(mdp: MdpDynamics, expert: Policy, learner: Policy) -> float:
    actions = expert.deterministic_actions()
    total = 0.0
    for trajectory, prob in enumerate_trajectories(mdp, expert):
        total += prob * sum(1.0 - learner.dists[t, s, actions[t, s]] for t, s in enumerate(trajectory.states))
    return total / mdp.horizon


def enumerated_pop_tv_risk(mdp: MdpDynamics, expert: Policy, learner: Policy) -> float:
    total = 0.0
    for trajectory, prob in enumerate_trajectories(mdp, expert):
        total += prob * sum(
            0.5 * np.abs(learner.dists[t, s] - expert.dists[t, s]).sum() for t, s in enumerate(trajectory.states)
        )
    return total / mdp.horizon


def enumerated_state_occupancy(mdp: MdpDynamics, policy: Policy) -> np.ndarray:
    occ = np.zeros((mdp.horizon, mdp.num_states))
    for trajectory, prob in enumerate_trajectories(mdp, policy):
        for t, s in enumerate(trajectory.states):
            occ[t, s] += prob
    return occ


def enumerated_event_probabilities(mdp: MdpDynamics, policy: Policy, index: VisitIndex) -> np.ndarray:
    visited = index.visited_mask
    probs = np.zeros(policy.shape)
    for trajectory, prob in enumerate_trajectories(mdp, policy):
        left = False
        for t, (s, a) in enumerate(trajectory.steps):
            left = left or not visited[t, s]
            if left:
                probs[t, s, a] += prob
    return probs


def dp_oracle_suite(seed: int = 0, solver: SolverSpec = SolverSpec(), instances: int = 100) -> VerifyReport:
    errors: dict[str, float] = dict.fromkeys(
        ["value", "occupancy", "value_from_occupancy", "pop_01_risk", "pop_tv_risk", "event_probabilities"], 0.0
    )
    for i in range(instances):
        rng = make_rng(child_seed(seed, i))
        S, A, H = int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 4))
        bundle = make_random(S, A, H, child_seed(seed, i, 0), ExpertKind("stochastic"))
        mdp = bundle.mdp
        det_expert = Policy.from_actions(rng.integers(0, A, size=(H, S)), A)
        learner = random_policy(rng, H, S, A)
        index = index_for(sample_dataset(mdp.dynamics, det_expert, 2, child_seed(seed, i, 1)), mdp)

        exact_value = value(mdp, learner)
        measured = {
            "value": abs(exact_value - value_by_enumeration(mdp, learner)),
            "occupancy": np.abs(occupancy(mdp, learner).state_occ - enumerated_state_occupancy(mdp, learner)).max(),
            "value_from_occupancy": abs(exact_value - value_from_occupancy(mdp, learner)),
            "pop_01_risk": abs(
                pop_01_risk(mdp, det_expert, learner) - enumerated_pop_01_risk(mdp, det_expert, learner)
            ),
            "pop_tv_risk": abs(
                pop_tv_risk(mdp, bundle.expert, learner) - enumerated_pop_tv_risk(mdp, bundle.expert, learner)
            ),
            "event_probabilities": np.abs(
                event_probabilities(mdp, learner, index).probs - enumerated_event_probabilities(mdp, learner, index)
            ).max(),
        }
        for name, error in measured.items():
            errors[name] = max(errors[name], float(error))
    checks = tuple(
        _check(f"{name} vs enumeration", error, ORACLE_TOLERANCE, f"max abs error over {instances} instances")
        for name, error in errors.items()
    )
    return VerifyReport(suite="dp-oracle", checks=checks)


def bounds_suite(seed: int = 0, solver: SolverSpec = SolverSpec()) -> VerifyReport:
    fixtures = [
        ("bound_bc_expected(4, 5, 10)", bound_bc_expected(4, 5, 10), 40 / 9),
        ("bound_bc_expected(1, 1, 10^12)", bound_bc_expected(1, 1, 10**12), 4 / 9 * 1e-12),
        ("bound_mimic_md_expected(4, 4, 64)", bound_mimic_md_expected(4, 4, 64), 8 / 3),
        ("bound_mimic_emp(1, 1, 3)", bound_mimic_emp(1, 1, 3), math.log(3) / 3),
        (
            "bound_bc_highprob(4, 4, 100, 0.1)",
            bound_bc_highprob(4, 4, 100, 0.1),
            16 * (16 / 900 + 6 * math.log(40) / 100),
        ),
        ("min2_bound(2)", min2_bound(2), math.log(2) / 2),
        ("expected_missing_mass(uniform 2, 1)", expected_missing_mass(np.full(2, 0.5), 1), 0.5),
    ]
    checks = [_check(name, abs(got - want), 1e-12, f"got {got!r}, want {want!r}") for name, got, want in fixtures]

    for n in (2, 10, 100, 10**4):
        grid = min2_grid_check(n)
        checks.append(_check(f"min2 grid n={n}", grid.worst, grid.bound))

    for family, floor in ((NoInteraction, 2), (KnownTransition, 1)):
        for S in (3, 4, 6):
            worst = -math.inf
            for N in range(max(1, S - floor), 10**4 + 1):
                rho = family(S, 2, 1, N).initial_distribution()
                worst = max(worst, (S - floor) / (math.e * (N + 1)) - expected_missing_mass(rho, N))
            checks.append(
                _check(f"missing mass floor {family.tag} S={S}", worst, 0.0, "(S-k)/(e(N+1)) minus expected mass")
            )

    worst = -math.inf
    for i in range(50):
        rng = make_rng(child_seed(seed, i))
        S, H, N = int(rng.integers(1, 6)), int(rng.integers(1, 6)), int(rng.integers(1, 200))
        bundle = make_random(S, 2, H, child_seed(seed, i, 0))
        worst = max(worst, expected_unobserved_mass(bundle.mdp, bundle.expert, N) - 4 / 9 * S / N)
    checks.append(_check("expected unobserved mass <= (4/9) S/N", worst, 0.0))
    return VerifyReport(suite="bounds", checks=tuple(checks))


def reduction_suite(seed: int = 0, solver: SolverSpec = SolverSpec(), triples: int = 1000) -> VerifyReport:
    worst_reduction = worst_bc = worst_identity = -math.inf
    for i in range(triples):
        rng = make_rng(child_seed(seed, i))
        S, A, H = int(rng.integers(1, 6)), int(rng.integers(1, 6)), int(rng.integers(1, 7))
        kind = ExpertKind("stochastic") if i % 2 else ExpertKind("deterministic")
        bundle = make_random(S, A, H, child_seed(seed, i, 0), kind)
        mdp, expert = bundle.mdp, bundle.expert
        gap = reduction_gap(mdp, expert, random_policy(rng, H, S, A))
        worst_reduction = max(worst_reduction, gap.lhs - gap.rhs)

        if not expert.is_deterministic:
            continue
        dataset = sample_dataset(mdp.dynamics, expert, int(rng.integers(1, 10)), child_seed(seed, i, 1))
        learner = behavior_cloning(index_for(dataset, mdp, deterministic=True))
        pop01 = pop_01_risk(mdp, expert, learner)
        bc_gap = value(mdp, expert) - value(mdp, learner)
        worst_bc = max(worst_bc, bc_gap - H**2 * pop01)
        worst_identity = max(worst_identity, abs(pop01 - pop_tv_risk(mdp, expert, learner)))
    return VerifyReport(
        suite="reduction",
        checks=(
            _check("J gap - min{H, H^2 tv}", worst_reduction, ORACLE_TOLERANCE, f"{triples} random triples"),
            _check("BC: J gap - H^2 pop01", worst_bc, ORACLE_TOLERANCE),
            _check("|pop01 - tv| for deterministic experts", worst_identity, 1e-12),
        ),
    )


def concentration_suite(seed: int = 0, solver: SolverSpec = SolverSpec(), replicates: int = 10_000) -> VerifyReport:
    uniform8 = np.full(8, 1 / 8)
    samples = np.array([missing_mass_sample(uniform8, 16, child_seed(seed, 0, r)) for r in range(replicates)])
    stderr = samples.std(ddof=1) / math.sqrt(replicates)
    z = abs(samples.mean() - expected_missing_mass(uniform8, 16)) / stderr
    tail = tail_check(uniform8, 32, 0.1, replicates, seed=child_seed(seed, 1))

    dist = make_rng(child_seed(seed, 2)).dirichlet(np.ones(10))
    masses = np.array([expected_missing_mass(dist, n) for n in range(201)])

    S, A, H, N, datasets = 4, 4, 4, 500, 100
    bundle = make_random(S, A, H, child_seed(seed, 3), ExpertKind("stochastic"))
    dynamics = bundle.mdp.dynamics
    unobserved = []
    for d in range(datasets):
        index = index_for(sample_dataset(dynamics, bundle.expert, N, child_seed(seed, 4, d)), dynamics)
        unobserved.append(unobserved_visit_probability(dynamics, mimic_emp(index), index))
    unobserved = np.array(unobserved)
    unobserved_slack = 3 * unobserved.std(ddof=1) / math.sqrt(datasets)

    return VerifyReport(
        suite="concentration",
        checks=(
            _check("missing mass Monte Carlo z-score", z, 3.0, f"uniform over 8, n=16, {replicates} replicates"),
            _check("missing mass tail coverage", tail.coverage, tail.delta, f"threshold {tail.threshold:.4g}"),
            _check("expected missing mass increase in n", float(np.max(np.diff(masses))), 0.0),
            _check(
                "unobserved visit probability (Mimic-Emp)",
                float(unobserved.mean()),
                S * H * math.log(N) / N + unobserved_slack,
                f"S={S}, H={H}, N={N}, {datasets} datasets",
            ),
        ),
    )


def _decomposition_instance(seed: int, i: int):
    rng = make_rng(child_seed(seed, i))
    S, A, H, N = int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 9))
    if i % 2:
        return KnownTransition(S, A, H, N).build(child_seed(seed, i, 0)), N
    return make_random(S, A, H, child_seed(seed, i, 0)), N


def decomposition_suite(seed: int = 0, solver: SolverSpec = SolverSpec(), instances: int = 100) -> VerifyReport:
    exact = SolverSpec("exact", guard_bits=solver.guard_bits)
    worst_guarantee = worst_identity = -math.inf
    for i in range(instances):
        bundle, N = _decomposition_instance(seed, i)
        mdp, expert = bundle.mdp, bundle.expert
        dataset = sample_dataset(mdp.dynamics, expert, N, child_seed(seed, i, 1))
        fit = fit_mimic_md(mdp.dynamics, dataset, child_seed(seed, i, 2), exact)
        matching_error = l1_distance(event_probabilities(mdp, expert, fit.index_d1), fit.target)
        gap = value(mdp, expert) - value(mdp, fit.policy)
        worst_guarantee = max(worst_guarantee, gap - 2 * matching_error - (fit.epsilon or 0.0))
        worst_identity = max(worst_identity, decomposition_gap(mdp, expert, fit.policy, fit.index_d1))
    return VerifyReport(
        suite="decomposition",
        checks=(
            _check("J gap - (2 L1 matching error + eps)", worst_guarantee, ORACLE_TOLERANCE, f"{instances} instances"),
            _check("decomposition identity", worst_identity, ORACLE_TOLERANCE),
        ),
    )


def finite_difference_error(seed: int) -> float:
    """Relative max-norm error of the adjoint subgradient against central differences at a smooth point."""
    rng = make_rng(seed)
    S, A, H = 3, 2, 3
    bundle = make_random(S, A, H, child_seed(seed, 0))
    mdp = bundle.mdp.dynamics
    visited_mask = rng.random((H, S)) < 0.5
    target = EventTable(rng.random((H, S, A)) * 0.3)
    policy = random_policy(rng, H, S, A)
    _, grad = md_subgradient(mdp, policy, visited_mask, target)

    step = 1e-6
    numeric = np.zeros(policy.shape)
    for cell in np.ndindex(*policy.shape):
        up, down = np.array(policy.dists, copy=True), np.array(policy.dists, copy=True)
        up[cell] += step
        down[cell] -= step
        f_up, _ = md_subgradient(mdp, Policy(up), visited_mask, target)
        f_down, _ = md_subgradient(mdp, Policy(down), visited_mask, target)
        numeric[cell] = (f_up - f_down) / (2 * step)
    return float(np.abs(numeric - grad).max() / max(np.abs(numeric).max(), 1e-12))


def solver_suite(seed: int = 0, solver: SolverSpec = SolverSpec(), instances: int = 100) -> VerifyReport:
    exact = SolverSpec("exact", guard_bits=solver.guard_bits)
    within = 0
    worst_excess = 0.0
    for i in range(instances):
        rng = make_rng(child_seed(seed, i))
        S, H, N = int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 7))
        bundle = make_random(S, 2, H, child_seed(seed, i, 0))
        dynamics = bundle.mdp.dynamics
        dataset = sample_dataset(dynamics, bundle.expert, N, child_seed(seed, i, 1))
        fit = fit_mimic_md(dynamics, dataset, child_seed(seed, i, 2), exact)
        _, approx = solve_opt_subgradient(
            dynamics,
            fit.index_d1,
            fit.target,
            solver.restarts,
            solver.steps,
            child_seed(seed, i, 3),
            step_constant=solver.step_constant,
        )
        excess = approx - fit.objective
        worst_excess = max(worst_excess, excess)
        within += excess <= 1e-3
    fd_worst = max(finite_difference_error(child_seed(seed, 10_000 + k)) for k in range(20))
    return VerifyReport(
        suite="solver",
        checks=(
            _check(
                "share of instances with subgradient > exact + 1e-3",
                1 - within / instances,
                0.05,
                f"worst excess {worst_excess:.3g}",
            ),
            _check("adjoint vs finite differences", fd_worst, 1e-4, "relative max-norm error at 20 points"),
        ),
    )


SUITES: dict[str, Callable[..., VerifyReport]] = {
    "dp-oracle": dp_oracle_suite,
    "bounds": bounds_suite,
    "reduction": reduction_suite,
    "concentration": concentration_suite,
    "decomposition": decomposition_suite,
    "solver": solver_suite,
}


def verify(suite: str, seed: int = 0, solver: SolverSpec = SolverSpec()) -> tuple[VerifyReport, ...]:
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in SUITES:
            raise InvalidParameter(f"unknown verify suite {name!r}; choose from {sorted(SUITES)} or all")
    reports = []
    for name in names:
        logger.info(f"running verify suite {name}")
        reports.append(SUITES[name](seed=seed, solver=solver))
    return tuple(reports)
