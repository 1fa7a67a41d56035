__all__ = [
    "augmented_occupancy",
    "empirical_event_fractions",
    "event_probabilities",
    "fit_mimic_md",
    "free_parameterization",
    "md_objective",
    "md_subgradient",
    "mimic_md",
    "project_simplex",
    "solve_opt_exact",
    "solve_opt_subgradient",
]


from imitab.mimic_md.events import (
    augmented_occupancy,
    empirical_event_fractions,
    event_probabilities,
    md_objective,
    md_subgradient,
)
from imitab.mimic_md.solvers import (
    fit_mimic_md,
    free_parameterization,
    mimic_md,
    project_simplex,
    solve_opt_exact,
    solve_opt_subgradient,
)
