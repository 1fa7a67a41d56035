__all__ = [
    "bound_bc_expected",
    "bound_bc_highprob",
    "bound_lower_known_transition",
    "bound_lower_no_interaction",
    "bound_mimic_emp",
    "bound_mimic_md_expected",
    "bound_mimic_md_highprob",
    "bound_records",
    "compounding_loss",
    "decomposition_gap",
    "emp_01_risk",
    "expected_missing_mass",
    "expected_unobserved_mass",
    "flagged_reward",
    "min2_bound",
    "min2_grid_check",
    "missing_mass_sample",
    "pop_01_risk",
    "pop_tv_risk",
    "reduction_gap",
    "tail_check",
    "unobserved_visit_probability",
]


from imitab.analytics.bounds import (
    bound_bc_expected,
    bound_bc_highprob,
    bound_lower_known_transition,
    bound_lower_no_interaction,
    bound_mimic_emp,
    bound_mimic_md_expected,
    bound_mimic_md_highprob,
    bound_records,
    min2_bound,
    min2_grid_check,
)
from imitab.analytics.missing_mass import expected_missing_mass, missing_mass_sample, tail_check
from imitab.analytics.risks import (
    compounding_loss,
    decomposition_gap,
    emp_01_risk,
    expected_unobserved_mass,
    flagged_reward,
    pop_01_risk,
    pop_tv_risk,
    reduction_gap,
    unobserved_visit_probability,
)
