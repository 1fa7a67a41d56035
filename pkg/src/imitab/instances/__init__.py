__all__ = [
    "InstanceFamily",
    "KnownTransition",
    "NoInteraction",
    "RandomMdp",
    "get_family_class",
    "make_lb_known_transition",
    "make_lb_no_interaction",
    "make_random",
    "perturb_dynamics",
]


from imitab.instances.base import InstanceFamily
from imitab.instances.catalog import (
    get_family_class,
    make_lb_known_transition,
    make_lb_no_interaction,
    make_random,
)
from imitab.instances.known_transition import KnownTransition
from imitab.instances.no_interaction import NoInteraction
from imitab.instances.random_mdp import RandomMdp, perturb_dynamics
