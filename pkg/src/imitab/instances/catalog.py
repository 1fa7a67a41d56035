from typing import Type

from imitab.exceptions import InvalidParameter
from imitab.instances.base import InstanceFamily
from imitab.instances.known_transition import KnownTransition
from imitab.instances.no_interaction import NoInteraction
from imitab.instances.random_mdp import RandomMdp
from imitab.models import ExpertKind, InstanceBundle


def get_family_class(tag: str) -> Type[InstanceFamily]:
    try:
        return {
            NoInteraction.tag: NoInteraction,
            KnownTransition.tag: KnownTransition,
            RandomMdp.tag: RandomMdp,
        }[tag]
    except KeyError:
        raise InvalidParameter(f"unknown instance family {tag!r}")


def make_lb_no_interaction(S: int, A: int, H: int, N: int, seed: int) -> InstanceBundle:
    return NoInteraction(S, A, H, N).build(seed)


def make_lb_known_transition(S: int, A: int, H: int, N: int, seed: int) -> InstanceBundle:
    return KnownTransition(S, A, H, N).build(seed)


def make_random(S: int, A: int, H: int, seed: int, expert_kind: ExpertKind = ExpertKind()) -> InstanceBundle:
    return RandomMdp(S, A, H, expert_kind=expert_kind).build(seed)
