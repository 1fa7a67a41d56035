"""
JSON encodings for MDPs, policies, datasets, event tables and instance manifests.

Floats go through `repr`-exact json encoding (shortest round-trip form, at most 17
significant digits), so save/load round-trips bit-exactly.
"""

import json
from pathlib import Path

import numpy as np

from imitab.exceptions import ConfigError
from imitab.models import (
    Dataset,
    EventTable,
    InstanceBundle,
    Policy,
    TabularMdp,
    Trajectory,
)


def mdp_to_dict(mdp: TabularMdp) -> dict:
    return {
        "num_states": mdp.num_states,
        "num_actions": mdp.num_actions,
        "horizon": mdp.horizon,
        "rho": mdp.rho.tolist(),
        "transitions": mdp.transitions.tolist(),
        "rewards": mdp.rewards.tolist(),
    }


def mdp_from_dict(data: dict) -> TabularMdp:
    try:
        return TabularMdp(
            num_states=int(data["num_states"]),
            num_actions=int(data["num_actions"]),
            horizon=int(data["horizon"]),
            rho=np.array(data["rho"], dtype=float),
            transitions=np.array(data["transitions"], dtype=float),
            rewards=np.array(data["rewards"], dtype=float),
        )
    except KeyError as e:
        raise ConfigError(f"MDP document is missing key {e}")


def policy_to_dict(policy: Policy) -> dict:
    return {"dists": policy.dists.tolist()}


def policy_from_dict(data: dict) -> Policy:
    return Policy(np.array(data["dists"], dtype=float))


def dataset_to_dict(dataset: Dataset) -> dict:
    return {
        "horizon": dataset.horizon,
        "trajectories": [[[s, a] for s, a in trajectory.steps] for trajectory in dataset.trajectories],
    }


def dataset_from_dict(data: dict) -> Dataset:
    return Dataset(
        horizon=int(data["horizon"]),
        trajectories=tuple(
            Trajectory(tuple((int(s), int(a)) for s, a in steps)) for steps in data["trajectories"]
        ),
    )


def event_table_to_list(table: EventTable) -> list:
    return table.probs.tolist()


def manifest_for(bundle: InstanceBundle) -> dict:
    return {"family": bundle.family, "seed": bundle.seed, "params": bundle.params} | bundle.notes


def save_json(data: dict | list, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)


def load_json(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}")


def save_instance(bundle: InstanceBundle, path: Path) -> tuple[Path, Path, Path]:
    """Writes <path> (MDP), <path>.expert.json and <path>.manifest.json."""
    expert_path = path.with_suffix(".expert.json")
    manifest_path = path.with_suffix(".manifest.json")
    save_json(mdp_to_dict(bundle.mdp), path)
    save_json(policy_to_dict(bundle.expert), expert_path)
    save_json(manifest_for(bundle), manifest_path)
    return path, expert_path, manifest_path
