import json

import numpy as np
import pytest

from imitab.datasets import index_for
from imitab.exceptions import ConfigError, DimensionMismatch
from imitab.instances import make_lb_known_transition, make_lb_no_interaction
from imitab.mimic_md import event_probabilities
from imitab.models import Dataset, Policy, Trajectory
from imitab.utils.jsonio import (
    dataset_from_dict,
    dataset_to_dict,
    event_table_to_list,
    load_json,
    mdp_from_dict,
    mdp_to_dict,
    policy_from_dict,
    save_instance,
)


def test_save_instance(tmp_path):
    bundle = make_lb_no_interaction(4, 2, 3, 10, 5)
    mdp_path, expert_path, manifest_path = save_instance(bundle, tmp_path / "lb" / "inst.json")
    assert expert_path.name == "inst.expert.json"
    assert manifest_path.name == "inst.manifest.json"

    mdp = mdp_from_dict(load_json(mdp_path))
    np.testing.assert_array_equal(mdp.transitions, bundle.mdp.transitions)
    np.testing.assert_array_equal(mdp.rho, bundle.mdp.rho)
    expert = policy_from_dict(load_json(expert_path))
    np.testing.assert_array_equal(expert.dists, bundle.expert.dists)
    assert load_json(manifest_path) == {
        "family": "no_interaction",
        "seed": 5,
        "params": {"S": 4, "A": 2, "H": 3, "N": 10},
        "bad_state": 3,
    }


def test_known_transition_manifest_has_no_notes(tmp_path):
    bundle = make_lb_known_transition(3, 2, 2, 5, 0)
    _, _, manifest_path = save_instance(bundle, tmp_path / "kt.json")
    assert "bad_state" not in load_json(manifest_path)


def test_event_table_export(two_step_mdp):
    index = index_for(Dataset(2, (Trajectory(((0, 0), (1, 1))),)), two_step_mdp)
    table = event_probabilities(two_step_mdp, Policy.uniform(2, 2, 2), index)
    exported = event_table_to_list(table)
    assert json.loads(json.dumps(exported)) == exported
    assert np.array(exported).shape == (2, 2, 2)
    # only the unvisited state 0 at time 1 carries flagged mass
    assert exported[1][0] == [0.25, 0.25]
    assert exported[1][1] == [0.0, 0.0]
    assert sum(map(sum, exported[0])) == 0.0


def test_mdp_dict_layout(two_step_mdp):
    data = mdp_to_dict(two_step_mdp)
    assert data["rho"] == [1.0, 0.0]
    assert len(data["transitions"]) == 1
    assert data["rewards"][0][0] == [1.0, 0.0]


def test_mdp_from_dict_errors(two_step_mdp):
    data = mdp_to_dict(two_step_mdp)
    del data["rewards"]
    with pytest.raises(ConfigError):
        mdp_from_dict(data)
    data = mdp_to_dict(two_step_mdp) | {"horizon": 3}
    with pytest.raises(DimensionMismatch):
        mdp_from_dict(data)


def test_dataset_dict():
    dataset = Dataset(2, (Trajectory(((0, 1), (1, 0))), Trajectory(((1, 1), (1, 1)))))
    data = dataset_to_dict(dataset)
    assert json.loads(json.dumps(data)) == {"horizon": 2, "trajectories": [[[0, 1], [1, 0]], [[1, 1], [1, 1]]]}
    assert dataset_from_dict(data) == dataset


def test_load_json_errors(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_json(path)
