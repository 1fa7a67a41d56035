import json
from importlib.resources import as_file, files
from pathlib import Path


def get_resource_file(filename: str) -> Path:
    with as_file(files("imitab.resources").joinpath(filename)) as resource_file:
        return resource_file


def list_experiment_presets() -> list[str]:
    presets = files("imitab.resources.experiments")
    return sorted(p.name.removesuffix(".json") for p in presets.iterdir() if p.name.endswith(".json"))


def read_experiment_preset(name: str) -> dict:
    preset = files("imitab.resources.experiments").joinpath(f"{name}.json")
    return json.loads(preset.read_text(encoding="utf-8"))
