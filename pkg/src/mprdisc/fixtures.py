"""Fixed 8-node deployments used by the ``detect`` command.

The two layouts are reconstructions, not published coordinates: each is drawn
uniformly in a 1 km disk from a named seed and stored under ``data/`` so that
results stay stable even if the sampler changes.
"""
import json
from importlib import resources

from mprdisc.deployment import Deployment, DiskRegion, sample_uniform_disk

FIXTURE_SEEDS = {"deploy1": 20101, "deploy2": 20102}
FIXTURE_NODES = 8
FIXTURE_RADIUS_M = 1000.0


def generate_fixture(name):
    return sample_uniform_disk(FIXTURE_NODES, DiskRegion(FIXTURE_RADIUS_M), seed=FIXTURE_SEEDS[name])


def load_fixture(name):
    if name not in FIXTURE_SEEDS:
        raise KeyError(f"unknown deployment fixture {name!r}")
    text = resources.files("mprdisc").joinpath("data", f"{name}.json").read_text()
    return Deployment.from_dict(json.loads(text))
