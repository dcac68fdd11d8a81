# tests/conftest.py
# Shared fixtures and the slow-test switch

from pathlib import Path

import pytest
import yaml

from neurite_growth.core.discretization import Grid1D
from neurite_growth.core.presets import get_preset

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the long experiment tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long full-resolution runs, need --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid():
    return Grid1D(20)


@pytest.fixture
def section4():
    preset = get_preset("section4-linear")
    return preset, preset.functions()


@pytest.fixture
def experiment_1():
    preset = get_preset("experiment-1")
    return preset, preset.functions()


@pytest.fixture
def closed_box():
    preset = get_preset("closed-box")
    return preset, preset.functions()


@pytest.fixture
def write_config(tmp_path):
    """Write a config mapping (or raw text) to tmp_path and return its path"""

    def write(data, name="config.yaml"):
        path = tmp_path / name
        if isinstance(data, str):
            path.write_text(data)
        else:
            path.write_text(yaml.safe_dump(data, sort_keys=False))
        return path

    return write


@pytest.fixture
def small_closed_box():
    return {
        "name": "small-box",
        "preset": "closed-box",
        "solver": {"n_cells": 20, "tau": 1.0e-3, "t_end": 0.01},
        "output": {"directory": "small-box", "snapshot_times": [0.0, 0.01], "plots": False},
    }
