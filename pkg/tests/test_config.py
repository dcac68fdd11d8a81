from pathlib import Path

import pytest
import yaml

from neurite_growth.core.config import ConfigError, ExperimentConfig, load_config
from neurite_growth.core.functions import Affine
from neurite_growth.core.presets import get_preset, preset_names

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("*.yaml")))
def test_shipped_configs_load(name):
    config = load_config(CONFIG_DIR / name)
    resolved = config.build()
    assert resolved.grid.n_cells == config.n_cells
    assert resolved.state.n_neurites == resolved.params.n_neurites


def test_preset_expansion(write_config):
    config = load_config(write_config({"name": "exp", "preset": "experiment-1"}))
    resolved = config.build()
    preset = get_preset("experiment-1")
    assert resolved.params == preset.params
    assert resolved.state.lengths == (1.1, 1.0)
    assert resolved.state.lambda_cone == (0.25, 1.5)
    assert config.n_cells == 100
    assert config.output.directory == "runs/exp"
    assert config.stepper.tau == 1e-4


def test_presets_are_listed():
    assert set(preset_names()) == {"section4-linear", "experiment-1", "experiment-1-large-alpha",
                                   "experiment-2", "closed-box"}
    with pytest.raises(ValueError, match="Unknown preset"):
        get_preset("nope")


def test_overrides_reach_params_and_functions(write_config):
    config = load_config(write_config({
        "name": "exp",
        "preset": "experiment-1",
        "params": {"kappa_v": 0.05},
        "functions": {"alpha_plus": {"kind": "affine", "offset": 0.0, "slope": 0.5}},
        "initial": {"f_plus": 0.2},
    }))
    resolved = config.build()
    assert resolved.params.kappa_v == 0.05
    assert resolved.functions.alpha_plus == (Affine(0.0, 0.5), Affine(0.0, 0.5))
    assert resolved.state.fields[1].f_plus[0] == 0.2


def test_scalar_per_neurite_param_applies_to_every_neurite(write_config):
    config = load_config(write_config({"name": "exp", "params": {"ell_min": 0.05}}))
    assert config.build().params.ell_min == (0.05, 0.05)


def test_length_below_minimum_names_field_and_line(write_config):
    path = write_config("name: short\n"
                        "preset: experiment-1\n"
                        "initial:\n"
                        "  lengths: [0.05, 1.0]\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    error = info.value
    assert error.field == "initial.lengths[0]"
    assert error.hypothesis == "H0"
    assert error.line == 4
    assert str(error).startswith(f"{path}:4: initial.lengths[0]:")
    assert str(error).endswith("(violates H0)")


def test_density_above_cap_is_rejected(write_config):
    with pytest.raises(ConfigError) as info:
        load_config(write_config({"name": "full", "initial": {"f_plus": [3.0, 0.1]}}))
    assert info.value.hypothesis == "H1"
    assert info.value.field == "initial.f_plus[0]"


def test_negative_soma_amount_is_rejected(write_config):
    with pytest.raises(ConfigError) as info:
        load_config(write_config({"name": "empty", "initial": {"lambda_som": 0.0}}))
    assert info.value.field == "initial.lambda_som"


def test_params_and_scales_are_exclusive(write_config):
    with pytest.raises(ConfigError, match="either"):
        load_config(write_config({"name": "both", "params": {"kappa_v": 1.0},
                                  "scales": "paper-2023"}))


def test_named_scales(write_config):
    config = load_config(write_config({"name": "scaled", "preset": "section4-linear",
                                       "scales": "paper-2023"}))
    assert config.build().params.kappa_v == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        load_config(write_config({"name": "scaled", "scales": "paper-1999"}))


def test_yaml_error_carries_a_line(write_config):
    with pytest.raises(ConfigError) as info:
        load_config(write_config("name: broken\nsolver: {tau: 1.0e-3\n"))
    assert info.value.line is not None
    assert "YAML" in str(info.value)


def test_non_mapping_document(write_config):
    with pytest.raises(ConfigError, match="mapping"):
        load_config(write_config("- just\n- a list\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.yaml")


@pytest.mark.parametrize("data, field", [
    ({"name": "x", "plotting": {}}, "plotting"),
    ({"name": "x", "initial": {"length": [1.0, 1.0]}}, "initial.length"),
    ({"name": "x", "output": {"format": "hdf5"}}, "output"),
    ({"name": "x", "solver": {"tau": -1.0}}, "solver"),
    ({"name": "x", "solver": {"n_cells": 2}}, "solver.n_cells"),
    ({"name": "x", "params": {"kappa_x": 1.0}}, "params"),
])
def test_invalid_sections(write_config, data, field):
    with pytest.raises(ConfigError) as info:
        load_config(write_config(data))
    assert info.value.field == field


def test_unknown_function_kind(write_config):
    with pytest.raises(ConfigError, match="Unknown function kind"):
        load_config(write_config({"name": "x", "functions": {"h": {"kind": "spline"}}}))


def test_sweep_configs(write_config):
    config = load_config(CONFIG_DIR / "experiment-1.yaml")
    weak, strong = config.sweep_configs()
    assert weak.name == "experiment-1-weak-release"
    assert strong.output.directory == "runs/experiment-1/strong-release"
    assert strong.build().functions.alpha_plus[0] == Affine(0.0, 0.5)
    assert weak.build().functions.alpha_plus[0] == Affine(0.0, 0.025)
    assert strong.sweep == []
    assert strong.stepper.snapshot_times == config.stepper.snapshot_times


def test_refined_levels(write_config, small_closed_box):
    config = load_config(write_config(small_closed_box))
    level = config.refined(2)
    assert level.n_cells == 80
    assert level.stepper.tau == pytest.approx(2.5e-4)
    assert level.stepper.t_end == config.stepper.t_end
    assert level.output.directory == "small-box/level2"
    assert level.name == "small-box-level2"


def test_output_dir_is_under_the_root(write_config, small_closed_box, tmp_path):
    config = load_config(write_config(small_closed_box))
    assert config.output_dir(tmp_path) == tmp_path / "small-box"
    assert config.output_dir() == Path("small-box")


def test_resolved_dict_reloads(write_config):
    config = load_config(CONFIG_DIR / "experiment-2.yaml")
    data = yaml.safe_load(yaml.safe_dump(config.to_dict()))
    assert data["solver"]["n_cells"] == config.n_cells
    assert data["solver"]["eta"] == config.eta
    reloaded = ExperimentConfig.from_dict(data)
    a, b = config.build(), reloaded.build()
    assert a.params == b.params
    assert a.functions == b.functions
    assert a.stepper.tau == b.stepper.tau
    assert a.state.lengths == b.state.lengths


def test_stationary_section():
    config = load_config(CONFIG_DIR / "stationary.yaml")
    assert config.stationary.probe_steps == 10000
    assert config.stationary.caps == (6000.0, 100.0)
    assert config.to_dict()["stationary"]["caps"] == [6000.0, 100.0]
