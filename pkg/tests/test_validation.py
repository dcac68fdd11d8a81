import math

import numpy as np
import pytest

from neurite_growth.core.discretization import Grid1D, GridError
from neurite_growth.core.integrator import StepperConfig, run
from neurite_growth.core.model import NeuriteField, SimState
from neurite_growth.core.validation import (
    MassLedger, box_constraint_monitor, build_report, density_distance, hypothesis_diagnostics,
    mass_balance_series, membrane_mass, observed_orders, refinement_slope, snapshot_within_box,
    total_mass,
)


def _state(n, f_plus, f_minus=0.0, lengths=(1.0, 1.0)):
    fields = tuple(NeuriteField.constant(n, f_plus, f_minus) for _ in lengths)
    return SimState(fields=fields, lambda_som=1.0, lambda_cone=(1.0, 1.0), lengths=lengths)


def test_total_mass_counts_neurites_and_pools(closed_box):
    preset, _ = closed_box
    p = preset.params
    grid = Grid1D(10)
    state = _state(10, 0.25, 0.25, lengths=(1.0, 2.0))
    expected = p.neurite_mass_unit * 0.5 * 3.0 + 2 * p.cone_mass_unit + p.som_mass_unit
    # closed-box lengths are static, so no membrane term
    assert membrane_mass(state, p) == 0.0
    assert total_mass(state, grid, p) == pytest.approx(expected)
    assert total_mass(state, grid, p, summation="forward") == pytest.approx(expected)


def test_pairwise_sum_is_no_worse_than_forward(closed_box):
    preset, _ = closed_box
    p = preset.params.with_overrides({"neurite_mass_unit": 1.0, "som_mass_unit": 0.0,
                                      "cone_mass_unit": 0.0})
    n = 100_000
    grid = Grid1D(n)
    state = _state(n, 0.1)
    exact = 0.2
    pairwise = abs(total_mass(state, grid, p) - exact)
    forward = abs(total_mass(state, grid, p, summation="forward") - exact)
    assert pairwise <= forward + 1e-15
    assert pairwise < 1e-13


def test_membrane_mass_grows_with_length(section4):
    preset, _ = section4
    p = preset.params
    short = membrane_mass(_state(4, 0.0, lengths=(1.0, 1.0)), p)
    long = membrane_mass(_state(4, 0.0, lengths=(2.0, 1.0)), p)
    assert long - short == pytest.approx(p.kappa_h / p.kappa_L * p.cone_mass_unit)


def test_mass_ledger_tracks_production():
    ledger = MassLedger(m0=10.0)
    ledger.add(0.5)
    ledger.add(0.25)
    assert ledger.residual(10.75) == 0.0
    assert ledger.residual(11.0) == pytest.approx(0.25)


def test_refinement_slope_of_a_power_law():
    h = [0.1, 0.05, 0.025]
    assert refinement_slope(h, [x ** 2 for x in h]) == pytest.approx(2.0)
    assert refinement_slope([0.1], [1.0]) is None
    assert refinement_slope([0.1, 0.05], [0.0, 0.0]) is None


def test_observed_orders():
    assert observed_orders([4.0, 2.0, 1.0]) == pytest.approx([1.0, 1.0])
    assert observed_orders([16.0, 4.0]) == pytest.approx([2.0])
    assert math.isnan(observed_orders([0.0, 1.0])[0])


def test_density_distance_needs_nested_grids():
    assert density_distance(_state(4, 0.2), _state(8, 0.2)) == pytest.approx(0.0)
    assert density_distance(_state(4, 0.2), _state(8, 0.3)) == pytest.approx(math.sqrt(2 * 0.01))
    with pytest.raises(GridError):
        density_distance(_state(4, 0.2), _state(6, 0.2))


def test_box_monitor_reports_first_violation(closed_box):
    preset, mf = closed_box
    grid = Grid1D(10)
    record = run(preset.initial.build_state(grid.center_coords),
                 StepperConfig(tau=1e-3, t_end=0.01), mf, preset.params, grid)
    assert not box_constraint_monitor(record, preset.params.rho_cap).violated
    record.min_f[3] = -1e-3
    report = box_constraint_monitor(record, preset.params.rho_cap)
    assert report.violated
    assert report.first_violation_time == pytest.approx(record.times[3])
    assert report.to_dict()["violated"] is True


def test_snapshot_within_box():
    assert snapshot_within_box(_state(4, 0.5, 0.5), rho_cap=1.0)
    assert not snapshot_within_box(_state(4, 0.6, 0.5), rho_cap=1.0)
    assert not snapshot_within_box(_state(4, -0.1, 0.5), rho_cap=1.0)


def test_mass_balance_series_of_closed_box(closed_box):
    preset, mf = closed_box
    grid = Grid1D(10)
    record = run(preset.initial.build_state(grid.center_coords),
                 StepperConfig(tau=1e-3, t_end=0.05), mf, preset.params, grid)
    balance = mass_balance_series(record)
    assert balance.m0 == pytest.approx(record.mass[0])
    assert balance.max_relative_residual <= 1e-12


def test_linear_preset_hypotheses(section4):
    preset, mf = section4
    report = hypothesis_diagnostics(mf, preset.params)
    for name in ("H2", "H4", "H5", "H6", "H7", "transfer"):
        assert report.get(name).passed, name
    # the growth switch is negative below Λ_min and the scaled drift exceeds 1
    assert not report.get("H3").passed
    assert not report.get("monotone-flux").passed
    assert not report.passed
    with pytest.raises(KeyError):
        report.get("H9")


def test_experiment_parameters_transfer_vesicles_exactly(experiment_1):
    preset, mf = experiment_1
    report = hypothesis_diagnostics(mf, preset.params)
    assert report.get("transfer").passed
    assert report.get("monotone-flux").passed


def test_build_report_is_serialisable(closed_box):
    preset, mf = closed_box
    grid = Grid1D(10)
    record = run(preset.initial.build_state(grid.center_coords),
                 StepperConfig(tau=1e-3, t_end=0.01), mf, preset.params, grid)
    data = build_report("box", record, mf, preset.params, metrics={"wall_time": 0.1}).to_dict()
    assert data["name"] == "box"
    assert data["run"]["steps"] == 10
    assert data["box"]["violated"] is False
    assert set(data["hypotheses"]) >= {"H2", "H3", "transfer"}
    assert data["metrics"] == {"wall_time": 0.1}
    assert np.isfinite(data["mass_balance"]["max_residual"])
