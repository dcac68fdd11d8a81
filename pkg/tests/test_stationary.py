from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from neurite_growth.core.config import StationaryTargets
from neurite_growth.core.controller import ExperimentController
from neurite_growth.core.discretization import Grid1D
from neurite_growth.core.functions import ConstantGrowth, LinearGrowth
from neurite_growth.core.model import boundary_fluxes
from neurite_growth.core.stationary import (
    InfeasibleStationaryState, compatibility_errors, find_stationary_length, mass_of_state,
    solve_constant_state, stationary_functions, stationary_params, stationary_residual,
    to_sim_state, trivial_state,
)

CAPS = (6000.0, 100.0)


def _state(f=0.25, **kwargs):
    return solve_constant_state([f, f], [50.0, 50.0], 3000.0, CAPS, **kwargs)


def test_quarter_density_coefficients():
    state = _state(0.25)
    for c in state.coefficients:
        assert c.c_alpha_plus == pytest.approx(2.0)
        assert c.c_alpha_minus == pytest.approx(2.0)
        assert c.c_beta_plus == pytest.approx(1.0)
        assert c.c_beta_minus == pytest.approx(1.0)
    assert state.L_inf == pytest.approx((1.0, 1.0))
    assert state.rho_inf == (0.5, 0.5)
    assert state.flux_inf == pytest.approx((0.125, 0.125))


def test_half_density_shuts_the_outflow():
    state = _state(0.5)
    assert all(c.c_beta_plus == 0.0 and c.c_beta_minus == 0.0 for c in state.coefficients)


@pytest.mark.parametrize("f", [0.0, 0.6])
def test_density_outside_range_is_infeasible(f):
    with pytest.raises(InfeasibleStationaryState):
        _state(f)


def test_pool_targets_must_lie_below_the_caps():
    with pytest.raises(InfeasibleStationaryState):
        solve_constant_state([0.25, 0.25], [100.0, 50.0], 3000.0, CAPS)
    with pytest.raises(InfeasibleStationaryState):
        solve_constant_state([0.25, 0.25], [50.0, 50.0], 6000.0, CAPS)
    with pytest.raises(InfeasibleStationaryState):
        solve_constant_state([0.25], [50.0, 50.0], 3000.0, CAPS)


@pytest.mark.parametrize("f", [0.1, 0.25, 0.4])
def test_discrete_residual_vanishes(f):
    state = _state(f)
    assert stationary_residual(state, Grid1D(20)) <= 1e-10
    assert max(compatibility_errors(state).values()) <= 1e-12


def test_requested_lengths_are_reached():
    state = _state(0.25, lengths=[0.5, 3.0])
    assert state.L_inf == pytest.approx((0.5, 3.0), abs=1e-10)
    assert stationary_residual(state, Grid1D(10)) <= 1e-10


def test_stationary_functions_use_cap_one_gates():
    mf = stationary_functions(_state(0.25))
    assert float(mf.g_plus[0](0.25, 0.25)) == pytest.approx(0.125)
    assert float(mf.g_minus[1](0.25, 0.25)) == pytest.approx(0.125)


def test_find_stationary_length_brackets_the_root():
    growth = LinearGrowth(lambda_rate=1.0, length_rate=1.0, lambda_ref=1.0, length_ref=2.0)
    assert find_stationary_length(growth, 1.0, 0.1) == pytest.approx(2.0, abs=1e-10)
    with pytest.raises(InfeasibleStationaryState):
        find_stationary_length(ConstantGrowth(1.0), 1.0, 0.1)


def test_trivial_state_keeps_everything_in_the_pools():
    state = trivial_state(3000.0, [50.0, 40.0], [1.0, 2.0])
    assert state.rho_inf == (0.0, 0.0)
    assert mass_of_state(state) == pytest.approx(3090.0)


def test_mass_of_quarter_density_state():
    assert mass_of_state(_state(0.25)) == pytest.approx(2 * (0.5 + 50.0) + 3000.0)


def test_state_dict_lists_coefficients():
    data = _state(0.25).to_dict()
    assert data["L_inf"] == pytest.approx([1.0, 1.0])
    assert data["coefficients"][0]["c_alpha_plus"] == pytest.approx(2.0)


@settings(deadline=None)
@given(st.floats(min_value=0.01, max_value=0.5), st.floats(min_value=1.0, max_value=99.0),
       st.floats(min_value=10.0, max_value=5990.0), st.floats(min_value=0.1, max_value=5.0))
def test_constant_state_boundary_fluxes_equal_the_transport_flux(f, lam, lam_som, v0):
    state = solve_constant_state([f, f], [lam, lam], lam_som, CAPS, v0=v0)
    mf = stationary_functions(state)
    sim = to_sim_state(state, Grid1D(10))
    expected = v0 * f * (1.0 - 2.0 * f)
    for j, fld in enumerate(sim.fields):
        fx = boundary_fluxes(fld, sim.lambda_som, sim.lambda_cone[j], mf, j)
        assert fx.inflow_left == pytest.approx(expected, rel=1e-12, abs=1e-15)
        assert fx.outflow_left == pytest.approx(expected, rel=1e-12, abs=1e-15)
        assert fx.outflow_right == pytest.approx(expected, rel=1e-12, abs=1e-15)
        assert fx.inflow_right == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_perturbed_density_is_not_stationary():
    state = _state(0.25)
    perturbed = replace(state, f_inf=(0.26, 0.26))
    grid = Grid1D(20)
    residual = stationary_residual(perturbed, grid, stationary_params(state),
                                   stationary_functions(state))
    assert residual > 1e-4
    targets = StationaryTargets(n_cells=20, probe_steps=100)
    drift = ExperimentController().probe_stationary(perturbed, targets)
    assert drift > 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("f", [0.1, 0.25, 0.4])
def test_constant_state_survives_ten_thousand_steps(f, tmp_path):
    targets = StationaryTargets(f_inf=[f, f], probe_steps=10_000)
    analysis = ExperimentController(output_root=tmp_path).analyze_stationary(targets)
    assert analysis.probe_steps == 10_000
    assert analysis.probe_drift <= 1e-8
