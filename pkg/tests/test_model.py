import numpy as np
import pytest

from neurite_growth.core.functions import Affine, ConstantProduction, DecayingProduction, ExclusionGate
from neurite_growth.core.model import (
    BoundaryFluxes, Direction, DimensionlessParams, InitialData, NeuriteField, SimState,
    boundary_fluxes, convective_velocity, initial_length_rates, length_rhs, pool_rhs,
)


def _state(n=10, f_plus=0.25, f_minus=0.25, lambda_som=1.0, lambda_cone=(1.0, 1.0),
           lengths=(1.0, 1.0)):
    fields = tuple(NeuriteField.constant(n, f_plus, f_minus) for _ in lengths)
    return SimState(fields=fields, lambda_som=lambda_som, lambda_cone=lambda_cone, lengths=lengths)


def test_params_coerce_per_neurite_values_to_tuples(section4):
    preset, _ = section4
    p = preset.params.with_overrides({"ell_min": [0.2, 0.3]})
    assert p.ell_min == (0.2, 0.3)
    assert p.n_neurites == 2
    assert p.validate() == []


def test_params_report_problems(section4):
    preset, _ = section4
    problems = preset.params.with_overrides({"kappa_D": -1.0, "rho_cap": 0.0}).validate()
    assert any("kappa_D" in s for s in problems)
    assert any("rho_cap" in s for s in problems)
    with pytest.raises(ValueError, match="Unknown parameter"):
        preset.params.with_overrides({"kappa_x": 1.0})


def test_params_dict_round_trip(section4):
    preset, _ = section4
    assert DimensionlessParams.from_dict(preset.params.to_dict()) == preset.params


def test_neurite_field_is_read_only():
    fld = NeuriteField.constant(4, 0.1, 0.2)
    with pytest.raises(ValueError):
        fld.f_plus[0] = 1.0
    assert np.allclose(fld.rho, 0.3)
    with pytest.raises(ValueError):
        NeuriteField(np.zeros(3), np.zeros(4))


def test_convective_velocity(section4):
    preset, _ = section4
    p = preset.params
    assert convective_velocity(0.0, 0.0, 1.0, 0.0, Direction.ANTERO, p) == p.kappa_v
    assert convective_velocity(0.0, 0.0, 1.0, 0.0, Direction.RETRO, p) == -p.kappa_v
    # jammed: only the frame motion remains
    assert convective_velocity(0.5, p.rho_cap, 1.0, 0.2, Direction.ANTERO, p) == pytest.approx(-0.1)


def test_boundary_fluxes_of_linear_preset(section4):
    preset, mf = section4
    p = preset.params
    state = _state(f_plus=0.25, f_minus=0.25, lambda_som=1.0, lambda_cone=(1.0, 1.0))
    fx = boundary_fluxes(state.fields[0], state.lambda_som, state.lambda_cone[0], mf, 0)
    free = 1.0 - 0.5 / p.rho_cap
    assert fx.inflow_left == pytest.approx(1.0 / p.lambda_som_cap * 0.25 * free)
    assert fx.outflow_left == pytest.approx((1.0 - 1.0 / p.lambda_som_cap) * 0.25)
    assert fx.outflow_right == pytest.approx((1.0 - 1.0 / p.lambda_cone_cap) * 0.25)
    assert fx.inflow_right == pytest.approx(1.0 / p.lambda_cone_cap * 0.25 * free)
    assert fx.admissible


def test_negative_flux_is_not_admissible():
    assert not BoundaryFluxes(0.1, -0.2, 0.0, 0.0).admissible


def test_pool_rhs_balances_fluxes(section4):
    preset, mf = section4
    mf = mf.with_overrides({"gamma": {"kind": "constant-production", "value": 2.0}})
    p = preset.params
    state = _state()
    fluxes = [boundary_fluxes(fld, state.lambda_som, state.lambda_cone[j], mf, j)
              for j, fld in enumerate(state.fields)]
    soma, cones = pool_rhs(state, fluxes, mf, p, 0.0)
    expected = p.kappa_som * sum(f.outflow_left - f.inflow_left for f in fluxes) + p.kappa_gamma * 2.0
    assert soma == pytest.approx(expected)
    # Λ = Λ_min, so no growth consumption
    assert cones[0] == pytest.approx(p.kappa_cone * (fluxes[0].outflow_right - fluxes[0].inflow_right))


def test_length_rate_uses_growth_law(section4):
    preset, mf = section4
    p = preset.params
    assert length_rhs(1.0, 1.0, mf, p) == 0.0
    assert length_rhs(2.0, 1.0, mf, p) > 0.0
    state = _state(lambda_cone=(0.5, 2.0))
    rates = initial_length_rates(state, mf, p)
    assert rates[0] < 0 < rates[1]


def test_initial_data_interpolates_profiles():
    data = InitialData(lengths=(1.0,), lambda_som=1.0, lambda_cone=(1.0,),
                       f_plus=([0.0, 1.0],), f_minus=(0.5,))
    centers = np.array([0.0, 0.25, 1.0])
    state = data.build_state(centers)
    assert np.allclose(state.fields[0].f_plus, [0.0, 0.25, 1.0])
    assert np.allclose(state.fields[0].f_minus, 0.5)
    assert state.time == 0.0
    assert state.length_rates is None


def test_function_overrides(section4):
    _, mf = section4
    single = mf.with_overrides({"alpha_plus": {"kind": "affine", "offset": 0.0, "slope": 2.0}})
    assert single.alpha_plus == (Affine(0.0, 2.0), Affine(0.0, 2.0))
    per_neurite = mf.with_overrides({"g_plus": [{"kind": "exclusion", "cap": 2.0},
                                                {"kind": "exclusion", "cap": 1.0}]})
    assert per_neurite.g_plus[1] == ExclusionGate(cap=1.0)
    gamma = mf.with_overrides({"gamma": {"kind": "decaying-production", "initial": 1.0,
                                         "decay_time": 2.0}})
    assert gamma.gamma == DecayingProduction(1.0, 2.0)
    assert mf.gamma == ConstantProduction(0.0)
    with pytest.raises(ValueError):
        mf.with_overrides({"alpha_plus": [{"kind": "constant"}]})
    with pytest.raises(ValueError):
        mf.with_overrides({"delta": {"kind": "constant"}})


def test_state_to_dict_lists_everything():
    data = _state(n=3).to_dict()
    assert data["lengths"] == [1.0, 1.0]
    assert data["f_plus"][0] == [0.25, 0.25, 0.25]
