import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from neurite_growth.core.functions import (
    Affine, Arctan, ArctanLogisticGrowth, Constant, ConstantGrowth, ConstantProduction,
    DecayingProduction, ExclusionGate, LinearGrowth, Logistic, PairProduct, Product,
    RetrogradeSensor, map_from_dict,
)

unit = st.floats(min_value=0.0, max_value=2.0, allow_nan=False)


def test_affine_exposes_its_polynomial():
    assert Affine(0.7, -0.35).polynomial() == (0.7, -0.35, 0.0)
    assert Constant(2.0).polynomial() == (2.0, 0.0, 0.0)


def test_product_of_affines_is_quadratic():
    alpha_minus = Product(Affine(0.1, -0.05), Affine(0.0, 0.5))
    c0, c1, c2 = alpha_minus.polynomial()
    assert c0 == pytest.approx(0.0)
    assert c1 == pytest.approx(0.05)
    assert c2 == pytest.approx(-0.025)


def test_product_with_nonpolynomial_factor_has_no_polynomial():
    assert Product(Logistic(), Affine(0.0, 1.0)).polynomial() is None
    assert Arctan().polynomial() is None


@given(unit)
def test_product_derivative_matches_central_difference(s):
    f = Product(Affine(1.0, -0.5), Logistic(height=2.0, steepness=3.0, midpoint=1.0))
    eps = 1e-6
    numeric = (f(s + eps) - f(s - eps)) / (2 * eps)
    assert f.derivative(s) == pytest.approx(numeric, rel=1e-5, abs=1e-7)


def test_maps_evaluate_on_arrays():
    s = np.linspace(0.0, 2.0, 5)
    assert np.allclose(Constant(3.0)(s), 3.0)
    assert np.allclose(Affine(1.0, 2.0)(s), 1.0 + 2.0 * s)
    assert Affine(1.0, 2.0).derivative(s).shape == s.shape


@given(unit)
def test_exclusion_gate_vanishes_at_the_cap(f_plus):
    cap = 2.0
    for carrier in ("none", "plus", "minus"):
        gate = ExclusionGate(cap=cap, carrier=carrier)
        assert abs(gate(f_plus, cap - f_plus)) < 1e-12


@given(unit)
def test_carrier_gates_vanish_without_carrier(s):
    assert ExclusionGate(cap=2.0, carrier="plus")(0.0, s) == 0.0
    assert ExclusionGate(cap=2.0, carrier="minus")(s, 0.0) == 0.0


def test_exclusion_gate_rejects_bad_arguments():
    with pytest.raises(ValueError):
        ExclusionGate(carrier="both")
    with pytest.raises(ValueError):
        ExclusionGate(cap=0.0)


def test_retrograde_sensor_values():
    sensor = RetrogradeSensor(slope=3.0, smoothing=0.1, offset=0.5)
    assert float(sensor(0.0, 0.0)) == pytest.approx(math.sqrt(1.1) + 0.5)
    # clamped once 3 f- >= 1
    assert float(sensor(0.0, 0.5)) == pytest.approx(math.sqrt(0.1) + 0.5)


def test_pair_product_multiplies_gates():
    gate = ExclusionGate(cap=2.0)
    sensor = RetrogradeSensor()
    product = PairProduct(sensor, gate)
    assert float(product(0.2, 0.1)) == pytest.approx(float(sensor(0.2, 0.1)) * gate(0.2, 0.1))


@given(st.floats(min_value=0.0, max_value=2.0), st.floats(min_value=0.1, max_value=5.0))
def test_arctan_logistic_growth_sign_follows_pool(lam, length):
    h = ArctanLogisticGrowth(lambda_min=1.0, ell_min=0.1)
    value = h(lam, length)
    if lam > 1.0:
        assert value > 0
    elif lam < 1.0:
        assert value < 0
    else:
        assert value == 0


def test_arctan_logistic_growth_scalar_and_array_paths_agree():
    h = ArctanLogisticGrowth(lambda_min=1.0, ell_min=0.1, steepness=4.0, delay=0.2)
    lam = np.array([0.2, 1.0, 1.7])
    length = np.array([0.1, 0.5, 2.0])
    vector = h(lam, length)
    scalar = [h(float(a), float(b)) for a, b in zip(lam, length)]
    assert np.allclose(vector, scalar, rtol=1e-14)


def test_arctan_logistic_growth_length_derivative():
    h = ArctanLogisticGrowth(lambda_min=1.0, ell_min=0.1)
    eps = 1e-6
    numeric = (h(1.5, 0.4 + eps) - h(1.5, 0.4 - eps)) / (2 * eps)
    assert float(h.d_length(1.5, 0.4)) == pytest.approx(numeric, rel=1e-6)


def test_linear_growth_root_and_slope():
    h = LinearGrowth(lambda_rate=1.0, length_rate=2.0, lambda_ref=0.5, length_ref=3.0)
    assert h(0.5, 3.0) == 0.0
    assert h.d_length(0.5, 3.0) == 2.0
    assert ConstantGrowth(0.3).length_independent


def test_decaying_production_vanishes():
    gamma = DecayingProduction(initial=2.0, decay_time=0.5)
    assert gamma(0.0) == 2.0
    assert gamma(1e6) == 0.0
    assert np.allclose(gamma(np.array([0.0, 0.5])), [2.0, 2.0 * math.exp(-1.0)])
    with pytest.raises(ValueError):
        DecayingProduction(decay_time=0.0)
    assert ConstantProduction(0.0)(5.0) == 0.0


def test_nested_maps_rebuild_from_their_dict():
    original = PairProduct(RetrogradeSensor(slope=3.0), ExclusionGate(cap=2.0))
    rebuilt = map_from_dict(original.to_dict())
    assert rebuilt == original
    product = Product(Affine(1.0, -0.5), Affine(0.0, 0.5))
    assert map_from_dict(product.to_dict()) == product


def test_unknown_kind_is_rejected():
    with pytest.raises(ValueError, match="Unknown function kind"):
        map_from_dict({"kind": "spline"})
    with pytest.raises(ValueError, match="Invalid parameters"):
        map_from_dict({"kind": "affine", "intercept": 1.0})


def test_describe_is_readable():
    assert Affine(0.0, 0.025).describe() == "0 + 0.025*s"
    assert ArctanLogisticGrowth().describe() == "atan(Λ-1)/(1+exp(-4*(L-0.1-0.2)))"


@given(st.floats(min_value=-50.0, max_value=50.0), st.floats(min_value=0.0, max_value=5.0))
def test_float_and_array_paths_agree(s, length):
    arr = np.array([s])
    logistic = Logistic(height=2.0, steepness=3.0, midpoint=0.5)
    assert logistic(s) == pytest.approx(logistic(arr)[0], rel=1e-12)
    assert logistic.derivative(s) == pytest.approx(logistic.derivative(arr)[0], rel=1e-9, abs=1e-300)
    arctan = Arctan(scale=1.5, shift=0.2)
    assert arctan(s) == pytest.approx(arctan(arr)[0], rel=1e-12)
    sensor = RetrogradeSensor()
    assert sensor(0.1, s) == pytest.approx(sensor(np.array([0.1]), arr)[0], rel=1e-12)
    growth = ArctanLogisticGrowth()
    assert growth.d_length(s, length) == pytest.approx(
        growth.d_length(arr, np.array([length]))[0], rel=1e-6, abs=1e-300)


def test_float_paths_do_not_overflow():
    assert Logistic(steepness=10.0)(-1000.0) == 0.0
    assert Logistic(steepness=10.0).derivative(-1000.0) == 0.0
    assert ArctanLogisticGrowth(steepness=1000.0)(2.0, -5.0) == 0.0
