# neurite_growth/core/presets.py
# Named experiment presets: coupling functions, default parameters and
# initial data of the linear-rate setting and of the two growth experiments
# Does NOT read config files, see config.py for overrides on top of a preset

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

from .functions import (
    Affine, ArctanLogisticGrowth, Constant, ConstantGrowth, ConstantProduction,
    ExclusionGate, PairProduct, Product, RetrogradeSensor,
)
from .model import DimensionlessParams, InitialData, ModelFunctions
from .scaling import PAPER_2023, nondimensionalize

logger = logging.getLogger(__name__)

# growth switch: logistic steepness and delay beyond the minimal length
GROWTH_STEEPNESS = 4.0
GROWTH_DELAY = 0.2


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    params: DimensionlessParams
    initial: InitialData
    build: Callable[[DimensionlessParams], ModelFunctions]

    def functions(self, params: Optional[DimensionlessParams] = None) -> ModelFunctions:
        return self.build(params or self.params)


def _growth(p: DimensionlessParams):
    return tuple(ArctanLogisticGrowth(lambda_min=p.lambda_min, ell_min=ell,
                                      steepness=GROWTH_STEEPNESS, delay=GROWTH_DELAY)
                 for ell in p.ell_min)


def _per_neurite(p: DimensionlessParams, item):
    return (item,) * p.n_neurites


def experiment_params() -> DimensionlessParams:
    """Scaled parameters of the growth experiments

    The coupling strength lives in the coefficient functions, so the boundary
    κ are 1 and the pool κ convert neurite mass into pool amounts.
    """
    scaled = nondimensionalize(PAPER_2023)
    neurite_unit = PAPER_2023.f_typ * PAPER_2023.L_typ
    ones = (1.0, 1.0)
    return replace(
        scaled,
        kappa_v=0.1,
        kappa_lambda=0.0,
        kappa_alpha_plus=ones, kappa_alpha_minus=ones,
        kappa_beta_plus=ones, kappa_beta_minus=ones,
        kappa_som=neurite_unit / PAPER_2023.lambda_som_typ,
        kappa_cone=neurite_unit / PAPER_2023.lambda_cone_typ,
    )


def _section4_linear(p: DimensionlessParams) -> ModelFunctions:
    som, cone = p.lambda_som_cap, p.lambda_cone_cap
    return ModelFunctions(
        alpha_plus=_per_neurite(p, Affine(0.0, 1.0 / som)),
        alpha_minus=_per_neurite(p, Affine(0.0, 1.0 / cone)),
        beta_plus=_per_neurite(p, Affine(1.0, -1.0 / cone)),
        beta_minus=_per_neurite(p, Affine(1.0, -1.0 / som)),
        g_plus=_per_neurite(p, ExclusionGate(cap=p.rho_cap, carrier="plus")),
        g_minus=_per_neurite(p, ExclusionGate(cap=p.rho_cap, carrier="minus")),
        h=_growth(p),
        gamma=ConstantProduction(0.0),
    )


def _experiment_1(p: DimensionlessParams, alpha_plus_slope: float = 0.05 / 2) -> ModelFunctions:
    gate = ExclusionGate(cap=p.rho_cap)
    beta = Affine(0.7, -0.7 / 2)
    return ModelFunctions(
        alpha_plus=_per_neurite(p, Affine(0.0, alpha_plus_slope)),
        alpha_minus=_per_neurite(p, Product(Affine(0.1, -0.1 / 2), Affine(0.0, 0.5))),
        beta_plus=_per_neurite(p, beta),
        beta_minus=_per_neurite(p, beta),
        g_plus=_per_neurite(p, gate),
        g_minus=_per_neurite(p, gate),
        h=_growth(p),
        gamma=ConstantProduction(0.0),
    )


def _experiment_1_large_alpha(p: DimensionlessParams) -> ModelFunctions:
    return _experiment_1(p, alpha_plus_slope=0.5)


def _experiment_2(p: DimensionlessParams) -> ModelFunctions:
    gate = ExclusionGate(cap=p.rho_cap)
    beta = Affine(0.7, -0.7 / 2)
    return ModelFunctions(
        alpha_plus=_per_neurite(p, Affine(0.0, 0.6 / 2)),
        alpha_minus=_per_neurite(p, Product(Affine(1.0, -1.0 / 2), Affine(0.0, 0.5))),
        beta_plus=_per_neurite(p, beta),
        beta_minus=_per_neurite(p, beta),
        g_plus=_per_neurite(p, PairProduct(RetrogradeSensor(slope=3.0, smoothing=0.1, offset=0.5), gate)),
        g_minus=_per_neurite(p, gate),
        h=_growth(p),
        gamma=ConstantProduction(0.0),
    )


def _closed_box(p: DimensionlessParams) -> ModelFunctions:
    zero = Constant(0.0)
    gate = ExclusionGate(cap=p.rho_cap)
    return ModelFunctions(
        alpha_plus=_per_neurite(p, zero),
        alpha_minus=_per_neurite(p, zero),
        beta_plus=_per_neurite(p, zero),
        beta_minus=_per_neurite(p, zero),
        g_plus=_per_neurite(p, gate),
        g_minus=_per_neurite(p, gate),
        h=_per_neurite(p, ConstantGrowth(0.0)),
        gamma=ConstantProduction(0.0),
    )


def _build_presets() -> Dict[str, Preset]:
    scaled = nondimensionalize(PAPER_2023)
    experiments = experiment_params()
    experiment_1_initial = InitialData(lengths=(1.1, 1.0), lambda_som=1.0, lambda_cone=(0.25, 1.5),
                                       f_plus=(0.1, 0.1), f_minus=(0.1, 0.1))
    presets = [
        Preset("section4-linear",
               "Gates f(1 - rho/cap), pool rates linear in the pool amount",
               scaled,
               InitialData(lengths=(1.0, 1.0), lambda_som=1.0, lambda_cone=(1.0, 1.0),
                           f_plus=(0.25, 0.25), f_minus=(0.25, 0.25)),
               _section4_linear),
        Preset("experiment-1",
               "Competition of two neurites, weak soma release",
               experiments, experiment_1_initial, _experiment_1),
        Preset("experiment-1-large-alpha",
               "Competition of two neurites, strong soma release",
               experiments, experiment_1_initial, _experiment_1_large_alpha),
        Preset("experiment-2",
               "Retrograde feedback on soma release, cycles of growth and retraction",
               replace(experiments, kappa_v=0.04),
               InitialData(lengths=(1.1, 1.0), lambda_som=1.0, lambda_cone=(0.9, 0.9),
                           f_plus=(0.0, 0.0), f_minus=(0.0, 0.0)),
               _experiment_2),
        Preset("closed-box",
               "No boundary exchange, no growth, no production",
               replace(scaled, kappa_v=0.1, kappa_L=0.0),
               InitialData(lengths=(1.0, 1.0), lambda_som=1.0, lambda_cone=(1.0, 1.0),
                           f_plus=(0.3, 0.2), f_minus=(0.2, 0.3)),
               _closed_box),
    ]
    return {preset.name: preset for preset in presets}


PRESETS: Dict[str, Preset] = _build_presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"Unknown preset '{name}' (known: {', '.join(sorted(PRESETS))})") from None


def preset_names() -> List[str]:
    return sorted(PRESETS)
