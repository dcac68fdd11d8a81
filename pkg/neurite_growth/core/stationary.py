# neurite_growth/core/stationary.py
# Spatially constant stationary states with linear pool rates: coefficient
# formulas, compatibility conditions and the discrete residual at the state
# Works in the convention with density cap 1; non-constant profiles are out of scope

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .discretization import Grid1D, assemble_diffusion, convective_residual, reaction_geometric_residual
from .functions import Affine, ConstantProduction, ExclusionGate, GrowthMap, LinearGrowth
from .model import (
    DimensionlessParams, ModelFunctions, NeuriteField, SimState,
    boundary_fluxes, pool_rhs,
)

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-12


class InfeasibleStationaryState(ValueError):
    """Targets outside the admissible range, or no stationary length exists"""


@dataclass(frozen=True)
class StationaryCoefficients:
    c_alpha_plus: float
    c_alpha_minus: float
    c_beta_plus: float
    c_beta_minus: float


@dataclass(frozen=True)
class ConstantStationaryState:
    f_inf: Tuple[float, ...]
    lambda_inf: Tuple[float, ...]
    lambda_som_inf: float
    L_inf: Tuple[float, ...]
    coefficients: Tuple[StationaryCoefficients, ...] = ()
    lambda_som_max: float = 1.0
    lambda_cone_max: float = 1.0
    v0: float = 1.0
    growth: Tuple[GrowthMap, ...] = field(default=(), compare=False)

    @property
    def rho_inf(self) -> Tuple[float, ...]:
        return tuple(2.0 * f for f in self.f_inf)

    @property
    def flux_inf(self) -> Tuple[float, ...]:
        """Stationary flux v0·f·(1 - ρ) through each neurite"""
        return tuple(self.v0 * f * (1.0 - 2.0 * f) for f in self.f_inf)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f_inf": list(self.f_inf),
            "lambda_inf": list(self.lambda_inf),
            "lambda_som_inf": self.lambda_som_inf,
            "L_inf": list(self.L_inf),
            "coefficients": [asdict(c) for c in self.coefficients],
            "lambda_som_max": self.lambda_som_max,
            "lambda_cone_max": self.lambda_cone_max,
            "v0": self.v0,
        }


def find_stationary_length(growth: GrowthMap, lambda_inf: float, ell_min: float,
                           max_doublings: int = 60) -> float:
    """Root of L -> h(Λ∞, L) on [ell_min, ∞), bracketed by doubling"""
    def h(L):
        return float(growth(lambda_inf, L))

    lo = ell_min
    if h(lo) == 0.0:
        return lo
    if h(lo) > 0.0:
        raise InfeasibleStationaryState(
            f"h({lambda_inf:g}, L) > 0 already at the minimal length {ell_min:g}; no stationary length")
    width = max(1.0, ell_min)
    hi = lo + width
    for _ in range(max_doublings):
        if h(hi) >= 0.0:
            return float(optimize.bisect(h, lo, hi, xtol=ROOT_TOLERANCE))
        lo, width = hi, 2.0 * width
        hi = lo + width
    raise InfeasibleStationaryState(f"h({lambda_inf:g}, L) has no root in [{ell_min:g}, {hi:g}]")


def solve_constant_state(f_inf: Sequence[float], lambda_inf: Sequence[float], lambda_som_inf: float,
                         caps: Tuple[float, float], v0: float = 1.0,
                         growth: Optional[Sequence[GrowthMap]] = None,
                         ell_min: Optional[Sequence[float]] = None,
                         lengths: Optional[Sequence[float]] = None) -> ConstantStationaryState:
    """Pool-rate coefficients that make a constant density f∞ stationary

    caps are (Λ_som,max, Λ_cone,max). Without growth maps, linear laws with
    their root at the requested lengths (default 1) are used.
    """
    som_max, cone_max = caps
    n = len(f_inf)
    if len(lambda_inf) != n:
        raise InfeasibleStationaryState("f_inf and lambda_inf need one entry per neurite")
    for j, f in enumerate(f_inf):
        if not 0.0 < f <= 0.5:
            raise InfeasibleStationaryState(f"f_inf[{j + 1}] = {f:g} outside (0, 1/2]")
    for j, lam in enumerate(lambda_inf):
        if not 0.0 < lam < cone_max:
            raise InfeasibleStationaryState(f"lambda_inf[{j + 1}] = {lam:g} outside (0, {cone_max:g})")
    if not 0.0 < lambda_som_inf < som_max:
        raise InfeasibleStationaryState(f"lambda_som_inf = {lambda_som_inf:g} outside (0, {som_max:g})")
    if v0 <= 0:
        raise InfeasibleStationaryState(f"v0 must be positive, got {v0:g}")

    ell_min = tuple(ell_min) if ell_min is not None else (0.1,) * n
    if growth is None:
        targets = tuple(lengths) if lengths is not None else (1.0,) * n
        growth = tuple(LinearGrowth(lambda_rate=1.0, length_rate=1.0, lambda_ref=lam, length_ref=L)
                       for lam, L in zip(lambda_inf, targets))
    growth = tuple(growth)
    L_inf = tuple(find_stationary_length(g, lam, ell)
                  for g, lam, ell in zip(growth, lambda_inf, ell_min))

    coefficients = []
    for f, lam in zip(f_inf, lambda_inf):
        free = 1.0 - 2.0 * f
        coefficients.append(StationaryCoefficients(
            c_alpha_plus=v0 * som_max / lambda_som_inf,
            c_alpha_minus=v0 * cone_max / lam,
            c_beta_plus=v0 * free * cone_max / (cone_max - lam),
            c_beta_minus=v0 * free * som_max / (som_max - lambda_som_inf),
        ))
    state = ConstantStationaryState(
        f_inf=tuple(float(f) for f in f_inf), lambda_inf=tuple(float(v) for v in lambda_inf),
        lambda_som_inf=float(lambda_som_inf), L_inf=L_inf, coefficients=tuple(coefficients),
        lambda_som_max=float(som_max), lambda_cone_max=float(cone_max), v0=float(v0), growth=growth,
    )
    logger.debug(f"Constant stationary state: {state.to_dict()}")
    return state


def trivial_state(lambda_som_inf: float, lambda_inf: Sequence[float],
                  L_inf: Sequence[float]) -> ConstantStationaryState:
    """Empty neurites, all mass in the pools"""
    n = len(lambda_inf)
    return ConstantStationaryState(
        f_inf=(0.0,) * n, lambda_inf=tuple(lambda_inf), lambda_som_inf=lambda_som_inf,
        L_inf=tuple(L_inf),
        coefficients=tuple(StationaryCoefficients(0.0, 0.0, 0.0, 0.0) for _ in range(n)),
    )


def compatibility_errors(state: ConstantStationaryState) -> Dict[str, float]:
    """Relative errors of α-(Λ)(1-ρ) = β+(Λ) and α+(Λ_som)(1-ρ) = β-(Λ_som) per neurite"""
    mf = stationary_functions(state)
    errors = {}
    for j, rho in enumerate(state.rho_inf):
        lam = state.lambda_inf[j]
        cone_in = mf.alpha_minus[j](lam) * (1.0 - rho)
        cone_out = mf.beta_plus[j](lam)
        soma_out = mf.alpha_plus[j](state.lambda_som_inf) * (1.0 - rho)
        soma_in = mf.beta_minus[j](state.lambda_som_inf)
        errors[f"cone{j + 1}"] = abs(cone_in - cone_out) / max(abs(cone_in), abs(cone_out), 1e-300)
        errors[f"soma{j + 1}"] = abs(soma_out - soma_in) / max(abs(soma_out), abs(soma_in), 1e-300)
    return errors


def stationary_functions(state: ConstantStationaryState) -> ModelFunctions:
    """Exclusion gates g± = f±(1 - ρ) and linear pool rates with the solved coefficients"""
    n = len(state.f_inf)
    som_max, cone_max = state.lambda_som_max, state.lambda_cone_max
    coef = state.coefficients
    growth = state.growth or tuple(
        LinearGrowth(lambda_ref=lam, length_ref=L) for lam, L in zip(state.lambda_inf, state.L_inf))
    return ModelFunctions(
        alpha_plus=tuple(Affine(0.0, c.c_alpha_plus / som_max) for c in coef),
        alpha_minus=tuple(Affine(0.0, c.c_alpha_minus / cone_max) for c in coef),
        beta_plus=tuple(Affine(c.c_beta_plus, -c.c_beta_plus / cone_max) for c in coef),
        beta_minus=tuple(Affine(c.c_beta_minus, -c.c_beta_minus / som_max) for c in coef),
        g_plus=tuple(ExclusionGate(cap=1.0, carrier="plus") for _ in range(n)),
        g_minus=tuple(ExclusionGate(cap=1.0, carrier="minus") for _ in range(n)),
        h=tuple(growth),
        gamma=ConstantProduction(0.0),
    )


def stationary_params(state: ConstantStationaryState, kappa_D: float = 0.004,
                      kappa_lambda: float = 0.0, kappa_L: float = 1.0, kappa_h: float = 1.0,
                      ell_min: Optional[Sequence[float]] = None) -> DimensionlessParams:
    """Parameters of the cap-1 convention: unit couplings and unit mass conversions"""
    n = len(state.f_inf)
    ones = (1.0,) * n
    return DimensionlessParams(
        kappa_v=state.v0, kappa_D=kappa_D, kappa_lambda=kappa_lambda,
        kappa_alpha_plus=ones, kappa_alpha_minus=ones, kappa_beta_plus=ones, kappa_beta_minus=ones,
        kappa_som=1.0, kappa_gamma=0.0, kappa_cone=1.0, kappa_h=kappa_h, kappa_L=kappa_L,
        rho_cap=1.0, lambda_som_cap=state.lambda_som_max, lambda_cone_cap=state.lambda_cone_max,
        ell_min=tuple(ell_min) if ell_min is not None else (0.1,) * n,
        c_growth=ones,
    )


def to_sim_state(state: ConstantStationaryState, grid: Grid1D) -> SimState:
    return SimState(
        fields=tuple(NeuriteField.constant(grid.n_cells, f, f) for f in state.f_inf),
        lambda_som=state.lambda_som_inf,
        lambda_cone=state.lambda_inf,
        lengths=state.L_inf,
        time=0.0,
        length_rates=(0.0,) * len(state.f_inf),
    )


def discrete_rhs(sim: SimState, grid: Grid1D, mf: ModelFunctions,
                 p: DimensionlessParams) -> Dict[str, np.ndarray]:
    """Full semi-discrete right-hand side: densities, pools and lengths"""
    diffusion = assemble_diffusion(grid)
    rates = sim.length_rates or (0.0,) * sim.n_neurites
    densities = []
    fluxes = []
    for j, fld in enumerate(sim.fields):
        L = sim.lengths[j]
        conv_p, conv_m = convective_residual(fld, L, rates[j], sim.lambda_som, sim.lambda_cone[j],
                                             mf, p, grid, j)
        reac_p, reac_m = reaction_geometric_residual(fld, L, rates[j], p)
        scale = p.kappa_D / (L * L) / grid.h
        densities.append(conv_p + reac_p - scale * diffusion.apply(fld.f_plus))
        densities.append(conv_m + reac_m - scale * diffusion.apply(fld.f_minus))
        fluxes.append(boundary_fluxes(fld, sim.lambda_som, sim.lambda_cone[j], mf, j))
    soma, cones = pool_rhs(sim, fluxes, mf, p, sim.time)
    lengths = [p.kappa_L * float(mf.h[j](lam, L))
               for j, (lam, L) in enumerate(zip(sim.lambda_cone, sim.lengths))]
    return {
        "densities": np.concatenate(densities),
        "pools": np.array([soma, *cones]),
        "lengths": np.array(lengths),
    }


def stationary_residual(state: ConstantStationaryState, grid: Grid1D,
                        p: Optional[DimensionlessParams] = None,
                        mf: Optional[ModelFunctions] = None) -> float:
    """Largest absolute entry of the discrete right-hand side at the state"""
    p = p or stationary_params(state)
    mf = mf or stationary_functions(state)
    rhs = discrete_rhs(to_sim_state(state, grid), grid, mf, p)
    return float(max(np.abs(block).max() for block in rhs.values()))


def mass_of_state(state: ConstantStationaryState, p: Optional[DimensionlessParams] = None) -> float:
    """Σ_j (L∞ ρ∞ + Λ_j∞) + Λ_som∞ in the cap-1 convention"""
    return sum(L * rho + lam for L, rho, lam in zip(state.L_inf, state.rho_inf, state.lambda_inf)) \
        + state.lambda_som_inf
