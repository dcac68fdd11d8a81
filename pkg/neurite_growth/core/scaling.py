# neurite_growth/core/scaling.py
# Typical physical scales, the derived geometric quantities and the map
# from physical parameters to the κ constants of the scaled system
# Does NOT simulate, only converts between unit systems

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict

from .model import DimensionlessParams

logger = logging.getLogger(__name__)

# the scaled density unit is a quarter of the maximal density, so the cap is 2
# when both directions sit at their typical value
SCALED_DENSITY_CAP = 2.0

# membrane vesicles per μm of growth fixed for 130 nm vesicles on a 1 μm neurite;
# the area ratio alone gives 59.17
REFERENCE_C_H = 58.4
REFERENCE_DIAMETERS = (130.0, 1000.0)


@dataclass(frozen=True)
class DensityEstimate:
    per_slice: int
    raw: float
    exact: float
    value: float


@dataclass(frozen=True)
class GrowthVesicleEstimate:
    exact: float
    value: float


@dataclass(frozen=True)
class PhysicalScales:
    """Typical values in μm, s and vesicle counts"""

    L_typ: float = 50.0
    t_typ: float = 100.0
    D_T: float = 0.1
    v0: float = 1.0
    lambda_rate: float = 1.0
    c_inout: float = 0.1
    gamma_typ: float = 10.0
    f_typ: float = 39.0
    rho_max: float = 155.0
    c_h: float = REFERENCE_C_H
    lambda_som_max: float = 6000.0
    lambda_cone_max: float = 100.0
    lambda_som_typ: float = 3000.0
    lambda_cone_typ: float = 50.0
    h_typ: float = 0.01
    L_min: float = 5.0
    lambda_min: float = 50.0
    vesicle_diameter: float = 130.0
    neurite_diameter: float = 1000.0

    def validate(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"Scale {f.name} must be positive and finite, got {value}")
        half = self.rho_max / 2.0
        if abs(2.0 * self.f_typ - half) > 0.01 * half:
            raise ValueError(f"Typical density {self.f_typ:g} must put both directions at half "
                             f"the maximal density {self.rho_max:g} (within 1%)")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PhysicalScales":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown scale(s): {', '.join(sorted(unknown))}")
        return replace(cls(), **{k: float(v) for k, v in data.items()})


PAPER_2023 = PhysicalScales()

SCALE_SETS: Dict[str, PhysicalScales] = {"paper-2023": PAPER_2023}


def _round_up_half_step(value: float) -> float:
    """Round up to a multiple of 5 in the third significant digit (151.67 -> 155)"""
    step = 5.0 * 10.0 ** (math.floor(math.log10(value)) - 2)
    return math.ceil(value / step - 1e-9) * step


def max_density(vesicle_diameter: float = 130.0, neurite_diameter: float = 1000.0,
                packing_fraction: float = 0.9, slices_per_micron: float = 7.0,
                safety_divisor: float = 3.0) -> DensityEstimate:
    """Vesicles per μm that fit into a neurite, reduced by a safety divisor"""
    if vesicle_diameter <= 0 or neurite_diameter <= 0:
        raise ValueError("Diameters must be positive")
    if vesicle_diameter > neurite_diameter:
        raise ValueError("Vesicles wider than the neurite do not fit")
    per_slice = math.floor((neurite_diameter / vesicle_diameter) ** 2 / packing_fraction + 1e-9)
    raw = per_slice * slices_per_micron
    exact = raw / safety_divisor
    return DensityEstimate(per_slice=per_slice, raw=raw, exact=exact,
                           value=_round_up_half_step(exact))


def vesicles_per_micron_growth(vesicle_diameter: float = 130.0,
                               neurite_diameter: float = 1000.0) -> GrowthVesicleEstimate:
    """Membrane vesicles needed to extend a neurite by 1 μm (diameters in nm)

    exact is the ratio of the lateral neurite area to the vesicle area. value
    is the constant c_h the model uses: REFERENCE_C_H for the reference
    diameters, the ratio to one decimal otherwise.
    """
    if vesicle_diameter <= 0 or neurite_diameter <= 0:
        raise ValueError("Diameters must be positive")
    neurite_um = neurite_diameter * 1e-3
    vesicle_um = vesicle_diameter * 1e-3
    exact = (math.pi * neurite_um * 1.0) / (math.pi * vesicle_um ** 2)
    if (vesicle_diameter, neurite_diameter) == REFERENCE_DIAMETERS:
        value = REFERENCE_C_H
    else:
        value = round(exact, 1)
    return GrowthVesicleEstimate(exact=exact, value=value)


def nondimensionalize(ps: PhysicalScales, n_neurites: int = 2) -> DimensionlessParams:
    ps.validate()
    t, L = ps.t_typ, ps.L_typ
    inout = t / L * ps.c_inout
    per_neurite = (inout,) * n_neurites
    p = DimensionlessParams(
        kappa_v=ps.v0 * t / L,
        kappa_D=ps.D_T * t / L ** 2,
        kappa_lambda=t * ps.lambda_rate,
        kappa_alpha_plus=per_neurite,
        kappa_alpha_minus=per_neurite,
        kappa_beta_plus=per_neurite,
        kappa_beta_minus=per_neurite,
        kappa_som=t / ps.lambda_som_typ * ps.c_inout * ps.f_typ,
        kappa_gamma=ps.gamma_typ * t / ps.lambda_som_typ,
        kappa_cone=t / ps.lambda_cone_typ * ps.c_inout * ps.f_typ,
        kappa_h=t / ps.lambda_cone_typ * ps.h_typ * ps.c_h,
        kappa_L=t / L * ps.h_typ,
        rho_cap=SCALED_DENSITY_CAP,
        lambda_som_cap=ps.lambda_som_max / ps.lambda_som_typ,
        lambda_cone_cap=ps.lambda_cone_max / ps.lambda_cone_typ,
        ell_min=(ps.L_min / L,) * n_neurites,
        lambda_min=ps.lambda_min / ps.lambda_cone_typ,
        c_growth=(1.0,) * n_neurites,
        neurite_mass_unit=ps.f_typ * L,
        som_mass_unit=ps.lambda_som_typ,
        cone_mass_unit=ps.lambda_cone_typ,
    )
    logger.debug(f"Nondimensionalized scales: kappa_v={p.kappa_v:g}, kappa_D={p.kappa_D:g}, "
                 f"kappa_L={p.kappa_L:g}, kappa_h={p.kappa_h:g}")
    return p


def redimensionalize(p: DimensionlessParams, ps: PhysicalScales) -> Dict[str, float]:
    """Physical parameter values implied by p under the scales ps"""
    t, L = ps.t_typ, ps.L_typ
    return {
        "v0": p.kappa_v * L / t,
        "D_T": p.kappa_D * L ** 2 / t,
        "lambda_rate": p.kappa_lambda / t,
        "c_inout": p.kappa_alpha_plus[0] * L / t,
        "f_typ": p.kappa_som * ps.lambda_som_typ / (t * ps.c_inout),
        "gamma_typ": p.kappa_gamma * ps.lambda_som_typ / t,
        "h_typ": p.kappa_L * L / t,
        "c_h": p.kappa_h * ps.lambda_cone_typ / (t * ps.h_typ),
        "L_min": p.ell_min[0] * L,
        "lambda_min": p.lambda_min * ps.lambda_cone_typ,
        "lambda_som_max": p.lambda_som_cap * ps.lambda_som_typ,
        "lambda_cone_max": p.lambda_cone_cap * ps.lambda_cone_typ,
    }
