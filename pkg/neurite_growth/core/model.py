# neurite_growth/core/model.py
# Domain types of the neurite growth model and the right-hand sides of the
# continuous model: drift velocity, boundary fluxes, pool and length rates
# Does NOT discretize or step in time, see discretization.py and integrator.py

import logging
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .functions import GrowthMap, PairMap, ProductionMap, ScalarMap, map_from_dict

logger = logging.getLogger(__name__)


class Direction(Enum):
    ANTERO = "antero"
    RETRO = "retro"


@dataclass(frozen=True)
class DimensionlessParams:
    """κ constants and caps of the scaled system"""

    kappa_v: float
    kappa_D: float
    kappa_lambda: float
    kappa_alpha_plus: Tuple[float, ...]
    kappa_alpha_minus: Tuple[float, ...]
    kappa_beta_plus: Tuple[float, ...]
    kappa_beta_minus: Tuple[float, ...]
    kappa_som: float
    kappa_gamma: float
    kappa_cone: float
    kappa_h: float
    kappa_L: float
    rho_cap: float = 2.0
    lambda_som_cap: float = 2.0
    lambda_cone_cap: float = 2.0
    ell_min: Tuple[float, ...] = (0.1, 0.1)
    lambda_min: float = 1.0
    c_growth: Tuple[float, ...] = (1.0, 1.0)
    # vesicles per unit of scaled neurite mass, soma amount and cone amount
    neurite_mass_unit: float = 1.0
    som_mass_unit: float = 1.0
    cone_mass_unit: float = 1.0

    _PER_NEURITE = ("kappa_alpha_plus", "kappa_alpha_minus", "kappa_beta_plus",
                    "kappa_beta_minus", "ell_min", "c_growth")

    def __post_init__(self):
        for name in self._PER_NEURITE:
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @property
    def n_neurites(self) -> int:
        return len(self.ell_min)

    def validate(self) -> List[str]:
        """Return a list of problems, empty when the parameters are admissible"""
        problems = []
        for f in fields(self):
            value = getattr(self, f.name)
            values = value if isinstance(value, tuple) else (value,)
            if not all(np.isfinite(v) for v in values):
                problems.append(f"{f.name} must be finite")
            elif any(v < 0 for v in values):
                problems.append(f"{f.name} must be >= 0, got {value}")
        for name in self._PER_NEURITE:
            if len(getattr(self, name)) != self.n_neurites:
                problems.append(f"{name} needs one value per neurite ({self.n_neurites})")
        for name in ("rho_cap", "lambda_som_cap", "lambda_cone_cap"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0")
        if any(v <= 0 for v in self.ell_min):
            problems.append("ell_min must be > 0")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: (list(getattr(self, f.name)) if f.name in self._PER_NEURITE
                         else getattr(self, f.name))
                for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DimensionlessParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**data)

    def with_overrides(self, overrides: Dict[str, Any]) -> "DimensionlessParams":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"Unknown parameter(s): {', '.join(sorted(unknown))}")
        overrides = {k: ((v,) * self.n_neurites if k in self._PER_NEURITE and np.isscalar(v) else v)
                     for k, v in overrides.items()}
        return replace(self, **overrides)


@dataclass(frozen=True, eq=False)
class NeuriteField:
    """Cell averages of the anterograde and retrograde densities of one neurite"""

    f_plus: np.ndarray
    f_minus: np.ndarray

    def __post_init__(self):
        f_plus = np.array(self.f_plus, dtype=float)
        f_minus = np.array(self.f_minus, dtype=float)
        if f_plus.ndim != 1 or f_plus.shape != f_minus.shape:
            raise ValueError(f"Density vectors must be 1-d of equal length, got "
                             f"{f_plus.shape} and {f_minus.shape}")
        f_plus.setflags(write=False)
        f_minus.setflags(write=False)
        object.__setattr__(self, "f_plus", f_plus)
        object.__setattr__(self, "f_minus", f_minus)

    @classmethod
    def adopt(cls, f_plus: np.ndarray, f_minus: np.ndarray) -> "NeuriteField":
        """Wrap freshly computed float vectors without copying them"""
        f_plus.setflags(write=False)
        f_minus.setflags(write=False)
        fld = object.__new__(cls)
        object.__setattr__(fld, "f_plus", f_plus)
        object.__setattr__(fld, "f_minus", f_minus)
        return fld

    @property
    def n_cells(self) -> int:
        return self.f_plus.shape[0]

    @property
    def rho(self) -> np.ndarray:
        return self.f_plus + self.f_minus

    @classmethod
    def constant(cls, n_cells: int, f_plus: float, f_minus: float) -> "NeuriteField":
        return cls(np.full(n_cells, f_plus), np.full(n_cells, f_minus))


@dataclass(frozen=True, eq=False)
class SimState:
    """All evolving unknowns at one time point

    length_rates carries dL/dt for the geometric terms of the next density
    step; None means "evaluate κ_L·h at this state".
    """

    fields: Tuple[NeuriteField, ...]
    lambda_som: float
    lambda_cone: Tuple[float, ...]
    lengths: Tuple[float, ...]
    time: float = 0.0
    length_rates: Optional[Tuple[float, ...]] = None

    @property
    def n_neurites(self) -> int:
        return len(self.fields)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "time": self.time,
            "lambda_som": self.lambda_som,
            "lambda_cone": list(self.lambda_cone),
            "lengths": list(self.lengths),
            "f_plus": [fld.f_plus.tolist() for fld in self.fields],
            "f_minus": [fld.f_minus.tolist() for fld in self.fields],
        }


@dataclass(frozen=True)
class ModelFunctions:
    """Coupling shapes α, β, g, h per neurite and the soma production γ"""

    alpha_plus: Tuple[ScalarMap, ...]
    alpha_minus: Tuple[ScalarMap, ...]
    beta_plus: Tuple[ScalarMap, ...]
    beta_minus: Tuple[ScalarMap, ...]
    g_plus: Tuple[PairMap, ...]
    g_minus: Tuple[PairMap, ...]
    h: Tuple[GrowthMap, ...]
    gamma: ProductionMap

    PER_NEURITE = ("alpha_plus", "alpha_minus", "beta_plus", "beta_minus",
                   "g_plus", "g_minus", "h")

    @property
    def n_neurites(self) -> int:
        return len(self.h)

    def to_dict(self) -> Dict[str, Any]:
        data = {name: [m.to_dict() for m in getattr(self, name)] for name in self.PER_NEURITE}
        data["gamma"] = self.gamma.to_dict()
        return data

    def describe(self) -> Dict[str, List[str]]:
        data = {name: [m.describe() for m in getattr(self, name)] for name in self.PER_NEURITE}
        data["gamma"] = [self.gamma.describe()]
        return data

    def with_overrides(self, overrides: Dict[str, Any]) -> "ModelFunctions":
        """Replace maps from their serialised form

        A single mapping applies to every neurite, a list gives one map per neurite.
        """
        changes = {}
        for name, spec in overrides.items():
            if name == "gamma":
                changes[name] = map_from_dict(spec)
            elif name in self.PER_NEURITE:
                if isinstance(spec, dict):
                    changes[name] = tuple(map_from_dict(spec) for _ in range(self.n_neurites))
                else:
                    if len(spec) != self.n_neurites:
                        raise ValueError(f"{name} needs {self.n_neurites} entries, got {len(spec)}")
                    changes[name] = tuple(map_from_dict(s) for s in spec)
            else:
                raise ValueError(f"Unknown coupling function '{name}'")
        return replace(self, **changes)


class BoundaryFluxes(NamedTuple):
    """Shape fluxes at the soma end (left) and the growth cone end (right)"""

    inflow_left: float
    outflow_left: float
    outflow_right: float
    inflow_right: float

    @property
    def admissible(self) -> bool:
        return min(self) >= 0.0


@dataclass
class InitialData:
    """Initial lengths, pool amounts and density profiles

    Each density entry is either a constant or a list of values sampled at
    equidistant points of [0, 1], interpolated to the cell centers.
    """

    lengths: Tuple[float, ...] = (1.0, 1.0)
    lambda_som: float = 1.0
    lambda_cone: Tuple[float, ...] = (1.0, 1.0)
    f_plus: Tuple[Any, ...] = (0.0, 0.0)
    f_minus: Tuple[Any, ...] = (0.0, 0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lengths": list(self.lengths),
            "lambda_som": self.lambda_som,
            "lambda_cone": list(self.lambda_cone),
            "f_plus": list(self.f_plus),
            "f_minus": list(self.f_minus),
        }

    @staticmethod
    def _profile(value, centers: np.ndarray) -> np.ndarray:
        if np.isscalar(value):
            return np.full(centers.shape, float(value))
        samples = np.asarray(value, dtype=float)
        nodes = np.linspace(0.0, 1.0, samples.shape[0])
        return np.interp(centers, nodes, samples)

    def build_state(self, centers: np.ndarray) -> SimState:
        fields_ = tuple(
            NeuriteField(self._profile(fp, centers), self._profile(fm, centers))
            for fp, fm in zip(self.f_plus, self.f_minus)
        )
        return SimState(
            fields=fields_,
            lambda_som=float(self.lambda_som),
            lambda_cone=tuple(float(v) for v in self.lambda_cone),
            lengths=tuple(float(v) for v in self.lengths),
            time=0.0,
        )


def convective_velocity(y, rho_face, L: float, dLdt: float, direction: Direction,
                        p: DimensionlessParams):
    """Face velocity in the frozen coordinate y = x/L

    The 1/L factor is applied by the assembly.
    """
    drift = p.kappa_v * (1.0 - rho_face / p.rho_cap)
    if direction is Direction.RETRO:
        drift = -drift
    return drift - dLdt * y


def boundary_fluxes(fld: NeuriteField, lambda_som: float, lambda_j: float,
                    mf: ModelFunctions, j: int) -> BoundaryFluxes:
    """Shape fluxes α₊g₊, β₋f₋ at y = 0 and β₊f₊, α₋g₋ at y = 1

    The traces are the boundary cell averages.
    """
    fp0 = float(fld.f_plus[0])
    fm0 = float(fld.f_minus[0])
    fp1 = float(fld.f_plus[-1])
    fm1 = float(fld.f_minus[-1])
    return BoundaryFluxes(
        inflow_left=float(mf.alpha_plus[j](lambda_som) * mf.g_plus[j](fp0, fm0)),
        outflow_left=float(mf.beta_minus[j](lambda_som) * fm0),
        outflow_right=float(mf.beta_plus[j](lambda_j) * fp1),
        inflow_right=float(mf.alpha_minus[j](lambda_j) * mf.g_minus[j](fp1, fm1)),
    )


def length_rhs(lambda_j: float, L_j: float, mf: ModelFunctions, p: DimensionlessParams,
               j: int = 0) -> float:
    return p.kappa_L * float(mf.h[j](lambda_j, L_j))


def pool_rhs(state: SimState, fluxes: Sequence[BoundaryFluxes], mf: ModelFunctions,
             p: DimensionlessParams, t: float) -> Tuple[float, Tuple[float, ...]]:
    """Rates of the soma pool and of each growth cone pool"""
    soma = p.kappa_som * sum(fx.outflow_left - fx.inflow_left for fx in fluxes)
    soma += p.kappa_gamma * float(mf.gamma(t))
    cones = tuple(
        p.kappa_cone * (fx.outflow_right - fx.inflow_right)
        - p.kappa_h * p.c_growth[j] * float(mf.h[j](state.lambda_cone[j], state.lengths[j]))
        for j, fx in enumerate(fluxes)
    )
    return soma, cones


def initial_length_rates(state: SimState, mf: ModelFunctions,
                         p: DimensionlessParams) -> Tuple[float, ...]:
    return tuple(length_rhs(lam, L, mf, p, j)
                 for j, (lam, L) in enumerate(zip(state.lambda_cone, state.lengths)))
