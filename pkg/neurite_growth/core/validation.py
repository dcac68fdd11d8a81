# neurite_growth/core/validation.py
# Correctness instruments: mass bookkeeping, box constraint monitor,
# structural checks of the coupling functions and refinement studies
# Does NOT run simulations itself, it inspects states and finished records

import functools
import logging
import math
import operator
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .discretization import Grid1D, GridError, project_conservative
from .model import DimensionlessParams, ModelFunctions, SimState

if TYPE_CHECKING:
    from .integrator import RunRecord

logger = logging.getLogger(__name__)

BOX_TOLERANCE = 1e-10
HYPOTHESIS_TOLERANCE = 1e-12


def _forward_sum(values) -> float:
    return functools.reduce(operator.add, (float(v) for v in values), 0.0)


def _pairwise_sum(values: np.ndarray) -> float:
    n = values.shape[0]
    if n <= 8:
        return _forward_sum(values)
    mid = n // 2
    return _pairwise_sum(values[:mid]) + _pairwise_sum(values[mid:])


_SUMMATION: Dict[str, Callable[[np.ndarray], float]] = {
    "forward": _forward_sum,
    "pairwise": _pairwise_sum,
}


def membrane_mass(state: SimState, p: DimensionlessParams) -> float:
    """Vesicles built into the neurite membranes, zero for static lengths"""
    if p.kappa_L <= 0.0:
        return 0.0
    per_length = p.kappa_h / p.kappa_L * p.cone_mass_unit
    return sum(c * per_length * L for c, L in zip(p.c_growth, state.lengths))


def total_mass(state: SimState, grid: Grid1D, p: DimensionlessParams,
               summation: str = "pairwise", include_membrane: bool = True) -> float:
    """Vesicles in the neurites, the pools and (optionally) the membranes"""
    add = _SUMMATION[summation]
    neurites = [p.neurite_mass_unit * L * grid.h * add(np.asarray(fld.rho))
                for fld, L in zip(state.fields, state.lengths)]
    pools = [p.cone_mass_unit * lam for lam in state.lambda_cone]
    pools.append(p.som_mass_unit * state.lambda_som)
    mass = add(np.asarray(neurites + pools))
    if include_membrane:
        mass += membrane_mass(state, p)
    return mass


@dataclass
class MassLedger:
    """Initial mass plus cumulative production, against which m(t) is checked"""

    m0: float
    produced: float = 0.0

    def add(self, amount: float):
        self.produced += amount

    def residual(self, mass: float) -> float:
        return abs(mass - self.m0 - self.produced)


@dataclass
class MassBalance:
    times: np.ndarray
    residual: np.ndarray
    m0: float = 0.0

    @property
    def max_residual(self) -> float:
        return float(self.residual.max()) if self.residual.size else 0.0

    @property
    def max_relative_residual(self) -> float:
        return self.max_residual / max(abs(self.m0), 1e-300)


def mass_balance_series(record: "RunRecord") -> MassBalance:
    residual = np.abs(record.mass - record.mass[0] - record.produced)
    return MassBalance(times=record.times, residual=residual, m0=float(record.mass[0]))


def refinement_slope(mesh_sizes: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(values) against log(mesh_sizes)"""
    pairs = [(h, v) for h, v in zip(mesh_sizes, values) if h > 0 and v > 0]
    if len(pairs) < 2:
        return None
    x, y = np.log(np.array(pairs)).T
    return float(np.polyfit(x, y, 1)[0])


def mass_balance_slope(records: Sequence["RunRecord"], mesh_sizes: Sequence[float]) -> Optional[float]:
    """Refinement slope of the maximal balance residual; None below two levels"""
    if len(records) < 2:
        return None
    return refinement_slope(mesh_sizes, [mass_balance_series(r).max_residual for r in records])


@dataclass
class BoxReport:
    min_f: float
    max_rho: float
    first_violation_time: Optional[float] = None

    @property
    def violated(self) -> bool:
        return self.first_violation_time is not None

    def to_dict(self) -> Dict[str, Any]:
        return dict(asdict(self), violated=self.violated)


def box_constraint_monitor(record: "RunRecord", rho_cap: float,
                           tol: float = BOX_TOLERANCE) -> BoxReport:
    bad = (record.min_f < -tol) | (record.max_rho > rho_cap + tol)
    first = float(record.times[np.argmax(bad)]) if bad.any() else None
    report = BoxReport(min_f=float(record.min_f.min()), max_rho=float(record.max_rho.max()),
                       first_violation_time=first)
    if report.violated:
        logger.warning(f"Box constraints violated from t={first:g}: "
                       f"min f={report.min_f:.3e}, max rho={report.max_rho:.6g} (cap {rho_cap:g})")
    return report


def snapshot_within_box(state: SimState, rho_cap: float, tol: float = BOX_TOLERANCE) -> bool:
    return all(min(fld.f_plus.min(), fld.f_minus.min()) >= -tol and fld.rho.max() <= rho_cap + tol
               for fld in state.fields)


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    detail: str
    worst_sample: str = ""
    worst_value: float = 0.0


@dataclass
class HypothesisReport:
    checks: List[HypothesisCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> HypothesisCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {c.name: asdict(c) for c in self.checks}


class _Worst:
    """Tracks the largest violation seen over a sampled check"""

    def __init__(self, tol: float):
        self.tol = tol
        self.value = 0.0
        self.sample = ""
        self.failed = False

    def see(self, violation: float, sample: str, failed: Optional[bool] = None):
        if failed is None:
            failed = violation > self.tol
        if failed and (not self.failed or violation > self.value):
            self.value, self.sample, self.failed = float(violation), sample, True
        elif not self.failed and violation > self.value:
            self.value, self.sample = float(violation), sample

    def check(self, name: str, detail: str) -> HypothesisCheck:
        return HypothesisCheck(name=name, passed=not self.failed, detail=detail,
                               worst_sample=self.sample, worst_value=self.value)


def _check_gates(mf: ModelFunctions, p: DimensionlessParams, s: np.ndarray, tol: float) -> HypothesisCheck:
    worst = _Worst(tol)
    cap = p.rho_cap
    for j in range(mf.n_neurites):
        for name, g in (("g+", mf.g_plus[j]), ("g-", mf.g_minus[j])):
            on_cap = np.abs(g(s, cap - s))
            k = int(np.argmax(on_cap))
            worst.see(on_cap[k], f"{name}[{j + 1}]({s[k]:.4g}, {cap - s[k]:.4g})")
            for t in s:
                free = s[s + t <= cap]
                values = g(free, np.full_like(free, t))
                if values.size and values.min() < 0:
                    k = int(np.argmin(values))
                    worst.see(-values[k], f"{name}[{j + 1}]({free[k]:.4g}, {t:.4g}) < 0")
        g_minus_axis = np.abs(mf.g_minus[j](s, np.zeros_like(s)))
        k = int(np.argmax(g_minus_axis))
        worst.see(g_minus_axis[k], f"g-[{j + 1}]({s[k]:.4g}, 0)")
        g_plus_axis = np.abs(mf.g_plus[j](np.zeros_like(s), s))
        k = int(np.argmax(g_plus_axis))
        worst.see(g_plus_axis[k], f"g+[{j + 1}](0, {s[k]:.4g})")
    return worst.check("H2", "g >= 0, g = 0 on rho = cap, g-(s,0) = g+(0,s) = 0")


def _check_growth(mf: ModelFunctions, p: DimensionlessParams, samples: int, tol: float) -> HypothesisCheck:
    worst = _Worst(tol)
    lam = np.linspace(0.0, p.lambda_cone_cap, samples)
    for j in range(mf.n_neurites):
        ell = p.ell_min[j]
        lengths = np.linspace(ell, ell + 5.0, samples)
        for s in lam:
            values = np.asarray(mf.h[j](np.full_like(lengths, s), lengths), dtype=float)
            drops = -np.diff(values)
            k = int(np.argmax(drops))
            worst.see(max(drops[k], 0.0), f"h[{j + 1}]({s:.4g}, {lengths[k]:.4g}) decreasing")
        at_min = np.asarray(mf.h[j](lam, np.full_like(lam, ell)), dtype=float)
        k = int(np.argmin(at_min))
        worst.see(-at_min[k], f"h[{j + 1}]({lam[k]:.4g}, ell) <= 0", failed=at_min[k] <= 0)
    return worst.check("H3", "h increasing in L and h(s, ell) > 0")


def _check_alpha(mf: ModelFunctions, p: DimensionlessParams, samples: int, tol: float) -> HypothesisCheck:
    worst = _Worst(tol)
    for j in range(mf.n_neurites):
        for name, alpha, cap in (("alpha+", mf.alpha_plus[j], p.lambda_som_cap),
                                 ("alpha-", mf.alpha_minus[j], p.lambda_cone_cap)):
            s = np.linspace(0.0, cap, samples)
            values = np.asarray(alpha(s), dtype=float)
            k = int(np.argmin(values))
            worst.see(max(-values[k], 0.0), f"{name}[{j + 1}]({s[k]:.4g}) < 0")
            drops = -np.diff(values)
            k = int(np.argmax(drops))
            worst.see(max(drops[k], 0.0), f"{name}[{j + 1}] decreasing at {s[k]:.4g}")
        origin = abs(float(mf.alpha_minus[j](0.0)))
        worst.see(origin, f"alpha-[{j + 1}](0)")
    return worst.check("H4", "alpha >= 0 and increasing, alpha-(0) = 0")


def _check_beta(mf: ModelFunctions, p: DimensionlessParams, samples: int, tol: float) -> HypothesisCheck:
    worst = _Worst(tol)
    for j in range(mf.n_neurites):
        for name, beta, cap in (("beta+", mf.beta_plus[j], p.lambda_cone_cap),
                                ("beta-", mf.beta_minus[j], p.lambda_som_cap)):
            s = np.linspace(0.0, cap, samples)
            values = np.asarray(beta(s), dtype=float)
            k = int(np.argmin(values))
            worst.see(max(-values[k], 0.0), f"{name}[{j + 1}]({s[k]:.4g}) < 0")
        at_cap = abs(float(mf.beta_plus[j](p.lambda_cone_cap)))
        worst.see(at_cap, f"beta+[{j + 1}](cap)")
    return worst.check("H5", "beta >= 0 on [0, cap], beta+(cap) = 0")


def _check_parameters(p: DimensionlessParams) -> HypothesisCheck:
    worst = _Worst(0.0)
    for name, value in (("kappa_v", p.kappa_v), ("kappa_D", p.kappa_D)):
        worst.see(-value, f"{name} = {value:g}", failed=value <= 0)
    for j, c in enumerate(p.c_growth):
        worst.see(-c, f"c_growth[{j + 1}] = {c:g}", failed=c <= 0)
    worst.see(-p.kappa_lambda, f"kappa_lambda = {p.kappa_lambda:g}", failed=p.kappa_lambda < 0)
    return worst.check("H6", "kappa_v, kappa_D, c_growth > 0 and kappa_lambda >= 0")


def _check_production(mf: ModelFunctions, tol: float) -> HypothesisCheck:
    worst = _Worst(tol)
    for t in (1e3, 1e6):
        value = float(mf.gamma(t))
        worst.see(abs(value), f"gamma({t:g}) = {value:g}", failed=abs(value) > tol and t >= 1e6)
    return worst.check("H7", "gamma(t) -> 0")


def _check_transfer(p: DimensionlessParams) -> HypothesisCheck:
    """Boundary transfer moves the same number of vesicles out of one compartment as into the other"""
    worst = _Worst(1e-9)
    soma = p.kappa_som * p.som_mass_unit
    cone = p.kappa_cone * p.cone_mass_unit
    for j in range(p.n_neurites):
        for name, kappa, pool in (("alpha+", p.kappa_alpha_plus[j], soma),
                                  ("beta-", p.kappa_beta_minus[j], soma),
                                  ("beta+", p.kappa_beta_plus[j], cone),
                                  ("alpha-", p.kappa_alpha_minus[j], cone)):
            neurite = kappa * p.neurite_mass_unit
            worst.see(abs(neurite - pool) / max(abs(pool), abs(neurite), 1e-300),
                      f"kappa_{name}[{j + 1}]*unit={neurite:g} vs pool {pool:g}")
    return worst.check("transfer", "boundary fluxes conserve vesicles between compartments")


def _check_monotone_flux(p: DimensionlessParams) -> HypothesisCheck:
    worst = _Worst(0.0)
    worst.see(p.kappa_v - 1.0, f"kappa_v = {p.kappa_v:g}", failed=p.kappa_v > 1.0)
    return worst.check("monotone-flux", "|drift| <= 1 keeps the Lax-Friedrichs flux monotone")


def hypothesis_diagnostics(mf: ModelFunctions, p: DimensionlessParams, samples: int = 41,
                           tol: float = HYPOTHESIS_TOLERANCE) -> HypothesisReport:
    """Sample the structural properties of the coupling functions; never raises"""
    s = np.linspace(0.0, p.rho_cap, samples)
    report = HypothesisReport([
        _check_gates(mf, p, s, tol),
        _check_growth(mf, p, samples, tol),
        _check_alpha(mf, p, samples, tol),
        _check_beta(mf, p, samples, tol),
        _check_parameters(p),
        _check_production(mf, tol),
        _check_transfer(p),
        _check_monotone_flux(p),
    ])
    for check in report.checks:
        if not check.passed:
            logger.warning(f"Hypothesis {check.name} not satisfied: {check.detail} "
                           f"(worst at {check.worst_sample}, {check.worst_value:.3g})")
    return report


def observed_orders(differences: Sequence[float], ratio: float = 2.0) -> List[float]:
    """log(d_k / d_{k+1}) / log(ratio) for successive differences"""
    orders = []
    for a, b in zip(differences[:-1], differences[1:]):
        orders.append(math.log(a / b) / math.log(ratio) if a > 0 and b > 0 else float("nan"))
    return orders


@dataclass
class QuantityConvergence:
    differences: List[float]
    orders: List[float]

    @property
    def order(self) -> float:
        return self.orders[-1] if self.orders else float("nan")


@dataclass
class ConvergenceReport:
    levels: List[int]
    quantities: Dict[str, QuantityConvergence]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": self.levels,
            "quantities": {k: {"differences": v.differences, "orders": v.orders, "order": v.order}
                           for k, v in self.quantities.items()},
        }


def density_distance(coarse: SimState, fine: SimState) -> float:
    """L2 distance of the densities after projecting the fine state onto the coarse grid"""
    n_coarse = coarse.fields[0].n_cells
    n_fine = fine.fields[0].n_cells
    if n_fine % n_coarse != 0:
        raise GridError(f"Grids with {n_coarse} and {n_fine} cells are not nested")
    factor = n_fine // n_coarse
    h = 1.0 / n_coarse
    total = 0.0
    for c, f in zip(coarse.fields, fine.fields):
        for a, b in ((c.f_plus, f.f_plus), (c.f_minus, f.f_minus)):
            diff = a - project_conservative(b, factor)
            total += h * float(diff @ diff)
    return math.sqrt(total)


def _scalar_quantities(state: SimState) -> Dict[str, float]:
    values = {"lambda_som": state.lambda_som}
    for j, (L, lam) in enumerate(zip(state.lengths, state.lambda_cone)):
        values[f"L{j + 1}"] = L
        values[f"lambda{j + 1}"] = lam
    return values


def self_convergence(finals: Sequence[SimState], ratio: float = 2.0) -> ConvergenceReport:
    """Observed orders from successive differences of runs ordered coarse to fine"""
    if len(finals) < 3:
        raise ValueError(f"Self-convergence needs at least 3 levels, got {len(finals)}")
    levels = [s.fields[0].n_cells for s in finals]
    for a, b in zip(levels[:-1], levels[1:]):
        if b % a != 0:
            raise GridError(f"Grids with {a} and {b} cells are not nested")

    quantities: Dict[str, QuantityConvergence] = {}
    scalars = [_scalar_quantities(s) for s in finals]
    for name in scalars[0]:
        diffs = [abs(a[name] - b[name]) for a, b in zip(scalars[:-1], scalars[1:])]
        quantities[name] = QuantityConvergence(diffs, observed_orders(diffs, ratio))
    diffs = [density_distance(a, b) for a, b in zip(finals[:-1], finals[1:])]
    quantities["density"] = QuantityConvergence(diffs, observed_orders(diffs, ratio))
    return ConvergenceReport(levels=levels, quantities=quantities)


@dataclass
class ValidationReport:
    """Machine-readable summary written next to the run artifacts"""

    name: str
    run: Dict[str, Any]
    box: BoxReport
    mass_balance: Dict[str, float]
    hypotheses: HypothesisReport
    metrics: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "run": self.run,
            "box": self.box.to_dict(),
            "mass_balance": self.mass_balance,
            "hypotheses": self.hypotheses.to_dict(),
            "metrics": self.metrics,
        }


def build_report(name: str, record: "RunRecord", mf: ModelFunctions, p: DimensionlessParams,
                 metrics: Optional[Dict[str, Any]] = None) -> ValidationReport:
    balance = mass_balance_series(record)
    return ValidationReport(
        name=name,
        run=record.summary(),
        box=box_constraint_monitor(record, p.rho_cap),
        mass_balance={"m0": balance.m0, "max_residual": balance.max_residual,
                      "max_relative_residual": balance.max_relative_residual},
        hypotheses=hypothesis_diagnostics(mf, p),
        metrics=metrics,
    )
