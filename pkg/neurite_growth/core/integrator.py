# neurite_growth/core/integrator.py
# Implicit-explicit time stepping with the decoupled update chain
# densities -> pools -> lengths, and the run loop that records time series
# Does NOT write files or parse configs, see output.py and config.py

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .discretization import Grid1D, GridError
from .functions import Polynomial
from .kernels import density_step
from .model import (
    DimensionlessParams, ModelFunctions, NeuriteField, SimState,
    boundary_fluxes, initial_length_rates,
)
from .validation import MassLedger, total_mass

logger = logging.getLogger(__name__)

Observer = Callable[[int, SimState], None]


class StepFailure(RuntimeError):
    """An implicit scalar solve of a sub-step did not converge"""

    def __init__(self, message: str, step: Optional[int] = None, substep: str = ""):
        super().__init__(message)
        self.step = step
        self.substep = substep

    def __str__(self) -> str:
        where = f"step {self.step} " if self.step is not None else ""
        what = f"({self.substep}) " if self.substep else ""
        return f"{where}{what}{self.args[0]}"


class Termination(Enum):
    REACHED_T_END = "reached_t_end"
    STATIONARY = "stationary"
    MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class StepperConfig:
    tau: float = 1e-4
    t_end: float = 1000.0
    stationarity_tol: float = 1e-9
    max_steps: Optional[int] = None
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    # None picks a stride giving at most MAX_ROWS samples
    sample_stride: Optional[int] = None
    snapshot_times: Tuple[float, ...] = ()

    MAX_ROWS = 10_000

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not self.stationarity_tol > 0:
            raise ValueError(f"stationarity_tol must be > 0, got {self.stationarity_tol}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

    @property
    def n_steps(self) -> int:
        """Steps to reach t_end, bounded by max_steps"""
        steps = int(round(self.t_end / self.tau))
        if self.max_steps is not None:
            steps = min(steps, int(self.max_steps))
        return steps

    @property
    def stride(self) -> int:
        if self.sample_stride is not None:
            return max(1, int(self.sample_stride))
        return max(1, math.ceil(self.n_steps / self.MAX_ROWS))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": self.tau,
            "t_end": self.t_end,
            "stationarity_tol": self.stationarity_tol,
            "max_steps": self.max_steps,
            "newton_tol": self.newton_tol,
            "newton_max_iter": self.newton_max_iter,
            "sample_stride": self.sample_stride,
            "snapshot_times": list(self.snapshot_times),
        }


@dataclass(eq=False)
class RunRecord:
    times: np.ndarray
    steps: np.ndarray
    lengths: np.ndarray
    lambda_som: np.ndarray
    lambda_cone: np.ndarray
    mass: np.ndarray
    produced: np.ndarray
    mass_residual: np.ndarray
    min_f: np.ndarray
    max_rho: np.ndarray
    termination: Termination
    n_steps: int
    final_state: SimState
    snapshots: Dict[float, SimState] = field(default_factory=dict)
    negative_flux_samples: int = 0

    @property
    def min_length(self) -> float:
        return float(self.lengths.min())

    def summary(self) -> Dict[str, Any]:
        final = self.final_state
        return {
            "termination": self.termination.value,
            "steps": self.n_steps,
            "final_time": final.time,
            "final_lengths": list(final.lengths),
            "final_lambda_som": final.lambda_som,
            "final_lambda_cone": list(final.lambda_cone),
            "min_length": self.min_length,
            "max_mass_residual": float(self.mass_residual.max()),
            "samples": int(self.times.shape[0]),
            "negative_flux_samples": self.negative_flux_samples,
        }




@dataclass(frozen=True, eq=False)
class StepPlan:
    """Per-run constants of the step chain

    soma_polys holds the (β₋, α₊) coefficients per neurite, None as soon as
    one of them is not a polynomial. cone_polys holds (β₊, α₋) or None per
    neurite. faces is None for a plan built without a grid, which only
    serves the pool and length sub-steps.
    """

    faces: Optional[np.ndarray]
    h: float
    soma_polys: Optional[Tuple[Tuple[Polynomial, Polynomial], ...]]
    cone_polys: Tuple[Optional[Tuple[Polynomial, Polynomial]], ...]
    implicit_length: Tuple[bool, ...]

    @classmethod
    def build(cls, mf: ModelFunctions, p: DimensionlessParams,
              grid: Optional[Grid1D] = None) -> "StepPlan":
        if grid is not None and grid.n_cells < 3:
            raise GridError(f"Diffusion needs at least 3 cells, got {grid.n_cells}")

        def pair(out_map, in_map):
            out_poly, in_poly = out_map.polynomial(), in_map.polynomial()
            if out_poly is None or in_poly is None:
                return None
            return tuple(float(c) for c in out_poly), tuple(float(c) for c in in_poly)

        j_range = range(mf.n_neurites)
        soma = tuple(pair(mf.beta_minus[j], mf.alpha_plus[j]) for j in j_range)
        return cls(
            faces=None if grid is None else np.array(grid.face_coords, dtype=float),
            h=math.nan if grid is None else grid.h,
            soma_polys=None if any(s is None for s in soma) else soma,
            cone_polys=tuple(pair(mf.beta_plus[j], mf.alpha_minus[j]) for j in j_range),
            implicit_length=tuple(p.kappa_L != 0.0 and not g.length_independent for g in mf.h),
        )


class _Recorder:
    """Accumulates samples during a run"""

    def __init__(self):
        self.rows: Dict[str, List[Any]] = {k: [] for k in (
            "times", "steps", "lengths", "lambda_som", "lambda_cone",
            "mass", "produced", "mass_residual", "min_f", "max_rho")}
        self.snapshots: Dict[float, SimState] = {}
        self.negative_flux_samples = 0

    def sample(self, step: int, state: SimState, ledger: MassLedger, grid: Grid1D,
               mf: ModelFunctions, p: DimensionlessParams,
               extremes: Optional[Tuple[float, float]] = None):
        """Record one row; extremes are min f and max ρ over the steps since the last row"""
        mass = total_mass(state, grid, p)
        if extremes is None:
            extremes = (min(min(fld.f_plus.min(), fld.f_minus.min()) for fld in state.fields),
                        max(fld.rho.max() for fld in state.fields))
        rows = self.rows
        rows["times"].append(state.time)
        rows["steps"].append(step)
        rows["lengths"].append(state.lengths)
        rows["lambda_som"].append(state.lambda_som)
        rows["lambda_cone"].append(state.lambda_cone)
        rows["mass"].append(mass)
        rows["produced"].append(ledger.produced)
        rows["mass_residual"].append(ledger.residual(mass))
        rows["min_f"].append(extremes[0])
        rows["max_rho"].append(extremes[1])
        for j, fld in enumerate(state.fields):
            fx = boundary_fluxes(fld, state.lambda_som, state.lambda_cone[j], mf, j)
            if not fx.admissible:
                self.negative_flux_samples += 1
                logger.debug(f"Negative boundary flux on neurite {j + 1} at t={state.time:g}: {fx}")

    def finish(self, termination: Termination, n_steps: int, final_state: SimState) -> RunRecord:
        arrays = {k: np.asarray(v, dtype=float) for k, v in self.rows.items()}
        arrays["steps"] = arrays["steps"].astype(int)
        return RunRecord(termination=termination, n_steps=n_steps, final_state=final_state,
                         snapshots=self.snapshots,
                         negative_flux_samples=self.negative_flux_samples, **arrays)


def _density_update(state: SimState, cfg: StepperConfig, mf: ModelFunctions,
                    p: DimensionlessParams, plan: StepPlan):
    """New fields and (largest L2 change, min f, max ρ) of the new fields"""
    rates = state.length_rates
    if rates is None:
        rates = initial_length_rates(state, mf, p)
    tau, h = cfg.tau, plan.h
    kappa_v, kappa_D = float(p.kappa_v), float(p.kappa_D)
    kappa_lambda, rho_cap = float(p.kappa_lambda), float(p.rho_cap)
    updated = []
    change, min_f, max_rho = 0.0, math.inf, -math.inf
    for j, fld in enumerate(state.fields):
        bf = boundary_fluxes(fld, state.lambda_som, state.lambda_cone[j], mf, j)
        f_plus, f_minus, d_plus, d_minus, lo, hi = density_step(
            fld.f_plus, fld.f_minus, plan.faces, float(state.lengths[j]), float(rates[j]),
            tau, h, kappa_v, kappa_D, kappa_lambda, rho_cap,
            p.kappa_alpha_plus[j] * bf.inflow_left,
            p.kappa_beta_plus[j] * bf.outflow_right,
            -p.kappa_beta_minus[j] * bf.outflow_left,
            -p.kappa_alpha_minus[j] * bf.inflow_right)
        updated.append(NeuriteField.adopt(f_plus, f_minus))
        change = max(change, d_plus, d_minus)
        min_f = min(min_f, lo)
        max_rho = max(max_rho, hi)
    return tuple(updated), (change, min_f, max_rho)


def step_densities(state: SimState, cfg: StepperConfig, mf: ModelFunctions,
                   p: DimensionlessParams, grid: Grid1D,
                   plan: Optional[StepPlan] = None) -> Tuple[NeuriteField, ...]:
    """(hI + τκ_D/L² A) f^{n+1} = h (f^n + τ (convection + reaction)) for both directions"""
    if plan is None or plan.faces is None:
        plan = StepPlan.build(mf, p, grid)
    return _density_update(state, cfg, mf, p, plan)[0]


def _quadratic_root(previous: float, tau: float, c0: float, c1: float,
                    c2: float) -> Optional[float]:
    """Root of x = previous + τ(c0 + c1 x + c2 x²) closest to previous, None if there is none"""
    a, b, c = -tau * c2, 1.0 - tau * c1, -(previous + tau * c0)
    if a == 0.0:
        return -c / b if b != 0.0 else None
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    root = q / a
    if q != 0.0 and abs(c / q - previous) < abs(root - previous):
        root = c / q
    return root


def _newton(residual: Callable[[float], float], d_residual: Callable[[float], float],
            x: float, cfg: StepperConfig) -> Optional[float]:
    """Scalar Newton from x; None when it stalls, diverges or runs out of iterations"""
    for _ in range(cfg.newton_max_iter):
        slope = d_residual(x)
        if slope == 0.0 or not math.isfinite(slope):
            return None
        dx = residual(x) / slope
        x -= dx
        if not math.isfinite(x):
            return None
        if abs(dx) <= cfg.newton_tol * max(1.0, abs(x)):
            return x
    return None


def _solve_backward_euler(previous: float, tau: float, rate: Callable[[float], float],
                          d_rate: Callable[[float], float], poly: Optional[Polynomial],
                          cfg: StepperConfig, substep: str) -> float:
    """Solve x = previous + τ·rate(x)"""
    if poly is not None:
        root = _quadratic_root(previous, tau, *poly)
        if root is not None:
            return root

    x = _newton(lambda x: x - previous - tau * rate(x), lambda x: 1.0 - tau * d_rate(x),
                previous, cfg)
    if x is not None:
        return x
    logger.warning(f"Newton failed for {substep}, falling back to fixed-point iteration")

    x = previous
    for _ in range(20 * cfg.newton_max_iter):
        x_new = 0.5 * x + 0.5 * (previous + tau * rate(x))
        if abs(x_new - x) <= cfg.newton_tol * max(1.0, abs(x)):
            return x_new
        x = x_new
    raise StepFailure(f"implicit solve did not converge (last iterate {x:g})", substep=substep)


def _pool_update(fields_: Sequence[NeuriteField], lambda_som: float,
                 lambda_cone: Sequence[float], lengths: Sequence[float], t: float,
                 cfg: StepperConfig, mf: ModelFunctions, p: DimensionlessParams,
                 plan: StepPlan) -> Tuple[float, Tuple[float, ...]]:
    tau = cfg.tau
    traces = []
    for j, fld in enumerate(fields_):
        fp0, fm0 = float(fld.f_plus[0]), float(fld.f_minus[0])
        fp1, fm1 = float(fld.f_plus[-1]), float(fld.f_minus[-1])
        traces.append((fm0, float(mf.g_plus[j](fp0, fm0)), fp1, float(mf.g_minus[j](fp1, fm1))))
    production = p.kappa_gamma * float(mf.gamma(t))
    k_som, k_cone = p.kappa_som, p.kappa_cone

    new_som = None
    if plan.soma_polys is not None:
        c0, c1, c2 = production, 0.0, 0.0
        for (out_poly, in_poly), (fm0, g_plus, _, _) in zip(plan.soma_polys, traces):
            w_out, w_in = k_som * fm0, k_som * g_plus
            c0 += w_out * out_poly[0] - w_in * in_poly[0]
            c1 += w_out * out_poly[1] - w_in * in_poly[1]
            c2 += w_out * out_poly[2] - w_in * in_poly[2]
        new_som = _quadratic_root(lambda_som, tau, c0, c1, c2)
    if new_som is None:
        j_range = range(len(traces))

        def soma_rate(x):
            return k_som * sum(mf.beta_minus[j](x) * traces[j][0] - mf.alpha_plus[j](x) * traces[j][1]
                               for j in j_range) + production

        def soma_d_rate(x):
            return k_som * sum(mf.beta_minus[j].derivative(x) * traces[j][0]
                               - mf.alpha_plus[j].derivative(x) * traces[j][1] for j in j_range)

        new_som = _solve_backward_euler(lambda_som, tau, soma_rate, soma_d_rate, None, cfg,
                                        "soma pool")

    cones = []
    for j, (_, _, fp1, g_minus) in enumerate(traces):
        # growth consumption is lagged at Λ^n, L^n
        consumption = p.kappa_h * p.c_growth[j] * float(mf.h[j](lambda_cone[j], lengths[j]))
        polys = plan.cone_polys[j]
        cone = None
        if polys is not None:
            (b0, b1, b2), (a0, a1, a2) = polys
            w_out, w_in = k_cone * fp1, k_cone * g_minus
            cone = _quadratic_root(lambda_cone[j], tau, w_out * b0 - w_in * a0 - consumption,
                                   w_out * b1 - w_in * a1, w_out * b2 - w_in * a2)
        if cone is None:
            beta, alpha = mf.beta_plus[j], mf.alpha_minus[j]

            def cone_rate(x, beta=beta, alpha=alpha, fp1=fp1, g_minus=g_minus,
                          consumption=consumption):
                return k_cone * (beta(x) * fp1 - alpha(x) * g_minus) - consumption

            def cone_d_rate(x, beta=beta, alpha=alpha, fp1=fp1, g_minus=g_minus):
                return k_cone * (beta.derivative(x) * fp1 - alpha.derivative(x) * g_minus)

            cone = _solve_backward_euler(lambda_cone[j], tau, cone_rate, cone_d_rate, None, cfg,
                                         f"cone pool {j + 1}")
        cones.append(cone)
    return new_som, tuple(cones)


def step_pools(state: SimState, cfg: StepperConfig, mf: ModelFunctions,
               p: DimensionlessParams, plan: Optional[StepPlan] = None
               ) -> Tuple[float, Tuple[float, ...]]:
    """Backward Euler for the pools with traces from the updated densities

    The growth consumption in the cone equations uses the lagged Λ^n, L^n.
    """
    if plan is None:
        plan = StepPlan.build(mf, p)
    return _pool_update(state.fields, state.lambda_som, state.lambda_cone, state.lengths,
                        state.time, cfg, mf, p, plan)


def _length_update(lambda_cone: Sequence[float], lengths: Sequence[float], cfg: StepperConfig,
                   mf: ModelFunctions, p: DimensionlessParams, plan: StepPlan):
    tau = cfg.tau
    scale = tau * p.kappa_L
    new_lengths, rates = [], []
    for j, (lam, L_old) in enumerate(zip(lambda_cone, lengths)):
        growth = mf.h[j]
        predictor = L_old + scale * float(growth(lam, L_old))
        if plan.implicit_length[j]:
            L_new = _solve_length(growth, lam, L_old, predictor, scale, cfg, j)
        else:
            L_new = predictor
        new_lengths.append(L_new)
        rates.append((L_new - L_old) / tau)
    return tuple(new_lengths), tuple(rates)


def step_length(state: SimState, cfg: StepperConfig, mf: ModelFunctions,
                p: DimensionlessParams, plan: Optional[StepPlan] = None
                ) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """L^{n+1} = L^n + τκ_L h(Λ^{n+1}, L^{n+1}); returns lengths and dL/dt"""
    if plan is None:
        plan = StepPlan.build(mf, p)
    return _length_update(state.lambda_cone, state.lengths, cfg, mf, p, plan)


def _solve_length(growth, lam: float, L_old: float, predictor: float, scale: float,
                  cfg: StepperConfig, j: int) -> float:
    L = predictor
    for _ in range(cfg.newton_max_iter):
        slope = 1.0 - scale * float(growth.d_length(lam, L))
        if slope == 0.0:
            break
        dL = (L - L_old - scale * float(growth(lam, L))) / slope
        L -= dL
        if not math.isfinite(L):
            break
        if abs(dL) <= cfg.newton_tol * max(1.0, abs(L)):
            return L
    logger.warning(f"Newton failed for length {j + 1}, falling back to fixed-point iteration")

    L = predictor
    for _ in range(20 * cfg.newton_max_iter):
        L_new = L_old + scale * float(growth(lam, L))
        if abs(L_new - L) <= cfg.newton_tol * max(1.0, abs(L)):
            return L_new
        L = L_new
    raise StepFailure(f"length solve did not converge (last iterate {L:g})", substep=f"length {j + 1}")


def _advance(state: SimState, step: int, cfg: StepperConfig, mf: ModelFunctions,
             p: DimensionlessParams, plan: StepPlan):
    try:
        fields_, stats = _density_update(state, cfg, mf, p, plan)
        lambda_som, lambda_cone = _pool_update(fields_, state.lambda_som, state.lambda_cone,
                                               state.lengths, state.time, cfg, mf, p, plan)
        lengths, rates = _length_update(lambda_cone, state.lengths, cfg, mf, p, plan)
    except StepFailure as e:
        e.step = step
        raise
    new_state = SimState(fields=fields_, lambda_som=lambda_som, lambda_cone=lambda_cone,
                         lengths=lengths, time=(step + 1) * cfg.tau, length_rates=rates)
    return new_state, stats


def advance(state: SimState, step: int, cfg: StepperConfig, mf: ModelFunctions,
            p: DimensionlessParams, grid: Grid1D, plan: Optional[StepPlan] = None) -> SimState:
    """One full step f -> Λ -> L from time step·τ"""
    if plan is None or plan.faces is None:
        plan = StepPlan.build(mf, p, grid)
    return _advance(state, step, cfg, mf, p, plan)[0]


def run(initial: SimState, cfg: StepperConfig, mf: ModelFunctions, p: DimensionlessParams,
        grid: Grid1D, observers: Sequence[Observer] = (), monitor=None) -> RunRecord:
    """Integrate until t_end, stationarity or max_steps

    The box diagnostics of a row cover every step since the previous row;
    mass and boundary flux signs are evaluated on sampled steps only.
    """
    if initial.length_rates is None:
        initial = replace(initial, length_rates=initial_length_rates(initial, mf, p))
    plan = StepPlan.build(mf, p, grid)
    ledger = MassLedger(total_mass(initial, grid, p))
    recorder = _Recorder()
    stride, n_steps, tau = cfg.stride, cfg.n_steps, cfg.tau
    snapshot_steps = {int(round(t / tau)): t for t in cfg.snapshot_times}
    production_unit = tau * p.kappa_gamma * p.som_mass_unit
    tol = cfg.stationarity_tol

    logger.info(f"Run started: {n_steps} steps of tau={tau:g}, stride {stride}, "
                f"{grid.n_cells} cells")
    recorder.sample(0, initial, ledger, grid, mf, p)
    for observer in observers:
        observer(0, initial)
    if 0 in snapshot_steps:
        recorder.snapshots[snapshot_steps[0]] = initial

    state = initial
    termination = Termination.REACHED_T_END if n_steps == int(round(cfg.t_end / tau)) \
        else Termination.MAX_STEPS
    window_min, window_max = math.inf, -math.inf
    step = 0
    while step < n_steps:
        t_n = step * tau
        state, (change, lo, hi) = _advance(state, step, cfg, mf, p, plan)
        ledger.add(production_unit * float(mf.gamma(t_n)))
        step += 1
        window_min = min(window_min, lo)
        window_max = max(window_max, hi)
        stationary = change <= tol

        if step % stride == 0 or stationary or step == n_steps:
            recorder.sample(step, state, ledger, grid, mf, p, (window_min, window_max))
            window_min, window_max = math.inf, -math.inf
            for observer in observers:
                observer(step, state)
        if step in snapshot_steps:
            recorder.snapshots[snapshot_steps[step]] = state
        if monitor is not None:
            monitor.beat(step, state.time)
        if stationary:
            termination = Termination.STATIONARY
            break

    record = recorder.finish(termination, step, state)
    if record.negative_flux_samples:
        logger.warning(f"Negative boundary fluxes at {record.negative_flux_samples} samples; "
                       f"the coupling functions violate the flux sign hypotheses")
    logger.info(f"Run finished: {termination.value} after {step} steps at t={state.time:g}")
    return record
