# neurite_growth/core/controller.py
# Experiment controller: runs configs, fans sweeps out over worker threads,
# drives refinement studies and stationary-state probes, writes artifacts
# Does NOT parse configs or format console output

import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .config import OUTPUT_ROOT_ENV, ExperimentConfig, StationaryTargets
from .discretization import Grid1D
from .integrator import RunRecord, StepFailure, StepperConfig, run
from .monitor import RunMonitor
from .output import write_failure, write_json, write_run_artifacts
from .stationary import (
    ConstantStationaryState, compatibility_errors, solve_constant_state, stationary_functions,
    stationary_params, stationary_residual, to_sim_state,
)
from .validation import (
    ConvergenceReport, build_report, mass_balance_slope, mass_balance_series, self_convergence,
)

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[str, int, int], None]


@dataclass
class ExperimentResult:
    name: str
    directory: Path
    record: Optional[RunRecord] = None
    report: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ConvergenceResult:
    report: ConvergenceReport
    balance_slope: Optional[float]
    results: List[ExperimentResult]

    def to_dict(self) -> Dict[str, Any]:
        data = self.report.to_dict()
        data["balance_slope"] = self.balance_slope
        data["max_balance_residual"] = [float(mass_balance_series(r.record).max_residual)
                                        for r in self.results]
        return data


@dataclass
class StationaryAnalysis:
    state: ConstantStationaryState
    compatibility: Dict[str, float]
    residual: float
    probe_drift: Optional[float] = None
    probe_steps: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {"state": self.state.to_dict(), "compatibility": self.compatibility,
                "residual": self.residual, "probe_drift": self.probe_drift,
                "probe_steps": self.probe_steps}


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "."))


class ExperimentController:
    def __init__(self, output_root: Optional[Path] = None):
        self.output_root = Path(output_root) if output_root is not None else default_output_root()
        self.monitors: Dict[str, RunMonitor] = {}
        self._lock = threading.Lock()

    def run_experiment(self, cfg: ExperimentConfig,
                       progress: Optional[ProgressCallback] = None) -> ExperimentResult:
        """Run one config and write its artifacts; failures leave failure.json behind"""
        resolved = cfg.build()
        directory = cfg.output_dir(self.output_root)
        directory.mkdir(parents=True, exist_ok=True)
        monitor = RunMonitor(cfg.name, total_steps=resolved.stepper.n_steps)
        observers = []
        if progress is not None:
            total = resolved.stepper.n_steps
            observers.append(lambda step, state: progress(cfg.name, step, total))

        with self._lock:
            self.monitors[cfg.name] = monitor
        monitor.start()
        try:
            record = run(resolved.state, resolved.stepper, resolved.functions, resolved.params,
                         resolved.grid, observers=observers, monitor=monitor)
        except StepFailure as e:
            logger.error(f"Run {cfg.name} failed: {e}")
            write_failure(cfg.name, e, directory / "failure.json")
            raise
        finally:
            metrics = monitor.stop()
            with self._lock:
                self.monitors.pop(cfg.name, None)

        report = build_report(cfg.name, record, resolved.functions, resolved.params,
                              metrics=metrics.to_dict()).to_dict()
        write_run_artifacts(directory, record, resolved.grid, report, cfg.to_dict(),
                            resolved.params.rho_cap, plots=cfg.output.plots)
        return ExperimentResult(cfg.name, directory, record, report)

    def run_sweep(self, cfg: ExperimentConfig, workers: int = 2,
                  progress: Optional[ProgressCallback] = None) -> List[ExperimentResult]:
        """Each sweep entry on its own worker thread and in its own directory"""
        configs = cfg.sweep_configs() or [cfg]
        results: Dict[str, ExperimentResult] = {}
        logger.info(f"Sweep {cfg.name}: {len(configs)} runs on {workers} workers")
        with ThreadPoolExecutor(max_workers=max(1, workers), thread_name_prefix="sweep") as pool:
            futures = {pool.submit(self.run_experiment, sub, progress): sub for sub in configs}
            for future in as_completed(futures):
                sub = futures[future]
                try:
                    results[sub.name] = future.result()
                except Exception as e:
                    logger.error(f"Sweep run {sub.name} failed: {e}")
                    results[sub.name] = ExperimentResult(sub.name, sub.output_dir(self.output_root),
                                                         error=str(e))
        return [results[sub.name] for sub in configs]

    def converge(self, cfg: ExperimentConfig, levels: int = 3,
                 progress: Optional[ProgressCallback] = None) -> ConvergenceResult:
        """Run nested refinements (cells doubled, τ halved) and estimate observed orders"""
        results = [self.run_experiment(cfg.refined(level), progress) for level in range(levels)]
        report = self_convergence([r.record.final_state for r in results])
        mesh_sizes = [1.0 / cfg.refined(level).n_cells for level in range(levels)]
        slope = mass_balance_slope([r.record for r in results], mesh_sizes)
        result = ConvergenceResult(report, slope, results)
        write_json(result.to_dict(), cfg.output_dir(self.output_root) / "convergence.json")
        return result

    def analyze_stationary(self, targets: StationaryTargets,
                           progress: Optional[ProgressCallback] = None) -> StationaryAnalysis:
        """Coefficients, compatibility and residual of a constant state, optionally probed"""
        state = solve_constant_state(targets.f_inf, targets.lambda_inf, targets.lambda_som_inf,
                                     targets.caps, v0=targets.v0, ell_min=targets.ell_min,
                                     lengths=targets.lengths)
        grid = Grid1D(targets.n_cells)
        p = stationary_params(state, kappa_D=targets.kappa_D, ell_min=targets.ell_min)
        mf = stationary_functions(state)
        analysis = StationaryAnalysis(state, compatibility_errors(state),
                                      stationary_residual(state, grid, p, mf))
        if targets.probe_steps > 0:
            analysis.probe_drift = self.probe_stationary(state, targets, progress)
            analysis.probe_steps = targets.probe_steps
        return analysis

    def probe_stationary(self, state: ConstantStationaryState, targets: StationaryTargets,
                         progress: Optional[ProgressCallback] = None) -> float:
        """Largest entrywise deviation from the state over a run started at it"""
        grid = Grid1D(targets.n_cells)
        p = stationary_params(state, kappa_D=targets.kappa_D, ell_min=targets.ell_min)
        mf = stationary_functions(state)
        initial = to_sim_state(state, grid)
        reference = _flatten(initial)
        drift = [0.0]

        def observe(step, sim):
            drift[0] = max(drift[0], float(np.abs(_flatten(sim) - reference).max()))
            if progress is not None:
                progress("stationary-probe", step, targets.probe_steps)

        # sample every step; stationarity may end the probe early
        cfg = StepperConfig(tau=targets.tau, t_end=targets.probe_steps * targets.tau,
                            stationarity_tol=1e-300, sample_stride=1)
        run(initial, cfg, mf, p, grid, observers=[observe])
        logger.info(f"Stationary probe: drift {drift[0]:.3e} over {targets.probe_steps} steps")
        return drift[0]

    def stop_all(self):
        """Stop monitors of runs still in flight"""
        with self._lock:
            monitors = list(self.monitors.values())
            self.monitors.clear()
        for monitor in monitors:
            monitor.stop()

    def cleanup(self):
        """Clean up resources"""
        self.stop_all()


def _flatten(state) -> np.ndarray:
    parts = [np.array([state.lambda_som, *state.lambda_cone, *state.lengths])]
    for fld in state.fields:
        parts += [fld.f_plus, fld.f_minus]
    return np.concatenate(parts)
