# neurite_growth/core/output.py
# Run artifacts: series and snapshot CSV files, JSON reports, the resolved
# config and SVG plots of lengths, pools and density snapshots
# Does NOT run simulations or decide what to write, see controller.py

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import yaml  # noqa: E402

from .discretization import Grid1D  # noqa: E402
from .integrator import RunRecord  # noqa: E402
from .model import SimState  # noqa: E402
from .validation import snapshot_within_box  # noqa: E402

logger = logging.getLogger(__name__)

CSV_FORMAT = "%.17g"

plt.rcParams["svg.hashsalt"] = "neurite-growth"
_SVG_METADATA = {"Date": None}


def series_columns(n_neurites: int) -> List[str]:
    return (["time"] + [f"L{j + 1}" for j in range(n_neurites)] + ["lambda_som"]
            + [f"lambda{j + 1}" for j in range(n_neurites)] + ["mass_residual"])


def write_series(record: RunRecord, path: Path) -> Path:
    """time, L_j, Λ_som, Λ_j and the mass residual at every sample"""
    n = record.lengths.shape[1]
    table = np.column_stack([record.times, record.lengths, record.lambda_som,
                             record.lambda_cone, record.mass_residual])
    np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header=",".join(series_columns(n)),
               comments="")
    return path


def snapshot_name(t: float) -> str:
    return f"snapshot_{t:.6f}.csv"


def write_snapshot(state: SimState, grid: Grid1D, path: Path, rho_cap: Optional[float] = None) -> Path:
    """Reference coordinate, physical coordinate and f± per neurite"""
    if rho_cap is not None and not snapshot_within_box(state, rho_cap):
        logger.warning(f"Snapshot at t={state.time:g} leaves the box 0 <= f, rho <= {rho_cap:g}")
    y = grid.center_coords
    columns, header = [y], ["y"]
    for j, (fld, L) in enumerate(zip(state.fields, state.lengths)):
        columns += [y * L, fld.f_plus, fld.f_minus]
        header += [f"x{j + 1}", f"f_plus{j + 1}", f"f_minus{j + 1}"]
    np.savetxt(path, np.column_stack(columns), fmt=CSV_FORMAT, delimiter=",",
               header=",".join(header), comments="")
    return path


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def write_resolved_config(data: Dict[str, Any], path: Path) -> Path:
    path.write_text(yaml.safe_dump(data, sort_keys=False, default_flow_style=None))
    return path


def write_failure(name: str, error: BaseException, path: Path) -> Path:
    data = {"name": name, "error": type(error).__name__, "message": str(error)}
    for attr in ("step", "substep", "field", "hypothesis"):
        if getattr(error, attr, None) not in (None, ""):
            data[attr] = getattr(error, attr)
    return write_json(data, path)


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    return path


def plot_lengths(record: RunRecord, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for j in range(record.lengths.shape[1]):
        ax.plot(record.times, record.lengths[:, j], label=f"L{j + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("length")
    ax.legend()
    return _save(fig, path)


def plot_pools(record: RunRecord, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(record.times, record.lambda_som, label="soma")
    for j in range(record.lambda_cone.shape[1]):
        ax.plot(record.times, record.lambda_cone[:, j], label=f"cone {j + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("vesicle pool")
    ax.legend()
    return _save(fig, path)


def plot_snapshots(snapshots: Dict[float, SimState], grid: Grid1D, path: Path) -> Path:
    n = next(iter(snapshots.values())).n_neurites
    fig, axes = plt.subplots(n, 1, figsize=(6, 3 * n), squeeze=False)
    for t, state in sorted(snapshots.items()):
        for j, fld in enumerate(state.fields):
            x = grid.center_coords * state.lengths[j]
            line, = axes[j, 0].plot(x, fld.f_plus, label=f"f+ t={t:g}")
            axes[j, 0].plot(x, fld.f_minus, linestyle="--", color=line.get_color(),
                            label=f"f- t={t:g}")
    for j in range(n):
        axes[j, 0].set_title(f"neurite {j + 1}")
        axes[j, 0].set_xlabel("x")
        axes[j, 0].legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def write_run_artifacts(directory: Path, record: RunRecord, grid: Grid1D, report: Dict[str, Any],
                        resolved_config: Dict[str, Any], rho_cap: float,
                        plots: bool = True) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = [
        write_series(record, directory / "series.csv"),
        write_json(report, directory / "report.json"),
        write_resolved_config(resolved_config, directory / "config.resolved.yaml"),
    ]
    for t, state in sorted(record.snapshots.items()):
        written.append(write_snapshot(state, grid, directory / snapshot_name(t), rho_cap))
    if plots:
        written.append(plot_lengths(record, directory / "lengths.svg"))
        written.append(plot_pools(record, directory / "pools.svg"))
        if record.snapshots:
            written.append(plot_snapshots(record.snapshots, grid, directory / "snapshots.svg"))
    logger.info(f"Wrote {len(written)} artifacts to {directory}")
    return written
