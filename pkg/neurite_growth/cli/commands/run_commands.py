# neurite_growth/cli/commands/run_commands.py
# Commands that integrate the model
# Handles simulate and converge

import math
import sys

import click
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

from ..utils import console, get_controller
from neurite_growth.core.config import load_config


@click.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--sweep', is_flag=True, help='Run the sweep entries of the config')
@click.option('--workers', default=2, show_default=True, help='Worker threads for --sweep')
@click.option('--no-plots', is_flag=True, help='Skip the SVG plots')
def simulate(config, sweep, workers, no_plots):
    """Run an experiment config and write its artifacts"""
    controller = get_controller()

    try:
        cfg = load_config(config)
        if no_plots:
            cfg = cfg.with_overrides({"output": {"plots": False}})

        with _progress() as progress:
            callback = _progress_callback(progress)
            if sweep:
                if not cfg.sweep:
                    console.print(f"[red]✗[/red] Config '{cfg.name}' has no sweep section")
                    sys.exit(1)
                results = controller.run_sweep(cfg, workers=workers, progress=callback)
            else:
                results = [controller.run_experiment(cfg, progress=callback)]

        _print_results(results)
        failed = [r for r in results if not r.ok]
        if failed:
            for result in failed:
                console.print(f"[red]✗[/red] {result.name}: {result.error}")
            sys.exit(1)
        for result in results:
            console.print(f"[green]✓[/green] {result.name}: artifacts in {result.directory}")

    except Exception as e:
        console.print(f"[red]✗[/red] Simulation failed: {e}")
        sys.exit(1)


@click.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--levels', default=3, show_default=True, help='Number of nested refinements')
@click.option('--no-plots', is_flag=True, help='Skip the SVG plots of each level')
def converge(config, levels, no_plots):
    """Refine cells and τ together and report observed orders"""
    controller = get_controller()

    try:
        if levels < 3:
            console.print("[red]✗[/red] Need at least 3 levels to estimate an order")
            sys.exit(1)
        cfg = load_config(config)
        if no_plots:
            cfg = cfg.with_overrides({"output": {"plots": False}})

        with _progress() as progress:
            result = controller.converge(cfg, levels=levels, progress=_progress_callback(progress))

        table = Table(title=f"Self-convergence of {cfg.name} (cells {result.report.levels})")
        table.add_column("Quantity", style="cyan")
        table.add_column("Differences")
        table.add_column("Orders")
        for name, q in result.report.quantities.items():
            table.add_row(name,
                          ", ".join(f"{d:.3e}" for d in q.differences),
                          ", ".join(_fmt(o) for o in q.orders))
        console.print(table)
        slope = result.balance_slope
        console.print(f"Mass balance refinement slope: {_fmt(slope) if slope is not None else '-'}")
        console.print(f"[green]✓[/green] Convergence report in "
                      f"{cfg.output_dir(controller.output_root) / 'convergence.json'}")

    except Exception as e:
        console.print(f"[red]✗[/red] Convergence study failed: {e}")
        sys.exit(1)


# Helper functions
def _progress() -> Progress:
    return Progress(SpinnerColumn(), TextColumn("{task.description}"), BarColumn(),
                    TextColumn("{task.completed}/{task.total} steps"), TimeElapsedColumn(),
                    console=console, transient=True)


def _progress_callback(progress: Progress):
    tasks = {}

    def update(name, step, total):
        if name not in tasks:
            tasks[name] = progress.add_task(name, total=total)
        progress.update(tasks[name], completed=step)

    return update


def _fmt(value: float) -> str:
    return "nan" if value is None or math.isnan(value) else f"{value:.2f}"


def _print_results(results):
    """Output run summaries in table format"""
    table = Table(title="Runs")
    table.add_column("Name", style="cyan")
    table.add_column("Termination", style="green")
    table.add_column("Steps")
    table.add_column("t")
    table.add_column("Lengths")
    table.add_column("Soma")
    table.add_column("Mass residual")
    table.add_column("Box")
    table.add_column("Hypotheses")

    for result in results:
        if not result.ok:
            table.add_row(result.name, "[red]failed[/red]", *["-"] * 7)
            continue
        run = result.report["run"]
        box_ok = not result.report["box"]["violated"]
        hypotheses = result.report["hypotheses"]
        warned = [name for name, check in hypotheses.items() if not check["passed"]]
        table.add_row(
            result.name,
            run["termination"],
            str(run["steps"]),
            f"{run['final_time']:g}",
            ", ".join(f"{L:.4f}" for L in run["final_lengths"]),
            f"{run['final_lambda_som']:.4f}",
            f"{run['max_mass_residual']:.2e}",
            "✓" if box_ok else "[red]✗[/red]",
            "✓" if not warned else f"[yellow]{', '.join(warned)}[/yellow]",
        )
    console.print(table)
