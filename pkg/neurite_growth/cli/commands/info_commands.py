# neurite_growth/cli/commands/info_commands.py
# Commands that inspect a model without a full run
# Handles stationary, validate, presets

import json
import sys
from dataclasses import replace

import click
from rich.table import Table

from ..utils import console, get_controller
from neurite_growth.core.config import StationaryTargets, load_config
from neurite_growth.core.presets import PRESETS
from neurite_growth.core.validation import hypothesis_diagnostics


@click.command()
@click.argument('config', required=False, type=click.Path(exists=True, dir_okay=False))
@click.option('--f-inf', type=float, multiple=True, help='Stationary density per neurite')
@click.option('--lambda-inf', type=float, multiple=True, help='Cone pool targets per neurite')
@click.option('--lambda-som-inf', type=float, help='Soma pool target')
@click.option('--probe-steps', type=int, help='Integrate this many steps from the state')
@click.option('--n-cells', type=int, help='Cells of the residual and probe grid')
@click.option('--json', 'output_json', is_flag=True, help='Output as JSON')
def stationary(config, f_inf, lambda_inf, lambda_som_inf, probe_steps, n_cells, output_json):
    """Constant stationary state: coefficients, compatibility and residual"""
    controller = get_controller()

    try:
        targets = StationaryTargets()
        if config:
            cfg = load_config(config)
            if cfg.stationary is None:
                console.print(f"[red]✗[/red] Config '{cfg.name}' has no stationary section")
                sys.exit(1)
            targets = cfg.stationary

        overrides = {}
        if f_inf:
            overrides["f_inf"] = list(f_inf) * (2 if len(f_inf) == 1 else 1)
        if lambda_inf:
            overrides["lambda_inf"] = list(lambda_inf) * (2 if len(lambda_inf) == 1 else 1)
        if lambda_som_inf is not None:
            overrides["lambda_som_inf"] = lambda_som_inf
        if probe_steps is not None:
            overrides["probe_steps"] = probe_steps
        if n_cells is not None:
            overrides["n_cells"] = n_cells
        targets = replace(targets, **overrides)

        with console.status("[bold green]Solving stationary state..."):
            analysis = controller.analyze_stationary(targets)

        if output_json:
            console.print(json.dumps(analysis.to_dict(), indent=2))
            return
        _output_stationary_table(analysis)
        console.print(f"[green]✓[/green] Discrete residual {analysis.residual:.3e}")

    except Exception as e:
        console.print(f"[red]✗[/red] Stationary state rejected: {e}")
        sys.exit(1)


@click.command()
@click.argument('config', type=click.Path(exists=True, dir_okay=False))
@click.option('--samples', default=41, show_default=True, help='Sample points per axis')
def validate(config, samples):
    """Check the structural hypotheses of a config's coupling functions"""
    try:
        cfg = load_config(config)
        resolved = cfg.build()
        report = hypothesis_diagnostics(resolved.functions, resolved.params, samples=samples)

        table = Table(title=f"Hypotheses of {cfg.name}")
        table.add_column("Check", style="cyan")
        table.add_column("Status")
        table.add_column("Detail")
        table.add_column("Worst sample")
        table.add_column("Worst value")
        for check in report.checks:
            table.add_row(
                check.name,
                "[green]pass[/green]" if check.passed else "[yellow]warn[/yellow]",
                check.detail,
                check.worst_sample or "-",
                f"{check.worst_value:.3g}",
            )
        console.print(table)

        if report.passed:
            console.print(f"[green]✓[/green] All hypotheses hold for {cfg.name}")
        else:
            warned = [c.name for c in report.checks if not c.passed]
            console.print(f"[yellow]![/yellow] {len(warned)} hypotheses not satisfied: {', '.join(warned)}")

    except Exception as e:
        console.print(f"[red]✗[/red] Error: {e}")
        sys.exit(1)


@click.command()
def presets():
    """List the built-in experiment presets"""
    table = Table(title="Presets")
    table.add_column("Name", style="cyan")
    table.add_column("Description")
    table.add_column("kappa_v")
    table.add_column("Initial lengths")
    for preset in PRESETS.values():
        table.add_row(preset.name, preset.description, f"{preset.params.kappa_v:g}",
                      ", ".join(f"{L:g}" for L in preset.initial.lengths))
    console.print(table)


# Helper functions
def _output_stationary_table(analysis):
    """Output coefficients and checks in table format"""
    state = analysis.state
    table = Table(title="Constant stationary state")
    table.add_column("Neurite", style="cyan")
    table.add_column("f∞")
    table.add_column("Λ∞")
    table.add_column("L∞")
    table.add_column("c_α+")
    table.add_column("c_α-")
    table.add_column("c_β+")
    table.add_column("c_β-")
    for j, c in enumerate(state.coefficients):
        table.add_row(str(j + 1), f"{state.f_inf[j]:g}", f"{state.lambda_inf[j]:g}",
                      f"{state.L_inf[j]:.6g}", f"{c.c_alpha_plus:.6g}", f"{c.c_alpha_minus:.6g}",
                      f"{c.c_beta_plus:.6g}", f"{c.c_beta_minus:.6g}")
    console.print(table)
    console.print(f"Soma target Λ_som∞ = {state.lambda_som_inf:g}")

    checks = Table(title="Compatibility")
    checks.add_column("Condition", style="cyan")
    checks.add_column("Relative error")
    for name, error in analysis.compatibility.items():
        checks.add_row(name, f"{error:.3e}")
    console.print(checks)
    if analysis.probe_drift is not None:
        console.print(f"Probe drift over {analysis.probe_steps} steps: {analysis.probe_drift:.3e}")
