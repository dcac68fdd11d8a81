# neurite_growth/cli/cli.py
# Main CLI entry point
# Delegates to the command modules under cli/commands

import sys
from pathlib import Path

import click

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from neurite_growth.cli.utils import cleanup, init_components, setup_logging  # noqa: E402
from neurite_growth.cli.commands import (  # noqa: E402
    converge,
    presets,
    simulate,
    stationary,
    validate,
)


@click.group()
@click.option('--output-root', envvar='NEURITE_OUTPUT_ROOT', default=None,
              help='Root directory for run outputs (env: NEURITE_OUTPUT_ROOT)')
@click.option('-v', '--verbose', is_flag=True, help='Debug logging')
@click.option('-q', '--quiet', is_flag=True, help='Warnings and errors only')
def cli(output_root, verbose, quiet):
    """Neurite growth - vesicle transport simulator"""
    setup_logging(verbose=verbose, quiet=quiet)
    init_components(output_root)


# Register commands
cli.add_command(simulate)
cli.add_command(converge)
cli.add_command(stationary)
cli.add_command(validate)
cli.add_command(presets)


def main():
    """Main entry point with cleanup"""
    try:
        cli()
    except KeyboardInterrupt:
        cleanup()
        sys.exit(130)
    finally:
        cleanup()


if __name__ == '__main__':
    main()
