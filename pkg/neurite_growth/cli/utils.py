# neurite_growth/cli/utils.py
# Shared utilities and component initialization for CLI
# Provides the console, logging setup and singleton access to the controller

import logging
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from neurite_growth.core import ExperimentController

# Console for output
console = Console()

# Component instances (initialized lazily)
_controller: Optional[ExperimentController] = None


def setup_logging(verbose: bool = False, quiet: bool = False):
    """Route all package logging through rich on the shared console"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=verbose, rich_tracebacks=True)],
        force=True,
    )
    # matplotlib is chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)


def init_components(output_root: Optional[str] = None):
    """Initialize all core components"""
    global _controller

    if _controller is not None:
        _controller.cleanup()
    _controller = ExperimentController(Path(output_root) if output_root else None)


def get_controller() -> ExperimentController:
    """Get controller instance"""
    if _controller is None:
        raise RuntimeError("Components not initialized. Call init_components() first.")
    return _controller


def cleanup():
    """Cleanup all components"""
    global _controller

    if _controller:
        _controller.cleanup()
        _controller = None
