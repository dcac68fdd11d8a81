# neurite_growth/cli/commands/__init__.py
# CLI command modules
# Groups related commands by functionality

from .run_commands import simulate, converge
from .info_commands import stationary, validate, presets

__all__ = [
    'simulate',
    'converge',
    'stationary',
    'validate',
    'presets',
]
