# neurite_growth/cli/__init__.py
# Command-line interface

from .cli import cli, main

__all__ = ['cli', 'main']
