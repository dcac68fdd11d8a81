# neurite_growth/__init__.py
# Simulator for neurite growth driven by vesicle transport

from .core import __version__

__all__ = ['__version__']
