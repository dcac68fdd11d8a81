# neurite_growth/core/__init__.py
# Core module initialization
# Model, discretization, time stepping, scaling, stationary states and validation

from .config import ConfigError, ExperimentConfig, load_config
from .controller import ExperimentController
from .integrator import RunRecord, StepFailure, StepperConfig, run
from .model import DimensionlessParams, ModelFunctions, SimState
from .monitor import RunMonitor
from .presets import get_preset, preset_names

__all__ = [
    'ConfigError',
    'ExperimentConfig',
    'load_config',
    'ExperimentController',
    'RunRecord',
    'StepFailure',
    'StepperConfig',
    'run',
    'DimensionlessParams',
    'ModelFunctions',
    'SimState',
    'RunMonitor',
    'get_preset',
    'preset_names',
]

__version__ = '0.1.0'
