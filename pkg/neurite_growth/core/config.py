# neurite_growth/core/config.py
# Experiment configuration: YAML loading, preset expansion, validation of
# initial data and solver settings, sweeps and refinement levels
# Does NOT run anything, it only produces validated, fully resolved inputs

import copy
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from .discretization import Grid1D
from .integrator import StepperConfig
from .model import DimensionlessParams, InitialData, ModelFunctions, SimState
from .presets import get_preset
from .scaling import SCALE_SETS, PhysicalScales, nondimensionalize

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "NEURITE_OUTPUT_ROOT"

_TOP_LEVEL = {"name", "preset", "functions", "params", "scales", "initial", "solver",
              "output", "sweep", "stationary"}


class ConfigError(ValueError):
    """Invalid configuration, naming the field and, where relevant, the hypothesis"""

    def __init__(self, message: str, field: str = "", hypothesis: str = "",
                 source: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.hypothesis = hypothesis
        self.source = source
        self.line = line

    def __str__(self) -> str:
        where = ""
        if self.source:
            where = f"{self.source}:{self.line}: " if self.line else f"{self.source}: "
        prefix = f"{self.field}: " if self.field else ""
        suffix = f" (violates {self.hypothesis})" if self.hypothesis else ""
        return f"{where}{prefix}{self.args[0]}{suffix}"


@dataclass
class OutputConfig:
    directory: str = "runs"
    stride: Optional[int] = None
    snapshot_times: List[float] = field(default_factory=list)
    plots: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {"directory": self.directory, "stride": self.stride,
                "snapshot_times": list(self.snapshot_times), "plots": self.plots}


@dataclass
class StationaryTargets:
    """Targets of a constant stationary state, in vesicle units with density cap 1"""

    f_inf: List[float] = field(default_factory=lambda: [0.25, 0.25])
    lambda_inf: List[float] = field(default_factory=lambda: [50.0, 50.0])
    lambda_som_inf: float = 3000.0
    caps: Tuple[float, float] = (6000.0, 100.0)
    v0: float = 1.0
    lengths: List[float] = field(default_factory=lambda: [1.0, 1.0])
    ell_min: List[float] = field(default_factory=lambda: [0.1, 0.1])
    kappa_D: float = 0.004
    n_cells: int = 100
    probe_steps: int = 0
    tau: float = 1e-4

    def to_dict(self) -> Dict[str, Any]:
        data = dict(self.__dict__)
        data["caps"] = list(self.caps)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StationaryTargets":
        data = dict(data)
        for key in ("f_inf", "lambda_inf", "lengths", "ell_min"):
            if key in data and not isinstance(data[key], (list, tuple)):
                data[key] = [data[key]] * 2
        if "caps" in data:
            data["caps"] = tuple(float(v) for v in data["caps"])
        return cls(**data)


@dataclass
class ResolvedExperiment:
    """Everything a run needs, built from a config"""

    name: str
    state: SimState
    functions: ModelFunctions
    params: DimensionlessParams
    grid: Grid1D
    stepper: StepperConfig


@dataclass
class ExperimentConfig:
    name: str
    preset: str = "experiment-1"
    functions: Dict[str, Any] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)
    scales: Optional[Union[str, Dict[str, Any]]] = None
    initial: InitialData = field(default_factory=InitialData)
    n_cells: int = 100
    stepper: StepperConfig = field(default_factory=StepperConfig)
    eta: float = 10.0
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: List[Dict[str, Any]] = field(default_factory=list)
    stationary: Optional[StationaryTargets] = None
    source: Optional[str] = None
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    def resolve_params(self) -> DimensionlessParams:
        if self.scales is not None:
            if isinstance(self.scales, str):
                if self.scales not in SCALE_SETS:
                    raise ConfigError(f"unknown scale set '{self.scales}' "
                                      f"(known: {', '.join(sorted(SCALE_SETS))})", field="scales")
                scales = SCALE_SETS[self.scales]
            else:
                scales = PhysicalScales.from_dict(self.scales)
            return nondimensionalize(scales)
        p = get_preset(self.preset).params
        return p.with_overrides(self.params) if self.params else p

    def resolve_functions(self, p: DimensionlessParams) -> ModelFunctions:
        mf = get_preset(self.preset).functions(p)
        return mf.with_overrides(self.functions) if self.functions else mf

    def grid(self) -> Grid1D:
        return Grid1D(self.n_cells)

    def build(self) -> ResolvedExperiment:
        """Resolve preset, overrides and initial data, then check them"""
        section = "scales" if self.scales is not None else "params"
        try:
            p = self.resolve_params()
            section = "functions"
            mf = self.resolve_functions(p)
            section = "initial"
            grid = self.grid()
            state = self.initial.build_state(grid.center_coords)
        except ConfigError:
            raise
        except ValueError as e:
            raise self._error(str(e), section) from e
        self._validate(p, mf, state)
        return ResolvedExperiment(self.name, state, mf, p, grid, self.stepper)

    def _error(self, message: str, field_path: str = "", hypothesis: str = "") -> ConfigError:
        line = _line_of(self.raw.get("__nodes__"), field_path) if field_path else None
        return ConfigError(message, field=field_path, hypothesis=hypothesis,
                           source=self.source, line=line)

    def _validate(self, p: DimensionlessParams, mf: ModelFunctions, state: SimState):
        problems = p.validate()
        if problems:
            raise self._error("; ".join(problems), "params")
        n = p.n_neurites
        for label, count in (("functions", mf.n_neurites), ("initial.lengths", len(state.lengths)),
                             ("initial.lambda_cone", len(state.lambda_cone)),
                             ("initial.f_plus", len(state.fields))):
            if count != n:
                raise self._error(f"expected {n} neurites, got {count}", label)

        values = [state.lambda_som, *state.lambda_cone, *state.lengths]
        if not all(math.isfinite(v) for v in values):
            raise self._error("initial data must be finite", "initial")
        if not state.lambda_som > 0:
            raise self._error(f"soma amount must be > 0, got {state.lambda_som:g}",
                              "initial.lambda_som", "H0")
        for j, (lam, L) in enumerate(zip(state.lambda_cone, state.lengths)):
            if not lam > 0:
                raise self._error(f"cone amount must be > 0, got {lam:g}",
                                  f"initial.lambda_cone[{j}]", "H0")
            if L < p.ell_min[j]:
                raise self._error(f"length {L:g} below the minimal length {p.ell_min[j]:g}",
                                  f"initial.lengths[{j}]", "H0")
        for j, fld in enumerate(state.fields):
            if min(fld.f_plus.min(), fld.f_minus.min()) < 0:
                raise self._error("densities must be >= 0", f"initial.f_plus[{j}]", "H1")
            if fld.rho.max() > p.rho_cap:
                raise self._error(f"total density {fld.rho.max():g} above the cap {p.rho_cap:g}",
                                  f"initial.f_plus[{j}]", "H1")
        if self.n_cells < 3:
            raise self._error(f"need at least 3 cells, got {self.n_cells}", "solver.n_cells")

    def output_dir(self, root: Optional[Union[str, Path]] = None) -> Path:
        directory = Path(self.output.directory)
        if root is not None and not directory.is_absolute():
            directory = Path(root) / directory
        return directory

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        merged = _deep_merge(_strip(self.raw), overrides)
        return ExperimentConfig.from_dict(merged, source=self.source)

    def sweep_configs(self) -> List["ExperimentConfig"]:
        """One config per sweep entry, each with its own output directory"""
        configs = []
        for i, entry in enumerate(self.sweep):
            entry = dict(entry)
            label = str(entry.pop("name", f"sweep-{i}"))
            merged = _deep_merge(_strip(self.raw), entry)
            merged.pop("sweep", None)
            merged["name"] = f"{self.name}-{label}"
            merged.setdefault("output", {})["directory"] = str(Path(self.output.directory) / label)
            configs.append(ExperimentConfig.from_dict(merged, source=self.source))
        return configs

    def refined(self, level: int) -> "ExperimentConfig":
        """Cells doubled and τ halved `level` times"""
        factor = 2 ** level
        stride = self.output.stride * factor if self.output.stride else None
        return self.with_overrides({
            "name": f"{self.name}-level{level}",
            "solver": {"n_cells": self.n_cells * factor, "tau": self.stepper.tau / factor},
            "output": {"stride": stride,
                       "directory": str(Path(self.output.directory) / f"level{level}")},
        })

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved form, loadable again with from_dict"""
        p = self.resolve_params()
        data: Dict[str, Any] = {"name": self.name, "preset": self.preset,
                                "functions": self.resolve_functions(p).to_dict()}
        if self.scales is not None:
            data["scales"] = self.scales
        else:
            data["params"] = p.to_dict()
        data["initial"] = self.initial.to_dict()
        solver = self.stepper.to_dict()
        solver.pop("sample_stride")
        solver.pop("snapshot_times")
        data["solver"] = {"n_cells": self.n_cells, **solver, "eta": self.eta}
        data["output"] = self.output.to_dict()
        if self.sweep:
            data["sweep"] = self.sweep
        if self.stationary is not None:
            data["stationary"] = self.stationary.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: Optional[str] = None) -> "ExperimentConfig":
        data = dict(data)
        nodes = data.pop("__nodes__", None)

        def error(message, field_path="", hypothesis=""):
            return ConfigError(message, field=field_path, hypothesis=hypothesis, source=source,
                               line=_line_of(nodes, field_path) if field_path else None)

        unknown = set(data) - _TOP_LEVEL
        if unknown:
            raise error(f"unknown section(s): {', '.join(sorted(unknown))}", sorted(unknown)[0])
        if data.get("params") and data.get("scales") is not None:
            raise error("give either dimensionless params or physical scales, not both", "scales")

        preset_name = data.get("preset", "experiment-1")
        try:
            preset = get_preset(preset_name)
        except ValueError as e:
            raise error(str(e), "preset") from None

        initial_data = preset.initial.to_dict()
        for key, value in (data.get("initial") or {}).items():
            if key not in initial_data:
                raise error(f"unknown initial field '{key}'", f"initial.{key}")
            initial_data[key] = value
        n = len(initial_data["lengths"])
        for key in ("f_plus", "f_minus", "lambda_cone"):
            if not isinstance(initial_data[key], (list, tuple)):
                initial_data[key] = [initial_data[key]] * n

        solver = dict(data.get("solver") or {})
        output_data = dict(data.get("output") or {})
        try:
            n_cells = int(solver.pop("n_cells", 100))
            eta = float(solver.pop("eta", 10.0))
            output = OutputConfig(
                directory=str(output_data.pop("directory", f"runs/{data.get('name', preset_name)}")),
                stride=output_data.pop("stride", None),
                snapshot_times=[float(t) for t in output_data.pop("snapshot_times", [])],
                plots=bool(output_data.pop("plots", True)),
            )
            if output_data:
                raise error(f"unknown output field(s): {', '.join(sorted(output_data))}", "output")
            stepper = StepperConfig(sample_stride=output.stride,
                                    snapshot_times=tuple(output.snapshot_times),
                                    **{k: _number(k, v) for k, v in solver.items()})
            stationary = None
            if data.get("stationary") is not None:
                stationary = StationaryTargets.from_dict(data["stationary"])
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise error(str(e), "solver") from None

        config = cls(
            name=str(data.get("name", preset_name)),
            preset=preset_name,
            functions=dict(data.get("functions") or {}),
            params=dict(data.get("params") or {}),
            scales=data.get("scales"),
            initial=InitialData(
                lengths=tuple(initial_data["lengths"]),
                lambda_som=initial_data["lambda_som"],
                lambda_cone=tuple(initial_data["lambda_cone"]),
                f_plus=tuple(initial_data["f_plus"]),
                f_minus=tuple(initial_data["f_minus"]),
            ),
            n_cells=n_cells,
            stepper=stepper,
            eta=eta,
            output=output,
            sweep=list(data.get("sweep") or []),
            stationary=stationary,
            source=source,
        )
        config.raw = dict(data, __nodes__=nodes)
        if config.eta != 10.0:
            logger.debug(f"eta={config.eta:g} is recorded but does not enter the scheme")
        return config


def _number(key: str, value: Any):
    if key in ("max_steps", "newton_max_iter"):
        return None if value is None else int(value)
    return float(value)


def _strip(raw: Dict[str, Any]) -> Dict[str, Any]:
    return {k: copy.deepcopy(v) for k, v in raw.items() if k != "__nodes__"}


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key != "functions":
            merged[key] = _deep_merge(merged[key], value)
        elif key == "functions" and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _line_of(node, field_path: str) -> Optional[int]:
    """1-based line of a dotted field path in a composed YAML document"""
    if node is None:
        return None
    line = node.start_mark.line + 1
    for part in field_path.replace("]", "").replace("[", ".").split("."):
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == part), None)
            if match is None:
                return line
            node = match
        elif isinstance(node, yaml.SequenceNode) and part.isdigit() and int(part) < len(node.value):
            node = node.value[int(part)]
        else:
            return line
        line = node.start_mark.line + 1
    return line


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read, expand and validate an experiment config"""
    path = Path(path)
    source = str(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", source=source) from e
    try:
        data = yaml.safe_load(text)
        nodes = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError(f"YAML parse error: {getattr(e, 'problem', None) or e}", source=source,
                          line=mark.line + 1 if mark else None) from e
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of sections", source=source)

    data["__nodes__"] = nodes
    config = ExperimentConfig.from_dict(data, source=source)
    config.build()
    for sub in config.sweep_configs():
        sub.build()
    logger.debug(f"Loaded config {config.name} from {source}")
    return config
