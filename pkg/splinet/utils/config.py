"""
Experiment configuration.

A configuration is one JSON document with the sections ``problem``, ``network``,
``training``, ``sweep``, ``analysis`` and ``output``. Every section maps onto a
dataclass below; ``Config.from_dict`` rejects unknown keys and invalid values and
names the dotted path of the offending entry. Defaults are documented in
``splinet/schema/config.schema.json``.
"""
import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from splinet.utils.errors import ConfigError

CONFIG_VERSION = '1.0'

PROBLEM_KINDS = ('sin', 'peaks', 'scaled_sine')
NETWORK_KINDS = ('splinet', 'odenet', 'resnet')
ACTIVATIONS = ('tanh', 'relu', 'identity')
INPUT_MAPS = ('replicate', 'pad', 'tile')
OPTIMIZERS = ('adam', 'gradient_descent')
SCHEMES = ('after', 'during')
OUTPUT_FORMATS = ('json', 'csv')
# 1/h must be a whole layer count
STEP_SIZE_TOLERANCE = 1e-9


@dataclass
class ProblemConfig:
    kind: str = 'sin'
    frequency: float = 1.0
    amplitude: float = 10.0
    n_points: Optional[int] = None
    n_validation: Optional[int] = None
    seed: int = 0
    input_map: Optional[str] = None

    def validate(self, path: str):
        _choice(self.kind, PROBLEM_KINDS, f'{path}.kind')
        _positive(self.frequency, f'{path}.frequency')
        _positive(self.amplitude, f'{path}.amplitude')
        minimum = 5 if self.kind == 'peaks' else 2
        for name in ('n_points', 'n_validation'):
            value = getattr(self, name)
            if value is not None and value < minimum:
                raise ConfigError(f'{path}.{name}', f'must be >= {minimum}, got {value}')
        if self.input_map is not None:
            _choice(self.input_map, INPUT_MAPS, f'{path}.input_map')
            if self.kind != 'peaks' and self.input_map != 'replicate':
                raise ConfigError(f'{path}.input_map', 'scalar inputs only support replicate')


@dataclass
class TimeScaleConfig:
    value: float = 1.0
    learnable: bool = False

    def validate(self, path: str):
        _positive(self.value, f'{path}.value')


@dataclass
class NetworkConfig:
    width: Optional[int] = None
    N: int = 100
    activation: Optional[str] = None
    control_kind: str = 'splinet'
    degree: int = 1
    L: int = 10
    antisymmetric: bool = False
    gamma_shift: float = 0.0
    time_scale: TimeScaleConfig = field(default_factory=TimeScaleConfig)

    def validate(self, path: str):
        _choice(self.control_kind, NETWORK_KINDS, f'{path}.control_kind')
        if self.activation is not None:
            _choice(self.activation, ACTIVATIONS, f'{path}.activation')
        if self.width is not None and self.width < 1:
            raise ConfigError(f'{path}.width', f'must be >= 1, got {self.width}')
        if self.N < 1:
            raise ConfigError(f'{path}.N', f'must be >= 1, got {self.N}')
        if self.degree < 0:
            raise ConfigError(f'{path}.degree', f'must be >= 0, got {self.degree}')
        if self.L < 1:
            raise ConfigError(f'{path}.L', f'must be >= 1, got {self.L}')
        if self.gamma_shift < 0:
            raise ConfigError(f'{path}.gamma_shift', f'must be >= 0, got {self.gamma_shift}')
        self.time_scale.validate(f'{path}.lambda')

    @property
    def label(self) -> str:
        if self.control_kind == 'splinet':
            return f'splinet-d{self.degree}'
        return self.control_kind


@dataclass
class TrainingConfig:
    eta: float = 0.01
    gamma: float = 1e-6
    epochs: int = 200
    batch_size: Optional[int] = None
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    init_amplitude: float = 0.1
    optimizer: str = 'adam'
    accumulation: str = 'after'

    def validate(self, path: str):
        _positive(self.eta, f'{path}.eta')
        if self.gamma < 0:
            raise ConfigError(f'{path}.gamma', f'must be >= 0, got {self.gamma}')
        if self.epochs < 1:
            raise ConfigError(f'{path}.epochs', f'must be >= 1, got {self.epochs}')
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f'{path}.batch_size', f'must be >= 1, got {self.batch_size}')
        for name in ('beta1', 'beta2'):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigError(f'{path}.{name}', f'must lie in [0, 1), got {getattr(self, name)}')
        _positive(self.eps_adam, f'{path}.eps_adam')
        _positive(self.init_amplitude, f'{path}.init_amplitude')
        _choice(self.optimizer, OPTIMIZERS, f'{path}.optimizer')
        _choice(self.accumulation, SCHEMES, f'{path}.accumulation')


@dataclass
class SweepRanges:
    eta: List[float] = field(default_factory=lambda: [1e-3, 1e-1])
    gamma: List[float] = field(default_factory=lambda: [1e-10, 1e-4])
    init_amplitude: List[float] = field(default_factory=lambda: [1e-3, 1.0])
    L: List[int] = field(default_factory=lambda: [2, 15])

    def validate(self, path: str):
        for name in ('eta', 'gamma', 'init_amplitude'):
            low_high = getattr(self, name)
            if len(low_high) != 2 or not 0 < low_high[0] <= low_high[1]:
                raise ConfigError(f'{path}.{name}', f'must be [low, high] with 0 < low <= high, got {low_high}')
        if len(self.L) != 2 or not 1 <= self.L[0] <= self.L[1]:
            raise ConfigError(f'{path}.L', f'must be [low, high] with 1 <= low <= high, got {self.L}')


def _default_architectures() -> List[Dict[str, Any]]:
    return [{'control_kind': 'resnet'}, {'control_kind': 'odenet'},
            {'control_kind': 'splinet', 'degree': 1}, {'control_kind': 'splinet', 'degree': 2},
            {'control_kind': 'splinet', 'degree': 3}]


@dataclass
class SweepConfig:
    ranges: SweepRanges = field(default_factory=SweepRanges)
    n_runs: int = 100
    paired: bool = True
    seed: int = 0
    architectures: List[Dict[str, Any]] = field(default_factory=_default_architectures)

    def validate(self, path: str):
        self.ranges.validate(f'{path}.ranges')
        if self.n_runs < 1:
            raise ConfigError(f'{path}.n_runs', f'must be >= 1, got {self.n_runs}')
        if not self.architectures:
            raise ConfigError(f'{path}.architectures', 'must name at least one architecture')
        for index, architecture in enumerate(self.architectures):
            entry = f'{path}.architectures[{index}]'
            unknown = set(architecture) - {'control_kind', 'degree'}
            if unknown:
                raise ConfigError(f'{entry}.{sorted(unknown)[0]}', 'unknown key')
            _choice(architecture.get('control_kind'), NETWORK_KINDS, f'{entry}.control_kind')
            if architecture.get('degree', 1) < 0:
                raise ConfigError(f'{entry}.degree', 'must be >= 0')


@dataclass
class AnalysisConfig:
    n_steps_list: List[int] = field(default_factory=lambda: [25, 50, 100, 200, 400, 800])
    reference_step: float = 1e-4
    probe_index: int = 0
    gradcheck_epsilon: float = 1e-6
    spectrum_step_sizes: List[float] = field(default_factory=lambda: [0.04, 0.01, 0.0025])

    def validate(self, path: str):
        if len(self.n_steps_list) < 2 or any(n < 1 for n in self.n_steps_list):
            raise ConfigError(f'{path}.n_steps_list', 'needs at least two positive step counts')
        if len(set(self.n_steps_list)) != len(self.n_steps_list):
            raise ConfigError(f'{path}.n_steps_list', 'step counts must be distinct')
        _positive(self.reference_step, f'{path}.reference_step')
        if self.probe_index < 0:
            raise ConfigError(f'{path}.probe_index', f'must be >= 0, got {self.probe_index}')
        if not 1e-8 <= self.gradcheck_epsilon <= 1e-4:
            raise ConfigError(f'{path}.gradcheck_epsilon', 'must lie in [1e-8, 1e-4]')
        for index, h in enumerate(self.spectrum_step_sizes):
            entry = f'{path}.spectrum_step_sizes[{index}]'
            if isinstance(h, bool) or not isinstance(h, (int, float)) or h <= 0:
                raise ConfigError(entry, f'step sizes must be positive numbers, got {h!r}')
            n_steps = round(1.0 / h)
            if n_steps < 1 or abs(n_steps * h - 1.0) > STEP_SIZE_TOLERANCE:
                raise ConfigError(entry, f'step size {h} does not divide the unit interval')


@dataclass
class OutputConfig:
    directory: str = 'runs/latest'
    formats: List[str] = field(default_factory=lambda: ['json', 'csv'])

    def validate(self, path: str):
        for index, name in enumerate(self.formats):
            _choice(name, OUTPUT_FORMATS, f'{path}.formats[{index}]')


"""
Config: the complete experiment configuration.

Methods:
    from_dict(document): Builds and validates a Config; raises ConfigError.
    load(path): Reads a JSON file.
    to_dict(): Snapshot with the JSON key names, embedded in run records.
    replace(**sections): Copy with some values changed, re-validated.
"""


@dataclass
class Config:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    version: str = CONFIG_VERSION

    def validate(self):
        for section in ('problem', 'network', 'training', 'sweep', 'analysis', 'output'):
            getattr(self, section).validate(section)
        if self.problem.kind == 'peaks' and self.network.width not in (None, 5):
            raise ConfigError('network.width', 'the peaks classifier needs width 5, one state per class')
        return self

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'Config':
        if not isinstance(document, dict):
            raise ConfigError('<root>', 'configuration must be a JSON object')
        return _build(cls, document, '').validate()

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'Config':
        path = Path(path)
        try:
            document = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(str(path), 'configuration file not found')
        except json.JSONDecodeError as error:
            raise ConfigError(str(path), f'invalid JSON ({error})')
        return cls.from_dict(document)

    def to_dict(self) -> Dict[str, Any]:
        return _dump(self)

    def replace(self, **changes: Dict[str, Any]) -> 'Config':
        """Copy with ``changes`` merged section by section, e.g. network={'N': 400}."""
        document = self.to_dict()
        for section, values in changes.items():
            document[section] = _merge(document[section], values)
        return Config.from_dict(document)


# JSON key -> dataclass field name, where they differ
_ALIASES = {'lambda': 'time_scale'}
_FIELD_KEYS = {value: key for key, value in _ALIASES.items()}


def _build(cls, data: Dict[str, Any], path: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    values = {}
    for key, value in data.items():
        name = _ALIASES.get(key, key)
        entry = f'{path}.{key}' if path else key
        if name not in fields:
            raise ConfigError(entry, 'unknown key')
        default = fields[name].default_factory() if fields[name].default_factory is not dataclasses.MISSING \
            else fields[name].default
        if dataclasses.is_dataclass(default):
            if not isinstance(value, dict):
                raise ConfigError(entry, 'must be an object')
            values[name] = _build(type(default), value, entry)
        else:
            values[name] = _coerce(value, default, entry, fields[name].type)
    return cls(**values)


def _coerce(value, default, path: str, hint=None):
    if value is None:
        return value
    if default is None:
        allowed = tuple(t for t in typing.get_args(hint) if t is not type(None))
        if isinstance(value, bool) or (allowed and not isinstance(value, allowed)):
            raise ConfigError(path, f"must be one of {[t.__name__ for t in allowed]} or null, got {value!r}")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f'must be true or false, got {value!r}')
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f'must be an integer, got {value!r}')
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f'must be a number, got {value!r}')
        return float(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(path, f'must be a string, got {value!r}')
    if isinstance(default, list) and not isinstance(value, list):
        raise ConfigError(path, f'must be a list, got {value!r}')
    return value


def _dump(instance) -> Dict[str, Any]:
    document = {}
    for f in dataclasses.fields(instance):
        value = getattr(instance, f.name)
        key = _FIELD_KEYS.get(f.name, f.name)
        document[key] = _dump(value) if dataclasses.is_dataclass(value) else _copy_value(value)
    return document


def _copy_value(value):
    if isinstance(value, list):
        return [_copy_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _copy_value(v) for k, v in value.items()}
    return value


def _merge(base: Dict[str, Any], changes: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in changes.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _choice(value, choices, path: str):
    if value not in choices:
        raise ConfigError(path, f'invalid value {value!r}, only {list(choices)} are acceptable')


def _positive(value, path: str):
    if not value > 0:
        raise ConfigError(path, f'must be positive, got {value}')
