"""
Configuracion de corridas (INI UTF-8).

Secciones: [paths], [domain], [time], [observation], [parameters],
[optimizer], [output], [logging]. Los arreglos son listas separadas por
comas y las rutas relativas se resuelven contra el directorio del
archivo. ``RunConfig.to_ini`` produce una version canonica (rutas
absolutas, flotantes con repr) que vuelve a leerse como el mismo
RunConfig.

Example:
    >>> config = RunConfig.load('twin.ini')
    >>> print(config.to_ini())
"""

import configparser
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .core.logger import LogConfig
from .exceptions import ConfigError
from .identification.optimizer import OptimizerSettings
from .network.dsl import BUNDLED

SECTIONS = ('paths', 'domain', 'time', 'observation', 'parameters', 'optimizer', 'output', 'logging')
DOMAIN_SHAPES = ('rectangle', 'disk', 'mask')


def _split_list(value: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in value.split(',') if item.strip())


def _parse_bool(section: str, key: str, value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigError(f"[{section}] {key}: se esperaba un booleano, se leyo '{value}'")


def _parse_number(section: str, key: str, value: str, kind=float):
    try:
        number = kind(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: valor numerico invalido '{value}'") from None
    return number


def _render(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ', '.join(_render(item) for item in value)
    if isinstance(value, Path):
        return str(value)
    return str(value)


@dataclass
class PathsConfig:
    """network puede ser una ruta o el nombre de una red incluida."""
    network: str = 'three-protein'
    mask: Optional[Path] = None
    data: Optional[Path] = None
    external: Optional[Path] = None
    parameters: Optional[Path] = None
    output: Path = Path('output')


@dataclass
class DomainConfig:
    shape: str = 'rectangle'
    nx: int = 16
    ny: int = 16
    hx: float = 1.0 / 16
    hy: float = 1.0 / 16
    signed_distance: bool = False


@dataclass
class TimeConfig:
    T: float = 1.0
    nt: int = 100
    checkpoint_stride: int = 0


@dataclass
class ObservationConfig:
    observed: Tuple[str, ...] = ()


@dataclass
class ParametersConfig:
    """
    Valores iniciales, cotas y entradas fijas por nombre.

    Attributes:
        values: ``d.<especie>``, ``k.<constante>``, ``I.<especie>`` -> valor
        bounds: Misma clave -> (lower, upper)
        fixed: Entradas mantenidas constantes
    """
    preset: Optional[str] = None
    values: Dict[str, float] = field(default_factory=dict)
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    fixed: Tuple[str, ...] = ()


@dataclass
class OutputConfig:
    seed: int = 0
    noise: float = 0.0
    full_state: bool = False
    dump_adjoint: Optional[Path] = None


@dataclass
class LoggingConfig:
    level: str = 'INFO'
    json: bool = False
    console: bool = True
    file: bool = False
    log_dir: Optional[Path] = None

    def to_log_config(self, command: str = '', run_id: str = '') -> LogConfig:
        return LogConfig(
            level=self.level,
            log_dir=self.log_dir,
            console_output=self.console,
            file_output=self.file,
            json_format=self.json,
            command=command,
            run_id=run_id,
        )


_SIMPLE_SECTIONS = {
    'paths': PathsConfig,
    'domain': DomainConfig,
    'time': TimeConfig,
    'observation': ObservationConfig,
    'output': OutputConfig,
    'logging': LoggingConfig,
}

_OPTIMIZER_KEYS = {
    'memory': int,
    'max_iterations': int,
    'tolerance': float,
    'sufficient_decrease': float,
    'shrink': float,
    'max_trials': int,
    'initial_step': float,
}


@dataclass
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    domain: DomainConfig = field(default_factory=DomainConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    observation: ObservationConfig = field(default_factory=ObservationConfig)
    parameters: ParametersConfig = field(default_factory=ParametersConfig)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    # --- lectura -------------------------------------------------------------

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'RunConfig':
        path = Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as exc:
            raise ConfigError(f"No se pudo leer la configuracion {path}: {exc}") from exc
        return cls.from_string(text, path.resolve().parent)

    @classmethod
    def from_string(cls, text: str, base_dir: Union[str, Path] = '.') -> 'RunConfig':
        parser = configparser.ConfigParser(interpolation=None, delimiters=('=',))
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"Configuracion invalida: {exc}") from exc

        unknown = [name for name in parser.sections() if name not in SECTIONS]
        if unknown:
            raise ConfigError(f"Secciones desconocidas: {', '.join(unknown)}")

        base_dir = Path(base_dir).resolve()
        config = cls()
        for name, section_type in _SIMPLE_SECTIONS.items():
            if parser.has_section(name):
                setattr(config, name, _read_section(name, section_type, parser[name], base_dir))
        if parser.has_section('parameters'):
            config.parameters = _read_parameters(parser['parameters'])
        if parser.has_section('optimizer'):
            config.optimizer = _read_optimizer(parser['optimizer'])

        paths = config.paths
        paths.output = _resolve(str(paths.output), base_dir)
        if paths.network not in BUNDLED:
            paths.network = str(_resolve(paths.network, base_dir))
        if config.logging.log_dir is not None:
            config.logging.log_dir = _resolve(str(config.logging.log_dir), base_dir)

        config.validate()
        return config

    def validate(self) -> None:
        if self.domain.shape not in DOMAIN_SHAPES:
            raise ConfigError(
                f"[domain] shape debe ser {', '.join(DOMAIN_SHAPES)}; se leyo '{self.domain.shape}'"
            )
        if self.domain.shape == 'mask' and self.paths.mask is None:
            raise ConfigError("[domain] shape = mask requiere [paths] mask")
        if self.time.checkpoint_stride < 0:
            raise ConfigError("[time] checkpoint_stride debe ser >= 0")
        if self.output.noise < 0:
            raise ConfigError("[output] noise debe ser >= 0")
        if not 0 <= self.output.seed < 2 ** 64:
            raise ConfigError("[output] seed debe ser un entero de 64 bits sin signo")

    # --- escritura -----------------------------------------------------------

    def to_ini(self) -> str:
        lines: List[str] = []
        for name in SECTIONS:
            lines.append(f'[{name}]')
            if name == 'parameters':
                lines.extend(_parameters_lines(self.parameters))
            else:
                for key, value in asdict(getattr(self, name)).items():
                    if value is None:
                        continue
                    lines.append(f'{key} = {_render(value)}')
            lines.append('')
        return '\n'.join(lines)


def _resolve(value: str, base_dir: Path) -> Path:
    path = Path(value).expanduser()
    return path if path.is_absolute() else (base_dir / path).resolve()


def _read_section(name: str, section_type, section, base_dir: Path):
    known = {f.name: f for f in fields(section_type)}
    values = {}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError(f"[{name}] clave desconocida: {key}")
        default = getattr(section_type(), key)
        annotation = str(known[key].type)
        if name == 'paths' and key == 'network':
            values[key] = raw if raw in BUNDLED else str(_resolve(raw, base_dir))
        elif 'Path' in annotation:
            values[key] = _resolve(raw, base_dir) if raw.strip() else None
        elif isinstance(default, bool):
            values[key] = _parse_bool(name, key, raw)
        elif isinstance(default, int):
            values[key] = _parse_number(name, key, raw, int)
        elif isinstance(default, float):
            values[key] = _parse_number(name, key, raw, float)
        elif isinstance(default, tuple):
            values[key] = _split_list(raw)
        else:
            values[key] = raw.strip()
    return section_type(**values)


def _read_parameters(section) -> ParametersConfig:
    config = ParametersConfig()
    for key, raw in section.items():
        if key == 'preset':
            config.preset = raw.strip() or None
        elif key == 'fixed':
            config.fixed = _split_list(raw)
        elif key.endswith('.bounds'):
            parts = _split_list(raw)
            if len(parts) != 2:
                raise ConfigError(f"[parameters] {key}: se esperaban dos valores 'lower, upper'")
            config.bounds[key[:-len('.bounds')]] = tuple(
                _parse_number('parameters', key, part) for part in parts
            )
        elif key.split('.', 1)[0] in ('d', 'k', 'I') and '.' in key:
            config.values[key] = _parse_number('parameters', key, raw)
        else:
            raise ConfigError(f"[parameters] clave desconocida: {key}")

    for entry in config.fixed:
        if entry.split('.', 1)[0] not in ('d', 'k', 'I'):
            raise ConfigError(f"[parameters] fixed: entrada invalida '{entry}'")
    return config


def _parameters_lines(parameters: ParametersConfig) -> List[str]:
    lines = []
    if parameters.preset:
        lines.append(f'preset = {parameters.preset}')
    for key, value in parameters.values.items():
        lines.append(f'{key} = {value!r}')
    for key, (lower, upper) in parameters.bounds.items():
        lines.append(f'{key}.bounds = {lower!r}, {upper!r}')
    if parameters.fixed:
        lines.append(f'fixed = {", ".join(parameters.fixed)}')
    return lines


def _read_optimizer(section) -> OptimizerSettings:
    values = {}
    for key, raw in section.items():
        if key not in _OPTIMIZER_KEYS:
            raise ConfigError(f"[optimizer] clave desconocida: {key}")
        values[key] = _parse_number('optimizer', key, raw, _OPTIMIZER_KEYS[key])
    return OptimizerSettings(**values)
