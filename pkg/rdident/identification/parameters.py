"""
Parametros identificables theta = (d, k, I) y su caja de cotas.

- ParameterSpace: nombres, cotas y entradas fijas (Theta)
- ParameterSet: un punto de Theta
- CoordinateMap: vector de trabajo del optimizador (log d, log k, I)
- Archivo de parametros: lineas ``nombre = valor`` mas un archivo RDRD
  con los campos I
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ConfigError, DimensionMismatch, InvalidBounds
from ..utils import get_logger

logger = get_logger(__name__)

# Tablas de cotas por defecto
MEMBRANE_D_BOUNDS = (0.001, 0.1)
CYTOSOL_D_BOUNDS = (0.1, 1.0)
FORWARD_K_BOUNDS = (1e-3, 10.0)
BACKWARD_K_BOUNDS = (1e-7, 1e-3)
INITIAL_BOUNDS = (1e-4, 1.0)

# Difusividades fijadas por preset: nombre -> {especie: valor}
PRESETS: Dict[str, Dict[str, float]] = {
    'three-protein': {},
    'f-actin': {'Actin_on': 1e-16},
}


def _check_bounds(kind: str, names: Sequence[str], bounds: np.ndarray) -> None:
    lower, upper = bounds[:, 0], bounds[:, 1]
    for name, lo, hi in zip(names, lower, upper):
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise InvalidBounds(f"Cotas no finitas para {kind}.{name}: [{lo}, {hi}]")
        if lo <= 0:
            raise InvalidBounds(f"La cota inferior de {kind}.{name} debe ser positiva, es {lo}")
        if lo > hi:
            raise InvalidBounds(f"Cotas invertidas para {kind}.{name}: [{lo}, {hi}]")


@dataclass(eq=False)
class ParameterSpace:
    """
    Caja Theta de parametros admisibles.

    Una entrada con lower == upper queda fijada; ``*_fixed`` marca
    ademas las entradas que el usuario mantiene constantes.

    Attributes:
        species: Nombres de las N especies dinamicas (d)
        rates: Nombres de las M constantes (k)
        unknown: Nombres de las q especies con campo inicial I
        n_cells: Celdas activas por campo I
    """
    species: Tuple[str, ...]
    rates: Tuple[str, ...]
    unknown: Tuple[str, ...]
    n_cells: int
    d_bounds: np.ndarray
    k_bounds: np.ndarray
    I_bounds: np.ndarray
    d_fixed: Optional[np.ndarray] = None
    k_fixed: Optional[np.ndarray] = None
    I_fixed: Optional[np.ndarray] = None

    def __post_init__(self):
        self.species = tuple(self.species)
        self.rates = tuple(self.rates)
        self.unknown = tuple(self.unknown)
        for kind, names in (('d', self.species), ('k', self.rates), ('I', self.unknown)):
            bounds = np.array(getattr(self, f'{kind}_bounds'), dtype=float).reshape(-1, 2)
            if bounds.shape[0] != len(names):
                raise DimensionMismatch(
                    f"{bounds.shape[0]} cotas para {len(names)} entradas de {kind}"
                )
            _check_bounds(kind, names, bounds)
            setattr(self, f'{kind}_bounds', bounds)

            fixed = getattr(self, f'{kind}_fixed')
            fixed = np.zeros(len(names), dtype=bool) if fixed is None else np.array(fixed, dtype=bool)
            if fixed.shape != (len(names),):
                raise DimensionMismatch(f"Mascara de fijos de {kind} con forma {fixed.shape}")
            setattr(self, f'{kind}_fixed', fixed | (bounds[:, 0] == bounds[:, 1]))

    @property
    def N(self) -> int:
        return len(self.species)

    @property
    def M(self) -> int:
        return len(self.rates)

    @property
    def q(self) -> int:
        return len(self.unknown)

    def names(self, kind: str) -> Tuple[str, ...]:
        return {'d': self.species, 'k': self.rates, 'I': self.unknown}[kind]

    def position(self, kind: str, name: str) -> int:
        try:
            return self.names(kind).index(name)
        except (KeyError, ValueError):
            raise ConfigError(f"Parametro desconocido: {kind}.{name}") from None

    def with_bounds(self, kind: str, name: str, lower: float, upper: float) -> 'ParameterSpace':
        bounds = getattr(self, f'{kind}_bounds').copy()
        bounds[self.position(kind, name)] = (lower, upper)
        return replace(self, **{f'{kind}_bounds': bounds})

    def with_fixed(self, kind: str, name: str) -> 'ParameterSpace':
        fixed = getattr(self, f'{kind}_fixed').copy()
        fixed[self.position(kind, name)] = True
        return replace(self, **{f'{kind}_fixed': fixed})

    def clip(self, d: np.ndarray, k: np.ndarray, I: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.clip(d, self.d_bounds[:, 0], self.d_bounds[:, 1]),
            np.clip(k, self.k_bounds[:, 0], self.k_bounds[:, 1]),
            np.clip(I, self.I_bounds[:, :1], self.I_bounds[:, 1:]),
        )


def default_space(
    network,
    unknown: Sequence[int],
    n_cells: int,
    preset: Optional[str] = None,
) -> ParameterSpace:
    """
    Caja por defecto a partir de las tablas de cotas.

    d: membrana [0.001, 0.1], citosol [0.1, 1]; k: directas [1e-3, 10],
    inversas [1e-7, 1e-3]; I: [1e-4, 1]. Un preset puede fijar
    difusividades; las especies ``initial-known`` fijan su campo I.

    Args:
        network: ReactionNetwork
        unknown: Indices de las especies con valor inicial desconocido
        n_cells: Celdas activas de la malla
        preset: Nombre en PRESETS
    """
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"Preset desconocido: {preset} (disponibles: {', '.join(PRESETS)})")

    d_bounds = np.array([
        MEMBRANE_D_BOUNDS if species.membrane else CYTOSOL_D_BOUNDS
        for species in network.species
    ], dtype=float).reshape(-1, 2)
    for name, value in PRESETS.get(preset, {}).items():
        if name in network.species_names:
            d_bounds[network.index_of(name)] = (value, value)

    k_bounds = np.empty((network.M, 2))
    for reaction in network.reactions:
        k_bounds[reaction.rate_index] = BACKWARD_K_BOUNDS if reaction.backward else FORWARD_K_BOUNDS

    unknown = list(unknown)
    I_bounds = np.tile(INITIAL_BOUNDS, (len(unknown), 1))
    I_fixed = [network.species_at(i).initial_known for i in unknown]

    return ParameterSpace(
        species=network.species_names,
        rates=network.rate_names,
        unknown=[network.species_at(i).name for i in unknown],
        n_cells=n_cells,
        d_bounds=d_bounds,
        k_bounds=k_bounds,
        I_bounds=I_bounds,
        I_fixed=I_fixed,
    )


@dataclass(eq=False)
class ParameterSet:
    """
    Un punto theta = (d, k, I) de la caja.

    Attributes:
        d: Difusividades (N,)
        k: Constantes de velocidad (M,)
        I: Campos iniciales desconocidos (q, n)
        space: Caja a la que pertenece
    """
    d: np.ndarray
    k: np.ndarray
    I: np.ndarray
    space: ParameterSpace = field(repr=False)

    def __post_init__(self):
        self.d = np.array(self.d, dtype=float).reshape(-1)
        self.k = np.array(self.k, dtype=float).reshape(-1)
        I = np.array(self.I, dtype=float)
        if I.size == self.space.q * self.space.n_cells:
            I = I.reshape(self.space.q, self.space.n_cells)
        self.I = I
        expected = {
            'd': (self.space.N,),
            'k': (self.space.M,),
            'I': (self.space.q, self.space.n_cells),
        }
        for kind, shape in expected.items():
            if getattr(self, kind).shape != shape:
                raise DimensionMismatch(
                    f"{kind} con forma {getattr(self, kind).shape}, se esperaba {shape}"
                )

    def copy(self) -> 'ParameterSet':
        return ParameterSet(self.d.copy(), self.k.copy(), self.I.copy(), self.space)

    def in_bounds(self) -> bool:
        d, k, I = self.space.clip(self.d, self.k, self.I)
        return bool(np.array_equal(d, self.d) and np.array_equal(k, self.k) and np.array_equal(I, self.I))

    def items(self) -> Iterator[Tuple[str, float]]:
        """Pares ``(d.<especie>|k.<constante>, valor)``."""
        for name, value in zip(self.space.species, self.d):
            yield f'd.{name}', float(value)
        for name, value in zip(self.space.rates, self.k):
            yield f'k.{name}', float(value)

    def equals(self, other: 'ParameterSet') -> bool:
        return (
            np.array_equal(self.d, other.d)
            and np.array_equal(self.k, other.k)
            and np.array_equal(self.I, other.I)
        )


def project(theta: ParameterSet, space: Optional[ParameterSpace] = None) -> ParameterSet:
    """
    Proyeccion sobre la caja, celda por celda en los campos I.

    Raises:
        InvalidBounds: si las cotas de ``space`` no son validas
    """
    space = theta.space if space is None else space
    for kind in ('d', 'k', 'I'):
        _check_bounds(kind, space.names(kind), getattr(space, f'{kind}_bounds'))
    d, k, I = space.clip(theta.d, theta.k, theta.I)
    return ParameterSet(d, k, I, space)


class CoordinateMap:
    """
    Vector de trabajo del optimizador.

    Solo entran las entradas libres: log d, log k y las celdas de los
    campos I no fijados, en ese orden. Las entradas fijas se toman del
    punto de referencia.

    Example:
        >>> coordinates = CoordinateMap(theta.space)
        >>> x = coordinates.to_vector(theta)
        >>> coordinates.from_vector(x, theta).equals(theta)
        True
    """

    def __init__(self, space: ParameterSpace, cell_area: float = 1.0):
        self.space = space
        self.cell_area = float(cell_area)
        self.d_free = np.flatnonzero(~space.d_fixed)
        self.k_free = np.flatnonzero(~space.k_fixed)
        self.I_free = np.flatnonzero(~space.I_fixed)
        self._sizes = (self.d_free.size, self.k_free.size, self.I_free.size * space.n_cells)

    @property
    def size(self) -> int:
        return sum(self._sizes)

    def _split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise DimensionMismatch(f"Vector de trabajo con forma {x.shape}, se esperaba {(self.size,)}")
        nd, nk, _ = self._sizes
        return x[:nd], x[nd:nd + nk], x[nd + nk:].reshape(self.I_free.size, self.space.n_cells)

    def to_vector(self, theta: ParameterSet) -> np.ndarray:
        return np.concatenate([
            np.log(theta.d[self.d_free]),
            np.log(theta.k[self.k_free]),
            theta.I[self.I_free].ravel(),
        ])

    def from_vector(self, x: np.ndarray, reference: ParameterSet) -> ParameterSet:
        log_d, log_k, fields = self._split(x)
        theta = reference.copy()
        theta.d[self.d_free] = np.exp(log_d)
        theta.k[self.k_free] = np.exp(log_k)
        theta.I[self.I_free] = fields
        return theta

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Cotas (lower, upper) en coordenadas de trabajo."""
        space = self.space
        n = space.n_cells
        lower = np.concatenate([
            np.log(space.d_bounds[self.d_free, 0]),
            np.log(space.k_bounds[self.k_free, 0]),
            np.repeat(space.I_bounds[self.I_free, 0], n),
        ])
        upper = np.concatenate([
            np.log(space.d_bounds[self.d_free, 1]),
            np.log(space.k_bounds[self.k_free, 1]),
            np.repeat(space.I_bounds[self.I_free, 1], n),
        ])
        return lower, upper

    def gradient(self, gradients, theta: ParameterSet) -> np.ndarray:
        """
        Regla de la cadena hacia las coordenadas de trabajo.

        dJ/dlog d = d * dJ/dd, dJ/dlog k = k * dJ/dk, y el gradiente L2 de
        I se multiplica por el area de celda.
        """
        return np.concatenate([
            theta.d[self.d_free] * gradients.d[self.d_free],
            theta.k[self.k_free] * gradients.k[self.k_free],
            self.cell_area * gradients.I[self.I_free].ravel(),
        ])

    def labels(self) -> List[str]:
        space = self.space
        labels = [f'log d.{space.species[i]}' for i in self.d_free]
        labels += [f'log k.{space.rates[a]}' for a in self.k_free]
        labels += [f'I.{space.unknown[j]}[{c}]' for j in self.I_free for c in range(space.n_cells)]
        return labels


# --- valores aleatorios -------------------------------------------------------

def log_uniform(rng: np.random.Generator, bounds: np.ndarray) -> np.ndarray:
    lower, upper = np.log(bounds[:, 0]), np.log(bounds[:, 1])
    return np.exp(lower + (upper - lower) * rng.random(len(bounds)))


def smooth_random_field(
    grid,
    rng: np.random.Generator,
    lower: float,
    upper: float,
    n_bumps: int = 4,
    margin: float = 0.05,
) -> np.ndarray:
    """
    Campo suave: suma de gaussianas reescalada estrictamente dentro de
    [lower, upper] (se deja un margen relativo en cada extremo).
    """
    if lower == upper:
        return np.full(grid.n_active, float(lower))
    x, y = grid.coordinates()
    width, height = grid.nx * grid.hx, grid.ny * grid.hy
    values = np.zeros(grid.n_active)
    for _ in range(n_bumps):
        cx, cy = rng.random() * width, rng.random() * height
        sigma = (0.15 + 0.25 * rng.random()) * max(width, height)
        amplitude = 0.5 + rng.random()
        values += amplitude * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sigma ** 2))
    spread = values.max() - values.min()
    unit = (values - values.min()) / spread if spread > 0 else np.full_like(values, 0.5)
    return lower + (upper - lower) * (margin + (1 - 2 * margin) * unit)


def draw_parameters(space: ParameterSpace, grid, rng: np.random.Generator) -> ParameterSet:
    """Punto aleatorio: log-uniforme en d y k, campos suaves en I."""
    d = log_uniform(rng, space.d_bounds)
    k = log_uniform(rng, space.k_bounds)
    I = np.array([
        smooth_random_field(grid, rng, lower, upper) for lower, upper in space.I_bounds
    ]).reshape(space.q, grid.n_active)
    return ParameterSet(d, k, I, space)


# --- archivo de parametros ----------------------------------------------------

def write_parameters(theta: ParameterSet, path: Union[str, Path], grid) -> Path:
    """
    Escribe ``nombre = valor`` por linea, con el logaritmo anotado, y los
    campos I en ``<path>.I.rdrd`` (referenciado por la linea ``I.file``).
    """
    from ..fieldfile import FieldFile

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ['# rdident parameters']
    for name, value in theta.items():
        lines.append(f'{name} = {value!r}  # log = {np.log(value):.6f}')

    if theta.space.q:
        fields_path = path.with_name(path.name + '.I.rdrd')
        FieldFile.from_active(grid, theta.I[None]).write(fields_path)
        lines.append(f'I.file = {fields_path.name}')
        lines.append(f'I.species = {", ".join(theta.space.unknown)}')

    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.info("Parametros escritos en %s", path)
    return path


def read_parameter_lines(path: Union[str, Path]) -> Dict[str, str]:
    """Pares clave/valor de un archivo de parametros (sin comentarios)."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f"No se pudo leer {path}: {exc}") from exc

    entries = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{path}:{number}: se esperaba 'nombre = valor'")
        key, value = (part.strip() for part in line.split('=', 1))
        entries[key] = value
    return entries


def read_parameters(path: Union[str, Path], space: ParameterSpace, grid) -> ParameterSet:
    """Lee un archivo escrito por ``write_parameters``."""
    from ..fieldfile import FieldFile

    path = Path(path)
    entries = read_parameter_lines(path)
    d = np.empty(space.N)
    k = np.empty(space.M)
    for kind, target in (('d', d), ('k', k)):
        for i, name in enumerate(space.names(kind)):
            key = f'{kind}.{name}'
            if key not in entries:
                raise ConfigError(f"{path}: falta {key}")
            try:
                target[i] = float(entries[key])
            except ValueError:
                raise ConfigError(f"{path}: valor invalido para {key}: {entries[key]}") from None

    I = np.zeros((space.q, grid.n_active))
    if space.q:
        if 'I.file' not in entries:
            raise ConfigError(f"{path}: falta I.file")
        species = [s.strip() for s in entries.get('I.species', '').split(',') if s.strip()]
        if species and tuple(species) != space.unknown:
            raise ConfigError(
                f"{path}: campos I para {species}, se esperaban {list(space.unknown)}"
            )
        fields = FieldFile.read(path.parent / entries['I.file']).to_active(grid)
        if fields.shape[1] != space.q:
            raise DimensionMismatch(f"{fields.shape[1]} campos I, se esperaban {space.q}")
        I = fields[0]

    return ParameterSet(d, k, I, space)
