"""
Problema de identificacion: red, malla, tiempo, observacion y datos.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import interp1d

from ..exceptions import ConfigError, DimensionMismatch
from ..numerics.adjoint import ObservationOperator
from ..numerics.forward import TimeAxis
from ..numerics.grid import SpatialGrid
from ..utils import get_logger
from .parameters import ParameterSet, ParameterSpace, default_space

logger = get_logger(__name__)


class InitialMap:
    """
    Mapa inicial G: inyecta los q campos desconocidos I y toma las
    especies observadas del primer nivel de datos.

    Example:
        >>> G = InitialMap(ObservationOperator(3, [2]))
        >>> G.apply(np.ones((2, 4)), np.zeros((1, 4))).shape
        (3, 4)
    """

    def __init__(self, observation: ObservationOperator):
        self.observation = observation

    def apply(self, I: np.ndarray, observed_initial: np.ndarray) -> np.ndarray:
        F = self.observation
        I = np.asarray(I, dtype=float)
        observed_initial = np.asarray(observed_initial, dtype=float)
        if I.shape[0] != F.n_unknown:
            raise DimensionMismatch(f"{I.shape[0]} campos I, se esperaban {F.n_unknown}")
        if observed_initial.shape[0] != F.n_observed:
            raise DimensionMismatch(
                f"{observed_initial.shape[0]} campos observados, se esperaban {F.n_observed}"
            )
        n = I.shape[1] if I.size else observed_initial.shape[1]
        u0 = np.zeros((F.n_species, n))
        u0[list(F.unknown)] = I
        u0[list(F.observed)] = observed_initial
        return u0

    def transpose(self, mu0: np.ndarray) -> np.ndarray:
        """(dG/dI)^T: restringe un campo (N, n) a las especies desconocidas."""
        return np.asarray(mu0)[list(self.observation.unknown)]


@dataclass(eq=False)
class DataSet:
    """
    Datos observados alineados con los niveles del solver.

    Attributes:
        values: (nt+1, N*, n)
        time: Eje temporal del solver
    """
    values: np.ndarray
    time: TimeAxis

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[0] != self.time.levels:
            raise DimensionMismatch(
                f"Datos con forma {self.values.shape}, se esperaban {self.time.levels} niveles"
            )

    @property
    def n_fields(self) -> int:
        return self.values.shape[1]

    def squared_norm(self, cell_area: float) -> float:
        return float(np.sum(self.values[1:] ** 2) * cell_area * self.time.dt)

    @classmethod
    def empty(cls, time: TimeAxis, n_cells: int) -> 'DataSet':
        return cls(np.zeros((time.levels, 0, n_cells)), time)

    @classmethod
    def resample(cls, values: np.ndarray, times: np.ndarray, time: TimeAxis) -> 'DataSet':
        """
        Interpola linealmente en el tiempo hacia los niveles del solver.

        Raises:
            DimensionMismatch: si los datos no cubren [0, T]
        """
        values = np.asarray(values, dtype=float)
        times = np.asarray(times, dtype=float)
        if values.shape[0] == time.levels and np.allclose(times, time.times):
            return cls(values, time)
        if values.shape[0] < 2:
            raise DimensionMismatch("Se necesitan al menos dos niveles de datos para interpolar")
        span = times[-1] - times[0]
        if times[0] > 1e-12 * span or times[-1] < time.T * (1 - 1e-12):
            raise DimensionMismatch(
                f"Los datos cubren [{times[0]:g}, {times[-1]:g}], el solver [0, {time.T:g}]"
            )
        interpolant = interp1d(times, values, axis=0, kind='linear', assume_sorted=True)
        resampled = interpolant(np.clip(time.times, times[0], times[-1]))
        logger.info(
            "Datos remuestreados de %d a %d niveles", values.shape[0], time.levels,
            extra={'extra_fields': {'data_levels': values.shape[0], 'solver_levels': time.levels}}
        )
        return cls(resampled, time)

    @classmethod
    def from_field_file(cls, field_file, grid: SpatialGrid, time: TimeAxis, n_fields: int) -> 'DataSet':
        values = field_file.to_active(grid)
        if values.shape[1] != n_fields:
            raise DimensionMismatch(
                f"El archivo de datos tiene {values.shape[1]} campos, se observan {n_fields} especies"
            )
        if values.shape[0] == time.levels:
            return cls(values, time)
        if field_file.dt <= 0:
            raise DimensionMismatch(
                f"El archivo tiene {values.shape[0]} niveles sin dt; el solver usa {time.levels}"
            )
        return cls.resample(values, field_file.times(), time)


@dataclass(eq=False)
class ExternalFields:
    """
    Campos externos prescritos (E, n) por nivel de datos, constantes a
    trozos en el tiempo.

    Attributes:
        values: (L, E, n)
        dt: Separacion entre niveles (0 = campo estacionario)
    """
    values: np.ndarray
    dt: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise DimensionMismatch(f"Campos externos con forma {self.values.shape}")
        if (self.values < 0).any():
            raise DimensionMismatch("Los campos externos deben ser no negativos")

    @classmethod
    def from_field_file(cls, field_file, grid: SpatialGrid) -> 'ExternalFields':
        return cls(field_file.to_active(grid), field_file.dt)

    @classmethod
    def constant(cls, values: np.ndarray) -> 'ExternalFields':
        return cls(np.asarray(values, dtype=float)[None])

    def sample(self, t: float) -> np.ndarray:
        if self.values.shape[0] == 1 or self.dt <= 0:
            return self.values[0]
        index = int(np.floor(t / self.dt + 1e-9))
        return self.values[min(max(index, 0), self.values.shape[0] - 1)]


@dataclass(eq=False)
class IdentificationProblem:
    """
    Datos fijos del problema de minimizacion.

    Attributes:
        network: ReactionNetwork
        grid: Malla
        time: Eje temporal
        observation: Operador F
        data: Datos c alineados con los niveles
        space: Caja de parametros
        external: Campos externos (obligatorios si la red tiene externas)
        checkpoint_stride: Guardado parcial de la trayectoria directa
    """
    network: object
    grid: SpatialGrid
    time: TimeAxis
    observation: ObservationOperator
    data: DataSet
    space: ParameterSpace
    external: Optional[ExternalFields] = None
    checkpoint_stride: Optional[int] = None

    def __post_init__(self):
        if self.network.E and self.external is None:
            raise ConfigError(
                f"La red tiene especies externas ({', '.join(self.network.external_names)}) "
                "y no se dieron campos externos"
            )
        if self.external is not None and self.external.values.shape[1:] != (self.network.E, self.grid.n_active):
            raise DimensionMismatch(
                f"Campos externos con forma {self.external.values.shape[1:]}, "
                f"se esperaba {(self.network.E, self.grid.n_active)}"
            )
        if self.data.n_fields != self.observation.n_observed:
            raise DimensionMismatch(
                f"Datos con {self.data.n_fields} campos, se observan {self.observation.n_observed}"
            )
        if self.data.values.shape[2] != self.grid.n_active:
            raise DimensionMismatch("Los datos no coinciden con las celdas activas de la malla")
        if self.space.q != self.observation.n_unknown or self.space.n_cells != self.grid.n_active:
            raise DimensionMismatch("La caja de parametros no coincide con el problema")
        self.initial_map = InitialMap(self.observation)

    @classmethod
    def build(
        cls,
        network,
        grid: SpatialGrid,
        time: TimeAxis,
        observed: Sequence[str],
        data: Optional[DataSet] = None,
        external: Optional[ExternalFields] = None,
        preset: Optional[str] = None,
        checkpoint_stride: Optional[int] = None,
    ) -> 'IdentificationProblem':
        """Problema con la caja por defecto; sin datos usa ceros."""
        observation = ObservationOperator.from_names(network, observed)
        if data is None:
            data = DataSet(np.zeros((time.levels, observation.n_observed, grid.n_active)), time)
        space = default_space(network, observation.unknown, grid.n_active, preset)
        return cls(network, grid, time, observation, data, space, external, checkpoint_stride)

    def external_at(self, level: int) -> Optional[np.ndarray]:
        if self.external is None:
            return None
        return self.external.sample(level * self.time.dt)

    def initial_state(self, theta: ParameterSet) -> np.ndarray:
        """u0 = G(I)."""
        return self.initial_map.apply(theta.I, self.data.values[0])

    def with_data(self, values: np.ndarray) -> 'IdentificationProblem':
        return replace(self, data=DataSet(values, self.time))

    def with_space(self, space: ParameterSpace) -> 'IdentificationProblem':
        return replace(self, space=space)
