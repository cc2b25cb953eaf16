"""
Armado de problemas a partir de un RunConfig.

Construye la red, la malla, el eje temporal, los campos externos, los
datos y la caja de parametros, y agrupa las rutinas de simulacion y de
experimentos gemelos (datos sinteticos desde theta conocido).
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .config import RunConfig
from .exceptions import ConfigError
from .fieldfile import FieldFile
from .identification.parameters import ParameterSet, ParameterSpace, default_space, draw_parameters, read_parameters
from .identification.problem import DataSet, ExternalFields, IdentificationProblem
from .network.certificates import validate_assumptions
from .network.dsl import load_network
from .network.model import ReactionNetwork
from .numerics.adjoint import ObservationOperator, solve_adjoint
from .numerics.forward import StateTrajectory, TimeAxis, solve_forward
from .numerics.grid import SpatialGrid, load_mask
from .utils import get_logger

logger = get_logger(__name__)


def build_network(config: RunConfig) -> ReactionNetwork:
    """
    Lee la red y verifica las hipotesis.

    Raises:
        NetworkError: de parseo (salida 1)
        NonCompliantNetwork: si viola (A)(B)(C) (salida 2)
    """
    network = load_network(config.paths.network)
    validate_assumptions(network).raise_if_noncompliant()
    return network


def build_grid(config: RunConfig) -> SpatialGrid:
    domain = config.domain
    if domain.shape == 'mask':
        return load_mask(config.paths.mask, domain.signed_distance)
    if domain.shape == 'disk':
        return SpatialGrid.disk(domain.nx, domain.ny, domain.hx, domain.hy)
    return SpatialGrid.rectangle(domain.nx, domain.ny, domain.hx, domain.hy)


def build_time(config: RunConfig) -> TimeAxis:
    return TimeAxis(config.time.T, config.time.nt)


def observed_names(config: RunConfig, network: ReactionNetwork) -> Tuple[str, ...]:
    """Especies observadas de la configuracion o, si no hay, las marcadas en la red."""
    names = config.observation.observed or tuple(s.name for s in network.species if s.observed)
    for name in names:
        if name not in network.species_names:
            raise ConfigError(f"[observation] especie desconocida o externa: {name}")
    return tuple(names)


def load_external(config: RunConfig, network: ReactionNetwork, grid: SpatialGrid) -> Optional[ExternalFields]:
    if not network.E:
        return None
    if config.paths.external is None:
        raise ConfigError(
            f"La red tiene especies externas ({', '.join(network.external_names)}); "
            "falta [paths] external"
        )
    external = ExternalFields.from_field_file(FieldFile.read(config.paths.external), grid)
    if external.values.shape[1] != network.E:
        raise ConfigError(
            f"El archivo externo tiene {external.values.shape[1]} campos, la red {network.E}"
        )
    return external


def build_space(
    config: RunConfig,
    network: ReactionNetwork,
    unknown: Sequence[int],
    n_cells: int,
) -> ParameterSpace:
    """Caja por defecto con las cotas y fijos de [parameters] aplicados."""
    space = default_space(network, unknown, n_cells, config.parameters.preset)
    unknown_names = set(space.unknown)
    for key, (lower, upper) in config.parameters.bounds.items():
        kind, name = key.split('.', 1)
        if kind == 'I' and name not in unknown_names:
            continue
        space = space.with_bounds(kind, name, lower, upper)
    for entry in config.parameters.fixed:
        kind, name = entry.split('.', 1)
        if kind == 'I' and name not in unknown_names:
            continue
        space = space.with_fixed(kind, name)
    return space


def build_problem(
    config: RunConfig,
    network: Optional[ReactionNetwork] = None,
    grid: Optional[SpatialGrid] = None,
    data: Optional[DataSet] = None,
    observed: Optional[Sequence[str]] = None,
) -> IdentificationProblem:
    """
    Problema de identificacion completo.

    Los datos se leen de [paths] data (remuestreados si hace falta)
    salvo que se pasen explicitamente.
    """
    network = build_network(config) if network is None else network
    grid = build_grid(config) if grid is None else grid
    time = build_time(config)
    observed = observed_names(config, network) if observed is None else tuple(observed)
    observation = ObservationOperator.from_names(network, observed)

    if data is None:
        if config.paths.data is not None:
            data = DataSet.from_field_file(
                FieldFile.read(config.paths.data), grid, time, observation.n_observed
            )
        else:
            data = DataSet(np.zeros((time.levels, observation.n_observed, grid.n_active)), time)

    space = build_space(config, network, observation.unknown, grid.n_active)
    stride = config.time.checkpoint_stride or None
    problem = IdentificationProblem(
        network, grid, time, observation, data, space,
        load_external(config, network, grid), stride
    )
    logger.info(
        "Problema armado: %d especies, %d constantes, %d celdas, %d niveles",
        network.N, network.M, grid.n_active, time.levels,
        extra={'extra_fields': {
            'observed': ','.join(observed),
            'unknown_fields': observation.n_unknown,
        }}
    )
    return problem


def initial_parameters(
    config: RunConfig,
    problem: IdentificationProblem,
    rng: Optional[np.random.Generator] = None,
) -> ParameterSet:
    """
    Punto de partida: archivo [paths] parameters, o valores aleatorios en
    la caja con los valores de [parameters] superpuestos.

    Los valores escalares ``I.<especie>`` dan campos constantes.
    """
    space = problem.space
    if config.paths.parameters is not None:
        theta = read_parameters(config.paths.parameters, space, problem.grid)
    else:
        rng = rng or np.random.default_rng(config.output.seed)
        theta = draw_parameters(space, problem.grid, rng)

    for key, value in config.parameters.values.items():
        kind, name = key.split('.', 1)
        if kind == 'I':
            if name in space.unknown:
                theta.I[space.position('I', name)] = value
        else:
            getattr(theta, kind)[space.position(kind, name)] = value

    # entradas fijadas por cotas iguales
    for kind in ('d', 'k'):
        bounds = getattr(space, f'{kind}_bounds')
        pinned = bounds[:, 0] == bounds[:, 1]
        getattr(theta, kind)[pinned] = bounds[pinned, 0]
    return theta


# --- simulacion y experimentos gemelos -----------------------------------------

@dataclass
class Simulation:
    """
    Resultado de ``simulate``.

    Attributes:
        observed: FieldFile con F u (niveles, N*, ny, nx)
        full_state: FieldFile con u completo, si se pidio
        trajectory: Trayectoria directa
        theta: Parametros usados (todas las especies con campo inicial)
    """
    observed: FieldFile
    full_state: Optional[FieldFile]
    trajectory: StateTrajectory
    theta: ParameterSet


def simulation_problem(config: RunConfig, network: Optional[ReactionNetwork] = None) -> IdentificationProblem:
    """Problema sin observacion: theta.I cubre el campo inicial de todas las especies."""
    grid = build_grid(config)
    data = DataSet.empty(build_time(config), grid.n_active)
    return build_problem(config, network=network, grid=grid, data=data, observed=())


def add_noise(values: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Ruido gaussiano i.i.d.; sigma = 0 deja los valores intactos."""
    if sigma == 0:
        return values.copy()
    return values + sigma * rng.standard_normal(values.shape)


def simulate(
    config: RunConfig,
    noise: Optional[float] = None,
    seed: Optional[int] = None,
    full_state: Optional[bool] = None,
) -> Simulation:
    """
    Integra el modelo con el theta de la configuracion y devuelve F u.

    Todo el azar (theta faltante y ruido) sale de una unica semilla.
    """
    noise = config.output.noise if noise is None else noise
    seed = config.output.seed if seed is None else seed
    full_state = config.output.full_state if full_state is None else full_state
    rng = np.random.default_rng(seed)

    network = build_network(config)
    problem = simulation_problem(config, network)
    theta = initial_parameters(config, problem, rng)
    trajectory = solve_forward(problem, theta)

    observation = ObservationOperator.from_names(network, observed_names(config, network))
    values = trajectory.observed(observation.observed)
    values = add_noise(values, noise, rng)
    dt = problem.time.dt

    logger.info(
        "Simulacion completa: %d niveles, %d campos observados",
        problem.time.levels, observation.n_observed,
        extra={'extra_fields': {'noise': noise, 'seed': seed}}
    )
    return Simulation(
        observed=FieldFile.from_active(problem.grid, values, dt),
        full_state=FieldFile.from_active(problem.grid, trajectory.values, dt) if full_state else None,
        trajectory=trajectory,
        theta=theta,
    )


def twin_problem(
    problem: IdentificationProblem,
    theta_true: ParameterSet,
    noise: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> IdentificationProblem:
    """
    Problema gemelo: datos F u generados desde ``theta_true`` sobre el
    mismo problema (los campos observados iniciales salen de los datos,
    asi que se toman de un solve con todas las especies desconocidas).

    Args:
        problem: Problema con la observacion deseada
        theta_true: Parametros sobre la caja del problema sin observacion
    """
    full = IdentificationProblem(
        problem.network, problem.grid, problem.time,
        ObservationOperator(problem.network.N, ()),
        DataSet.empty(problem.time, problem.grid.n_active),
        default_space(problem.network, range(problem.network.N), problem.grid.n_active),
        problem.external, problem.checkpoint_stride,
    )
    if theta_true.space.q != problem.network.N:
        raise ConfigError("theta_true debe tener campo inicial para todas las especies")
    theta_true = ParameterSet(theta_true.d, theta_true.k, theta_true.I, full.space)
    trajectory = solve_forward(full, theta_true)
    values = trajectory.observed(problem.observation.observed)
    if noise:
        values = add_noise(values, noise, rng or np.random.default_rng(0))
    return problem.with_data(values)


def restrict_parameters(theta_full: ParameterSet, problem: IdentificationProblem) -> ParameterSet:
    """theta de un problema sin observacion llevado a la caja de ``problem``."""
    rows = list(problem.observation.unknown)
    return ParameterSet(theta_full.d, theta_full.k, theta_full.I[rows], problem.space)


def dump_adjoint(
    problem: IdentificationProblem,
    theta: ParameterSet,
    path: Union[str, Path],
    trajectory: Optional[StateTrajectory] = None,
) -> Path:
    """
    Escribe el adjunto mu^0..mu^{nt} en theta como archivo RDRD, un campo
    por especie en el orden de la red.

    Args:
        trajectory: Trayectoria directa en theta si ya se calculo
    """
    if trajectory is None:
        trajectory = solve_forward(problem, theta)
    adjoint = solve_adjoint(problem, theta, trajectory)
    written = FieldFile.from_active(problem.grid, adjoint.values, problem.time.dt).write(path)
    logger.info(
        "Adjunto escrito en %s", written,
        extra={'extra_fields': {'levels': len(adjoint), 'max_abs': adjoint.max_abs()}}
    )
    return written
