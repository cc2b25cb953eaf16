"""
Sistema adjunto discreto.

La recursion es la transpuesta exacta del paso directo: con
A(u) = diag(1 + dt q(u)) - dt diag(d) Delta_h y mu^{nt} = 0,

    A(u^{m-1}) mu^{m-1} = mu^m + dt T(mu^m; u^m, u^{m+1}) - dt F^T (F u^m - c^m)

para m = nt..1, donde T_j = sum_i mu_i (dp_i/du_j - w_i dq_i/du_j) es el
acoplamiento de reaccion evaluado en x = u^m y w = u^{m+1}. El termino
de acoplamiento se omite en m = nt, donde mu^{nt} = 0.
"""

from typing import Iterable, Optional, Sequence

import numpy as np

from ..exceptions import DimensionMismatch, NonFiniteAdjoint
from ..utils import get_logger, log_execution
from .forward import StateTrajectory, TimeAxis
from .grid import SpatialGrid
from .linalg import DEFAULT_RTOL, ImplicitDiffusionOperator, batched_cg

logger = get_logger(__name__)


class ObservationOperator:
    """
    Matriz de observacion F (seleccion 0/1) y su complemento.

    Las especies observadas definen las filas de F; las no observadas son
    las de valor inicial desconocido (N* + q = N).

    Example:
        >>> F = ObservationOperator(3, [2])
        >>> F.unknown
        (0, 1)
    """

    def __init__(self, n_species: int, observed: Iterable[int]):
        observed = [int(i) for i in observed]
        if len(set(observed)) != len(observed):
            raise DimensionMismatch(f"Especies observadas repetidas: {observed}")
        if any(not 0 <= i < n_species for i in observed):
            raise DimensionMismatch(f"Indices observados fuera de 0..{n_species - 1}: {observed}")
        self.n_species = n_species
        self.observed = tuple(sorted(observed))
        self.unknown = tuple(i for i in range(n_species) if i not in self.observed)

    @classmethod
    def from_names(cls, network, names: Sequence[str]) -> 'ObservationOperator':
        indices = []
        for name in names:
            index = network.index_of(name)
            if network.is_external(index):
                raise DimensionMismatch(f"La especie externa {name} no puede observarse")
            indices.append(index)
        return cls(network.N, indices)

    @property
    def n_observed(self) -> int:
        return len(self.observed)

    @property
    def n_unknown(self) -> int:
        return len(self.unknown)

    @property
    def matrix(self) -> np.ndarray:
        F = np.zeros((self.n_observed, self.n_species))
        F[np.arange(self.n_observed), self.observed] = 1.0
        return F

    def apply(self, u: np.ndarray) -> np.ndarray:
        """F u para un estado (N, n) o una pila (..., N, n)."""
        u = np.asarray(u, dtype=float)
        if u.shape[-2] != self.n_species:
            raise DimensionMismatch(f"Estado con {u.shape[-2]} especies, F espera {self.n_species}")
        return u[..., list(self.observed), :]

    def transpose(self, values: np.ndarray) -> np.ndarray:
        """F^T v: inyecta (N*, n) en (N, n) con ceros en las no observadas."""
        values = np.asarray(values, dtype=float)
        if values.shape[-2] != self.n_observed:
            raise DimensionMismatch(
                f"Se esperaban {self.n_observed} campos observados, hay {values.shape[-2]}"
            )
        full = np.zeros(values.shape[:-2] + (self.n_species, values.shape[-1]))
        full[..., list(self.observed), :] = values
        return full

    def __repr__(self) -> str:
        return f"ObservationOperator(observed={self.observed}, unknown={self.unknown})"


def residual(F: ObservationOperator, u_level: np.ndarray, c_level: np.ndarray) -> np.ndarray:
    """F^T (F u - c) en un nivel: (N, n) con ceros en las no observadas."""
    observed = F.apply(u_level)
    c_level = np.asarray(c_level, dtype=float)
    if c_level.shape != observed.shape:
        raise DimensionMismatch(f"Datos con forma {c_level.shape}, se esperaba {observed.shape}")
    return F.transpose(observed - c_level)


class AdjointTrajectory:
    """
    Niveles mu^0..mu^{nt} del adjunto, (nt+1, N, n).

    ``initial_sensitivity`` es dJ/du^0 salvo signo y peso de celda:
    mu^0 + dt T(mu^0; u^0, u^1).
    """

    def __init__(self, grid: SpatialGrid, time: TimeAxis, levels: np.ndarray, initial_sensitivity: np.ndarray):
        self.grid = grid
        self.time = time
        self.values = levels
        self.initial_sensitivity = initial_sensitivity

    def __len__(self) -> int:
        return self.values.shape[0]

    def level(self, n: int) -> np.ndarray:
        return self.values[n]

    __getitem__ = level

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0


def adjoint_step(
    network,
    grid: SpatialGrid,
    mu_next: np.ndarray,
    u_prev: np.ndarray,
    source: np.ndarray,
    k: np.ndarray,
    d: np.ndarray,
    dt: float,
    ext_prev: Optional[np.ndarray] = None,
    rtol: float = DEFAULT_RTOL,
) -> np.ndarray:
    """
    Resuelve A(u_prev) mu = mu_next + dt * source.

    ``source`` agrupa el acoplamiento de reaccion y el residuo de
    observacion del nivel m; A se arma exactamente como en el paso directo
    desde u^{m-1}.
    """
    _, q = network.kinetics.split(u_prev, k, ext_prev)
    operator = ImplicitDiffusionOperator(grid.laplacian_matrix, 1.0 + dt * q, dt * np.asarray(d, dtype=float))
    rhs = mu_next + dt * source
    result = batched_cg(operator, rhs, operator.matrix_diagonal(), x0=mu_next, rtol=rtol)
    return result.solution


@log_execution(level="DEBUG")
def solve_adjoint(
    problem,
    theta,
    u_traj: StateTrajectory,
    data: Optional[np.ndarray] = None,
) -> AdjointTrajectory:
    """
    Barrido hacia atras del adjunto.

    Args:
        problem: IdentificationProblem (red, malla, tiempo, F, campos externos)
        theta: ParameterSet
        u_traj: Trayectoria directa en theta
        data: Datos (nt+1, N*, n); por defecto los del problema

    Raises:
        NonFiniteAdjoint: si aparece un valor no finito
    """
    network, grid, time = problem.network, problem.grid, problem.time
    F = problem.observation
    data = problem.data.values if data is None else np.asarray(data, dtype=float)
    expected = (time.levels, F.n_observed, grid.n_active)
    if data.shape != expected:
        raise DimensionMismatch(f"Datos con forma {data.shape}, se esperaba {expected}")

    k = np.asarray(theta.k, dtype=float)
    d = np.asarray(theta.d, dtype=float)
    dt = time.dt
    nt = time.nt
    kinetics = network.kinetics

    levels = np.zeros((time.levels, network.N, grid.n_active))
    for m in range(nt, 0, -1):
        u_m = u_traj.level(m)
        source = -residual(F, u_m, data[m])
        if m < nt:
            source += kinetics.adjoint_coupling(
                levels[m], u_m, u_traj.level(m + 1), k, problem.external_at(m)
            )
        levels[m - 1] = adjoint_step(
            network, grid, levels[m], u_traj.level(m - 1), source, k, d, dt,
            problem.external_at(m - 1)
        )
        if not np.all(np.isfinite(levels[m - 1])):
            raise NonFiniteAdjoint(f"Adjunto no finito en el nivel {m - 1}")

    initial = levels[0].copy()
    if nt >= 1:
        initial += dt * kinetics.adjoint_coupling(
            levels[0], u_traj.level(0), u_traj.level(1), k, problem.external_at(0)
        )

    adjoint = AdjointTrajectory(grid, time, levels, initial)
    logger.debug(
        "Adjunto resuelto",
        extra={'extra_fields': {'levels': time.levels, 'max_abs': adjoint.max_abs()}}
    )
    return adjoint

