"""
Costo J y gradientes respecto de d, k e I.

Con mu el adjunto (ver numerics.adjoint) y w = hx*hy:

    J        = 1/2 sum_{n=1..nt} dt w ||F u^n - c^n||^2
    dJ/dd_i  = -sum_{n<nt} dt w <mu_i^n, Delta_h u_i^{n+1}>
    dJ/dk_a  = -sum_{n<nt} dt w sum_cells S_a(mu^n; u^n, u^{n+1})
    grad_I J = -(dG/dI)^T (mu^0 + dt T(mu^0; u^0, u^1))

donde S_a es la sensibilidad de la reaccion a y la cuadratura en tiempo
es la regla del rectangulo anclada en el nivel n+1. grad_I es el
representante L2; el gradiente por celda es w * grad_I.
"""

import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from ..exceptions import DimensionMismatch, NonFiniteAdjoint
from ..numerics.adjoint import AdjointTrajectory, solve_adjoint
from ..numerics.forward import StateTrajectory, solve_forward
from ..numerics.grid import SpatialGrid
from ..utils import get_logger, log_execution
from .parameters import CoordinateMap, ParameterSet, smooth_random_field
from .problem import IdentificationProblem, InitialMap

logger = get_logger(__name__)

DEFAULT_THRESHOLD = 5e-3
DEFAULT_FD_STEP = 1e-4
MAGNITUDE_FLOOR = 1e-10


@dataclass(eq=False)
class GradientSet:
    """
    Gradientes (d, k, I) del costo.

    Attributes:
        d: (N,)
        k: (M,)
        I: (q, n), representante L2
    """
    d: np.ndarray
    k: np.ndarray
    I: np.ndarray

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.k)) and np.all(np.isfinite(self.I))
        )

    def max_abs(self) -> float:
        parts = [np.abs(a).max() for a in (self.d, self.k, self.I) if a.size]
        return float(max(parts)) if parts else 0.0


def cost(problem: IdentificationProblem, u_traj: StateTrajectory, data: Optional[np.ndarray] = None) -> float:
    """1/2 sum_{n=1..nt} dt hx hy ||F u^n - c^n||^2."""
    F, grid, time = problem.observation, problem.grid, problem.time
    data = problem.data.values if data is None else np.asarray(data, dtype=float)
    expected = (time.levels, F.n_observed, grid.n_active)
    if data.shape != expected:
        raise DimensionMismatch(f"Datos con forma {data.shape}, se esperaba {expected}")
    if len(u_traj) != time.levels:
        raise DimensionMismatch(f"Trayectoria con {len(u_traj)} niveles, se esperaban {time.levels}")

    total = 0.0
    for n in range(1, time.levels):
        misfit = F.apply(u_traj.level(n)) - data[n]
        total += float(np.sum(misfit * misfit))
    return 0.5 * total * grid.cell_area * time.dt


def _check_aligned(u_traj: StateTrajectory, mu_traj: AdjointTrajectory) -> None:
    if len(u_traj) != len(mu_traj):
        raise DimensionMismatch(
            f"Trayectorias desalineadas: {len(u_traj)} niveles directos, {len(mu_traj)} adjuntos"
        )
    if u_traj.level(0).shape != mu_traj.level(0).shape:
        raise DimensionMismatch(
            f"Estados directo {u_traj.level(0).shape} y adjunto {mu_traj.level(0).shape}"
        )


def grad_d(u_traj: StateTrajectory, mu_traj: AdjointTrajectory, grid: SpatialGrid) -> np.ndarray:
    _check_aligned(u_traj, mu_traj)
    dt = u_traj.time.dt
    total = np.zeros(u_traj.n_fields)
    for n in range(len(u_traj) - 1):
        total += np.sum(mu_traj.level(n) * grid.laplacian(u_traj.level(n + 1)), axis=1)
    return -dt * grid.cell_area * total


def grad_k(
    network,
    u_traj: StateTrajectory,
    mu_traj: AdjointTrajectory,
    grid: SpatialGrid,
    k: np.ndarray,
    external_at: Callable[[int], Optional[np.ndarray]] = lambda level: None,
) -> np.ndarray:
    _check_aligned(u_traj, mu_traj)
    k = np.asarray(k, dtype=float)
    dt = u_traj.time.dt
    kinetics = network.kinetics
    total = np.zeros(network.M)
    for n in range(len(u_traj) - 1):
        sensitivity = kinetics.rate_sensitivity(
            mu_traj.level(n), u_traj.level(n), u_traj.level(n + 1), k, external_at(n)
        )
        total += sensitivity.sum(axis=1)
    return -dt * grid.cell_area * total


def grad_I(G: InitialMap, mu_traj: AdjointTrajectory) -> np.ndarray:
    """Campos -mu(., 0) de las especies con valor inicial desconocido."""
    sensitivity = mu_traj.initial_sensitivity
    if sensitivity.shape[0] != G.observation.n_species:
        raise DimensionMismatch(
            f"Adjunto con {sensitivity.shape[0]} especies, G espera {G.observation.n_species}"
        )
    return -G.transpose(sensitivity)


@log_execution(level="DEBUG")
def full_gradient(
    problem: IdentificationProblem,
    theta: ParameterSet,
    coordinates: Optional[CoordinateMap] = None,
) -> Tuple[float, Union[GradientSet, np.ndarray]]:
    """
    Costo y gradiente en theta: directo, adjunto y cuadraturas.

    Con ``coordinates`` el gradiente se devuelve como vector en
    coordenadas de trabajo (log d, log k, I por celda).

    Raises:
        NonFiniteAdjoint: si algun gradiente no es finito
    """
    u_traj = solve_forward(problem, theta)
    value = cost(problem, u_traj)
    mu_traj = solve_adjoint(problem, theta, u_traj)

    gradients = GradientSet(
        d=grad_d(u_traj, mu_traj, problem.grid),
        k=grad_k(problem.network, u_traj, mu_traj, problem.grid, theta.k, problem.external_at),
        I=grad_I(problem.initial_map, mu_traj),
    )
    if not (np.isfinite(value) and gradients.is_finite()):
        raise NonFiniteAdjoint("Costo o gradiente no finito")

    logger.debug(
        "Gradiente evaluado",
        extra={'extra_fields': {'cost': value, 'gradient_max': gradients.max_abs()}}
    )
    if coordinates is not None:
        return value, coordinates.gradient(gradients, theta)
    return value, gradients


def evaluate_cost(problem: IdentificationProblem, theta: ParameterSet) -> float:
    """Solo el costo (un solve directo)."""
    return cost(problem, solve_forward(problem, theta))


# --- verificacion por diferencias finitas ------------------------------------

@dataclass
class GradientCheckRow:
    component: str
    adjoint: float
    finite_difference: float
    relative_error: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status != 'fail'


@dataclass
class GradientCheckReport:
    rows: List[GradientCheckRow] = field(default_factory=list)
    threshold: float = DEFAULT_THRESHOLD

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> List[GradientCheckRow]:
        return [row for row in self.rows if not row.passed]

    def write_csv(self, stream: Optional[TextIO] = None) -> None:
        stream = sys.stdout if stream is None else stream
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['component', 'adjoint', 'finite_difference', 'relative_error', 'status'])
        for row in self.rows:
            writer.writerow([
                row.component, repr(row.adjoint), repr(row.finite_difference),
                f'{row.relative_error:.3e}', row.status,
            ])


def relative_error(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def _scaled(theta: ParameterSet, kind: str, index: int, factor: float) -> ParameterSet:
    shifted = theta.copy()
    getattr(shifted, kind)[index] *= factor
    return shifted


def log_derivative_fd(
    problem: IdentificationProblem,
    theta: ParameterSet,
    kind: str,
    index: int,
    h: float = DEFAULT_FD_STEP,
) -> float:
    """Diferencia central de J respecto de log d_i o log k_a."""
    plus = evaluate_cost(problem, _scaled(theta, kind, index, np.exp(h)))
    minus = evaluate_cost(problem, _scaled(theta, kind, index, np.exp(-h)))
    return (plus - minus) / (2 * h)


def directional_fd(
    problem: IdentificationProblem,
    theta: ParameterSet,
    direction: np.ndarray,
    h: float = DEFAULT_FD_STEP,
) -> float:
    """Diferencia central de J a lo largo de un campo I + h * direction."""
    plus, minus = theta.copy(), theta.copy()
    plus.I = theta.I + h * direction
    minus.I = theta.I - h * direction
    return (evaluate_cost(problem, plus) - evaluate_cost(problem, minus)) / (2 * h)


def random_directions(theta: ParameterSet, grid: SpatialGrid, rng: np.random.Generator, count: int = 3) -> List[np.ndarray]:
    """
    Direcciones multiplicativas I * s con s suave en [-1, 1].

    Las especies con I fijo no se perturban.
    """
    directions = []
    free = ~theta.space.I_fixed
    for _ in range(count):
        s = np.array([smooth_random_field(grid, rng, 1.0, 3.0) - 2.0 for _ in range(theta.space.q)])
        s = s.reshape(theta.space.q, grid.n_active) * free[:, None]
        directions.append(theta.I * s)
    return directions


@log_execution(level="INFO")
def gradient_check(
    problem: IdentificationProblem,
    theta: ParameterSet,
    threshold: float = DEFAULT_THRESHOLD,
    h: float = DEFAULT_FD_STEP,
    n_directions: int = 3,
    seed: int = 0,
    workers: int = 1,
    corrupt: Optional[Callable[[GradientSet], GradientSet]] = None,
) -> GradientCheckReport:
    """
    Compara el gradiente adjunto con diferencias centrales de J.

    Una fila por d_i y k_a (en coordenadas logaritmicas) y una por cada
    direccion aleatoria de I: N + M + n_directions filas. Las componentes
    con |g| <= 1e-10 ||g||_inf se marcan ``below-floor`` y no cuentan.

    Args:
        workers: Evaluaciones de J concurrentes
        corrupt: Transformacion del gradiente antes de comparar (tests)
    """
    _, gradients = full_gradient(problem, theta)
    if corrupt is not None:
        gradients = corrupt(gradients)

    adjoint_d = theta.d * gradients.d
    adjoint_k = theta.k * gradients.k
    rng = np.random.default_rng(seed)
    directions = random_directions(theta, problem.grid, rng, n_directions)
    adjoint_I = [problem.grid.cell_area * float(np.sum(gradients.I * delta)) for delta in directions]

    tasks = [('d', i) for i in range(problem.network.N)] + [('k', a) for a in range(problem.network.M)]

    def run(task):
        kind, index = task
        return log_derivative_fd(problem, theta, kind, index, h)

    def run_direction(delta):
        return directional_fd(problem, theta, delta, h)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fd_values = list(pool.map(run, tasks))
            fd_directions = list(pool.map(run_direction, directions))
    else:
        fd_values = [run(task) for task in tasks]
        fd_directions = [run_direction(delta) for delta in directions]

    adjoint_values = np.concatenate([adjoint_d, adjoint_k])
    scale = float(np.abs(adjoint_values).max()) if adjoint_values.size else 0.0
    names = [f'd.{n}' for n in problem.space.species] + [f'k.{n}' for n in problem.space.rates]

    report = GradientCheckReport(threshold=threshold)
    for name, adjoint, fd in zip(names, adjoint_values, fd_values):
        error = relative_error(float(adjoint), fd)
        if abs(adjoint) <= MAGNITUDE_FLOOR * scale:
            status = 'below-floor'
        else:
            status = 'pass' if error <= threshold else 'fail'
        report.rows.append(GradientCheckRow(name, float(adjoint), fd, error, status))

    for number, (adjoint, fd) in enumerate(zip(adjoint_I, fd_directions), start=1):
        error = relative_error(adjoint, fd)
        status = 'pass' if error <= threshold else 'fail'
        report.rows.append(GradientCheckRow(f'I.direction{number}', adjoint, fd, error, status))

    level = 'info' if report.passed else 'warning'
    getattr(logger, level)(
        "Verificacion de gradiente: %d filas, %d fallidas",
        len(report.rows), len(report.failures),
        extra={'extra_fields': {'threshold': threshold, 'failures': len(report.failures)}}
    )
    return report


@dataclass
class TaylorResult:
    steps: np.ndarray
    remainders: np.ndarray
    order: float


def taylor_test(
    problem: IdentificationProblem,
    theta: ParameterSet,
    direction: Optional[np.ndarray] = None,
    steps: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5),
    seed: int = 0,
    floor: float = 1e-13,
) -> TaylorResult:
    """
    Prueba de derivada direccional en coordenadas de trabajo.

    |J(x + s v) - J(x) - s g.v| debe decaer como s^2; ``order`` es la
    pendiente log-log ajustada sobre los pasos por encima del piso de
    redondeo (relativo a J).
    """
    coordinates = CoordinateMap(problem.space, problem.grid.cell_area)
    x = coordinates.to_vector(theta)
    value, gradient = full_gradient(problem, theta, coordinates)
    if direction is None:
        rng = np.random.default_rng(seed)
        direction = rng.uniform(-1.0, 1.0, coordinates.size)
        direction /= np.abs(direction).max()
        # en el bloque I la perturbacion es relativa: I + s v >= 0 para s < 1
        n_log = coordinates.d_free.size + coordinates.k_free.size
        direction[n_log:] *= x[n_log:]
    slope = float(gradient @ direction)

    steps = np.asarray(steps, dtype=float)
    remainders = np.array([
        abs(evaluate_cost(problem, coordinates.from_vector(x + s * direction, theta)) - value - s * slope)
        for s in steps
    ])
    usable = remainders > floor * max(abs(value), 1.0)
    if usable.sum() >= 2:
        order = float(np.polyfit(np.log(steps[usable]), np.log(remainders[usable]), 1)[0])
    else:
        order = float('nan')
    logger.info(
        "Prueba de Taylor: orden observado %.3f", order,
        extra={'extra_fields': {'order': order, 'points': int(usable.sum())}}
    )
    return TaylorResult(steps, remainders, order)
