"""
L-BFGS proyectado con busqueda lineal de Armijo sobre la caja.

Trabaja sobre un vector x con cotas [lower, upper] y una funcion que
devuelve (J, dJ/dx). ``optimize`` lo conecta con un problema de
identificacion a traves de CoordinateMap.
"""

import time as _time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, List, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError, LineSearchFailure
from ..utils import get_iteration_logger, get_logger, log_execution
from .gradient import full_gradient
from .parameters import CoordinateMap, ParameterSet

logger = get_logger(__name__)

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]

CURVATURE_TOLERANCE = 1e-10


@dataclass
class OptimizerSettings:
    """
    Ajustes del optimizador.

    Attributes:
        memory: Pares (s, y) guardados
        max_iterations: Limite de iteraciones
        tolerance: Tolerancia de ||P(x - g) - x||_inf
        sufficient_decrease: Constante de Armijo
        shrink: Factor de reduccion del paso
        max_trials: Intentos por busqueda lineal
        initial_step: Paso maximo (inf-norma) de la primera iteracion
    """
    memory: int = 10
    max_iterations: int = 100
    tolerance: float = 1e-6
    sufficient_decrease: float = 1e-4
    shrink: float = 0.5
    max_trials: int = 30
    initial_step: float = 0.1

    def __post_init__(self):
        if int(self.memory) != self.memory or self.memory < 1:
            raise ConfigError(f"memory debe ser un entero >= 1, es {self.memory}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError(f"max_iterations debe ser un entero >= 1, es {self.max_iterations}")
        if int(self.max_trials) != self.max_trials or self.max_trials < 1:
            raise ConfigError(f"max_trials debe ser un entero >= 1, es {self.max_trials}")
        for name in ('tolerance', 'sufficient_decrease', 'initial_step'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} debe ser positivo, es {getattr(self, name)}")
        if not 0 < self.sufficient_decrease < 1:
            raise ConfigError(f"sufficient_decrease debe estar en (0, 1), es {self.sufficient_decrease}")
        if not 0 < self.shrink < 1:
            raise ConfigError(f"shrink debe estar en (0, 1), es {self.shrink}")
        self.memory = int(self.memory)
        self.max_iterations = int(self.max_iterations)
        self.max_trials = int(self.max_trials)


class OptimizationStatus(str, Enum):
    CONVERGED = 'converged'
    MAX_ITERATIONS = 'max-iterations'
    LINE_SEARCH_FAILURE = 'line-search-failure'

    @property
    def exit_code(self) -> int:
        return 0 if self is OptimizationStatus.CONVERGED else 4


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    projected_gradient_norm: float
    step_length: float
    line_search_trials: int
    wall_time: float

    def as_fields(self) -> dict:
        return {
            'iteration': self.iteration,
            'cost': self.cost,
            'projected_gradient_norm': self.projected_gradient_norm,
            'step_length': self.step_length,
            'line_search_trials': self.line_search_trials,
            'wall_time': self.wall_time,
        }


@dataclass
class OptimizationResult:
    x: np.ndarray
    cost: float
    gradient: np.ndarray
    status: OptimizationStatus
    records: List[IterationRecord] = field(default_factory=list)
    theta: Optional[ParameterSet] = None

    @property
    def converged(self) -> bool:
        return self.status is OptimizationStatus.CONVERGED

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration if self.records else 0


def projected_gradient_norm(x: np.ndarray, g: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    """||P_box(x - g) - x||_inf."""
    if not x.size:
        return 0.0
    return float(np.abs(np.clip(x - g, lower, upper) - x).max())


def two_loop_direction(history, g: np.ndarray) -> np.ndarray:
    """
    Recursion de dos lazos: -H g con H la aproximacion L-BFGS de la
    inversa del Hessiano, escalada inicial gamma = s^T y / y^T y.

    Los pares con s^T y <= 1e-10 ||s|| ||y|| se omiten.
    """
    pairs = []
    for s, y in history:
        sy = float(s @ y)
        if sy > CURVATURE_TOLERANCE * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
        else:
            logger.debug("Par de curvatura descartado (s^T y = %.3e)", sy)
    if not pairs:
        return -g

    q = g.astype(float).copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        alpha = rho * float(s @ q)
        q -= alpha * y
        alphas.append(alpha)

    s, y, _ = pairs[-1]
    q *= float(s @ y) / float(y @ y)

    for (s, y, rho), alpha in zip(pairs, reversed(alphas)):
        beta = rho * float(y @ q)
        q += (alpha - beta) * s
    return -q


def _active_outward(x, g, lower, upper) -> np.ndarray:
    at_lower = (x <= lower) & (g > 0)
    at_upper = (x >= upper) & (g < 0)
    return at_lower | at_upper


def minimize_projected_lbfgs(
    fun: Objective,
    x0: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    settings: Optional[OptimizerSettings] = None,
    callback: Optional[Callable[[IterationRecord, np.ndarray], None]] = None,
) -> OptimizationResult:
    """
    Minimiza fun sobre la caja [lower, upper].

    Cada paso de prueba se proyecta sobre la caja; un paso se acepta si
    cumple Armijo a lo largo del camino proyectado. Si la busqueda falla
    se devuelve el mejor punto con estado ``line-search-failure``.
    """
    settings = settings or OptimizerSettings()
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)

    start = _time.perf_counter()
    f, g = fun(x)
    history: Deque[Tuple[np.ndarray, np.ndarray]] = deque(maxlen=settings.memory)
    records: List[IterationRecord] = []

    def record(iteration: int, step: float, trials: int) -> IterationRecord:
        entry = IterationRecord(
            iteration, float(f), projected_gradient_norm(x, g, lower, upper),
            step, trials, _time.perf_counter() - start
        )
        records.append(entry)
        if callback is not None:
            callback(entry, x)
        return entry

    status = OptimizationStatus.MAX_ITERATIONS
    entry = record(0, 0.0, 0)
    for iteration in range(1, settings.max_iterations + 1):
        if entry.projected_gradient_norm <= settings.tolerance:
            status = OptimizationStatus.CONVERGED
            break

        blocked = _active_outward(x, g, lower, upper)
        g_free = np.where(blocked, 0.0, g)
        direction = two_loop_direction(history, g_free)
        direction[blocked] = 0.0
        if float(direction @ g_free) >= 0:
            logger.debug("Direccion sin descenso; se reinicia la memoria")
            history.clear()
            direction = -g_free

        step = 1.0
        if not history:
            scale = float(np.abs(direction).max())
            step = min(1.0, settings.initial_step / scale) if scale > 0 else 1.0

        accepted = False
        for trial in range(1, settings.max_trials + 1):
            x_trial = np.clip(x + step * direction, lower, upper)
            s = x_trial - x
            gs = float(g @ s)
            if gs < 0:
                f_trial, g_trial = fun(x_trial)
                if np.isfinite(f_trial) and f_trial <= f + settings.sufficient_decrease * gs:
                    accepted = True
                    break
            step *= settings.shrink

        if not accepted:
            status = OptimizationStatus.LINE_SEARCH_FAILURE
            logger.warning(
                "La busqueda lineal no encontro descenso suficiente en la iteracion %d", iteration,
                extra={'extra_fields': {'trials': settings.max_trials, 'cost': float(f)}}
            )
            break

        y = g_trial - g
        history.append((s, y))
        x, f, g = x_trial, f_trial, g_trial
        entry = record(iteration, float(np.abs(s).max()), trial)
    else:
        if entry.projected_gradient_norm <= settings.tolerance:
            status = OptimizationStatus.CONVERGED

    return OptimizationResult(x, float(f), g, status, records)


@log_execution(level="INFO")
def optimize(
    problem,
    theta0: ParameterSet,
    settings: Optional[OptimizerSettings] = None,
    raise_on_failure: bool = False,
) -> OptimizationResult:
    """
    Identifica theta minimizando J sobre la caja del problema.

    Cada iteracion aceptada se registra con los campos de IterationRecord
    en el logger de iteraciones (donde el IterationLogHandler la vuelca al
    CSV) y como progreso en INFO.

    Raises:
        LineSearchFailure: solo con ``raise_on_failure``
    """
    settings = settings or OptimizerSettings()
    coordinates = CoordinateMap(problem.space, problem.grid.cell_area)
    lower, upper = coordinates.bounds()
    x0 = coordinates.to_vector(theta0)
    if np.any(x0 < lower) or np.any(x0 > upper):
        logger.warning("theta0 fuera de la caja; se proyecta")

    def objective(x: np.ndarray) -> Tuple[float, np.ndarray]:
        return full_gradient(problem, coordinates.from_vector(x, theta0), coordinates)

    iterations = get_iteration_logger()

    def report(entry: IterationRecord, x: np.ndarray) -> None:
        fields = entry.as_fields()
        iterations.info("Iteracion %d", entry.iteration, extra={'extra_fields': fields})
        logger.info(
            "Iteracion %d: J = %.6e, ||Pg|| = %.3e",
            entry.iteration, entry.cost, entry.projected_gradient_norm,
            extra={'extra_fields': fields}
        )

    result = minimize_projected_lbfgs(objective, x0, lower, upper, settings, report)
    result.theta = coordinates.from_vector(result.x, theta0)

    logger.info(
        "Optimizacion terminada: %s", result.status.value,
        extra={'extra_fields': {
            'status': result.status.value,
            'iterations': result.iterations,
            'final_cost': result.cost,
        }}
    )
    if raise_on_failure and result.status is OptimizationStatus.LINE_SEARCH_FAILURE:
        raise LineSearchFailure(f"Sin descenso suficiente tras {result.iterations} iteraciones")
    return result
