"""
Integrador directo del sistema de reaccion-difusion.

Euler implicito linealizado con tratamiento tipo Patankar: con
r_i = p_i - u_i q_i evaluados en u^n, cada especie resuelve

    (1 + dt q_i(u^n) - dt d_i Delta_h) u_i^{n+1} = u_i^n + dt p_i(u^n)

La matriz es una M-matriz no singular y el lado derecho es no negativo,
por lo que u^{n+1} >= 0. El gradiente conjugado lo respeta salvo su
residuo: esos negativos se anulan y cualquier otro se reporta como
PositivityViolation.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from ..exceptions import (
    ConfigError,
    DimensionMismatch,
    InvalidInitial,
    NonFiniteState,
    PositivityViolation,
)
from ..utils import get_logger, log_execution
from .grid import SpatialGrid
from .linalg import DEFAULT_RTOL, ImplicitDiffusionOperator, LinearSolveResult, batched_cg

logger = get_logger(__name__)

# redondeo relativo admitido ademas del residuo del gradiente conjugado
ROUNDOFF_CLAMP = 1e-14
# aviso de precision (no de estabilidad) cuando dt * max q lo supera
STIFFNESS_WARNING = 10.0


@dataclass(frozen=True)
class TimeAxis:
    """
    Eje temporal uniforme.

    Example:
        >>> TimeAxis(1.0, 100).dt
        0.01
    """
    T: float
    nt: int

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError(f"T debe ser positivo, es {self.T}")
        if int(self.nt) != self.nt or self.nt < 1:
            raise ConfigError(f"nt debe ser un entero >= 1, es {self.nt}")
        object.__setattr__(self, 'T', float(self.T))
        object.__setattr__(self, 'nt', int(self.nt))

    @property
    def dt(self) -> float:
        return self.T / self.nt

    @property
    def levels(self) -> int:
        return self.nt + 1

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt + 1)


ExternalAt = Callable[[int], Optional[np.ndarray]]


def _no_external(level: int) -> None:
    return None


class StateTrajectory:
    """
    Pila de nt+1 estados (N, n).

    En modo completo guarda todos los niveles. Con ``checkpoint_stride = s``
    guarda solo los niveles multiplos de s y recalcula cada segmento con
    ``replay`` cuando se pide un nivel intermedio; los dos ultimos
    segmentos recalculados quedan en cache, lo que cubre el barrido
    hacia atras del adjunto.
    """

    def __init__(
        self,
        grid: SpatialGrid,
        time: TimeAxis,
        n_fields: int,
        checkpoint_stride: Optional[int] = None,
        replay: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
    ):
        if checkpoint_stride is not None and checkpoint_stride < 1:
            raise ConfigError(f"checkpoint_stride debe ser >= 1, es {checkpoint_stride}")
        if checkpoint_stride is not None and replay is None:
            raise ConfigError("El modo con checkpoints requiere una funcion de recalculo")
        self.grid = grid
        self.time = time
        self.n_fields = n_fields
        self.checkpoint_stride = checkpoint_stride
        self._replay = replay
        self._stored: Dict[int, np.ndarray] = {}
        self._segments: Dict[int, Dict[int, np.ndarray]] = {}
        self.replayed_steps = 0

    @property
    def checkpointed(self) -> bool:
        return self.checkpoint_stride is not None

    def __len__(self) -> int:
        return self.time.levels

    def _keeps(self, level: int) -> bool:
        return (
            not self.checkpointed
            or level % self.checkpoint_stride == 0
            or level == self.time.nt
        )

    def record(self, level: int, state: np.ndarray) -> None:
        if state.shape != (self.n_fields, self.grid.n_active):
            raise DimensionMismatch(
                f"Estado con forma {state.shape}, se esperaba {(self.n_fields, self.grid.n_active)}"
            )
        if self._keeps(level):
            self._stored[level] = state

    def _segment(self, start: int) -> Dict[int, np.ndarray]:
        if start not in self._segments:
            end = min(start + self.checkpoint_stride, self.time.nt)
            levels = {start: self._stored[start]}
            state = self._stored[start]
            for level in range(start, end):
                state = self._replay(level, state)
                levels[level + 1] = state
                self.replayed_steps += 1
            while len(self._segments) >= 2:
                self._segments.pop(next(iter(self._segments)))
            self._segments[start] = levels
        return self._segments[start]

    def level(self, n: int) -> np.ndarray:
        """Estado en el nivel n (0..nt)."""
        if n < 0:
            n += self.time.levels
        if not 0 <= n <= self.time.nt:
            raise IndexError(f"Nivel {n} fuera de 0..{self.time.nt}")
        if n in self._stored:
            return self._stored[n]
        start = (n // self.checkpoint_stride) * self.checkpoint_stride
        return self._segment(start)[n]

    __getitem__ = level

    @property
    def initial(self) -> np.ndarray:
        return self.level(0)

    @property
    def final(self) -> np.ndarray:
        return self.level(self.time.nt)

    @property
    def values(self) -> np.ndarray:
        """Todos los niveles, (nt+1, N, n)."""
        return np.stack([self.level(n) for n in range(self.time.levels)])

    def observed(self, indices: Sequence[int]) -> np.ndarray:
        """Niveles de las especies indicadas, (nt+1, len(indices), n)."""
        indices = list(indices)
        return np.stack([self.level(n)[indices] for n in range(self.time.levels)])

    def max_abs(self) -> float:
        return max(float(np.abs(self.level(n)).max()) for n in range(self.time.levels))


def positivity_tolerance(result: LinearSolveResult) -> np.ndarray:
    """
    Negativo maximo admisible por especie tras un solve implicito.

    A_i es simetrica con autovalores >= 1, de modo que el error de cada
    componente esta acotado por ||b - A x||_2; se suma el redondeo
    relativo ROUNDOFF_CLAMP.
    """
    scale = np.maximum(np.abs(result.solution).max(axis=1), 1.0)
    return result.residual_norms + ROUNDOFF_CLAMP * scale


def enforce_nonnegative(state: np.ndarray, tolerance: np.ndarray, level: int) -> np.ndarray:
    """
    Anula los negativos dentro de ``tolerance`` (uno por especie).

    Raises:
        PositivityViolation: si algun valor es mas negativo que la tolerancia
    """
    tolerance = np.broadcast_to(np.asarray(tolerance, dtype=float), state.shape[:1])
    negative = state < 0
    if not negative.any():
        return state
    excess = state < -tolerance[:, None]
    if excess.any():
        species = int(np.flatnonzero(excess.any(axis=1))[0])
        worst = float(state[species].min())
        raise PositivityViolation(
            f"Negativos mas alla del error del solve en el nivel {level}: "
            f"especie {species}, min {worst:.3e} (tolerancia {tolerance[species]:.3e})",
            level=level, min_value=worst, tolerance=float(tolerance[species]),
        )
    logger.debug(
        "Nivel %d: %d negativos de redondeo anulados", level, int(negative.sum()),
        extra={'extra_fields': {'level': level, 'min_value': float(state.min())}}
    )
    return np.where(negative, 0.0, state)


def implicit_solve(
    network,
    grid: SpatialGrid,
    u_n: np.ndarray,
    k: np.ndarray,
    d: np.ndarray,
    dt: float,
    ext_n: Optional[np.ndarray] = None,
    rtol: float = DEFAULT_RTOL,
    max_iterations: Optional[int] = None,
) -> LinearSolveResult:
    """
    Resuelve el sistema del paso sin tocar el resultado.

    ``result.solution`` es u^{n+1} tal como sale del gradiente conjugado;
    ``step`` le aplica ``enforce_nonnegative``.

    Raises:
        LinearSolveFailure: si el gradiente conjugado no converge
    """
    u_n = np.asarray(u_n, dtype=float)
    d = np.asarray(d, dtype=float)
    if u_n.shape != (network.N, grid.n_active):
        raise DimensionMismatch(
            f"Estado con forma {u_n.shape}, se esperaba {(network.N, grid.n_active)}"
        )
    if d.shape != (network.N,):
        raise DimensionMismatch(f"d debe tener longitud {network.N}, tiene forma {d.shape}")

    p, q = network.kinetics.split(u_n, k, ext_n)
    operator = ImplicitDiffusionOperator(grid.laplacian_matrix, 1.0 + dt * q, dt * d)
    return batched_cg(
        operator,
        u_n + dt * p,
        operator.matrix_diagonal(),
        x0=u_n,
        rtol=rtol,
        max_iterations=max_iterations,
    )


def step(
    network,
    grid: SpatialGrid,
    u_n: np.ndarray,
    k: np.ndarray,
    d: np.ndarray,
    dt: float,
    ext_n: Optional[np.ndarray] = None,
    level: int = 0,
    rtol: float = DEFAULT_RTOL,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """
    Un paso del esquema: u^n -> u^{n+1}.

    Raises:
        LinearSolveFailure: si el gradiente conjugado no converge
        NonFiniteState: si el nuevo estado no es finito
        PositivityViolation: si quedan negativos mayores que el error del solve
    """
    result = implicit_solve(network, grid, u_n, k, d, dt, ext_n, rtol, max_iterations)
    u_next = result.solution

    if not np.all(np.isfinite(u_next)):
        raise NonFiniteState(f"Estado no finito en el nivel {level + 1}")
    return enforce_nonnegative(u_next, positivity_tolerance(result), level + 1)


def stiffness(network, u: np.ndarray, k: np.ndarray, dt: float, ext: Optional[np.ndarray] = None) -> float:
    """dt * max_i q_i(u)."""
    _, q = network.kinetics.split(u, k, ext)
    return float(dt * q.max()) if q.size else 0.0


@log_execution(level="DEBUG")
def integrate(
    network,
    grid: SpatialGrid,
    time: TimeAxis,
    u0: np.ndarray,
    d: np.ndarray,
    k: np.ndarray,
    external: ExternalAt = _no_external,
    checkpoint_stride: Optional[int] = None,
) -> StateTrajectory:
    """
    Integra desde u0 durante nt pasos.

    Args:
        external: Funcion nivel -> campos externos (E, n) o None

    Raises:
        InvalidInitial: si u0 tiene valores negativos
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (network.N, grid.n_active):
        raise DimensionMismatch(
            f"u0 con forma {u0.shape}, se esperaba {(network.N, grid.n_active)}"
        )
    if not np.all(np.isfinite(u0)):
        raise InvalidInitial("La condicion inicial tiene valores no finitos")
    if (u0 < 0).any():
        raise InvalidInitial(
            f"La condicion inicial tiene {int((u0 < 0).sum())} valores negativos "
            f"(min {u0.min():.3e})"
        )
    if (u0 == 0).any():
        logger.warning(
            "La condicion inicial tiene %d valores nulos; se aceptan u0 >= 0",
            int((u0 == 0).sum())
        )

    k = np.asarray(k, dtype=float)
    d = np.asarray(d, dtype=float)
    dt = time.dt

    def advance(level: int, state: np.ndarray) -> np.ndarray:
        return step(network, grid, state, k, d, dt, external(level), level=level)

    trajectory = StateTrajectory(grid, time, network.N, checkpoint_stride, advance)
    trajectory.record(0, u0)

    warned = False
    state = u0
    for level in range(time.nt):
        if not warned and network.M:
            measure = stiffness(network, state, k, dt, external(level))
            if measure > STIFFNESS_WARNING:
                logger.warning(
                    "dt * max q = %.3g en el nivel %d; considere reducir dt",
                    measure, level,
                    extra={'extra_fields': {'dt': dt, 'stiffness': measure}}
                )
                warned = True
        state = advance(level, state)
        trajectory.record(level + 1, state)

    logger.debug(
        "Integracion directa completa",
        extra={'extra_fields': {
            'levels': time.levels,
            'max_value': float(np.abs(state).max()),
            'checkpoint_stride': checkpoint_stride or 0,
        }}
    )
    return trajectory


def solve_forward(problem, theta) -> StateTrajectory:
    """
    Trayectoria directa de un problema de identificacion en theta.

    u0 = G(I) y los campos externos se toman del problema.
    """
    return integrate(
        problem.network,
        problem.grid,
        problem.time,
        problem.initial_state(theta),
        theta.d,
        theta.k,
        external=problem.external_at,
        checkpoint_stride=problem.checkpoint_stride,
    )
