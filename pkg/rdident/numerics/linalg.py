"""
Gradiente conjugado precondicionado (Jacobi) por lotes.

Todas las especies de un paso de tiempo se resuelven juntas: cada fila de
``rhs`` es un sistema independiente y la iteracion se congela fila por
fila cuando esa fila converge.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp

from ..exceptions import DimensionMismatch, LinearSolveFailure
from ..utils import get_logger

logger = get_logger(__name__)

DEFAULT_RTOL = 1e-12

Operator = Callable[[np.ndarray], np.ndarray]


@dataclass
class LinearSolveResult:
    """
    Resultado de una resolucion por lotes.

    Attributes:
        solution: (B, n)
        iterations: Iteraciones por sistema
        residual_norms: ||b - A x|| final por sistema
        rhs_norms: ||b|| por sistema
        converged: Bandera por sistema
    """
    solution: np.ndarray
    iterations: np.ndarray
    residual_norms: np.ndarray
    rhs_norms: np.ndarray
    converged: np.ndarray

    @property
    def relative_residuals(self) -> np.ndarray:
        return self.residual_norms / np.where(self.rhs_norms > 0, self.rhs_norms, 1.0)


class ImplicitDiffusionOperator:
    """
    A_i = diag(1 + dt q_i) - dt d_i Delta_h, un sistema por especie.

    Es simetrica definida positiva y una M-matriz no singular para
    d_i >= 0 y q_i >= 0.
    """

    def __init__(self, laplacian: sp.spmatrix, diagonal: np.ndarray, diffusion: np.ndarray):
        self.laplacian = laplacian
        self.diagonal = np.atleast_2d(np.asarray(diagonal, dtype=float))
        self.diffusion = np.asarray(diffusion, dtype=float).reshape(-1)
        if self.diagonal.shape[0] != self.diffusion.size:
            raise DimensionMismatch(
                f"{self.diagonal.shape[0]} diagonales y {self.diffusion.size} difusividades"
            )
        if self.diagonal.shape[1] != laplacian.shape[0]:
            raise DimensionMismatch(
                f"Diagonal con {self.diagonal.shape[1]} celdas, Laplaciano de {laplacian.shape[0]}"
            )

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.diagonal * x - self.diffusion[:, None] * (self.laplacian @ x.T).T

    def matrix_diagonal(self) -> np.ndarray:
        return self.diagonal - self.diffusion[:, None] * self.laplacian.diagonal()[None, :]

    def dense(self, row: int) -> np.ndarray:
        """Matriz densa del sistema ``row`` (tests)."""
        return np.diag(self.diagonal[row]) - self.diffusion[row] * self.laplacian.toarray()


def batched_cg(
    operator: Operator,
    rhs: np.ndarray,
    preconditioner: np.ndarray,
    x0: Optional[np.ndarray] = None,
    rtol: float = DEFAULT_RTOL,
    max_iterations: Optional[int] = None,
    raise_on_failure: bool = True,
) -> LinearSolveResult:
    """
    Resuelve A_b x_b = rhs_b para cada fila b.

    Args:
        operator: Aplica las B matrices a un arreglo (B, n)
        rhs: Lados derechos (B, n)
        preconditioner: Diagonal de cada A_b (B, n), debe ser positiva
        x0: Punto de partida (por defecto cero)
        rtol: Tolerancia relativa ||r|| <= rtol ||b||
        max_iterations: Limite por sistema (por defecto 10 n)

    Raises:
        LinearSolveFailure: si algun sistema agota el limite
    """
    rhs = np.atleast_2d(np.asarray(rhs, dtype=float))
    batch, n = rhs.shape
    inverse_diagonal = 1.0 / np.broadcast_to(preconditioner, rhs.shape)
    max_iterations = 10 * n if max_iterations is None else max_iterations

    rhs_norms = np.linalg.norm(rhs, axis=1)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float).reshape(batch, n)
    x[rhs_norms == 0] = 0.0
    r = rhs - operator(x)
    z = inverse_diagonal * r
    p = z.copy()
    rz = np.einsum('bn,bn->b', r, z)

    tolerance = rtol * rhs_norms
    iterations = np.zeros(batch, dtype=int)

    for _ in range(max_iterations):
        active = np.linalg.norm(r, axis=1) > tolerance
        if not active.any():
            break

        Ap = operator(p)
        pAp = np.einsum('bn,bn->b', p, Ap)
        alpha = np.where(active, rz / np.where(active, pAp, 1.0), 0.0)

        x += alpha[:, None] * p
        r -= alpha[:, None] * Ap
        z = inverse_diagonal * r
        rz_new = np.einsum('bn,bn->b', r, z)
        beta = np.where(active, rz_new / np.where(active, rz, 1.0), 0.0)
        p = np.where(active[:, None], z + beta[:, None] * p, p)
        rz = np.where(active, rz_new, rz)
        iterations += active

    converged = np.linalg.norm(r, axis=1) <= tolerance
    residual_norms = np.linalg.norm(rhs - operator(x), axis=1)
    result = LinearSolveResult(x, iterations, residual_norms, rhs_norms, converged)

    if not converged.all():
        failed = np.flatnonzero(~converged)
        message = (
            f"CG no convergio en {max_iterations} iteraciones para los sistemas "
            f"{failed.tolist()} (residuo relativo max "
            f"{result.relative_residuals[failed].max():.3e})"
        )
        if raise_on_failure:
            raise LinearSolveFailure(message)
        logger.warning(message)

    return result


def linear_solve(
    matrix: Union[sp.spmatrix, np.ndarray],
    rhs: np.ndarray,
    x0: Optional[np.ndarray] = None,
    rtol: float = DEFAULT_RTOL,
    max_iterations: Optional[int] = None,
) -> LinearSolveResult:
    """
    Resuelve un unico sistema simetrico definido positivo.

    Example:
        >>> result = linear_solve(sp.identity(4, format='csr'), np.arange(4.0))
        >>> result.solution[0]
        array([0., 1., 2., 3.])
    """
    matrix = sp.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float).reshape(1, -1)
    if matrix.shape != (rhs.shape[1], rhs.shape[1]):
        raise DimensionMismatch(f"Matriz {matrix.shape} y lado derecho de longitud {rhs.shape[1]}")

    def apply(x: np.ndarray) -> np.ndarray:
        return (matrix @ x.T).T

    return batched_cg(
        apply, rhs, matrix.diagonal()[None, :], x0=x0, rtol=rtol,
        max_iterations=max_iterations
    )
