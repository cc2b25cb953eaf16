"""
Malla cartesiana 2D enmascarada.

Las celdas activas (mask = True) forman el dominio; los campos viven solo
sobre ellas, en orden fila mayor (y, luego x). El Laplaciano discreto usa
el esquema de 5 puntos con celdas fantasma espejo en el borde de la
mascara (Neumann homogeneo), de modo que es simetrico, semidefinido
negativo y con nucleo igual a las constantes.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from ..exceptions import DimensionMismatch, DisconnectedDomain, EmptyDomain, FormatError
from ..utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """
    Malla con mascara.

    Attributes:
        mask: Arreglo booleano (ny, nx); True = dentro del dominio
        hx: Ancho de celda
        hy: Alto de celda

    Example:
        >>> grid = SpatialGrid.rectangle(16, 16, 1 / 16, 1 / 16)
        >>> grid.integrate(np.ones(grid.n_active))
        1.0
    """
    mask: np.ndarray
    hx: float
    hy: float
    _laplacian: sp.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise DimensionMismatch(f"La mascara debe ser 2D, tiene forma {mask.shape}")
        if not (self.hx > 0 and self.hy > 0):
            raise DimensionMismatch(f"Tamanos de celda invalidos: hx={self.hx}, hy={self.hy}")
        if not mask.any():
            raise EmptyDomain("La mascara no tiene celdas activas")

        _, components = ndimage.label(mask)
        if components > 1:
            raise DisconnectedDomain(
                f"La region activa tiene {components} componentes 4-conexas"
            )

        mask.setflags(write=False)
        object.__setattr__(self, 'mask', mask)
        object.__setattr__(self, 'hx', float(self.hx))
        object.__setattr__(self, 'hy', float(self.hy))
        object.__setattr__(self, '_laplacian', self._assemble_laplacian())

    # --- constructores -----------------------------------------------------

    @classmethod
    def rectangle(cls, nx: int, ny: int, hx: float, hy: float) -> 'SpatialGrid':
        return cls(np.ones((ny, nx), dtype=bool), hx, hy)

    @classmethod
    def disk(
        cls,
        nx: int,
        ny: int,
        hx: float,
        hy: float,
        radius: Optional[float] = None
    ) -> 'SpatialGrid':
        """Disco centrado; por defecto inscrito en el rectangulo."""
        width, height = nx * hx, ny * hy
        radius = min(width, height) / 2 if radius is None else radius
        x = (np.arange(nx) + 0.5) * hx - width / 2
        y = (np.arange(ny) + 0.5) * hy - height / 2
        xx, yy = np.meshgrid(x, y)
        return cls(xx ** 2 + yy ** 2 <= radius ** 2, hx, hy)

    # --- geometria ---------------------------------------------------------

    @property
    def nx(self) -> int:
        return self.mask.shape[1]

    @property
    def ny(self) -> int:
        return self.mask.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.mask.shape

    @property
    def active_index(self) -> np.ndarray:
        """Indices planos (fila mayor) de las celdas activas."""
        return np.flatnonzero(self.mask.ravel())

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def weights(self) -> np.ndarray:
        """Peso de cuadratura por celda activa (hx*hy)."""
        return np.full(self.n_active, self.cell_area)

    @property
    def area(self) -> float:
        return self.n_active * self.cell_area

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Centros (x, y) de las celdas activas."""
        iy, ix = np.nonzero(self.mask)
        return (ix + 0.5) * self.hx, (iy + 0.5) * self.hy

    # --- conversion ----------------------------------------------------------

    def to_image(self, values: np.ndarray) -> np.ndarray:
        """Campo(s) activos (..., n) a imagen (..., ny, nx) con NaN fuera."""
        values = np.asarray(values, dtype=float)
        self._check(values)
        image = np.full(values.shape[:-1] + (self.ny * self.nx,), np.nan)
        image[..., self.active_index] = values
        return image.reshape(values.shape[:-1] + self.shape)

    def from_image(self, image: np.ndarray) -> np.ndarray:
        """Imagen (..., ny, nx) a valores de celdas activas (..., n)."""
        image = np.asarray(image, dtype=float)
        if image.shape[-2:] != self.shape:
            raise DimensionMismatch(f"Imagen con forma {image.shape[-2:]}, malla {self.shape}")
        flat = image.reshape(image.shape[:-2] + (-1,))
        return flat[..., self.active_index]

    # --- operadores ----------------------------------------------------------

    def _assemble_laplacian(self) -> sp.csr_matrix:
        n = self.n_active
        numbering = np.full(self.shape, -1, dtype=int)
        numbering[self.mask] = np.arange(n)

        rows, cols, vals = [], [], []
        diagonal = np.zeros(n)
        # pares de vecinos activos en x y en y; un vecino ausente es espejo
        for axis, h in ((1, self.hx), (0, self.hy)):
            first = numbering.take(np.arange(numbering.shape[axis] - 1), axis=axis)
            second = numbering.take(np.arange(1, numbering.shape[axis]), axis=axis)
            both = (first >= 0) & (second >= 0)
            a, b = first[both], second[both]
            coupling = 1.0 / h ** 2
            rows += [a, b]
            cols += [b, a]
            vals += [np.full(a.size, coupling)] * 2
            np.subtract.at(diagonal, a, coupling)
            np.subtract.at(diagonal, b, coupling)

        rows.append(np.arange(n))
        cols.append(np.arange(n))
        vals.append(diagonal)
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n)
        )
        return matrix.tocsr()

    @property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Matriz dispersa (n, n) del Laplaciano discreto."""
        return self._laplacian

    def _check(self, values: np.ndarray) -> None:
        if values.shape[-1] != self.n_active:
            raise DimensionMismatch(
                f"El campo tiene {values.shape[-1]} valores, la malla {self.n_active} celdas activas"
            )

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        """Aplica Delta_h a un campo (n,) o a una pila de campos (..., n)."""
        values = np.asarray(values, dtype=float)
        self._check(values)
        flat = values.reshape(-1, self.n_active)
        result = (self._laplacian @ flat.T).T
        return result.reshape(values.shape)

    def integrate(self, values: np.ndarray):
        """Cuadratura de punto medio sobre el ultimo eje."""
        values = np.asarray(values, dtype=float)
        self._check(values)
        total = values.sum(axis=-1) * self.cell_area
        return float(total) if np.ndim(total) == 0 else total

    def inner_product(self, f: np.ndarray, g: np.ndarray):
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        if f.shape != g.shape:
            raise DimensionMismatch(f"Formas distintas: {f.shape} y {g.shape}")
        return self.integrate(f * g)

    def __repr__(self) -> str:
        return (
            f"SpatialGrid(nx={self.nx}, ny={self.ny}, hx={self.hx:g}, hy={self.hy:g}, "
            f"active={self.n_active})"
        )


def load_mask(
    path: Union[str, Path],
    signed_distance: bool = False,
    hx: Optional[float] = None,
    hy: Optional[float] = None,
) -> SpatialGrid:
    """
    Construye una malla desde un archivo de campos (primer nivel, primer campo).

    Args:
        path: Archivo RDRD
        signed_distance: True interpreta los valores como distancia con
                         signo (dentro = valor <= 0); False como imagen
                         binaria (dentro = distinto de cero)
        hx, hy: Tamanos de celda; por defecto los de la cabecera

    Raises:
        FormatError, EmptyDomain, DisconnectedDomain
    """
    from ..fieldfile import FieldFile

    field_file = FieldFile.read(path)
    image = field_file.data[0, 0]
    finite = np.isfinite(image)
    if signed_distance:
        mask = finite & (np.where(finite, image, 1.0) <= 0)
    else:
        mask = finite & (np.where(finite, image, 0.0) != 0)

    hx = field_file.hx if hx is None else hx
    hy = field_file.hy if hy is None else hy
    if not (hx > 0 and hy > 0):
        raise FormatError(f"Tamanos de celda invalidos en {path}: hx={hx}, hy={hy}")

    grid = SpatialGrid(mask, hx, hy)
    logger.debug("Mascara cargada desde %s: %r", path, grid)
    return grid
