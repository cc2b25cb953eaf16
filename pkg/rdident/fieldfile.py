"""
Formato binario de campos RDRD.

Cabecera (little-endian):
    magic "RDRD", version u32 = 1, nx, ny, nt_plus_1, n_fields (u32),
    hx, hy, dt (f64)

Carga util: f64 little-endian en orden (nivel, campo, y, x); las celdas
fuera de la mascara se guardan como NaN.
"""

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import DimensionMismatch, FormatError
from .utils import get_logger

logger = get_logger(__name__)

MAGIC = b'RDRD'
VERSION = 1
HEADER = struct.Struct('<4sIIIIIddd')


@dataclass(eq=False)
class FieldFile:
    """
    Contenido de un archivo RDRD.

    Attributes:
        data: Arreglo (nt_plus_1, n_fields, ny, nx)
        hx, hy: Tamanos de celda
        dt: Paso de tiempo entre niveles
    """
    data: np.ndarray
    hx: float
    hy: float
    dt: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 4:
            raise DimensionMismatch(
                f"Los datos deben tener forma (niveles, campos, ny, nx), tienen {self.data.shape}"
            )

    @property
    def levels(self) -> int:
        return self.data.shape[0]

    @property
    def n_fields(self) -> int:
        return self.data.shape[1]

    @property
    def ny(self) -> int:
        return self.data.shape[2]

    @property
    def nx(self) -> int:
        return self.data.shape[3]

    @classmethod
    def from_active(cls, grid, values: np.ndarray, dt: float = 0.0) -> 'FieldFile':
        """Construye desde valores de celdas activas (niveles, campos, n)."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None]
        return cls(grid.to_image(values), grid.hx, grid.hy, dt)

    def active_mask(self) -> np.ndarray:
        """
        Mascara de celdas con datos (no NaN).

        Raises:
            FormatError: si la disposicion de NaN cambia entre niveles o campos
        """
        finite = np.isfinite(self.data)
        mask = finite[0, 0]
        if not np.all(finite == mask):
            raise FormatError("La disposicion de celdas NaN no es la misma en todos los niveles")
        return mask

    def to_active(self, grid) -> np.ndarray:
        """Valores sobre las celdas activas de ``grid``, (niveles, campos, n)."""
        if (self.ny, self.nx) != grid.shape:
            raise DimensionMismatch(
                f"Archivo de {self.ny}x{self.nx} celdas, malla de {grid.ny}x{grid.nx}"
            )
        values = grid.from_image(self.data)
        if not np.all(np.isfinite(values)):
            raise FormatError("El archivo tiene NaN dentro del dominio de la malla")
        return values

    def times(self) -> np.ndarray:
        return np.arange(self.levels) * self.dt

    # --- E/S -----------------------------------------------------------------

    def to_bytes(self) -> bytes:
        header = HEADER.pack(
            MAGIC, VERSION, self.nx, self.ny, self.levels, self.n_fields,
            float(self.hx), float(self.hy), float(self.dt)
        )
        return header + self.data.astype('<f8').tobytes(order='C')

    @classmethod
    def from_bytes(cls, raw: bytes, source: str = '<bytes>') -> 'FieldFile':
        if len(raw) < HEADER.size:
            raise FormatError(f"{source}: cabecera truncada ({len(raw)} bytes)")
        magic, version, nx, ny, levels, n_fields, hx, hy, dt = HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise FormatError(f"{source}: magic {magic!r} invalido")
        if version != VERSION:
            raise FormatError(f"{source}: version {version} no soportada")

        expected = levels * n_fields * ny * nx * 8
        payload = len(raw) - HEADER.size
        if payload != expected:
            raise FormatError(
                f"{source}: carga util de {payload} bytes, la cabecera indica {expected}"
            )

        data = np.frombuffer(raw, dtype='<f8', offset=HEADER.size)
        data = data.reshape(levels, n_fields, ny, nx).astype(float)
        return cls(data, hx, hy, dt)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        logger.debug(
            "Archivo de campos escrito: %s", path,
            extra={'extra_fields': {'levels': self.levels, 'fields': self.n_fields}}
        )
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> 'FieldFile':
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise FormatError(f"No se pudo leer {path}: {exc}") from exc
        return cls.from_bytes(raw, str(path))
