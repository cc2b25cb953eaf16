"""
Jerarquia de errores de rdident.

Cada excepcion lleva el codigo de salida que usa la CLI:
    0 - ejecucion correcta
    1 - error de parseo, configuracion o datos
    2 - red que no cumple las hipotesis (A)(B)(C)
    3 - verificacion de gradiente fuera de tolerancia
    4 - optimizacion detenida por limite de iteraciones
"""

from typing import Iterable, Optional, Sequence


class RdidentError(Exception):
    """Error base del paquete."""

    exit_code: int = 1


# --- Redes de reaccion -----------------------------------------------------

class NetworkError(RdidentError):
    """Error al construir o leer una red de reacciones."""


class NetworkSyntaxError(NetworkError):
    """
    Error de sintaxis en un archivo .rxn.

    Attributes:
        line: Linea (1-based)
        column: Columna (1-based)
        expected: Tokens esperados en esa posicion
    """

    def __init__(
        self,
        message: str,
        line: int = 0,
        column: int = 0,
        expected: Optional[Iterable[str]] = None
    ):
        self.line = line
        self.column = column
        self.expected = tuple(expected or ())
        location = f"linea {line}, columna {column}"
        if self.expected:
            location += f" (se esperaba: {', '.join(self.expected)})"
        super().__init__(f"{message} en {location}")


class UnknownSpecies(NetworkError):
    """Una reaccion referencia una especie no declarada."""


class DuplicateSpecies(NetworkError):
    """Dos declaraciones con el mismo nombre de especie."""


class DuplicateRate(NetworkError):
    """Una constante de velocidad usada por mas de una reaccion."""


class ArityError(NetworkError):
    """Lado de reaccion con mas de dos terminos."""


class NonCompliantNetwork(NetworkError):
    """La red viola las hipotesis (A), (B) o (C)."""

    exit_code = 2

    def __init__(self, message: str, violations: Sequence = ()):
        self.violations = tuple(violations)
        super().__init__(message)


class CertificateFailure(NetworkError):
    """Un certificado estructural no se pudo verificar."""


class ConstructionFailure(NetworkError):
    """La construccion de la matriz L no termino."""


class DimensionMismatch(RdidentError, ValueError):
    """Dimensiones de arreglos incompatibles."""


# --- Dominio espacial y archivos --------------------------------------------

class DomainError(RdidentError):
    """Mascara de dominio invalida."""


class DisconnectedDomain(DomainError):
    """La region activa tiene mas de una componente 4-conexa."""


class EmptyDomain(DomainError):
    """La mascara no tiene celdas activas."""


class FormatError(RdidentError):
    """Archivo de campos con cabecera o carga util invalida."""


# --- Solvers ----------------------------------------------------------------

class SolverError(RdidentError):
    """Error numerico en los solvers de evolucion."""


class LinearSolveFailure(SolverError):
    """El gradiente conjugado no convergio dentro del limite."""


class NonFiniteState(SolverError):
    """El estado directo contiene valores no finitos."""


class PositivityViolation(SolverError):
    """
    El paso implicito produjo negativos mas alla del error del solve lineal.

    Attributes:
        level: Nivel temporal del estado rechazado
        min_value: Valor mas negativo encontrado
        tolerance: Tolerancia admitida para esa especie
    """

    def __init__(self, message: str, level: int = 0, min_value: float = 0.0, tolerance: float = 0.0):
        self.level = level
        self.min_value = min_value
        self.tolerance = tolerance
        super().__init__(message)


class InvalidInitial(SolverError):
    """Condicion inicial con valores negativos."""


class NonFiniteAdjoint(SolverError):
    """El estado adjunto contiene valores no finitos."""


# --- Identificacion ---------------------------------------------------------

class InvalidBounds(RdidentError, ValueError):
    """Cotas de caja invalidas."""


class LineSearchFailure(RdidentError):
    """La busqueda lineal no encontro descenso suficiente."""

    exit_code = 4


class GradientCheckFailure(RdidentError):
    """El gradiente adjunto no coincide con diferencias finitas."""

    exit_code = 3


class ConfigError(RdidentError):
    """Archivo de configuracion invalido o inconsistente."""
