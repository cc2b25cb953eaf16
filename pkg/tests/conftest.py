"""
Configuracion de pytest y fixtures compartidos para los tests de rdident.
"""

import logging
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest


@pytest.fixture
def temp_dir():
    """Directorio temporal para archivos de prueba."""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def temp_log_dir(temp_dir):
    """Directorio temporal para logs."""
    log_dir = temp_dir / 'logs'
    log_dir.mkdir()
    return log_dir


@pytest.fixture
def sample_log_config(temp_log_dir):
    """Configuracion de logging de ejemplo para tests."""
    from rdident import LogConfig, LogLevel

    return LogConfig(
        name="test_rdident",
        level=LogLevel.DEBUG,
        log_dir=temp_log_dir,
        console_output=False,
        file_output=True,
        json_format=False,
        run_id="run-test",
        command="gradcheck",
    )


@pytest.fixture
def make_record():
    """Fabrica de LogRecord para tests de formatters, filtros y handlers."""
    def factory(msg='Mensaje', level=logging.INFO, name='rdident.test', extra_fields=None, args=()):
        record = logging.LogRecord(
            name=name,
            level=level,
            pathname='test.py',
            lineno=1,
            msg=msg,
            args=args,
            exc_info=None
        )
        if extra_fields is not None:
            record.extra_fields = extra_fields
        return record
    return factory


@pytest.fixture(autouse=True)
def reset_logging_state():
    """Resetea el LoggerManager singleton y el gestor global entre tests."""
    from rdident.utils import reset_logging

    reset_logging()
    yield
    reset_logging()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_grid():
    """Rectangulo 8x8 de lado 1."""
    from rdident import SpatialGrid
    return SpatialGrid.rectangle(8, 8, 1 / 8, 1 / 8)


@pytest.fixture
def disk_grid():
    """Disco inscrito en una malla 12x12."""
    from rdident import SpatialGrid
    return SpatialGrid.disk(12, 12, 1 / 12, 1 / 12)


@pytest.fixture(scope='session')
def three_protein():
    """Red de tres proteinas incluida (9 especies, 12 constantes)."""
    from rdident import load_network
    return load_network('three-protein')


@pytest.fixture(scope='session')
def factin():
    """Red f-actin incluida (33 especies, 48 constantes, 1 externa)."""
    from rdident import load_network
    return load_network('f-actin')


@pytest.fixture
def association_network():
    """A + B <=> C con k1 directa y k2 inversa."""
    from rdident.network.dsl import parse
    return parse(
        "species A {A}\n"
        "species B {B}\n"
        "species C {A,B}\n"
        "rxn A + B <=> C : k1, k2\n"
    ).to_network()


@pytest.fixture
def decay_network():
    """A -> B con una sola constante."""
    from rdident.network.dsl import parse
    return parse(
        "species A {X}\n"
        "species B {X}\n"
        "rxn A -> B : k1\n"
    ).to_network()


@pytest.fixture
def write_config(temp_dir):
    """Escribe un INI en el directorio temporal y devuelve su ruta."""
    def factory(text: str, name: str = 'run.ini') -> Path:
        path = temp_dir / name
        path.write_text(text, encoding='utf-8')
        return path
    return factory


@pytest.fixture
def twin_config_text():
    """Configuracion chica del problema gemelo de tres proteinas."""
    return (
        "[paths]\n"
        "network = three-protein\n"
        "output = out\n"
        "\n"
        "[domain]\n"
        "shape = rectangle\n"
        "nx = 6\n"
        "ny = 6\n"
        "hx = 0.16666666666666666\n"
        "hy = 0.16666666666666666\n"
        "\n"
        "[time]\n"
        "T = 0.5\n"
        "nt = 10\n"
        "\n"
        "[observation]\n"
        "observed = pCA\n"
        "\n"
        "[output]\n"
        "seed = 7\n"
        "\n"
        "[logging]\n"
        "level = WARNING\n"
        "console = false\n"
    )


@pytest.fixture
def march_raw():
    """
    Avanza paso a paso y devuelve cada solve lineal antes de anular
    negativos, como pares (u^{n+1} crudo, tolerancia por especie).
    """
    from rdident.numerics.forward import enforce_nonnegative, implicit_solve, positivity_tolerance

    def factory(network, grid, time, u0, d, k, external=lambda level: None):
        state = np.asarray(u0, dtype=float)
        solves = []
        for level in range(time.nt):
            result = implicit_solve(network, grid, state, k, d, time.dt, external(level))
            tolerance = positivity_tolerance(result)
            solves.append((result.solution.copy(), tolerance))
            state = enforce_nonnegative(result.solution, tolerance, level + 1)
        return solves
    return factory


@pytest.fixture
def assert_raw_nonnegative():
    """Cada solve crudo queda dentro de su tolerancia y esta es de redondeo."""
    def check(solves, bound=1e-9):
        for raw, tolerance in solves:
            assert np.all(np.isfinite(raw))
            assert np.all(raw.min(axis=1) >= -tolerance)
            assert np.all(tolerance <= bound * np.maximum(np.abs(raw).max(axis=1), 1.0))
    return check
