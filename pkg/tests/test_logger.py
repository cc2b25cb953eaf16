"""
Tests para el módulo core/logger.py

Cubre:
- LogLevel
- LogConfig
- LoggerManager
"""

import io
import json
import logging
from pathlib import Path
from unittest.mock import Mock

from rdident import (
    JSONFormatter,
    LogConfig,
    LogLevel,
    LoggerManager,
    RunContextFilter,
    ThrottleFilter,
)


class TestLogLevel:
    """Tests para la clase LogLevel."""

    def test_log_levels_values(self):
        """Verifica que los niveles de log tengan los valores correctos."""
        assert LogLevel.DEBUG == logging.DEBUG == 10
        assert LogLevel.INFO == logging.INFO == 20
        assert LogLevel.WARNING == logging.WARNING == 30
        assert LogLevel.ERROR == logging.ERROR == 40
        assert LogLevel.CRITICAL == logging.CRITICAL == 50

    def test_from_string(self):
        """Verifica la conversión de nombres a niveles."""
        assert LogLevel.from_string('debug') == LogLevel.DEBUG
        assert LogLevel.from_string('WARNING') == LogLevel.WARNING

    def test_from_string_unknown_defaults_to_info(self):
        """Un nombre desconocido cae en INFO."""
        assert LogLevel.from_string('verbose') == LogLevel.INFO


class TestLogConfig:
    """Tests para la dataclass LogConfig."""

    def test_default_config(self):
        """Verifica que la configuración por defecto sea correcta."""
        config = LogConfig()

        assert config.name == "rdident"
        assert config.level == LogLevel.INFO
        assert config.console_output is True
        assert config.file_output is False
        assert config.json_format is False
        assert config.run_id == ""
        assert config.command == ""
        assert config.max_repeats == 5
        assert config.extra_handlers == []

    def test_level_as_string(self):
        """El nivel puede darse por nombre."""
        config = LogConfig(level="DEBUG")

        assert config.level == LogLevel.DEBUG

    def test_log_dir_as_string(self, temp_log_dir):
        """Un log_dir en texto se convierte a Path."""
        config = LogConfig(log_dir=str(temp_log_dir))

        assert config.log_dir == temp_log_dir
        assert isinstance(config.log_dir, Path)

    def test_empty_log_dir_string(self):
        """Un log_dir vacío equivale a None."""
        assert LogConfig(log_dir="").log_dir is None


class TestLoggerManager:
    """Tests para la clase LoggerManager."""

    def test_singleton_pattern(self, sample_log_config):
        """Verifica que LoggerManager implemente el patrón Singleton."""
        manager1 = LoggerManager(sample_log_config)
        manager2 = LoggerManager(sample_log_config)

        assert manager1 is manager2

    def test_different_names_different_instances(self):
        """Verifica que nombres diferentes creen instancias diferentes."""
        manager1 = LoggerManager(LogConfig(name="app1", console_output=False))
        manager2 = LoggerManager(LogConfig(name="app2", console_output=False))

        assert manager1 is not manager2

    def test_get_logger_relative_name(self, sample_log_config):
        """Un nombre relativo cuelga del logger raíz del paquete."""
        manager = LoggerManager(sample_log_config)
        logger = manager.get_logger("numerics.forward")

        assert isinstance(logger, logging.Logger)
        assert logger.name == "test_rdident.numerics.forward"

    def test_get_logger_absolute_name(self, sample_log_config):
        """Un nombre que ya empieza con el raíz no se duplica."""
        manager = LoggerManager(sample_log_config)
        logger = manager.get_logger("test_rdident.numerics.adjoint")

        assert logger.name == "test_rdident.numerics.adjoint"

    def test_get_logger_without_name(self, sample_log_config):
        """Verifica que se pueda obtener el logger raíz."""
        manager = LoggerManager(sample_log_config)

        assert manager.get_logger().name == "test_rdident"

    def test_get_logger_cached(self, sample_log_config):
        """Verifica que los loggers se cacheen."""
        manager = LoggerManager(sample_log_config)

        assert manager.get_logger("gradient") is manager.get_logger("gradient")

    def test_logger_has_correct_level(self):
        """Verifica que el logger raíz tenga el nivel configurado."""
        LoggerManager(LogConfig(name="test_level", level=LogLevel.WARNING, console_output=False))

        assert logging.getLogger("test_level").level == LogLevel.WARNING

    def test_console_handler_created(self, sample_log_config):
        """Verifica que se cree el handler de consola."""
        sample_log_config.console_output = True
        LoggerManager(sample_log_config)

        handlers = logging.getLogger(sample_log_config.name).handlers

        assert any(
            type(h) is logging.StreamHandler for h in handlers
        )

    def test_file_handler_created(self, temp_log_dir):
        """Verifica que se cree el archivo <log_dir>/<name>.log."""
        config = LogConfig(
            name="test_file",
            log_dir=temp_log_dir,
            console_output=False,
            file_output=True
        )
        manager = LoggerManager(config)
        manager.get_logger("forward").warning("Paso rigido")

        handlers = logging.getLogger(config.name).handlers
        assert any(isinstance(h, logging.FileHandler) for h in handlers)
        for handler in handlers:
            handler.flush()

        content = (temp_log_dir / "test_file.log").read_text(encoding='utf-8')
        assert "Paso rigido" in content

    def test_file_format_includes_run_context(self, sample_log_config):
        """El archivo de texto lleva run_id y comando en cada línea."""
        manager = LoggerManager(sample_log_config)
        manager.get_logger("gradient").info("Gradiente evaluado")
        for handler in logging.getLogger(sample_log_config.name).handlers:
            handler.flush()

        line = (sample_log_config.log_dir / "test_rdident.log").read_text(encoding='utf-8').strip()
        assert "run-test" in line
        assert "gradcheck" in line

    def test_log_dir_created_automatically(self, temp_log_dir):
        """Verifica que el directorio de logs se cree automáticamente."""
        log_dir = temp_log_dir / "auto_created"
        assert not log_dir.exists()

        LoggerManager(LogConfig(
            name="test_auto_dir",
            log_dir=log_dir,
            console_output=False,
            file_output=True
        ))

        assert log_dir.exists()

    def test_json_console(self, monkeypatch):
        """Con json_format la consola emite una línea JSON por registro."""
        stream = io.StringIO()
        monkeypatch.setattr('sys.stderr', stream)
        manager = LoggerManager(LogConfig(name="test_json", json_format=True, run_id="r1"))

        handler = logging.getLogger("test_json").handlers[0]
        assert isinstance(handler.formatter, JSONFormatter)

        manager.get_logger("optimizer").info(
            "Iteracion", extra={'extra_fields': {'iteration': 3}}
        )
        payload = json.loads(stream.getvalue().strip())
        assert payload['iteration'] == 3
        assert payload['run_id'] == "r1"

    def test_filters_applied_to_handlers(self, sample_log_config):
        """Los filtros de contexto y repetición van en cada handler."""
        LoggerManager(sample_log_config)

        for handler in logging.getLogger(sample_log_config.name).handlers:
            kinds = {type(f) for f in handler.filters}
            assert RunContextFilter in kinds
            assert ThrottleFilter in kinds

    def test_set_context(self, sample_log_config):
        """set_context actualiza el filtro y la configuración."""
        manager = LoggerManager(sample_log_config)
        manager.set_context(run_id="twin-02", command="identify")

        assert manager.context_filter.run_id == "twin-02"
        assert manager.context_filter.command == "identify"
        assert manager.config.command == "identify"

    def test_log_exception(self, sample_log_config):
        """Verifica que log_exception registre mensaje, tipo y código de salida."""
        from rdident.exceptions import GradientCheckFailure

        manager = LoggerManager(sample_log_config)
        logger = manager.get_logger("test_exceptions")

        records = []
        handler = logging.Handler()
        handler.emit = records.append
        logger.addHandler(handler)

        manager.log_exception(logger, GradientCheckFailure("2 componentes"), "Fallo gradcheck")

        assert len(records) == 1
        record = records[0]
        assert "Fallo gradcheck" in record.getMessage()
        assert "2 componentes" in record.getMessage()
        assert record.extra_fields['exception_type'] == 'GradientCheckFailure'
        assert record.extra_fields['exit_code'] == 3

    def test_create_from_dict(self, temp_log_dir):
        """Verifica que se pueda crear LoggerManager desde un diccionario."""
        manager = LoggerManager.create_from_dict({
            'name': 'dict_app',
            'level': 'ERROR',
            'log_dir': str(temp_log_dir),
            'console_output': False,
            'json_format': True,
        })

        assert manager.config.name == 'dict_app'
        assert manager.config.level == LogLevel.ERROR
        assert manager.config.log_dir == temp_log_dir
        assert manager.config.json_format is True

    def test_create_from_env(self, monkeypatch, temp_log_dir):
        """Verifica que se pueda crear LoggerManager desde variables de entorno."""
        monkeypatch.setenv('RDIDENT_LOG_LEVEL', 'DEBUG')
        monkeypatch.setenv('RDIDENT_LOG_DIR', str(temp_log_dir))
        monkeypatch.setenv('RDIDENT_LOG_JSON', 'true')
        monkeypatch.setenv('RDIDENT_LOG_CONSOLE', 'false')

        manager = LoggerManager.create_from_env()

        assert manager.config.name == 'rdident'
        assert manager.config.level == LogLevel.DEBUG
        assert manager.config.log_dir == temp_log_dir
        assert manager.config.json_format is True
        assert manager.config.console_output is False

    def test_no_propagation(self, sample_log_config):
        """Verifica que propagate=False para evitar duplicados."""
        LoggerManager(sample_log_config)

        assert logging.getLogger(sample_log_config.name).propagate is False

    def test_extra_handlers(self):
        """Verifica que se puedan agregar handlers extra."""
        mock_handler = Mock(spec=logging.Handler)
        mock_handler.level = logging.NOTSET

        config = LogConfig(
            name="test_extra",
            console_output=False,
            extra_handlers=[mock_handler]
        )
        LoggerManager(config)

        assert mock_handler in logging.getLogger(config.name).handlers
        mock_handler.addFilter.assert_called_once()

    def test_remove_handler(self, sample_log_config):
        """remove_handler quita y cierra el handler."""
        manager = LoggerManager(sample_log_config)
        handler = logging.NullHandler()
        manager.add_handler(handler)
        manager.remove_handler(handler)

        assert handler not in logging.getLogger(sample_log_config.name).handlers

    def test_reset_instances_closes_handlers(self, sample_log_config):
        """reset_instances deja el logger raíz sin handlers."""
        LoggerManager(sample_log_config)
        LoggerManager.reset_instances()

        assert logging.getLogger(sample_log_config.name).handlers == []
        assert LoggerManager._instances == {}

    def test_throttle_filter_per_handler(self, temp_log_dir, capsys):
        """Consola y archivo cuentan por separado y marcan el límite una sola vez."""
        config = LogConfig(
            name="test_throttle",
            level=LogLevel.DEBUG,
            log_dir=temp_log_dir,
            console_output=True,
            file_output=True,
            max_repeats=3,
        )
        manager = LoggerManager(config)
        logger = manager.get_logger("forward")

        for _ in range(6):
            logger.warning("Valores negativos")

        file_lines = [
            line for line in (temp_log_dir / 'test_throttle.log').read_text(encoding='utf-8').splitlines()
            if 'Valores negativos' in line
        ]
        console_lines = [
            line for line in capsys.readouterr().err.splitlines() if 'Valores negativos' in line
        ]
        assert len(manager.throttle_filters) == 2
        assert manager.throttle_filters[0] is not manager.throttle_filters[1]
        assert len(file_lines) == 3
        assert len(console_lines) == 3
        assert file_lines[-1].endswith('| Valores negativos (mensajes repetidos suprimidos)')
        assert console_lines[-1].count('suprimidos') == 1
        assert all('suprimidos' not in line for line in file_lines[:-1])


class TestIterationLogger:
    """Logger dedicado a los registros de iteración."""

    def test_independent_of_package_level(self):
        """El logger de iteraciones tiene nivel propio y no propaga."""
        manager = LoggerManager(LogConfig(name="test_iter", level="ERROR", console_output=False))
        records = []
        handler = logging.Handler()
        handler.emit = records.append
        manager.add_iteration_handler(handler)

        iterations = manager.get_iteration_logger()
        iterations.info("Iteracion %d", 1, extra={'extra_fields': {'iteration': 1}})

        assert iterations.name == 'test_iter.iterations'
        assert iterations.propagate is False
        assert len(records) == 1
        assert records[0].command == ''
        assert not manager.get_logger('optimizer').isEnabledFor(logging.INFO)

    def test_package_handlers_do_not_receive_iterations(self, sample_log_config):
        manager = LoggerManager(sample_log_config)
        records = []
        handler = logging.Handler()
        handler.emit = records.append
        manager.add_handler(handler)

        manager.get_iteration_logger().info("Iteracion", extra={'extra_fields': {'iteration': 0}})

        assert records == []

    def test_remove_and_reset(self, sample_log_config):
        manager = LoggerManager(sample_log_config)
        kept, removed = logging.NullHandler(), logging.NullHandler()
        manager.add_iteration_handler(kept)
        manager.add_iteration_handler(removed)

        manager.remove_iteration_handler(removed)
        assert manager.get_iteration_logger().handlers == [kept]

        LoggerManager.reset_instances()
        assert logging.getLogger(f"{sample_log_config.name}.iterations").handlers == []
