"""
Tests para config.py
"""

import logging
from pathlib import Path

import pytest

from rdident.config import RunConfig
from rdident.exceptions import ConfigError


class TestLoad:
    """Lectura de archivos INI."""

    def test_twin_config(self, write_config, twin_config_text, temp_dir):
        config = RunConfig.load(write_config(twin_config_text))

        assert config.paths.network == 'three-protein'
        assert config.paths.output == (temp_dir / 'out').resolve()
        assert (config.domain.nx, config.domain.ny) == (6, 6)
        assert config.domain.hx == pytest.approx(1 / 6)
        assert (config.time.T, config.time.nt) == (0.5, 10)
        assert config.observation.observed == ('pCA',)
        assert config.output.seed == 7
        assert config.logging.level == 'WARNING'
        assert config.logging.console is False

    def test_defaults(self):
        config = RunConfig.from_string('')

        assert config.domain.shape == 'rectangle'
        assert config.time.checkpoint_stride == 0
        assert config.optimizer.memory == 10
        assert config.parameters.values == {}

    def test_relative_paths(self, write_config, temp_dir):
        path = write_config(
            "[paths]\nnetwork = nets/custom.rxn\ndata = data/c.rdrd\n"
            "[logging]\nlog_dir = logs\n"
        )

        config = RunConfig.load(path)

        assert Path(config.paths.network) == (temp_dir / 'nets' / 'custom.rxn').resolve()
        assert config.paths.data == (temp_dir / 'data' / 'c.rdrd').resolve()
        assert config.logging.log_dir == (temp_dir / 'logs').resolve()

    def test_dump_adjoint(self, write_config, temp_dir):
        """[output] dump_adjoint es una ruta relativa al archivo y sobrevive a to_ini."""
        config = RunConfig.load(write_config("[output]\ndump_adjoint = out/mu.rdrd\n"))

        assert config.output.dump_adjoint == (temp_dir / 'out' / 'mu.rdrd').resolve()
        assert RunConfig().output.dump_adjoint is None
        assert RunConfig.from_string(config.to_ini(), temp_dir) == config

    def test_parameters_section(self):
        config = RunConfig.from_string(
            "[parameters]\n"
            "preset = f-actin\n"
            "d.A = 0.25\n"
            "k.k1.bounds = 0.5, 2\n"
            "I.B = 0.1\n"
            "fixed = d.A, k.k2\n"
        )
        parameters = config.parameters

        assert parameters.preset == 'f-actin'
        assert parameters.values == {'d.A': 0.25, 'I.B': 0.1}
        assert parameters.bounds == {'k.k1': (0.5, 2.0)}
        assert parameters.fixed == ('d.A', 'k.k2')

    def test_optimizer_section(self):
        config = RunConfig.from_string("[optimizer]\nmemory = 5\ntolerance = 1e-8\n")

        assert config.optimizer.memory == 5
        assert config.optimizer.tolerance == 1e-8

    def test_missing_file(self, temp_dir):
        with pytest.raises(ConfigError):
            RunConfig.load(temp_dir / 'missing.ini')


class TestErrors:

    @pytest.mark.parametrize('text', [
        "[extra]\nx = 1\n",
        "[domain]\ncolor = red\n",
        "[domain]\nnx = many\n",
        "[domain]\nshape = hexagon\n",
        "[domain]\nshape = mask\n",
        "[time]\ncheckpoint_stride = -1\n",
        "[output]\nnoise = -0.1\n",
        "[output]\nseed = -3\n",
        "[logging]\nconsole = maybe\n",
        "[parameters]\nk.k1.bounds = 1\n",
        "[parameters]\nspeed = 3\n",
        "[parameters]\nfixed = z.A\n",
        "[optimizer]\nmomentum = 0.9\n",
        "[optimizer]\nshrink = 2\n",
        "no section header\n",
    ])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            RunConfig.from_string(text)


class TestCanonicalForm:
    """to_ini vuelve a leerse como la misma configuración."""

    def test_round_trip(self, write_config, twin_config_text, temp_dir):
        config = RunConfig.load(write_config(twin_config_text))

        again = RunConfig.from_string(config.to_ini(), temp_dir)

        assert again == config

    def test_round_trip_with_parameters(self):
        config = RunConfig.from_string(
            "[parameters]\nd.A = 0.1\nk.k1.bounds = 0.001, 0.5\nfixed = k.k1\n"
            "[optimizer]\nmax_iterations = 7\n"
        )

        again = RunConfig.from_string(config.to_ini())

        assert again == config
        assert 'k.k1.bounds = 0.001, 0.5' in config.to_ini()

    def test_sections_in_order(self):
        lines = [line for line in RunConfig().to_ini().splitlines() if line.startswith('[')]

        assert lines == [
            '[paths]', '[domain]', '[time]', '[observation]',
            '[parameters]', '[optimizer]', '[output]', '[logging]',
        ]


class TestLoggingSection:

    def test_to_log_config(self):
        config = RunConfig.from_string("[logging]\nlevel = DEBUG\njson = true\nfile = true\n")

        log_config = config.logging.to_log_config(command='identify', run_id='r-1')

        assert log_config.level == logging.DEBUG
        assert log_config.json_format is True
        assert log_config.file_output is True
        assert (log_config.command, log_config.run_id) == ('identify', 'r-1')
