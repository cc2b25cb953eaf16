"""
Tests para fieldfile.py (formato RDRD)
"""

import numpy as np
import pytest

from rdident.exceptions import DimensionMismatch, FormatError
from rdident.fieldfile import HEADER, FieldFile
from rdident.numerics.grid import SpatialGrid


@pytest.fixture
def field_file(disk_grid, rng):
    return FieldFile.from_active(disk_grid, rng.random((3, 2, disk_grid.n_active)), dt=0.25)


class TestFieldFile:

    def test_from_active_shape(self, field_file):
        assert field_file.data.shape == (3, 2, 12, 12)
        assert (field_file.levels, field_file.n_fields) == (3, 2)
        np.testing.assert_allclose(field_file.times(), [0.0, 0.25, 0.5])

    def test_write_and_read(self, field_file, temp_dir, disk_grid):
        """Los valores activos y los NaN externos se conservan bit a bit."""
        path = field_file.write(temp_dir / 'sub' / 'fields.rdrd')

        loaded = FieldFile.read(path)

        assert path.stat().st_size == HEADER.size + 3 * 2 * 144 * 8
        assert (loaded.hx, loaded.hy, loaded.dt) == (field_file.hx, field_file.hy, 0.25)
        np.testing.assert_array_equal(loaded.to_active(disk_grid), field_file.to_active(disk_grid))
        np.testing.assert_array_equal(loaded.active_mask(), disk_grid.mask)

    def test_header_layout(self, field_file):
        raw = field_file.to_bytes()

        magic, version, nx, ny, levels, n_fields, hx, hy, dt = HEADER.unpack_from(raw)

        assert magic == b'RDRD'
        assert version == 1
        assert (nx, ny, levels, n_fields) == (12, 12, 3, 2)
        assert dt == 0.25

    def test_bad_magic(self, field_file):
        raw = b'XXXX' + field_file.to_bytes()[4:]

        with pytest.raises(FormatError):
            FieldFile.from_bytes(raw)

    def test_truncated(self, field_file):
        with pytest.raises(FormatError):
            FieldFile.from_bytes(field_file.to_bytes()[:-8])
        with pytest.raises(FormatError):
            FieldFile.from_bytes(b'RDRD')

    def test_unsupported_version(self, field_file):
        raw = bytearray(field_file.to_bytes())
        raw[4:8] = (2).to_bytes(4, 'little')

        with pytest.raises(FormatError):
            FieldFile.from_bytes(bytes(raw))

    def test_missing_file(self, temp_dir):
        with pytest.raises(FormatError):
            FieldFile.read(temp_dir / 'missing.rdrd')

    def test_nan_inside_domain(self, disk_grid):
        """Un archivo con NaN dentro de la malla destino es inválido."""
        field_file = FieldFile.from_active(disk_grid, np.ones((1, 1, disk_grid.n_active)))

        with pytest.raises(FormatError):
            field_file.to_active(SpatialGrid.rectangle(12, 12, 1 / 12, 1 / 12))

    def test_grid_shape_mismatch(self, field_file, small_grid):
        with pytest.raises(DimensionMismatch):
            field_file.to_active(small_grid)

    def test_inconsistent_nan_layout(self):
        data = np.ones((2, 1, 3, 3))
        data[1, 0, 0, 0] = np.nan

        with pytest.raises(FormatError):
            FieldFile(data, 1.0, 1.0).active_mask()

    def test_requires_four_dimensions(self):
        with pytest.raises(DimensionMismatch):
            FieldFile(np.ones((3, 3)), 1.0, 1.0)

