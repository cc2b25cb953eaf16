"""
rdident export <archivo.rdrd>

``--slice t=i,field=j`` emite x,y,value de las celdas con datos;
``--stats`` emite integral, minimo y maximo por nivel y campo.
"""

import csv

import numpy as np

from ..exceptions import ConfigError
from ..fieldfile import FieldFile
from .base import BaseCommand


def parse_slice(text: str) -> dict:
    """'t=3,field=0' -> {'t': 3, 'field': 0}."""
    selection = {'t': 0, 'field': 0}
    for part in text.split(','):
        if not part.strip():
            continue
        key, _, value = part.partition('=')
        key = key.strip()
        if key not in selection or not value.strip():
            raise ConfigError(f"--slice invalido: '{text}' (formato t=i,field=j)")
        try:
            selection[key] = int(value)
        except ValueError:
            raise ConfigError(f"--slice: indice no entero '{value}'") from None
    return selection


def slice_rows(field_file: FieldFile, t: int, field: int):
    if not 0 <= t < field_file.levels:
        raise ConfigError(f"Nivel {t} fuera de 0..{field_file.levels - 1}")
    if not 0 <= field < field_file.n_fields:
        raise ConfigError(f"Campo {field} fuera de 0..{field_file.n_fields - 1}")
    image = field_file.data[t, field]
    iy, ix = np.nonzero(np.isfinite(image))
    for y, x in zip(iy, ix):
        yield (x + 0.5) * field_file.hx, (y + 0.5) * field_file.hy, image[y, x]


def stats_rows(field_file: FieldFile):
    area = field_file.hx * field_file.hy
    for t in range(field_file.levels):
        for field in range(field_file.n_fields):
            values = field_file.data[t, field]
            values = values[np.isfinite(values)]
            if not values.size:
                continue
            yield t, t * field_file.dt, field, float(values.sum() * area), float(values.min()), float(values.max())


class Command(BaseCommand):
    name = 'export'
    help = 'Exporta cortes o estadisticas de un archivo de campos a CSV'

    def add_arguments(self, parser):
        parser.add_argument('file', help='Archivo RDRD')
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument('--slice', dest='selection', help='t=i,field=j')
        group.add_argument('--stats', action='store_true', help='Integral, minimo y maximo por nivel')
        parser.add_argument('--output', default=None, help='Archivo CSV (por defecto stdout)')

    def handle(self, **options) -> int:
        field_file = FieldFile.read(options['file'])

        if options.get('output'):
            stream = open(options['output'], 'w', encoding='utf-8', newline='')
        else:
            stream = self.stdout.stream
        try:
            writer = csv.writer(stream, lineterminator='\n')
            if options.get('stats'):
                writer.writerow(['level', 'time', 'field', 'integral', 'min', 'max'])
                for level, t, field, integral, low, high in stats_rows(field_file):
                    writer.writerow([level, repr(t), field, repr(integral), repr(low), repr(high)])
            else:
                selection = parse_slice(options['selection'])
                writer.writerow(['x', 'y', 'value'])
                for x, y, value in slice_rows(field_file, selection['t'], selection['field']):
                    writer.writerow([repr(float(x)), repr(float(y)), repr(float(value))])
        finally:
            if stream is not self.stdout.stream:
                stream.close()
        return 0
