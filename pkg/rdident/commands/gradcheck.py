"""
rdident gradcheck <config>

Compara el gradiente adjunto con diferencias centrales del costo y
emite un reporte CSV (una fila por d_i, k_a y direccion aleatoria de I).
Con --dump-adjoint escribe tambien el adjunto en el theta verificado.
Salida 3 si alguna componente supera el umbral.
"""

import argparse

from ..exceptions import GradientCheckFailure
from ..identification.gradient import DEFAULT_FD_STEP, DEFAULT_THRESHOLD, GradientSet, gradient_check
from ..workflow import build_problem, dump_adjoint, initial_parameters
from .base import BaseCommand


def corrupt_gradient(gradients: GradientSet) -> GradientSet:
    """Invierte el signo de grad_d (control negativo)."""
    return GradientSet(-gradients.d, gradients.k, gradients.I)


class Command(BaseCommand):
    name = 'gradcheck'
    help = 'Verifica el gradiente adjunto contra diferencias finitas'
    uses_config = True

    def add_arguments(self, parser):
        parser.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD, help='Error relativo maximo')
        parser.add_argument('--step', type=float, default=DEFAULT_FD_STEP, help='Paso de diferencias finitas')
        parser.add_argument('--directions', type=int, default=3, help='Direcciones aleatorias de I')
        parser.add_argument('--workers', type=int, default=1, help='Evaluaciones de J concurrentes')
        parser.add_argument('--report', default=None, help='Archivo CSV (por defecto stdout)')
        parser.add_argument(
            '--dump-adjoint',
            default=None,
            help='Archivo RDRD para el adjunto en theta (por defecto [output] dump_adjoint)'
        )
        parser.add_argument('--corrupt-gradient', action='store_true', help=argparse.SUPPRESS)

    def handle(self, **options) -> int:
        config = self.load_config(options)
        problem = build_problem(config)
        theta = initial_parameters(config, problem)

        report = gradient_check(
            problem,
            theta,
            threshold=options['threshold'],
            h=options['step'],
            n_directions=options['directions'],
            seed=config.output.seed,
            workers=options['workers'],
            corrupt=corrupt_gradient if options.get('corrupt_gradient') else None,
        )

        if options.get('report'):
            with open(options['report'], 'w', encoding='utf-8', newline='') as stream:
                report.write_csv(stream)
        else:
            report.write_csv(self.stdout.stream)

        adjoint_path = options.get('dump_adjoint') or config.output.dump_adjoint
        if adjoint_path:
            dump_adjoint(problem, theta, adjoint_path)

        if not report.passed:
            names = ', '.join(row.component for row in report.failures)
            raise GradientCheckFailure(
                f"{len(report.failures)} componentes superan el umbral {options['threshold']:g}: {names}"
            )
        return 0
