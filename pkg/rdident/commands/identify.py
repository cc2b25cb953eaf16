"""
rdident identify <config>

Minimiza el costo sobre la caja de parametros y escribe theta* (texto
mas campos I), el log de iteraciones en CSV y la trayectoria observada
del modelo ajustado. Con --dump-adjoint escribe ademas el adjunto en
theta*. Salida 0 si converge, 4 si se detiene antes.
"""

from ..core.handlers import IterationLogConfig, IterationLogHandler
from ..exceptions import ConfigError
from ..fieldfile import FieldFile
from ..identification.optimizer import optimize
from ..identification.parameters import write_parameters
from ..numerics.forward import solve_forward
from ..utils import get_logger_manager
from ..workflow import build_problem, dump_adjoint, initial_parameters
from .base import BaseCommand


class Command(BaseCommand):
    name = 'identify'
    help = 'Identifica d, k e I a partir de datos observados'
    uses_config = True

    def add_arguments(self, parser):
        parser.add_argument('--max-iterations', type=int, default=None, help='Limite de iteraciones')
        parser.add_argument(
            '--dump-adjoint',
            default=None,
            help='Archivo RDRD para el adjunto en theta* (por defecto [output] dump_adjoint)'
        )

    def handle(self, **options) -> int:
        config = self.load_config(options)
        if options.get('max_iterations'):
            config.optimizer.max_iterations = options['max_iterations']
        if config.paths.data is None:
            raise ConfigError("identify requiere [paths] data")

        problem = build_problem(config)
        theta0 = initial_parameters(config, problem)

        output_dir = config.paths.output
        output_dir.mkdir(parents=True, exist_ok=True)
        log_path = output_dir / 'iterations.csv'
        if log_path.exists():
            log_path.unlink()

        manager = get_logger_manager()
        handler = IterationLogHandler(IterationLogConfig(path=log_path))
        manager.add_iteration_handler(handler)
        try:
            result = optimize(problem, theta0, config.optimizer)
        finally:
            manager.remove_iteration_handler(handler)

        theta_path = write_parameters(result.theta, output_dir / 'theta.txt', problem.grid)
        fitted = solve_forward(problem, result.theta)
        fitted_path = FieldFile.from_active(
            problem.grid, fitted.observed(problem.observation.observed), problem.time.dt
        ).write(output_dir / 'fitted.rdrd')
        adjoint_path = options.get('dump_adjoint') or config.output.dump_adjoint
        if adjoint_path:
            adjoint_path = dump_adjoint(problem, result.theta, adjoint_path, fitted)

        initial_cost = result.records[0].cost if result.records else result.cost
        style = self.style.SUCCESS if result.converged else self.style.WARNING
        self.stdout.write(style(
            f"Estado: {result.status.value} tras {result.iterations} iteraciones"
        ))
        self.stdout.write(f"Costo: {initial_cost:.6e} -> {result.cost:.6e}")
        self.stdout.write(f"Parametros: {theta_path}")
        self.stdout.write(f"Iteraciones: {log_path}")
        self.stdout.write(f"Trayectoria ajustada: {fitted_path}")
        if adjoint_path:
            self.stdout.write(f"Adjunto: {adjoint_path}")
        return result.status.exit_code
