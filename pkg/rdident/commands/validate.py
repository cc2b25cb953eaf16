"""
rdident validate <red>

Imprime la tabla de categorias, el chequeo de hipotesis, la
quasi-positividad, la constante de la cota de la suma y la matriz L.
Salida 0 si la red es conforme, 2 si no, 1 si no se pudo leer.
"""

from ..network.certificates import certify, validate_assumptions
from ..network.dsl import load_network
from ..network.kinetics import render_reaction_functions
from .base import BaseCommand


class Command(BaseCommand):
    name = 'validate'
    help = 'Valida una red de reacciones y muestra sus certificados'

    def add_arguments(self, parser):
        parser.add_argument('network', help="Archivo .rxn o red incluida ('three-protein', 'f-actin')")
        parser.add_argument(
            '--show-reactions',
            action='store_true',
            help='Muestra las funciones de reaccion r_i'
        )

    def handle(self, **options) -> int:
        network = load_network(options['network'])
        out = self.stdout

        out.write(self.style.HEADING(
            f"Red: {network.N} especies, {network.E} externas, {network.M} constantes"
        ))
        out.write(f"{'#':>3}  {'especie':<28} {'cat':>3}  banderas")
        for i, species in enumerate(network.species, start=1):
            out.write(f"{i:>3}  {species.name:<28} {species.category:>3}  {','.join(species.flags)}")
        for species in network.externals:
            out.write(f"{'-':>3}  {species.name:<28} {species.category:>3}  {','.join(species.flags)}")

        report = validate_assumptions(network)
        for line in report.lines():
            out.write(line)
        report.raise_if_noncompliant()

        certificates = certify(network)
        quasi = certificates['quasi_positivity']
        out.write(self.style.SUCCESS(
            f"Quasi-positividad: cumple ({quasi.negative_terms} terminos negativos revisados)"
        ))
        out.write(f"Grado maximo de r: {certificates['degree']}")
        out.write(f"Cota de la suma: a = {certificates['sum_bound'].constant}")
        out.write(self.style.HEADING("Matriz L:"))
        for line in certificates['L'].format():
            out.write(f"  {line}")

        moieties = certificates['moieties']
        if moieties:
            out.write(f"Moieties conservadas: {len(moieties)}")
            for vector in moieties:
                terms = [
                    f"{int(w)}*{network.species[j].name}" if w != 1 else network.species[j].name
                    for j, w in enumerate(vector) if w
                ]
                out.write(f"  {' + '.join(terms)}")

        if options.get('show_reactions'):
            out.write(self.style.HEADING("Funciones de reaccion:"))
            for i, expr in enumerate(render_reaction_functions(network), start=1):
                out.write(f"  r_{i} = {expr}")

        self.logger.info(
            "Red validada",
            extra={'extra_fields': {'species': network.N, 'rates': network.M}}
        )
        return 0
