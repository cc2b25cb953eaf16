"""
Validacion de hipotesis y certificados estructurales.

- validate_assumptions: reglas (A)(B)(C), clasificacion y orden de
  categorias; el balance de composicion se informa como advertencia
- check_quasi_positivity: todo termino negativo de r_i contiene u_i
- build_L_certificate: matriz L triangular inferior con L r acotada
- check_sum_bound: parte cuadratica de sum_i r_i no positiva y constante a
- conserved_moieties: vectores w >= 0 enteros con w^T S = 0
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import sympy

from ..exceptions import CertificateFailure, ConstructionFailure, NonCompliantNetwork
from ..utils import get_logger
from .kinetics import (
    QuadraticForm,
    ReactionSymbols,
    build_reaction_functions,
    reaction_forms,
    stoichiometric_matrix,
)
from .model import ReactionKind, ReactionNetwork

logger = get_logger(__name__)


# --- Validacion -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    """
    Entrada del reporte de validacion.

    Attributes:
        reaction: Numero de reaccion 1-based (= indice de su constante)
        rule: 'A', 'B', 'C', 'ARITY', 'ORDER' o 'COMPOSITION'
        message: Descripcion legible
        advisory: True si no afecta el cumplimiento
    """
    reaction: int
    rule: str
    message: str
    advisory: bool = False


@dataclass
class ValidationReport:
    """Resultado de validate_assumptions."""
    network: ReactionNetwork
    entries: List[Violation] = field(default_factory=list)

    @property
    def violations(self) -> List[Violation]:
        return [entry for entry in self.entries if not entry.advisory]

    @property
    def advisories(self) -> List[Violation]:
        return [entry for entry in self.entries if entry.advisory]

    @property
    def compliant(self) -> bool:
        return not self.violations

    def rules_violated(self) -> List[str]:
        return sorted({entry.rule for entry in self.violations})

    def lines(self) -> List[str]:
        if self.compliant:
            head = [f"Hipotesis (A)(B)(C): cumple ({self.network.M} reacciones)"]
        else:
            head = [f"Hipotesis (A)(B)(C): NO cumple ({len(self.violations)} violaciones)"]
        body = [
            f"  [{'aviso' if e.advisory else e.rule}] reaccion {e.reaction}: {e.message}"
            for e in self.entries
        ]
        return head + body

    def raise_if_noncompliant(self) -> None:
        if not self.compliant:
            raise NonCompliantNetwork(
                f"La red viola las hipotesis {', '.join(self.rules_violated())}",
                self.violations
            )


def validate_assumptions(network: ReactionNetwork) -> ValidationReport:
    """
    Revisa cada reaccion contra (A), (B), (C).

    Nunca lanza: las violaciones quedan como entradas del reporte.
    """
    report = ValidationReport(network)
    species = network.all_species

    for reaction in network.reactions:
        number = reaction.rate_index + 1
        label = network.describe_reaction(reaction)
        n_in, n_out = len(reaction.reactants), len(reaction.products)

        if n_in > 2:
            report.entries.append(Violation(number, 'A', f"mas de dos reactivos en {label}"))
        if n_out > 2:
            report.entries.append(Violation(number, 'B', f"mas de dos productos en {label}"))
        if n_in == 2 and n_out == 2:
            report.entries.append(Violation(
                number, 'C', f"union y disociacion simultaneas en {label}"
            ))
        if n_in == 0 or n_out == 0:
            report.entries.append(Violation(number, 'ARITY', f"lado vacio en {label}"))

        kind = reaction.kind
        if kind is None:
            continue

        compositions_in = Counter()
        for idx in reaction.reactants:
            compositions_in.update(species[idx].composition)
        compositions_out = Counter()
        for idx in reaction.products:
            compositions_out.update(species[idx].composition)

        if kind is ReactionKind.ASSOCIATION:
            product = species[reaction.products[0]]
            if product.external:
                report.entries.append(Violation(
                    number, 'ORDER', f"el producto de {label} es un campo externo"
                ))
            elif any(species[idx].category >= product.category for idx in reaction.reactants):
                report.entries.append(Violation(
                    number, 'ORDER',
                    f"el complejo {product.name} no tiene categoria mayor que sus reactivos"
                ))

        if compositions_in != compositions_out:
            report.entries.append(Violation(
                number, 'COMPOSITION',
                f"composicion no balanceada en {label}", advisory=True
            ))

    if report.violations:
        logger.info(
            "Red no conforme: %d violaciones", len(report.violations),
            extra={'extra_fields': {'rules': ','.join(report.rules_violated())}}
        )
    return report


def _ensure_compliant(network: ReactionNetwork) -> None:
    validate_assumptions(network).raise_if_noncompliant()


# --- Quasi-positividad ------------------------------------------------------

@dataclass(frozen=True)
class QuasiPositivityCertificate:
    """Todo termino negativo de r_i contiene el factor u_i."""
    species_checked: int
    negative_terms: int


def check_quasi_positivity(
    network: ReactionNetwork,
    forms: Optional[Sequence[QuadraticForm]] = None
) -> QuasiPositivityCertificate:
    """
    Certifica la quasi-positividad de r.

    Args:
        network: Red conforme
        forms: Formas a revisar (por defecto las de la red)

    Raises:
        CertificateFailure: nombrando el termino infractor
    """
    if forms is None:
        _ensure_compliant(network)
        forms = reaction_forms(network)

    symbols = ReactionSymbols(network)
    negatives = 0
    for i, form in enumerate(forms):
        for monomial, coefficients in form.terms.items():
            for rate, value in coefficients.items():
                if value >= 0:
                    continue
                negatives += 1
                if i not in monomial:
                    term = (
                        sympy.Rational(value.numerator, value.denominator)
                        * symbols.rates[rate]
                        * sympy.Mul(*[symbols.state[idx] for idx in monomial])
                    )
                    raise CertificateFailure(
                        f"r_{i + 1} ({network.species[i].name}) contiene el termino "
                        f"negativo {term} sin el factor u_{i + 1}"
                    )

    return QuasiPositivityCertificate(len(forms), negatives)


def check_degree(network: ReactionNetwork, forms: Optional[Sequence[QuadraticForm]] = None) -> int:
    """
    Grado maximo de r_i en u, calculado con sympy.Poly.

    Raises:
        CertificateFailure: si algun r_i tiene grado mayor que 2
    """
    forms = reaction_forms(network) if forms is None else forms
    symbols = ReactionSymbols(network)
    worst = 0
    for i, form in enumerate(forms):
        expr = form.to_sympy(symbols)
        if expr == 0 or not symbols.dynamic:
            continue
        degree = sympy.Poly(expr, *symbols.dynamic).total_degree()
        if degree > 2:
            raise CertificateFailure(f"r_{i + 1} tiene grado {degree} en u")
        worst = max(worst, degree)
    return worst


# --- Certificado L ----------------------------------------------------------

@dataclass
class LCertificate:
    """
    Matriz L triangular inferior, diagonal unitaria, entradas no negativas,
    tal que la parte cuadratica de (L r)_i tiene coeficientes no positivos.
    """
    rows: List[Dict[int, Fraction]]
    forms: List[QuadraticForm] = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        n = len(self.rows)
        L = np.zeros((n, n))
        for i, row in enumerate(self.rows):
            for j, value in row.items():
                L[i, j] = float(value)
        return L

    def combined(self, i: int) -> QuadraticForm:
        """Forma (L r)_i."""
        return QuadraticForm.combine(self.forms, self.rows[i])

    def verify_symbolic(self, network: ReactionNetwork) -> bool:
        """
        Verifica con sympy que ningun coeficiente cuadratico de L r pueda
        ser positivo para k > 0.
        """
        symbols = ReactionSymbols(network)
        for i in range(len(self.rows)):
            expr = self.combined(i).to_sympy(symbols)
            if expr == 0 or not symbols.dynamic:
                continue
            poly = sympy.Poly(expr, *symbols.dynamic)
            for monom, coefficient in poly.terms():
                if sum(monom) != 2:
                    continue
                linear = sympy.Poly(coefficient, *symbols.rates) if symbols.rates else None
                if linear is None:
                    continue
                if any(c > 0 for c in linear.coeffs()):
                    return False
        return True

    def format(self) -> List[str]:
        lines = []
        for row in self.matrix:
            lines.append(' '.join(f"{value:g}" for value in row))
        return lines


def build_L_certificate(
    network: ReactionNetwork,
    forms: Optional[Sequence[QuadraticForm]] = None
) -> LCertificate:
    """
    Construye L fila por fila.

    row_i parte de e_i; mientras (row_i . r) tenga un termino cuadratico
    positivo k_a u_l u_m (el menor (l, m) primero) se actualiza
    row_i := max(row_i, 0.5 row_l + 0.5 row_m) elemento a elemento, y si
    eso no cambia la fila se suma 0.5 row_l + 0.5 row_m.

    Raises:
        ConstructionFailure: si la eliminacion no termina
    """
    if forms is None:
        _ensure_compliant(network)
        forms = reaction_forms(network)
    forms = list(forms)

    n = len(forms)
    n_terms = sum(len(form.terms) for form in forms)
    cap = 4 * max(1, n) * max(1, n_terms) + 10
    half = Fraction(1, 2)
    rows: List[Dict[int, Fraction]] = []

    for i in range(n):
        row: Dict[int, Fraction] = {i: Fraction(1)}
        for _ in range(cap):
            offending = QuadraticForm.combine(forms, row).positive_quadratic()
            if not offending:
                break
            l, m = offending[0]
            if l >= i or m >= i:
                raise ConstructionFailure(
                    f"El termino positivo u_{l + 1} u_{m + 1} de la fila {i + 1} "
                    "no proviene de especies de categoria menor"
                )
            target: Dict[int, Fraction] = {}
            for j, value in rows[l].items():
                target[j] = target.get(j, Fraction(0)) + half * value
            for j, value in rows[m].items():
                target[j] = target.get(j, Fraction(0)) + half * value

            merged = dict(row)
            for j, value in target.items():
                merged[j] = max(merged.get(j, Fraction(0)), value)
            if merged == row:
                merged = dict(row)
                for j, value in target.items():
                    merged[j] = merged.get(j, Fraction(0)) + value
            row = merged
        else:
            raise ConstructionFailure(f"La fila {i + 1} de L no converge")
        rows.append(row)

    logger.debug("Certificado L construido (%d filas)", n)
    return LCertificate(rows, forms)


# --- Cota de la suma --------------------------------------------------------

@dataclass
class SumBoundCertificate:
    """
    sum_i r_i <= a (1 + sum_i u_i).

    Attributes:
        quadratic: Parte cuadratica de sum_i r_i (sympy)
        linear: Coeficiente de cada u_j en sum_i r_i (sympy, puede depender de externas)
        constant_term: Termino independiente de u
        constant: a = max(0, termino independiente, coeficientes lineales)
    """
    quadratic: sympy.Expr
    linear: List[sympy.Expr]
    constant_term: sympy.Expr
    constant: sympy.Expr
    symbols: ReactionSymbols = field(repr=False)

    def value(
        self,
        k: Sequence[float],
        external_max: Optional[Sequence[float]] = None
    ) -> float:
        """Valor numerico de a dados k y una cota superior de las externas."""
        subs = dict(zip(self.symbols.rates, [float(x) for x in k]))
        if self.symbols.externals:
            bounds = external_max if external_max is not None else [1.0] * len(self.symbols.externals)
            subs.update(zip(self.symbols.externals, [float(x) for x in bounds]))
        candidates = [self.constant_term] + list(self.linear)
        return max([0.0] + [float(expr.subs(subs)) for expr in candidates])


def check_sum_bound(
    network: ReactionNetwork,
    forms: Optional[Sequence[QuadraticForm]] = None
) -> SumBoundCertificate:
    """
    Certifica que la parte cuadratica de sum_i r_i es no positiva.

    Raises:
        CertificateFailure: si algun coeficiente cuadratico puede ser positivo
    """
    if forms is None:
        _ensure_compliant(network)
        forms = reaction_forms(network)
    forms = list(forms)

    total = QuadraticForm.combine(forms, {i: Fraction(1) for i in range(len(forms))}) \
        if forms else QuadraticForm(network.N)
    symbols = ReactionSymbols(network)

    for monomial in total.positive_quadratic():
        names = ' '.join(f"u_{idx + 1}" for idx in monomial)
        raise CertificateFailure(f"sum_i r_i tiene un coeficiente positivo en {names}")

    quadratic = QuadraticForm(network.N, total.quadratic).to_sympy(symbols)
    constant_term = QuadraticForm(network.N, total.constant).to_sympy(symbols)

    linear: List[sympy.Expr] = []
    for j in range(network.N):
        coefficient = sympy.Integer(0)
        for monomial, coefficients in total.linear.items():
            if j not in monomial:
                continue
            rest = sympy.Mul(*[symbols.state[idx] for idx in monomial if idx != j])
            for rate, value in coefficients.items():
                coefficient += sympy.Rational(value.numerator, value.denominator) \
                    * symbols.rates[rate] * rest
        linear.append(sympy.expand(coefficient))

    constant = sympy.Max(sympy.Integer(0), constant_term, *linear)
    return SumBoundCertificate(quadratic, linear, constant_term, constant, symbols)


# --- Moieties ---------------------------------------------------------------

def _integer_vector(values: Sequence[sympy.Rational]) -> Optional[np.ndarray]:
    values = [sympy.nsimplify(v) for v in values]
    if all(v <= 0 for v in values):
        values = [-v for v in values]
    if any(v < 0 for v in values):
        return None
    denominators = [sympy.fraction(v)[1] for v in values]
    scale = sympy.ilcm(*denominators) if denominators else 1
    ints = [int(v * scale) for v in values]
    divisor = int(np.gcd.reduce([abs(x) for x in ints if x])) if any(ints) else 1
    return np.asarray([x // divisor for x in ints], dtype=np.int64)


def conserved_moieties(network: ReactionNetwork) -> List[np.ndarray]:
    """
    Vectores enteros no negativos w con w^T S = 0.

    Primero los conteos de composicion por proteina base que se conservan;
    luego se completa con vectores del espacio nulo izquierdo de S que
    resulten no negativos. Las especies externas no participan.
    """
    S = stoichiometric_matrix(network)
    N = network.N
    moieties: List[np.ndarray] = []

    def independent(candidate: np.ndarray) -> bool:
        stack = np.vstack(moieties + [candidate]) if moieties else candidate[None, :]
        return np.linalg.matrix_rank(stack) == len(stack)

    bases = sorted({base for s in network.species for base in s.composition})
    for base in bases:
        w = np.asarray([s.composition.count(base) for s in network.species], dtype=np.int64)
        if w.any() and not np.any(w @ S) and independent(w):
            moieties.append(w)

    if N and network.M:
        left_null = sympy.Matrix(S.T.astype(int).tolist()).nullspace()
        for vector in left_null:
            w = _integer_vector(list(vector))
            if w is not None and w.any() and not np.any(w @ S) and independent(w):
                moieties.append(w)
    elif N:
        # sin reacciones toda especie se conserva
        for j in range(N):
            w = np.zeros(N, dtype=np.int64)
            w[j] = 1
            if independent(w):
                moieties.append(w)

    return moieties


def certify(network: ReactionNetwork) -> Mapping[str, object]:
    """Corre todos los certificados de una red conforme."""
    forms = build_reaction_functions(network)
    return {
        'degree': check_degree(network, forms),
        'quasi_positivity': check_quasi_positivity(network, forms),
        'sum_bound': check_sum_bound(network, forms),
        'L': build_L_certificate(network, forms),
        'moieties': conserved_moieties(network),
    }
