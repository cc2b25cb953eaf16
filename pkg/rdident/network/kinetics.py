"""
Cinetica de accion de masas.

Dos representaciones de las funciones de reaccion r_i(u, k):

- QuadraticForm: forma exacta (coeficientes racionales por constante k_a)
  usada por los certificados y por el render simbolico con sympy.
- MassActionKinetics: evaluador vectorizado sobre celdas, con la
  separacion de Patankar r_i = p_i - u_i q_i y los productos transpuestos
  que necesita el adjunto discreto.
"""

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import sympy

from ..exceptions import DimensionMismatch, NonCompliantNetwork
from ..utils import get_logger

logger = get_logger(__name__)

Monomial = Tuple[int, ...]


class QuadraticForm:
    """
    Polinomio de una especie en u con coeficientes lineales en k.

    ``terms`` asocia a cada monomio (tupla ordenada de indices extendidos)
    un mapa ``rate_index -> coeficiente``. El grado que cuenta es el de las
    especies dinamicas: un factor externo (v) actua como coeficiente.
    """

    def __init__(self, n_dynamic: int, terms: Optional[Mapping[Monomial, Mapping[int, Fraction]]] = None):
        self.n_dynamic = n_dynamic
        self.terms: Dict[Monomial, Dict[int, Fraction]] = {}
        for monomial, coefficients in (terms or {}).items():
            for rate, value in coefficients.items():
                self.add_term(monomial, rate, value)

    def add_term(self, monomial: Iterable[int], rate: int, value) -> None:
        monomial = tuple(sorted(monomial))
        bucket = self.terms.setdefault(monomial, {})
        total = bucket.get(rate, Fraction(0)) + Fraction(value)
        if total == 0:
            bucket.pop(rate, None)
            if not bucket:
                self.terms.pop(monomial, None)
        else:
            bucket[rate] = total

    def dynamic_degree(self, monomial: Monomial) -> int:
        return sum(1 for idx in monomial if idx < self.n_dynamic)

    def degree(self) -> int:
        return max((self.dynamic_degree(m) for m in self.terms), default=0)

    def _part(self, degree: int) -> Dict[Monomial, Dict[int, Fraction]]:
        return {m: c for m, c in self.terms.items() if self.dynamic_degree(m) == degree}

    @property
    def constant(self) -> Dict[Monomial, Dict[int, Fraction]]:
        return self._part(0)

    @property
    def linear(self) -> Dict[Monomial, Dict[int, Fraction]]:
        return self._part(1)

    @property
    def quadratic(self) -> Dict[Monomial, Dict[int, Fraction]]:
        return self._part(2)

    def positive_quadratic(self) -> List[Monomial]:
        """Monomios cuadraticos con algun coeficiente positivo, en orden (l, m)."""
        return sorted(
            m for m, c in self.quadratic.items() if any(v > 0 for v in c.values())
        )

    def scaled(self, weight) -> 'QuadraticForm':
        weight = Fraction(weight)
        out = QuadraticForm(self.n_dynamic)
        for monomial, coefficients in self.terms.items():
            for rate, value in coefficients.items():
                out.add_term(monomial, rate, weight * value)
        return out

    def __add__(self, other: 'QuadraticForm') -> 'QuadraticForm':
        out = self.scaled(1)
        for monomial, coefficients in other.terms.items():
            for rate, value in coefficients.items():
                out.add_term(monomial, rate, value)
        return out

    @staticmethod
    def combine(forms: List['QuadraticForm'], weights: Mapping[int, Fraction]) -> 'QuadraticForm':
        """Combinacion lineal sum_j weights[j] * forms[j]."""
        out = QuadraticForm(forms[0].n_dynamic if forms else 0)
        for j, weight in weights.items():
            if weight:
                out = out + forms[j].scaled(weight)
        return out

    def to_sympy(self, symbols: 'ReactionSymbols') -> sympy.Expr:
        expr = sympy.Integer(0)
        for monomial, coefficients in self.terms.items():
            factor = sympy.Mul(*[symbols.state[idx] for idx in monomial])
            coefficient = sum(
                (sympy.Rational(v.numerator, v.denominator) * symbols.rates[rate]
                 for rate, v in coefficients.items()),
                sympy.Integer(0)
            )
            expr += coefficient * factor
        return sympy.expand(expr)

    def __eq__(self, other) -> bool:
        return isinstance(other, QuadraticForm) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"QuadraticForm(terms={len(self.terms)}, degree={self.degree()})"


class ReactionSymbols:
    """Simbolos sympy de una red: u_i (dinamicas), externas por nombre, k_a."""

    def __init__(self, network):
        dynamic = sympy.symbols(f"u1:{network.N + 1}", nonnegative=True) if network.N else ()
        externals = tuple(sympy.Symbol(name, nonnegative=True) for name in network.external_names)
        self.dynamic = tuple(dynamic)
        self.externals = externals
        self.state = self.dynamic + self.externals
        self.rates = tuple(sympy.Symbol(name, positive=True) for name in network.rate_names)


def _stoichiometry(network) -> Tuple[np.ndarray, np.ndarray]:
    production = np.zeros((network.N, network.M))
    consumption = np.zeros((network.N, network.M))
    for reaction in network.reactions:
        a = reaction.rate_index
        for idx in reaction.products:
            if idx < network.N:
                production[idx, a] += 1
        for idx in reaction.reactants:
            if idx < network.N:
                consumption[idx, a] += 1
    return production, consumption


def reaction_forms(network) -> List[QuadraticForm]:
    """Formas r_i sin comprobar las hipotesis (uso interno y de certificados)."""
    forms = [QuadraticForm(network.N) for _ in range(network.N)]
    for reaction in network.reactions:
        a = reaction.rate_index
        monomial = tuple(sorted(reaction.reactants))
        for idx in reaction.reactants:
            if idx < network.N:
                forms[idx].add_term(monomial, a, -1)
        for idx in reaction.products:
            if idx < network.N:
                forms[idx].add_term(monomial, a, 1)
    return forms


def build_reaction_functions(network) -> List[QuadraticForm]:
    """
    Construye r_1..r_N de una red que cumple (A)(B)(C).

    Raises:
        NonCompliantNetwork: si la validacion reporta violaciones
    """
    from .certificates import validate_assumptions

    report = validate_assumptions(network)
    if not report.compliant:
        raise NonCompliantNetwork(
            f"La red viola las hipotesis: {report.violations[0].message}",
            report.violations
        )
    logger.debug("Funciones de reaccion construidas para %r", network)
    return reaction_forms(network)


def render_reaction_functions(network) -> List[sympy.Expr]:
    """Expresiones sympy de r_1..r_N."""
    symbols = ReactionSymbols(network)
    return [form.to_sympy(symbols) for form in reaction_forms(network)]


class MassActionKinetics:
    """
    Evaluador numerico de r(u, k) sobre un conjunto de celdas.

    Los estados se pasan como arreglos (N, n) (o (N,) para un punto), las
    externas como (E, n) o (E,), y k como (M,). Cada reaccion tiene dos
    ranuras de reactivo; las unimoleculares usan una fila de unos.

    Example:
        >>> kinetics = network.kinetics
        >>> r = kinetics.evaluate_r(u, k, ext)
    """

    def __init__(self, network):
        self.network = network
        self.N = network.N
        self.E = network.E
        self.M = network.M
        self.ones_row = self.N + self.E

        first = np.full(self.M, self.ones_row, dtype=int)
        second = np.full(self.M, self.ones_row, dtype=int)
        for reaction in network.reactions:
            a = reaction.rate_index
            first[a] = reaction.reactants[0]
            if len(reaction.reactants) > 1:
                second[a] = reaction.reactants[1]
        self.first = first
        self.second = second

        self.production, self.consumption = _stoichiometry(network)
        self.stoichiometry = self.production - self.consumption

        # Ranuras: (reaccion, especie dinamica de la ranura, otra ranura)
        slot_reaction, slot_species, slot_other = [], [], []
        for reaction in network.reactions:
            a = reaction.rate_index
            pair = (first[a], second[a])
            for position, idx in enumerate(pair):
                if idx < self.N:
                    slot_reaction.append(a)
                    slot_species.append(idx)
                    slot_other.append(pair[1 - position])
        self.slot_reaction = np.asarray(slot_reaction, dtype=int)
        self.slot_species = np.asarray(slot_species, dtype=int)
        self.slot_other = np.asarray(slot_other, dtype=int)
        n_slots = len(slot_reaction)

        ones = np.ones(n_slots)
        slots = np.arange(n_slots)
        self._species_selector = sp.csr_matrix(
            (ones, (self.slot_species, slots)), shape=(self.N, n_slots)
        )
        dynamic_other = self.slot_other < self.N
        self._other_selector = sp.csr_matrix(
            (ones[dynamic_other], (self.slot_other[dynamic_other], slots[dynamic_other])),
            shape=(self.N, n_slots)
        )
        self._reaction_selector = sp.csr_matrix(
            (ones, (self.slot_reaction, slots)), shape=(self.M, n_slots)
        )

    # --- preparacion -------------------------------------------------------

    def _prepare(self, u, k, ext) -> Tuple[np.ndarray, np.ndarray, bool]:
        u = np.asarray(u, dtype=float)
        k = np.asarray(k, dtype=float)
        single = u.ndim == 1
        if single:
            u = u[:, None]
        if u.ndim != 2 or u.shape[0] != self.N:
            raise DimensionMismatch(f"u debe tener {self.N} especies, tiene forma {u.shape}")
        if k.shape != (self.M,):
            raise DimensionMismatch(f"k debe tener longitud {self.M}, tiene forma {k.shape}")

        n = u.shape[1]
        if self.E:
            if ext is None:
                raise DimensionMismatch(f"La red requiere {self.E} campos externos")
            ext = np.asarray(ext, dtype=float)
            if ext.ndim == 1:
                ext = np.repeat(ext[:, None], n, axis=1)
            if ext.shape != (self.E, n):
                raise DimensionMismatch(f"Campos externos con forma {ext.shape}, se esperaba {(self.E, n)}")
            x = np.vstack([u, ext, np.ones((1, n))])
        else:
            x = np.vstack([u, np.ones((1, n))])
        return x, k, single

    @staticmethod
    def _finish(values: np.ndarray, single: bool) -> np.ndarray:
        return values[..., 0] if single else values

    def monomials(self, x: np.ndarray) -> np.ndarray:
        """Producto de reactivos por reaccion, (M, n)."""
        return x[self.first] * x[self.second]

    def fluxes(self, u, k, ext=None) -> np.ndarray:
        x, k, single = self._prepare(u, k, ext)
        return self._finish(k[:, None] * self.monomials(x), single)

    # --- evaluacion --------------------------------------------------------

    def evaluate_r(self, u, k, ext=None) -> np.ndarray:
        """r(u, k) por celda, (N, n) o (N,)."""
        x, k, single = self._prepare(u, k, ext)
        flux = k[:, None] * self.monomials(x)
        return self._finish(self.stoichiometry @ flux, single)

    def split(self, u, k, ext=None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Separacion de Patankar r_i = p_i - u_i q_i.

        p_i agrupa los terminos de produccion y q_i las tasas de
        destruccion; ambos tienen coeficientes no negativos.
        """
        x, k, single = self._prepare(u, k, ext)
        flux = k[:, None] * self.monomials(x)
        p = self.production @ flux
        slot_rates = k[self.slot_reaction][:, None] * x[self.slot_other]
        q = self._species_selector @ slot_rates
        return self._finish(p, single), self._finish(q, single)

    def jacobian_u(self, u, k, ext=None) -> np.ndarray:
        """dr/du, (N, N) para un punto o (n, N, N) por celda."""
        x, k, single = self._prepare(u, k, ext)
        n = x.shape[1]
        jac = np.zeros((n, self.N, self.N))
        for slot in range(len(self.slot_reaction)):
            a = self.slot_reaction[slot]
            j = self.slot_species[slot]
            partial = k[a] * x[self.slot_other[slot]]
            jac[:, :, j] += partial[:, None] * self.stoichiometry[:, a][None, :]
        return jac[0] if single else jac

    def jacobian_k(self, u, k, ext=None) -> np.ndarray:
        """dr/dk, (N, M) para un punto o (n, N, M) por celda."""
        x, k, single = self._prepare(u, k, ext)
        monomials = self.monomials(x)
        jac = self.stoichiometry[None, :, :] * monomials.T[:, None, :]
        return jac[0] if single else jac

    # --- productos transpuestos para el adjunto ------------------------------

    def adjoint_coupling(self, mu, u, w, k, ext=None) -> np.ndarray:
        """
        T_j = sum_i mu_i (dp_i/du_j - w_i dq_i/du_j) evaluado en u.

        Con w = u se recupera (dr/du)^T mu + q * mu.
        """
        x, k, single = self._prepare(u, k, ext)
        mu = np.asarray(mu, dtype=float).reshape(self.N, -1)
        w = np.asarray(w, dtype=float).reshape(self.N, -1)

        weighted = self.production.T @ mu
        slot_rates = k[self.slot_reaction][:, None] * x[self.slot_other]
        production_part = self._species_selector @ (weighted[self.slot_reaction] * slot_rates)

        mw = (mu * w)[self.slot_species]
        destruction_part = self._other_selector @ (k[self.slot_reaction][:, None] * mw)

        return self._finish(production_part - destruction_part, single)

    def rate_sensitivity(self, mu, u, w, k, ext=None) -> np.ndarray:
        """
        Por reaccion a y celda: sum_i mu_i (dp_i/dk_a - w_i dq_i/dk_a).

        Returns:
            Arreglo (M, n)
        """
        x, k, single = self._prepare(u, k, ext)
        mu = np.asarray(mu, dtype=float).reshape(self.N, -1)
        w = np.asarray(w, dtype=float).reshape(self.N, -1)

        production_part = (self.production.T @ mu) * self.monomials(x)
        mw = (mu * w)[self.slot_species] * x[self.slot_other]
        destruction_part = self._reaction_selector @ mw

        return self._finish(production_part - destruction_part, single)


def stoichiometric_matrix(network) -> np.ndarray:
    """Matriz estequiometrica neta S (N x M), filas dinamicas."""
    production, consumption = _stoichiometry(network)
    return production - consumption


def evaluate_r(network, u, k, ext=None) -> np.ndarray:
    """r(u, k) de la red; ver MassActionKinetics.evaluate_r."""
    return network.kinetics.evaluate_r(u, k, ext)


def jacobian_u(network, u, k, ext=None) -> np.ndarray:
    return network.kinetics.jacobian_u(u, k, ext)


def jacobian_k(network, u, k, ext=None) -> np.ndarray:
    return network.kinetics.jacobian_k(u, k, ext)
