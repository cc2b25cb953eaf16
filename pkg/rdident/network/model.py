"""
Tipos de la red de reacciones.

- Species: especie con composicion (multiconjunto de proteinas base)
- ElementaryReaction: asociacion, disociacion o conversion
- ReactionNetwork: especies ordenadas por categoria + reacciones

Las especies externas (campos prescritos como Ephrin-A1) se guardan
aparte: no tienen EDP ni funcion de reaccion. En las reacciones se
indexan a continuacion de las N especies dinamicas.
"""

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..exceptions import DuplicateRate, DuplicateSpecies, UnknownSpecies


class ReactionKind(str, Enum):
    """Tipos de reaccion elemental admitidos por las hipotesis (A)(B)(C)."""
    ASSOCIATION = 'association'    # 2 -> 1
    DISSOCIATION = 'dissociation'  # 1 -> 2
    CONVERSION = 'conversion'      # 1 -> 1

    @classmethod
    def classify(cls, n_reactants: int, n_products: int) -> Optional['ReactionKind']:
        """Clasifica por aridad; None si no corresponde a ningun tipo."""
        return {
            (2, 1): cls.ASSOCIATION,
            (1, 2): cls.DISSOCIATION,
            (1, 1): cls.CONVERSION,
        }.get((n_reactants, n_products))


@dataclass(frozen=True)
class Species:
    """
    Especie quimica.

    Attributes:
        name: Identificador
        composition: Proteinas base, ordenadas (multiconjunto)
        external: Campo prescrito, sin EDP
        observed: Se mide (fila de F)
        membrane: Ligada a membrana (cotas de difusividad lentas)
        initial_known: Valor inicial conocido
    """
    name: str
    composition: Tuple[str, ...]
    external: bool = False
    observed: bool = False
    membrane: bool = False
    initial_known: bool = False

    def __post_init__(self):
        if not self.composition:
            raise ValueError(f"La especie {self.name} no tiene composicion")
        object.__setattr__(self, 'composition', tuple(sorted(self.composition)))

    @property
    def category(self) -> int:
        """Categoria alfa = numero de proteinas base del complejo."""
        return len(self.composition)

    @property
    def flags(self) -> Tuple[str, ...]:
        names = ('external', 'observed', 'membrane', 'initial_known')
        return tuple(name for name in names if getattr(self, name))


@dataclass(frozen=True)
class ElementaryReaction:
    """
    Reaccion elemental de accion de masas.

    Los indices de especie son del espacio extendido: 0..N-1 dinamicas,
    N..N+E-1 externas. ``rate_index`` es 0-based (k_{rate_index+1}).
    """
    reactants: Tuple[int, ...]
    products: Tuple[int, ...]
    rate_index: int
    rate_name: str = ''
    backward: bool = False

    @property
    def kind(self) -> Optional[ReactionKind]:
        return ReactionKind.classify(len(self.reactants), len(self.products))


class ReactionNetwork:
    """
    Red de reacciones de accion de masas.

    Las especies dinamicas quedan ordenadas por categoria ascendente; a
    igual categoria se conserva el orden de declaracion.

    Example:
        >>> network = ReactionNetwork.from_reactions(
        ...     [Species('A', ('A',)), Species('B', ('B',)), Species('C', ('A', 'B'))],
        ...     [(('A', 'B'), ('C',), 'k1'), (('C',), ('A', 'B'), 'k2')],
        ... )
        >>> network.N, network.M
        (3, 2)
    """

    def __init__(
        self,
        species: Sequence[Species],
        externals: Sequence[Species],
        reactions: Sequence[ElementaryReaction],
    ):
        self._species = tuple(species)
        self._externals = tuple(externals)
        self._reactions = tuple(sorted(reactions, key=lambda r: r.rate_index))
        self._index = {s.name: i for i, s in enumerate(self.all_species)}
        self._kinetics = None
        self._check()

    def _check(self) -> None:
        names = [s.name for s in self.all_species]
        duplicated = [name for name, count in Counter(names).items() if count > 1]
        if duplicated:
            raise DuplicateSpecies(f"Especies duplicadas: {', '.join(duplicated)}")

        indices = [r.rate_index for r in self._reactions]
        if sorted(indices) != list(range(len(indices))):
            raise DuplicateRate(
                "Cada constante k_1..k_M debe usarse en exactamente una reaccion"
            )

        size = len(self.all_species)
        for reaction in self._reactions:
            for idx in reaction.reactants + reaction.products:
                if not 0 <= idx < size:
                    raise UnknownSpecies(f"Indice de especie fuera de rango: {idx}")

        categories = [s.category for s in self._species]
        if categories != sorted(categories):
            raise ValueError("Las especies deben estar ordenadas por categoria")

    @classmethod
    def from_reactions(
        cls,
        species: Iterable[Species],
        reactions: Iterable[Tuple[Sequence[str], Sequence[str], str]],
    ) -> 'ReactionNetwork':
        """
        Construye la red a partir de especies y reacciones por nombre.

        Args:
            species: Especies en orden de declaracion
            reactions: Tuplas (reactivos, productos, nombre de constante);
                       el orden define k_1..k_M. Un nombre que aparece en
                       la segunda posicion de un par reversible puede
                       marcarse con el prefijo '~' para indicar reaccion
                       inversa (solo afecta a las cotas por defecto).
        """
        species = list(species)
        dynamic = sorted(
            (s for s in species if not s.external),
            key=lambda s: s.category
        )
        externals = [s for s in species if s.external]
        index = {s.name: i for i, s in enumerate(dynamic + externals)}
        if len(index) != len(species):
            counts = Counter(s.name for s in species)
            duplicated = [name for name, count in counts.items() if count > 1]
            raise DuplicateSpecies(f"Especies duplicadas: {', '.join(duplicated)}")

        elementary = []
        seen_rates: Dict[str, int] = {}
        for position, (reactants, products, rate_name) in enumerate(reactions):
            backward = rate_name.startswith('~')
            rate_name = rate_name.lstrip('~')
            if rate_name in seen_rates:
                raise DuplicateRate(f"Constante repetida: {rate_name}")
            seen_rates[rate_name] = position
            try:
                elementary.append(ElementaryReaction(
                    reactants=tuple(index[name] for name in reactants),
                    products=tuple(index[name] for name in products),
                    rate_index=position,
                    rate_name=rate_name,
                    backward=backward,
                ))
            except KeyError as exc:
                raise UnknownSpecies(f"Especie no declarada: {exc.args[0]}") from None

        return cls(dynamic, externals, elementary)

    # --- acceso ------------------------------------------------------------

    @property
    def species(self) -> Tuple[Species, ...]:
        """Especies dinamicas (u_1..u_N)."""
        return self._species

    @property
    def externals(self) -> Tuple[Species, ...]:
        return self._externals

    @property
    def all_species(self) -> Tuple[Species, ...]:
        return self._species + self._externals

    @property
    def reactions(self) -> Tuple[ElementaryReaction, ...]:
        return self._reactions

    @property
    def N(self) -> int:
        return len(self._species)

    @property
    def E(self) -> int:
        """Numero de especies externas."""
        return len(self._externals)

    @property
    def M(self) -> int:
        return len(self._reactions)

    @property
    def species_names(self) -> List[str]:
        return [s.name for s in self._species]

    @property
    def external_names(self) -> List[str]:
        return [s.name for s in self._externals]

    @property
    def rate_names(self) -> List[str]:
        return [r.rate_name or f"k{r.rate_index + 1}" for r in self._reactions]

    @property
    def categories(self) -> List[int]:
        return [s.category for s in self._species]

    def index_of(self, name: str) -> int:
        """Indice extendido de una especie por nombre."""
        try:
            return self._index[name]
        except KeyError:
            raise UnknownSpecies(f"Especie no declarada: {name}") from None

    def rate_index_of(self, name: str) -> int:
        names = self.rate_names
        if name not in names:
            raise KeyError(f"Constante de velocidad desconocida: {name}")
        return names.index(name)

    def is_external(self, index: int) -> bool:
        return index >= self.N

    def species_at(self, index: int) -> Species:
        return self.all_species[index]

    @property
    def kinetics(self):
        """Evaluador numerico compilado (ver kinetics.MassActionKinetics)."""
        if self._kinetics is None:
            from .kinetics import MassActionKinetics
            self._kinetics = MassActionKinetics(self)
        return self._kinetics

    def describe_reaction(self, reaction: ElementaryReaction) -> str:
        lhs = ' + '.join(self.all_species[i].name for i in reaction.reactants)
        rhs = ' + '.join(self.all_species[i].name for i in reaction.products)
        return f"{lhs} -> {rhs} : {self.rate_names[reaction.rate_index]}"

    def __repr__(self) -> str:
        return f"ReactionNetwork(N={self.N}, E={self.E}, M={self.M})"

