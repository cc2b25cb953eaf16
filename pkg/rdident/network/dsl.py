"""
Formato de texto .rxn para redes de reacciones.

Gramatica (una sentencia por linea, '#' inicia comentario):

    species NAME {BASE(,BASE)*} [external] [observed] [membrane] [initial-known]
    rxn LHS (-> | <=>) RHS : RATE(, RATE)

Las declaraciones de especies preceden a las reacciones. Cada lado de una
reaccion tiene uno o dos terminos separados por '+'. Una sentencia
reversible ``<=>`` lleva dos constantes (directa, inversa) y se expande en
dos reacciones elementales con indices consecutivos.

Example:
    >>> doc = parse("species A {A}\\nspecies B {B}\\nspecies AB {A,B}\\n"
    ...             "rxn A + B <=> AB : k1, k2\\n")
    >>> network = doc.to_network()
    >>> network.M
    2
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from ..exceptions import (
    ArityError,
    DuplicateRate,
    DuplicateSpecies,
    NetworkError,
    NetworkSyntaxError,
    UnknownSpecies,
)
from ..utils import get_logger
from .model import ReactionNetwork, Species

logger = get_logger(__name__)

FLAGS = ('external', 'observed', 'membrane', 'initial-known')

_IDENTIFIER = r'[A-Za-z_][A-Za-z0-9_]*'
_TOKEN = re.compile(
    rf"(?P<flag>initial-known)|(?P<arrow><=>|->)|(?P<name>{_IDENTIFIER})"
    r"|(?P<punct>[{},:+])|(?P<space>\s+)|(?P<other>.)"
)

DATA_DIR = Path(__file__).resolve().parent / 'data'
BUNDLED = {
    'three-protein': DATA_DIR / 'three_protein.rxn',
    'f-actin': DATA_DIR / 'factin.rxn',
}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int


@dataclass(frozen=True)
class SpeciesDecl:
    """Declaracion ``species``; la composicion se guarda ordenada."""
    name: str
    composition: Tuple[str, ...]
    flags: FrozenSet[str] = frozenset()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    @property
    def category(self) -> int:
        return len(self.composition)


@dataclass(frozen=True)
class ReactionStatement:
    """Sentencia ``rxn``; ``rates`` tiene una constante (->) o dos (<=>)."""
    reactants: Tuple[str, ...]
    products: Tuple[str, ...]
    reversible: bool
    rates: Tuple[str, ...]
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def elementary(self) -> List[Tuple[Tuple[str, ...], Tuple[str, ...], str]]:
        forward = (self.reactants, self.products, self.rates[0])
        if not self.reversible:
            return [forward]
        return [forward, (self.products, self.reactants, f"~{self.rates[1]}")]


@dataclass
class NetworkDocument:
    """
    Documento .rxn parseado.

    La igualdad es estructural: ignora posiciones en el archivo y compara
    las especies en orden canonico (categoria, luego orden de declaracion).
    """
    species: List[SpeciesDecl] = field(default_factory=list)
    reactions: List[ReactionStatement] = field(default_factory=list)

    def canonical_species(self) -> List[SpeciesDecl]:
        return sorted(self.species, key=lambda s: s.category)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkDocument):
            return NotImplemented
        return (
            self.canonical_species() == other.canonical_species()
            and self.reactions == other.reactions
        )

    @property
    def rate_names(self) -> List[str]:
        return [rate for statement in self.reactions for rate in statement.rates]

    def to_network(self) -> ReactionNetwork:
        """Construye la ReactionNetwork (especies ordenadas por categoria)."""
        species = [
            Species(
                name=decl.name,
                composition=decl.composition,
                external='external' in decl.flags,
                observed='observed' in decl.flags,
                membrane='membrane' in decl.flags,
                initial_known='initial-known' in decl.flags,
            )
            for decl in self.species
        ]
        reactions = [item for statement in self.reactions for item in statement.elementary()]
        return ReactionNetwork.from_reactions(species, reactions)


class _Scanner:
    """Tokenizador de una linea."""

    def __init__(self, text: str, line: int):
        self.line = line
        self.tokens: List[Tuple[str, str, int]] = []
        for match in _TOKEN.finditer(text):
            kind = match.lastgroup
            if kind == 'space':
                continue
            self.tokens.append((kind, match.group(), match.start() + 1))
        self.position = 0
        self.end_column = len(text) + 1

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.position] if self.position < len(self.tokens) else None

    def column(self) -> int:
        token = self.peek()
        return token[2] if token else self.end_column

    def error(self, message: str, *expected: str) -> NetworkSyntaxError:
        return NetworkSyntaxError(message, self.line, self.column(), expected)

    def take(self, kind: str, value: Optional[str] = None, expected: Optional[str] = None):
        token = self.peek()
        label = expected or value or kind
        if token is None:
            raise self.error("Fin de linea inesperado", label)
        if token[0] != kind or (value is not None and token[1] != value):
            raise self.error(f"Token inesperado {token[1]!r}", label)
        self.position += 1
        return token

    def accept(self, kind: str, value: Optional[str] = None) -> bool:
        token = self.peek()
        if token and token[0] == kind and (value is None or token[1] == value):
            self.position += 1
            return True
        return False

    def done(self) -> bool:
        return self.peek() is None


def _strip_comment(text: str) -> str:
    index = text.find('#')
    return text if index < 0 else text[:index]


def _parse_species(scanner: _Scanner, line: int) -> SpeciesDecl:
    _, name, column = scanner.take('name', expected='NAME')
    scanner.take('punct', '{')
    composition = [scanner.take('name', expected='BASE')[1]]
    while scanner.accept('punct', ','):
        composition.append(scanner.take('name', expected='BASE')[1])
    scanner.take('punct', '}')

    flags = set()
    while not scanner.done():
        token = scanner.peek()
        value = token[1]
        if value not in FLAGS:
            raise scanner.error(f"Bandera desconocida {value!r}", *FLAGS)
        scanner.position += 1
        flags.add(value)

    return SpeciesDecl(name, tuple(sorted(composition)), frozenset(flags), SourceSpan(line, column))


def _parse_side(scanner: _Scanner, declared: Dict[str, SpeciesDecl]) -> Tuple[str, ...]:
    terms = []
    while True:
        token = scanner.peek()
        if token is None or token[0] != 'name':
            raise scanner.error("Se esperaba una especie", 'NAME')
        if token[1] not in declared:
            raise UnknownSpecies(
                f"Especie no declarada {token[1]!r} en linea {scanner.line}, columna {token[2]}"
            )
        terms.append(token[1])
        scanner.position += 1
        if not scanner.accept('punct', '+'):
            break
    if len(terms) > 2:
        raise ArityError(
            f"Lado de reaccion con {len(terms)} terminos en linea {scanner.line}; "
            "el maximo es dos"
        )
    return tuple(terms)


def _parse_reaction(scanner: _Scanner, line: int, declared: Dict[str, SpeciesDecl]) -> ReactionStatement:
    column = scanner.column()
    reactants = _parse_side(scanner, declared)
    arrow = scanner.take('arrow', expected='-> | <=>')[1]
    products = _parse_side(scanner, declared)
    scanner.take('punct', ':')

    rates = [scanner.take('name', expected='RATE')[1]]
    while scanner.accept('punct', ','):
        rates.append(scanner.take('name', expected='RATE')[1])
    if not scanner.done():
        raise scanner.error("Texto sobrante al final de la reaccion", 'fin de linea')

    reversible = arrow == '<=>'
    if len(rates) != (2 if reversible else 1):
        raise NetworkSyntaxError(
            f"'{arrow}' requiere {2 if reversible else 1} constante(s), hay {len(rates)}",
            line, column, ('RATE',)
        )
    return ReactionStatement(reactants, products, reversible, tuple(rates), SourceSpan(line, column))


def parse(text: str) -> NetworkDocument:
    """
    Parsea un documento .rxn (UTF-8, LF o CRLF).

    Raises:
        NetworkSyntaxError: con linea, columna y tokens esperados
        UnknownSpecies, DuplicateSpecies, DuplicateRate, ArityError
    """
    document = NetworkDocument()
    declared: Dict[str, SpeciesDecl] = {}
    rates_seen: Dict[str, int] = {}

    for line_number, raw in enumerate(text.splitlines(), start=1):
        content = _strip_comment(raw.rstrip('\r'))
        if not content.strip():
            continue

        scanner = _Scanner(content, line_number)
        keyword = scanner.take('name', expected='species | rxn')[1]

        if keyword == 'species':
            if document.reactions:
                raise NetworkSyntaxError(
                    "Las declaraciones de especies deben preceder a las reacciones",
                    line_number, 1, ('rxn',)
                )
            decl = _parse_species(scanner, line_number)
            if decl.name in declared:
                raise DuplicateSpecies(f"Especie duplicada {decl.name!r} en linea {line_number}")
            declared[decl.name] = decl
            document.species.append(decl)
        elif keyword == 'rxn':
            statement = _parse_reaction(scanner, line_number, declared)
            for rate in statement.rates:
                if rate in rates_seen:
                    raise DuplicateRate(
                        f"Constante {rate!r} repetida en linea {line_number} "
                        f"(ya usada en linea {rates_seen[rate]})"
                    )
                rates_seen[rate] = line_number
            document.reactions.append(statement)
        else:
            raise NetworkSyntaxError(
                f"Palabra clave desconocida {keyword!r}", line_number, 1, ('species', 'rxn')
            )

    logger.debug(
        "Documento parseado: %d especies, %d sentencias",
        len(document.species), len(document.reactions)
    )
    return document


def serialize(document: NetworkDocument) -> str:
    """
    Forma canonica: especies por categoria, reacciones en orden de
    constantes, fin de linea LF.

    Dentro de una categoria las especies quedan en orden de declaracion,
    no alfabetico: ese orden fija los indices de u en ``to_network`` y
    releer el texto no los permuta.
    """
    lines: List[str] = []
    for decl in document.canonical_species():
        flags = ''.join(f" {flag}" for flag in FLAGS if flag in decl.flags)
        lines.append(f"species {decl.name} {{{','.join(decl.composition)}}}{flags}")
    for statement in document.reactions:
        arrow = '<=>' if statement.reversible else '->'
        lines.append(
            f"rxn {' + '.join(statement.reactants)} {arrow} "
            f"{' + '.join(statement.products)} : {', '.join(statement.rates)}"
        )
    return '\n'.join(lines) + ('\n' if lines else '')


def load_document(source: Union[str, Path]) -> NetworkDocument:
    """Lee un archivo .rxn o un nombre de red incluida ('three-protein', 'f-actin')."""
    path = BUNDLED.get(str(source), Path(source))
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise NetworkError(f"No se pudo leer la red {path}: {exc}") from exc
    return parse(text)


def load_network(source: Union[str, Path]) -> ReactionNetwork:
    return load_document(source).to_network()
