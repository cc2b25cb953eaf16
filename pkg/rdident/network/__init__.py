"""
Redes de reacciones de accion de masas: modelo, cinetica, certificados y
formato de texto .rxn.
"""

from .certificates import (
    LCertificate,
    QuasiPositivityCertificate,
    SumBoundCertificate,
    ValidationReport,
    Violation,
    build_L_certificate,
    certify,
    check_degree,
    check_quasi_positivity,
    check_sum_bound,
    conserved_moieties,
    validate_assumptions,
)
from .dsl import (
    BUNDLED,
    NetworkDocument,
    ReactionStatement,
    SpeciesDecl,
    load_document,
    load_network,
    parse,
    serialize,
)
from .kinetics import (
    MassActionKinetics,
    QuadraticForm,
    ReactionSymbols,
    build_reaction_functions,
    evaluate_r,
    jacobian_k,
    jacobian_u,
    render_reaction_functions,
    stoichiometric_matrix,
)
from .model import ElementaryReaction, ReactionKind, ReactionNetwork, Species

__all__ = [
    'Species',
    'ElementaryReaction',
    'ReactionKind',
    'ReactionNetwork',
    'QuadraticForm',
    'ReactionSymbols',
    'MassActionKinetics',
    'build_reaction_functions',
    'render_reaction_functions',
    'evaluate_r',
    'jacobian_u',
    'jacobian_k',
    'stoichiometric_matrix',
    'Violation',
    'ValidationReport',
    'validate_assumptions',
    'QuasiPositivityCertificate',
    'check_quasi_positivity',
    'check_degree',
    'LCertificate',
    'build_L_certificate',
    'SumBoundCertificate',
    'check_sum_bound',
    'conserved_moieties',
    'certify',
    'NetworkDocument',
    'SpeciesDecl',
    'ReactionStatement',
    'BUNDLED',
    'parse',
    'serialize',
    'load_document',
    'load_network',
]
