"""
Tests para network/certificates.py
"""

import numpy as np
import pytest

from rdident.exceptions import CertificateFailure, NonCompliantNetwork
from rdident.network.certificates import (
    build_L_certificate,
    certify,
    check_degree,
    check_quasi_positivity,
    check_sum_bound,
    conserved_moieties,
    validate_assumptions,
)
from rdident.network.dsl import parse
from rdident.network.kinetics import QuadraticForm, reaction_forms, stoichiometric_matrix
from rdident.network.model import ReactionNetwork, Species


def network_from(text):
    return parse(text).to_network()


class TestValidateAssumptions:
    """Reglas (A)(B)(C) y orden de categorías."""

    def test_bundled_networks_compliant(self, three_protein, factin):
        assert validate_assumptions(three_protein).compliant
        assert validate_assumptions(factin).compliant

    def test_rule_a(self):
        """Tres reactivos violan (A); el reporte no lanza."""
        network = ReactionNetwork.from_reactions(
            [Species('A', ('A',)), Species('B', ('B',)), Species('C', ('C',)),
             Species('ABC', ('A', 'B', 'C'))],
            [(('A', 'B', 'C'), ('ABC',), 'k1')],
        )

        report = validate_assumptions(network)

        assert not report.compliant
        assert report.rules_violated() == ['A']
        assert report.violations[0].reaction == 1

    def test_rule_c(self):
        report = validate_assumptions(network_from(
            "species A {A}\nspecies B {B}\nspecies C {A}\nspecies D {B}\n"
            "rxn A -> C : k1\nrxn A + B -> C + D : k2\n"
        ))

        assert report.rules_violated() == ['C']
        assert report.violations[0].reaction == 2

    def test_association_must_raise_category(self):
        """Una asociación hacia un complejo de igual categoría viola el orden."""
        report = validate_assumptions(network_from(
            "species A {A}\nspecies B {B}\nspecies C {C}\nrxn A + B -> C : k1\n"
        ))

        assert 'ORDER' in report.rules_violated()

    def test_composition_imbalance_is_advisory(self):
        """El desbalance de composición no afecta el cumplimiento."""
        report = validate_assumptions(network_from(
            "species A {X}\nspecies B {Y}\nrxn A -> B : k1\n"
        ))

        assert report.compliant
        assert [entry.rule for entry in report.advisories] == ['COMPOSITION']
        assert any('aviso' in line for line in report.lines())

    def test_raise_if_noncompliant(self):
        report = validate_assumptions(network_from(
            "species A {A}\nspecies B {B}\nspecies C {A}\nspecies D {B}\n"
            "rxn A + B -> C + D : k1\n"
        ))

        with pytest.raises(NonCompliantNetwork) as info:
            report.raise_if_noncompliant()

        assert info.value.exit_code == 2
        assert report.lines()[0].startswith('Hipotesis (A)(B)(C): NO cumple')


class TestQuasiPositivity:
    """Todo término negativo de r_i contiene u_i."""

    def test_three_protein(self, three_protein):
        certificate = check_quasi_positivity(three_protein)

        assert certificate.species_checked == 9
        assert certificate.negative_terms > 0

    def test_violation_names_term(self, association_network):
        """Una forma con -k u_2 en r_1 falla nombrando el término."""
        forms = reaction_forms(association_network)
        forms[0].add_term((1,), 0, -1)

        with pytest.raises(CertificateFailure) as info:
            check_quasi_positivity(association_network, forms)

        assert 'r_1' in str(info.value)
        assert 'u_1' in str(info.value)

    def test_degree(self, three_protein, decay_network):
        assert check_degree(three_protein) == 2
        assert check_degree(decay_network) == 1

    def test_degree_above_two_rejected(self, association_network):
        forms = reaction_forms(association_network)
        forms[2].add_term((0, 1, 2), 0, 1)

        with pytest.raises(CertificateFailure):
            check_degree(association_network, forms)


class TestLCertificate:
    """Construcción de la matriz L."""

    def test_three_protein_matrix(self, three_protein):
        """Filas de complejos con 0.5 en sus componentes."""
        L = build_L_certificate(three_protein).matrix

        expected = np.eye(9)
        expected[6, [0, 2, 3]] = 0.5   # pAB: pA, pB, B
        expected[7, [2, 4, 5]] = 0.5   # pBC: pB, pC, C
        expected[8, [0, 1, 4]] = 0.5   # pCA: pA, A, pC
        np.testing.assert_array_equal(L, expected)

    def test_structure(self, three_protein):
        """Triangular inferior, diagonal unitaria y sin cuadráticos positivos."""
        certificate = build_L_certificate(three_protein)
        L = certificate.matrix

        assert np.allclose(np.triu(L, 1), 0)
        assert np.all(np.diag(L) == 1)
        assert np.all(L >= 0)
        for i in range(9):
            assert certificate.combined(i).positive_quadratic() == []
        assert certificate.verify_symbolic(three_protein)

    def test_identity_without_associations(self, decay_network):
        """Sin asociaciones L es la identidad."""
        L = build_L_certificate(decay_network).matrix

        np.testing.assert_array_equal(L, np.eye(2))

    def test_format(self, association_network):
        lines = build_L_certificate(association_network).format()

        assert lines == ['1 0 0', '0 1 0', '0.5 0.5 1']

    def test_construction_failure(self, association_network):
        """Un término positivo desde especies de igual categoría no se elimina."""
        from rdident.exceptions import ConstructionFailure

        forms = reaction_forms(association_network)
        forms[1].add_term((0, 2), 0, 1)

        with pytest.raises(ConstructionFailure):
            build_L_certificate(association_network, forms)


class TestSumBound:
    """sum_i r_i <= a (1 + sum_i u_i)."""

    def test_three_protein_constant(self, three_protein):
        """Cada complejo aporta k_inversa + k_disociacion al coeficiente lineal."""
        certificate = check_sum_bound(three_protein)

        assert certificate.value(np.ones(12)) == pytest.approx(2.0)
        k = np.arange(1, 13, dtype=float)
        # pAB: k2 + k3, pBC: k6 + k7, pCA: k10 + k11
        assert certificate.value(k) == pytest.approx(21.0)

    def test_conversion_sums_to_zero(self, decay_network):
        certificate = check_sum_bound(decay_network)

        assert certificate.quadratic == 0
        assert certificate.value([3.0]) == 0.0

    def test_positive_quadratic_rejected(self, association_network):
        forms = reaction_forms(association_network)
        forms[2] = forms[2] + QuadraticForm(3, {(0, 1): {0: 5}})

        with pytest.raises(CertificateFailure):
            check_sum_bound(association_network, forms)


class TestConservedMoieties:
    """Vectores w >= 0 con w^T S = 0."""

    def test_three_protein_has_one_per_base(self, three_protein):
        S = stoichiometric_matrix(three_protein)

        moieties = conserved_moieties(three_protein)

        assert len(moieties) == 3
        for w in moieties:
            assert np.all(w >= 0)
            assert not np.any(w @ S)
        # total de A: pA, A, pAB, pCA
        np.testing.assert_array_equal(moieties[0], [1, 1, 0, 0, 0, 0, 1, 0, 1])

    def test_decay(self, decay_network):
        moieties = conserved_moieties(decay_network)

        assert len(moieties) == 1
        np.testing.assert_array_equal(moieties[0], [1, 1])


class TestCertify:
    def test_all_keys(self, three_protein):
        result = certify(three_protein)

        assert set(result) == {'degree', 'quasi_positivity', 'sum_bound', 'L', 'moieties'}
        assert result['degree'] == 2
