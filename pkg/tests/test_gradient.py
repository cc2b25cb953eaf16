"""
Tests para identification/gradient.py
"""

import io

import numpy as np
import pytest

from rdident.exceptions import DimensionMismatch
from rdident.identification.gradient import (
    GradientSet,
    cost,
    evaluate_cost,
    full_gradient,
    gradient_check,
    log_derivative_fd,
    relative_error,
    taylor_test,
)
from rdident.identification.parameters import CoordinateMap, ParameterSet, draw_parameters
from rdident.identification.problem import IdentificationProblem
from rdident.numerics.forward import TimeAxis, solve_forward
from rdident.numerics.grid import SpatialGrid


@pytest.fixture
def coarse_grid():
    return SpatialGrid.rectangle(6, 6, 1 / 6, 1 / 6)


@pytest.fixture
def one_step_problem(decay_network):
    """A -> B en un paso; A desconocida, B observada con datos nulos."""
    grid = SpatialGrid.rectangle(2, 2, 0.5, 0.5)
    return IdentificationProblem.build(decay_network, grid, TimeAxis(1.0, 1), ['B'])


@pytest.fixture
def association_problem(association_network, coarse_grid, rng):
    problem = IdentificationProblem.build(
        association_network, coarse_grid, TimeAxis(0.2, 4), ['C']
    )
    problem = problem.with_data(0.5 * rng.random((5, 1, coarse_grid.n_active)))
    theta = draw_parameters(problem.space, coarse_grid, rng)
    theta.d[:] = [0.3, 0.2, 0.15]
    theta.k[:] = [1.5, 0.5]
    return problem, theta


class TestHandComputed:
    """
    Con a = 1 y k = 0.4: B^1 = dt k a, J = 1/2 (k a)^2,
    dJ/dk = k a^2 y dJ/da = k^2 a.
    """

    @pytest.fixture
    def theta(self, one_step_problem):
        return ParameterSet([0.5, 0.5], [0.4], np.ones((1, 4)), one_step_problem.space)

    def test_cost(self, one_step_problem, theta):
        assert evaluate_cost(one_step_problem, theta) == pytest.approx(0.08)

    def test_gradients(self, one_step_problem, theta):
        value, gradients = full_gradient(one_step_problem, theta)

        assert value == pytest.approx(0.08)
        np.testing.assert_allclose(gradients.d, 0.0, atol=1e-12)
        np.testing.assert_allclose(gradients.k, [0.4])
        np.testing.assert_allclose(gradients.I, 0.16 * np.ones((1, 4)))

    def test_working_coordinates(self, one_step_problem, theta):
        """log k escala por k; cada celda de I por el área de celda."""
        coordinates = CoordinateMap(one_step_problem.space, one_step_problem.grid.cell_area)

        _, vector = full_gradient(one_step_problem, theta, coordinates)

        np.testing.assert_allclose(vector, [0.0, 0.0, 0.16, 0.04, 0.04, 0.04, 0.04], atol=1e-12)

    def test_cost_data_shape(self, one_step_problem, theta):
        trajectory = solve_forward(one_step_problem, theta)

        with pytest.raises(DimensionMismatch):
            cost(one_step_problem, trajectory, data=np.zeros((3, 1, 4)))


class TestRelativeError:

    @pytest.mark.parametrize('a, b, expected', [
        (1.0, 1.0, 0.0),
        (1.0, 0.5, 0.5),
        (-2.0, 2.0, 2.0),
        (0.0, 0.0, 0.0),
    ])
    def test_values(self, a, b, expected):
        assert relative_error(a, b) == pytest.approx(expected)


class TestGradientCheck:
    """Adjunto contra diferencias centrales."""

    def test_association_passes(self, association_problem):
        problem, theta = association_problem

        report = gradient_check(problem, theta)

        assert len(report.rows) == 3 + 2 + 3
        assert report.passed, [row for row in report.rows if not row.passed]
        assert [row.component for row in report.rows[:5]] == [
            'd.A', 'd.B', 'd.C', 'k.k1', 'k.k2'
        ]

    def test_three_protein_passes(self, three_protein, coarse_grid, rng):
        problem = IdentificationProblem.build(three_protein, coarse_grid, TimeAxis(0.5, 10), ['pCA'])
        problem = problem.with_data(0.3 * rng.random((11, 1, coarse_grid.n_active)))
        theta = draw_parameters(problem.space, coarse_grid, rng)
        theta.d[:] = 0.2
        theta.k[:] = rng.uniform(0.2, 2.0, 12)

        report = gradient_check(problem, theta)

        assert len(report.rows) == 9 + 12 + 3
        assert report.passed, report.failures

    def test_fd_matches_log_derivative(self, association_problem):
        problem, theta = association_problem
        _, gradients = full_gradient(problem, theta)

        fd = log_derivative_fd(problem, theta, 'k', 0)

        assert fd == pytest.approx(theta.k[0] * gradients.k[0], rel=1e-4)

    def test_corrupted_gradient_fails(self, association_problem):
        """Un 10% de error en d se detecta."""
        problem, theta = association_problem

        report = gradient_check(
            problem, theta, corrupt=lambda g: GradientSet(1.1 * g.d, g.k, g.I)
        )

        assert not report.passed
        assert report.failures
        assert all(row.component.startswith('d.') for row in report.failures)

    def test_workers_give_same_rows(self, association_problem):
        problem, theta = association_problem

        serial = gradient_check(problem, theta)
        threaded = gradient_check(problem, theta, workers=2)

        for left, right in zip(serial.rows, threaded.rows):
            assert left.component == right.component
            assert left.finite_difference == pytest.approx(right.finite_difference, rel=1e-12)

    def test_write_csv(self, association_problem):
        problem, theta = association_problem
        report = gradient_check(problem, theta, n_directions=1)
        stream = io.StringIO()

        report.write_csv(stream)

        lines = stream.getvalue().splitlines()
        assert lines[0] == 'component,adjoint,finite_difference,relative_error,status'
        assert len(lines) == 1 + 3 + 2 + 1
        assert lines[-1].startswith('I.direction1,')

    def test_below_floor_rows(self, association_problem):
        """Una componente nula del gradiente no cuenta como fallo."""
        problem, theta = association_problem

        def zero_first(g):
            d = g.d.copy()
            d[0] = 0.0
            return GradientSet(d, g.k, g.I)

        report = gradient_check(problem, theta, corrupt=zero_first)

        assert report.rows[0].status == 'below-floor'
        assert report.rows[0].passed


class TestTaylor:

    def test_second_order(self, association_problem):
        problem, theta = association_problem

        result = taylor_test(problem, theta, steps=(2e-2, 1e-2, 5e-3, 2.5e-3), seed=3)

        assert 1.7 < result.order < 2.3
        assert np.all(np.diff(result.remainders) < 0)
