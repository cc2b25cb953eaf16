"""
Tests para numerics/forward.py
"""

import numpy as np
import pytest

from rdident.exceptions import ConfigError, DimensionMismatch, InvalidInitial, PositivityViolation
from rdident.numerics import forward
from rdident.numerics.forward import (
    ROUNDOFF_CLAMP,
    StateTrajectory,
    TimeAxis,
    enforce_nonnegative,
    implicit_solve,
    integrate,
    positivity_tolerance,
    step,
)
from rdident.numerics.linalg import ImplicitDiffusionOperator, LinearSolveResult


def uniform_state(grid, *values):
    return np.array([np.full(grid.n_active, value) for value in values])


class TestTimeAxis:

    def test_levels(self):
        time = TimeAxis(1.0, 4)

        assert time.dt == 0.25
        assert time.levels == 5
        np.testing.assert_allclose(time.times, [0, 0.25, 0.5, 0.75, 1.0])

    @pytest.mark.parametrize('T, nt', [(0.0, 10), (-1.0, 10), (1.0, 0), (1.0, 2.5)])
    def test_invalid(self, T, nt):
        with pytest.raises(ConfigError):
            TimeAxis(T, nt)


class TestIntegrate:
    """Esquema lineal-implícito con separación de Patankar."""

    def test_decay_closed_form(self, decay_network, small_grid):
        """A -> B con campos uniformes: A^n = A^0 / (1 + k dt)^n."""
        time = TimeAxis(1.0, 20)
        k, a0, b0 = 1.5, 0.8, 0.1

        trajectory = integrate(
            decay_network, small_grid, time,
            uniform_state(small_grid, a0, b0), np.array([0.3, 0.3]), np.array([k])
        )

        dt = time.dt
        a = a0 / (1 + k * dt) ** np.arange(time.levels)
        b = b0 + dt * k * np.concatenate([[0.0], np.cumsum(a[:-1])])
        np.testing.assert_allclose(trajectory.values[:, 0], a[:, None] * np.ones(64), rtol=1e-10)
        np.testing.assert_allclose(trajectory.values[:, 1], b[:, None] * np.ones(64), rtol=1e-10)

    def test_pure_diffusion_conserves_mass(self, decay_network, disk_grid, rng):
        """Sin reacción la masa total se conserva y el máximo no crece."""
        time = TimeAxis(0.5, 10)
        u0 = 0.1 + rng.random((2, disk_grid.n_active))

        trajectory = integrate(
            decay_network, disk_grid, time, u0, np.array([0.5, 0.05]), np.array([0.0])
        )

        mass = disk_grid.integrate(trajectory.values)
        np.testing.assert_allclose(mass, np.broadcast_to(mass[0], mass.shape), rtol=1e-10)
        assert trajectory.final.max() <= u0.max() + 1e-12

    def test_nonnegative(self, three_protein, small_grid, rng, march_raw, assert_raw_nonnegative):
        """Con u0 >= 0 cada solve crudo queda no negativo salvo el residuo."""
        time = TimeAxis(1.0, 10)
        u0 = rng.random((9, small_grid.n_active))
        k = 10 ** rng.uniform(-3, 1, 12)

        assert_raw_nonnegative(march_raw(three_protein, small_grid, time, u0, np.full(9, 0.2), k))

    def test_zero_initial_warns(self, decay_network, small_grid):
        """u0 con ceros se acepta."""
        trajectory = integrate(
            decay_network, small_grid, TimeAxis(0.1, 2),
            uniform_state(small_grid, 1.0, 0.0), np.ones(2) * 0.2, np.array([1.0])
        )

        assert trajectory.final[1].min() > 0

    def test_negative_initial_rejected(self, decay_network, small_grid):
        with pytest.raises(InvalidInitial):
            integrate(
                decay_network, small_grid, TimeAxis(1.0, 2),
                uniform_state(small_grid, 1.0, -1e-3), np.ones(2), np.ones(1)
            )

    def test_nonfinite_initial_rejected(self, decay_network, small_grid):
        with pytest.raises(InvalidInitial):
            integrate(
                decay_network, small_grid, TimeAxis(1.0, 2),
                uniform_state(small_grid, 1.0, np.nan), np.ones(2), np.ones(1)
            )

    def test_shape_mismatch(self, decay_network, small_grid):
        with pytest.raises(DimensionMismatch):
            integrate(
                decay_network, small_grid, TimeAxis(1.0, 2),
                np.ones((3, small_grid.n_active)), np.ones(2), np.ones(1)
            )

    def test_step_matches_first_level(self, association_network, small_grid, rng):
        u0 = rng.random((3, small_grid.n_active))
        d = np.array([0.1, 0.2, 0.3])
        k = np.array([2.0, 0.5])
        time = TimeAxis(0.2, 4)

        trajectory = integrate(association_network, small_grid, time, u0, d, k)

        np.testing.assert_allclose(
            step(association_network, small_grid, u0, k, d, time.dt), trajectory.level(1)
        )

    def test_external_fields(self, small_grid):
        """Un campo externo prescrito alimenta la asociación."""
        from rdident.network.dsl import parse

        network = parse(
            "species L {L} external\nspecies R {R}\nspecies LR {L,R}\nrxn L + R -> LR : k1\n"
        ).to_network()
        ligand = np.full((1, small_grid.n_active), 2.0)

        trajectory = integrate(
            network, small_grid, TimeAxis(1.0, 1), uniform_state(small_grid, 1.0, 0.0),
            np.array([0.1, 0.1]), np.array([0.5]), external=lambda level: ligand
        )

        # (1 + dt k L) R^1 = R^0
        np.testing.assert_allclose(trajectory.final[0], 0.5)
        np.testing.assert_allclose(trajectory.final[1], 1.0)


class TestPositivity:
    """Negativos del solve lineal: los de redondeo se anulan, el resto es un error."""

    def test_solve_error_within_tolerance(self, three_protein, small_grid, rng):
        """La diferencia con la solución directa queda acotada por el residuo."""
        u = rng.random((9, small_grid.n_active))
        k = 10 ** rng.uniform(-3, 1, 12)
        d = rng.uniform(0.01, 0.5, 9)
        dt = 0.1

        result = implicit_solve(three_protein, small_grid, u, k, d, dt)
        tolerance = positivity_tolerance(result)

        p, q = three_protein.kinetics.split(u, k)
        operator = ImplicitDiffusionOperator(small_grid.laplacian_matrix, 1.0 + dt * q, dt * d)
        rhs = u + dt * p
        for i in range(9):
            exact = np.linalg.solve(operator.dense(i), rhs[i])
            assert exact.min() > 0
            assert np.abs(result.solution[i] - exact).max() <= tolerance[i]

    def test_roundoff_negatives_zeroed(self):
        state = np.array([[1.0, -1e-15, 0.5], [0.2, 0.3, -5e-13]])

        cleaned = enforce_nonnegative(state, np.array([ROUNDOFF_CLAMP, 1e-12]), level=3)

        np.testing.assert_array_equal(cleaned, [[1.0, 0.0, 0.5], [0.2, 0.3, 0.0]])
        assert state[1, 2] < 0

    def test_large_negative_raises(self):
        state = np.ones((2, 4))
        state[1, 2] = -1e-6

        with pytest.raises(PositivityViolation) as excinfo:
            enforce_nonnegative(state, np.full(2, 1e-12), level=7)

        assert excinfo.value.level == 7
        assert excinfo.value.min_value == -1e-6
        assert excinfo.value.tolerance == 1e-12
        assert excinfo.value.exit_code == 1

    def test_step_rejects_negative_solve(self, decay_network, small_grid, monkeypatch):
        """Un solve con negativos mayores que su residuo detiene el paso."""
        def broken_cg(operator, rhs, preconditioner, **kwargs):
            solution = np.array(rhs, dtype=float)
            solution[0, 0] = -1e-3
            batch = rhs.shape[0]
            return LinearSolveResult(
                solution, np.ones(batch, dtype=int), np.zeros(batch),
                np.linalg.norm(rhs, axis=1), np.ones(batch, dtype=bool)
            )

        monkeypatch.setattr(forward, 'batched_cg', broken_cg)

        with pytest.raises(PositivityViolation) as excinfo:
            step(
                decay_network, small_grid, uniform_state(small_grid, 1.0, 0.5),
                np.array([1.0]), np.full(2, 0.1), 0.1, level=4
            )

        assert excinfo.value.level == 5


class TestMoietyDrift:
    """
    A + B <=> C: la separación de Patankar evalúa p y q en tiempos
    distintos, así que A + C no se conserva exactamente con k > 0.
    """

    def run(self, network, grid, u0, nt, k1=2.0, k2=0.5):
        time = TimeAxis(1.0, nt)
        trajectory = integrate(network, grid, time, u0, np.array([0.1, 0.2, 0.05]), np.array([k1, k2]))
        return time.dt, trajectory.values

    def test_drift_matches_splitting(self, association_network, small_grid, rng):
        """M^{n+1} - M^n = dt ∫ k1 B^n (A^n - A^{n+1}) + k2 (C^n - C^{n+1})."""
        u0 = 0.5 + 0.5 * rng.random((3, small_grid.n_active))
        k1, k2 = 2.0, 0.5

        dt, values = self.run(association_network, small_grid, u0, 20, k1, k2)
        A, B, C = values[:, 0], values[:, 1], values[:, 2]
        mass = small_grid.integrate(A + C)

        predicted = dt * small_grid.integrate(k1 * B[:-1] * (A[:-1] - A[1:]) + k2 * (C[:-1] - C[1:]))
        np.testing.assert_allclose(np.diff(mass), predicted, rtol=0, atol=1e-10)
        assert np.abs(np.diff(mass)).max() > 1e-6

    def test_drift_first_order(self, association_network, small_grid, rng):
        """La deriva acumulada en T = 1 se reduce a la mitad con dt / 2."""
        u0 = 0.5 + 0.5 * rng.random((3, small_grid.n_active))

        drifts = []
        for nt in (20, 40):
            _, values = self.run(association_network, small_grid, u0, nt)
            mass = small_grid.integrate(values[:, 0] + values[:, 2])
            drifts.append(abs(mass[-1] - mass[0]) / mass[0])

        assert drifts[0] < 0.05
        assert 1.5 <= drifts[0] / drifts[1] <= 2.5

    def test_no_drift_without_reactions(self, association_network, small_grid, rng):
        u0 = 0.5 + 0.5 * rng.random((3, small_grid.n_active))

        _, values = self.run(association_network, small_grid, u0, 20, 0.0, 0.0)
        mass = small_grid.integrate(values[:, 0] + values[:, 2])

        np.testing.assert_allclose(mass, mass[0], rtol=1e-10)


class TestCheckpointing:
    """Trayectorias con guardado parcial."""

    def test_replay_matches_full(self, three_protein, small_grid, rng):
        time = TimeAxis(0.5, 11)
        u0 = rng.random((9, small_grid.n_active))
        d = np.full(9, 0.3)
        k = rng.uniform(0.1, 2.0, 12)

        full = integrate(three_protein, small_grid, time, u0, d, k)
        sparse = integrate(three_protein, small_grid, time, u0, d, k, checkpoint_stride=4)

        for n in reversed(range(time.levels)):
            np.testing.assert_array_equal(sparse.level(n), full.level(n))
        assert sparse.replayed_steps > 0

    def test_negative_index_and_bounds(self, decay_network, small_grid):
        trajectory = integrate(
            decay_network, small_grid, TimeAxis(1.0, 3),
            uniform_state(small_grid, 1.0, 0.5), np.ones(2) * 0.2, np.array([1.0])
        )

        np.testing.assert_array_equal(trajectory[-1], trajectory.final)
        with pytest.raises(IndexError):
            trajectory.level(4)

    def test_invalid_stride(self, small_grid):
        with pytest.raises(ConfigError):
            StateTrajectory(small_grid, TimeAxis(1.0, 3), 2, checkpoint_stride=0, replay=lambda n, u: u)
        with pytest.raises(ConfigError):
            StateTrajectory(small_grid, TimeAxis(1.0, 3), 2, checkpoint_stride=2)
