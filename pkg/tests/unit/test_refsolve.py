"""
Unit tests for the constant-lag reference solver
"""

import math

import numpy as np
import pytest

from sam_dde.config import Config
from sam_dde.core.refsolve import (
    LaggedRHS,
    SolverConfig,
    breakpoints,
    self_convergence_order,
    solve_averaged,
    solve_dde,
    solve_oscillatory,
)
from sam_dde.error_handling import MaxStepsExceeded, OutOfDomain
from sam_dde.models import HistoryFunction, SamSolution, make_grid, max_step_point_error
from sam_dde.problems.toggle import toggle_averaged, toggle_oscillatory
from tests.fixtures import constant_problem


def _retarded_decay() -> LaggedRHS:
    """x' = -x(t - 1)."""
    return LaggedRHS(dim=1, lags=(1.0,), fun=lambda t, x, lagged: -lagged[0])


def _exponential() -> LaggedRHS:
    """x' = x; the lag is never read."""
    return LaggedRHS(dim=1, lags=(1.0,), fun=lambda t, x, lagged: x)


def _delayed_logistic() -> LaggedRHS:
    return LaggedRHS(dim=1, lags=(1.0,), fun=lambda t, x, lagged: x * (1.0 - lagged[0]))


class TestSolverConfig:
    @pytest.mark.unit
    def test_from_config_and_overrides(self):
        config = Config()
        config.solver.rel_tol = 1e-6

        cfg = SolverConfig.from_config(config, abs_tol=1e-9)

        assert cfg.rel_tol == 1e-6
        assert cfg.abs_tol == 1e-9

    @pytest.mark.unit
    def test_rejects_non_positive_tolerance(self):
        with pytest.raises(ValueError):
            SolverConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            SolverConfig(fixed_step=-0.1)

    @pytest.mark.unit
    def test_lag_validation(self):
        with pytest.raises(ValueError):
            LaggedRHS(dim=1, lags=(0.0,), fun=lambda t, x, lagged: x)
        with pytest.raises(ValueError):
            LaggedRHS(dim=1, lags=(2.0, 1.0), fun=lambda t, x, lagged: x)


class TestBreakpoints:
    @pytest.mark.unit
    def test_lag_multiples(self):
        assert breakpoints((1.0,), (), 0.0, 3.0, 4) == [0.0, 1.0, 2.0, 3.0]

    @pytest.mark.unit
    def test_jump_propagation_and_merging(self):
        pts = breakpoints((0.5, 1.0), (0.5,), 0.0, 2.0, 4)

        assert pts == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    @pytest.mark.unit
    def test_mesh_contains_breakpoints(self):
        sol = solve_dde(_retarded_decay(), HistoryFunction.constant([1.0], 1.0), (0.0, 3.0))

        for bp in (1.0, 2.0, 3.0):
            assert np.min(np.abs(sol.mesh - bp)) < 1e-12


class TestSolveDDE:
    """Method of steps with Hermite lagged lookups"""

    @pytest.mark.unit
    def test_piecewise_polynomial_solution(self):
        """x = 1 - t on [0, 1] and x = (t - 1)(t - 3) / 2 on [1, 2]."""
        sol = solve_dde(_retarded_decay(), HistoryFunction.constant([1.0], 1.0), (0.0, 2.0))

        assert sol.eval(0.4)[0] == pytest.approx(0.6, abs=1e-8)
        assert sol.eval(1.0)[0] == pytest.approx(0.0, abs=1e-8)
        assert sol.eval(1.5)[0] == pytest.approx(-0.375, abs=1e-7)

    @pytest.mark.unit
    def test_constant_solution(self):
        rhs = LaggedRHS(dim=2, lags=(0.5,), fun=lambda t, x, lagged: np.zeros(2))
        sol = solve_dde(rhs, HistoryFunction.constant([0.5, 2.0], 0.5), (0.0, 2.0))

        np.testing.assert_allclose(sol.eval_many([0.0, 0.7, 2.0]), [[0.5, 2.0]] * 3)

    @pytest.mark.unit
    def test_dense_output(self):
        sol = solve_dde(_retarded_decay(), HistoryFunction.constant([1.0], 1.0), (0.0, 2.0))

        np.testing.assert_allclose(sol.eval_many(sol.mesh), sol.states, atol=1e-14)
        np.testing.assert_allclose(sol.eval(-0.5), [1.0])
        assert sol.derivative(0.5)[0] == pytest.approx(-1.0, abs=1e-8)
        with pytest.raises(OutOfDomain):
            sol.eval(2.5)

    @pytest.mark.unit
    def test_array_roundtrip_keeps_statistics(self):
        history = HistoryFunction.constant([1.0], 1.0)
        sol = solve_dde(_retarded_decay(), history, (0.0, 2.0))

        again = type(sol).from_arrays(sol.to_arrays(), history)

        assert again.n_accepted == sol.n_accepted
        assert again.eval(1.3)[0] == pytest.approx(sol.eval(1.3)[0])

    @pytest.mark.unit
    def test_span_must_start_at_zero(self):
        with pytest.raises(ValueError):
            solve_dde(_retarded_decay(), HistoryFunction.constant([1.0], 1.0), (0.5, 2.0))

    @pytest.mark.unit
    def test_step_budget(self):
        cfg = SolverConfig(fixed_step=0.01, max_steps=10)

        with pytest.raises(MaxStepsExceeded):
            solve_dde(_retarded_decay(), HistoryFunction.constant([1.0], 1.0), (0.0, 2.0), cfg)


class TestObservedOrder:
    """Fixed-step self convergence"""

    @pytest.mark.unit
    def test_exponential_against_exact(self):
        history = HistoryFunction(value_fn=lambda t: np.array([math.exp(t)]), tau=1.0)

        order = self_convergence_order(
            _exponential(), history, (0.0, 2.0), base_step=0.025, exact=lambda t: np.array([math.exp(t)])
        )

        assert 2.5 <= order <= 3.5

    @pytest.mark.unit
    def test_delayed_logistic_richardson(self):
        order = self_convergence_order(
            _delayed_logistic(), HistoryFunction.constant([0.5], 1.0), (0.0, 3.0), base_step=0.025
        )

        assert 2.5 <= order <= 3.5

    @pytest.mark.unit
    def test_undeclared_jump_loses_order(self):
        """A jump at t = 0.33 that is not a mesh point drops the order to one."""
        rhs = LaggedRHS(dim=1, lags=(1.0,), fun=lambda t, x, lagged: np.array([1.0 if t < 0.33 else 0.0]))

        order = self_convergence_order(rhs, HistoryFunction.constant([0.0], 1.0), (0.0, 0.5), base_step=0.1)

        assert order == pytest.approx(1.0, abs=0.05)
        assert order < 2.0


class TestProblemReferences:
    @pytest.mark.unit
    def test_averaged_toggle_reference(self, toggle_params):
        avg = toggle_averaged(toggle_params, 200.0)

        sol = solve_averaged(avg)

        assert sol.t_end == pytest.approx(2.0)
        assert np.min(np.abs(sol.mesh - 0.5)) < 1e-12
        assert np.all(np.isfinite(sol.states))

    @pytest.mark.unit
    def test_oscillatory_step_is_capped_by_period(self, toggle_params):
        Omega = 200.0
        sol = solve_oscillatory(toggle_oscillatory(toggle_params, Omega), t_end=0.5)

        assert np.max(np.diff(sol.mesh)) <= 2.0 * math.pi / Omega / 8 + 1e-12

    @pytest.mark.unit
    def test_oscillatory_requires_frequency(self):
        with pytest.raises(ValueError):
            solve_oscillatory(constant_problem())

    @pytest.mark.unit
    def test_step_point_error(self):
        """A constant-rhs SAM run matches the reference of x' = 1."""
        from sam_dde.core.sam import sam_solve

        problem = constant_problem(c=1.0)
        grid = make_grid(1, 4, 100.0, 0.5)
        sam = sam_solve(problem, grid)
        ref = solve_oscillatory(problem, omega=100.0)

        assert isinstance(sam, SamSolution)
        assert max_step_point_error(sam, ref) < 1e-10
