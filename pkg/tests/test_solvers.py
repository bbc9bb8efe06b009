import unittest
from unittest.mock import MagicMock, patch

import pytest

from submax.core.config import Settings, get_settings
from submax.services.exact import ExactSolverError
from submax.services.instances import CutOracle
from submax.solvers import SolverRegistry, register_default_solvers, register_solver
from submax.solvers.base import SolveResult, SolverInterface
from submax.solvers.recursive_solver import RecursiveSolver

P3 = [(0, 1, 1.0), (1, 2, 1.0)]


class EverythingSolver(SolverInterface):
    @property
    def name(self) -> str:
        return "everything"

    def solve(self, oracle, epsilon, trials=1, base_seed=0) -> SolveResult:
        full = oracle.full()
        return SolveResult(subset=full.members(), value=oracle.evaluate(full), queries=oracle.ledger.count)


class TestSolverRegistry(unittest.TestCase):
    def setUp(self):
        register_default_solvers()

    def test_default_names(self):
        names = SolverRegistry.names()
        for name in ("alg@0", "alg@1", "alg@2", "ls", "dg-det", "dg-rand", "brute"):
            self.assertIn(name, names)

    def test_alg_names_are_created_on_demand(self):
        solver = SolverRegistry.get("alg@5")
        self.assertIsInstance(solver, RecursiveSolver)
        self.assertEqual(solver.depth, 5)
        self.assertIs(SolverRegistry.get("alg@5"), solver)

    def test_unknown_name(self):
        self.assertIsNone(SolverRegistry.get("greedy"))
        self.assertIsNone(SolverRegistry.get("alg@x"))

    def test_custom_solver(self):
        register_solver(EverythingSolver())
        result = SolverRegistry.get("everything").solve(CutOracle(3, P3), 0.1)
        self.assertEqual(result.value, 0.0)
        self.assertEqual(result.queries, 1)

    def test_negative_depth_rejected(self):
        with self.assertRaises(ValueError):
            RecursiveSolver(-1)


def test_solvers_agree_on_p3():
    register_default_solvers()
    for name in ("alg@0", "alg@2", "ls", "dg-det", "brute"):
        result = SolverRegistry.get(name).solve(CutOracle(3, P3), 0.05)
        assert result.value == 2.0, name
        assert result.queries > 0


def test_recursive_solver_reports_trace_and_depth():
    oracle = CutOracle(3, P3)
    result = RecursiveSolver(2).solve(oracle, 0.05)
    assert result.depth == 2
    assert result.trace.node_id == "r"
    assert result.queries == oracle.ledger.count == 37


def test_dg_rand_statistics():
    register_default_solvers()
    solver = SolverRegistry.get("dg-rand")
    single = solver.solve(CutOracle(3, P3), 0.05, trials=1)
    assert single.value_std == 0.0
    many = solver.solve(CutOracle(3, P3), 0.05, trials=40, base_seed=9)
    assert many.trials == 40
    assert 0.0 <= many.value <= 2.0
    again = solver.solve(CutOracle(3, P3), 0.05, trials=40, base_seed=9)
    assert again == many
    with pytest.raises(ValueError):
        solver.solve(CutOracle(3, P3), 0.05, trials=0)


def test_brute_force_respects_cap():
    register_default_solvers()
    with patch("submax.services.exact.get_settings") as mock_settings:
        mock_settings.return_value = MagicMock(max_brute_m=2, float_tolerance=1e-9)
        with pytest.raises(ExactSolverError):
            SolverRegistry.get("brute").solve(CutOracle(3, P3), 0.05)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SUBMAX_MAX_BRUTE_M", "10")
    monkeypatch.setenv("SUBMAX_LOG_LEVEL", "DEBUG")
    settings = Settings(_env_file=None)
    assert settings.max_brute_m == 10
    assert settings.log_level == "DEBUG"

    monkeypatch.setenv("SUBMAX_FLOAT_TOLERANCE", "0.5")
    with pytest.raises(ValueError):
        Settings(_env_file=None)


def test_get_settings_is_cached():
    assert get_settings() is get_settings()
