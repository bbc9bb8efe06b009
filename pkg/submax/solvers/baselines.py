"""Baseline solvers: plain local search, double greedy and brute force."""

import logging

import numpy as np

from submax.core.oracle import ValueOracle, shift
from submax.core.rng import SplitMix64, derive_seed
from submax.services.exact import brute_force_opt
from submax.services.localsearch import (
    LsConfig,
    double_greedy_det,
    double_greedy_rand,
    ls_approx_local_max,
)
from submax.solvers.base import SolveResult, SolverInterface

logger = logging.getLogger(__name__)


class LocalSearchSolver(SolverInterface):
    """One local-search run on the shifted function; returns its S."""

    @property
    def name(self) -> str:
        return "ls"

    def solve(self, oracle: ValueOracle, epsilon: float, trials: int = 1, base_seed: int = 0) -> SolveResult:
        ls = ls_approx_local_max(shift(oracle), LsConfig(epsilon=epsilon))
        value = oracle.evaluate(ls.set)
        return SolveResult(
            subset=ls.set.members(), value=value, queries=oracle.ledger.count, moves=ls.moves
        )


class DoubleGreedyDetSolver(SolverInterface):
    @property
    def name(self) -> str:
        return "dg-det"

    def solve(self, oracle: ValueOracle, epsilon: float, trials: int = 1, base_seed: int = 0) -> SolveResult:
        subset = double_greedy_det(oracle)
        value = oracle.evaluate(subset)
        return SolveResult(subset=subset.members(), value=value, queries=oracle.ledger.count)


class DoubleGreedyRandSolver(SolverInterface):
    """Randomized double greedy over seeded trials.

    The reported value is the sample mean, ``value_std`` the sample standard
    deviation; the subset is the one found by the first trial.
    """

    @property
    def name(self) -> str:
        return "dg-rand"

    def solve(self, oracle: ValueOracle, epsilon: float, trials: int = 1, base_seed: int = 0) -> SolveResult:
        if trials < 1:
            raise ValueError("trials must be at least 1")
        values = np.empty(trials, dtype=np.float64)
        first = None
        for i in range(trials):
            subset = double_greedy_rand(oracle, SplitMix64(derive_seed(base_seed, i)))
            values[i] = oracle.evaluate(subset)
            if first is None:
                first = subset
        std = float(values.std(ddof=1)) if trials > 1 else 0.0
        logger.debug("dg-rand %d trials: mean=%.6g std=%.6g", trials, values.mean(), std)
        return SolveResult(
            subset=first.members(),
            value=float(values.mean()),
            queries=oracle.ledger.count,
            value_std=std,
            trials=trials,
        )


class BruteForceSolver(SolverInterface):
    @property
    def name(self) -> str:
        return "brute"

    def solve(self, oracle: ValueOracle, epsilon: float, trials: int = 1, base_seed: int = 0) -> SolveResult:
        exact = brute_force_opt(oracle)
        return SolveResult(
            subset=exact.opt_set.members(), value=exact.opt_value, queries=oracle.ledger.count
        )
