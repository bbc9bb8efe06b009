"""Solver registry for name-based algorithm lookup."""

import re
from typing import ClassVar, Dict, List

from submax.solvers.base import SolverInterface

_ALG_NAME = re.compile(r"alg@(\d+)")


class SolverRegistry:
    """Registry for managing maximization algorithms."""

    _solvers: ClassVar[Dict[str, SolverInterface]] = {}

    @classmethod
    def register(cls, solver: SolverInterface) -> None:
        """Register a solver instance."""
        cls._solvers[solver.name] = solver

    @classmethod
    def get(cls, name: str) -> SolverInterface | None:
        """Get a solver by name.

        ``alg@<depth>`` names are created on first use for any depth.
        """
        solver = cls._solvers.get(name)
        if solver is None:
            found = _ALG_NAME.fullmatch(name)
            if found:
                from submax.solvers.recursive_solver import RecursiveSolver

                solver = RecursiveSolver(int(found[1]))
                cls.register(solver)
        return solver

    @classmethod
    def all(cls) -> List[SolverInterface]:
        """Get all registered solvers."""
        return list(cls._solvers.values())

    @classmethod
    def names(cls) -> List[str]:
        """Get names of all registered solvers."""
        return list(cls._solvers.keys())


def register_solver(solver: SolverInterface) -> None:
    """Register a solver with the global registry."""
    SolverRegistry.register(solver)


def register_default_solvers() -> None:
    """Register the built-in algorithms."""
    from submax.solvers.baselines import (
        BruteForceSolver,
        DoubleGreedyDetSolver,
        DoubleGreedyRandSolver,
        LocalSearchSolver,
    )
    from submax.solvers.recursive_solver import RecursiveSolver

    for depth in (0, 1, 2):
        register_solver(RecursiveSolver(depth))
    register_solver(LocalSearchSolver())
    register_solver(DoubleGreedyDetSolver())
    register_solver(DoubleGreedyRandSolver())
    register_solver(BruteForceSolver())
