"""Solver base classes and interfaces."""

from abc import ABC, abstractmethod

from pydantic import BaseModel

from submax.core.config import get_settings
from submax.core.oracle import ValueOracle
from submax.models.trace import TraceNode


class SolveResult(BaseModel):
    """Outcome of one solver run on one oracle."""

    subset: list[int]
    value: float
    queries: int
    moves: int | None = None
    depth: int | None = None
    trace: TraceNode | None = None
    # Randomized baselines report the mean value over trials and its sample std.
    value_std: float | None = None
    trials: int | None = None
    # Member labels of subset, set when the instance names its elements.
    labels: list[str] | None = None


class SolverInterface(ABC):
    """Abstract base class for maximization algorithms.

    A solver receives a value oracle with a fresh ledger and reports the set it
    returns, its value and the queries it spent. Solvers must be stateless so
    the bench can run them concurrently.
    """

    def __init__(self) -> None:
        self._settings = get_settings()

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the unique name of this solver."""
        pass

    @property
    def depth(self) -> int | None:
        """Recursion depth reported in bench rows, when the solver has one."""
        return None

    @abstractmethod
    def solve(
        self,
        oracle: ValueOracle,
        epsilon: float,
        trials: int = 1,
        base_seed: int = 0,
    ) -> SolveResult:
        """Maximize the function behind oracle.

        Args:
            oracle: Value oracle whose ledger counts this run only.
            epsilon: Accuracy parameter; ignored by solvers without one.
            trials: Number of seeded repetitions for randomized solvers.
            base_seed: Seed from which per-trial seeds are derived.

        Returns:
            A SolveResult.
        """
        pass
