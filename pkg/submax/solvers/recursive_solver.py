from submax.core.oracle import ValueOracle
from submax.services.recursive import AlgConfig, alg
from submax.solvers.base import SolveResult, SolverInterface


class RecursiveSolver(SolverInterface):
    """The recursive local-search algorithm at a fixed depth (``alg@<depth>``)."""

    def __init__(self, nrounds: int):
        super().__init__()
        if nrounds < 0:
            raise ValueError("nrounds must be non-negative")
        self.nrounds = nrounds

    @property
    def name(self) -> str:
        return f"alg@{self.nrounds}"

    @property
    def depth(self) -> int:
        return self.nrounds

    def solve(self, oracle: ValueOracle, epsilon: float, trials: int = 1, base_seed: int = 0) -> SolveResult:
        outcome = alg(oracle, AlgConfig(epsilon=epsilon, nrounds=self.nrounds))
        return SolveResult(
            subset=outcome.subset.members(),
            value=outcome.value,
            queries=oracle.ledger.count,
            moves=sum(node.ls_moves for node in outcome.trace.walk()),
            depth=self.nrounds,
            trace=outcome.trace,
        )
