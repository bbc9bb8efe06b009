"""The recursive local-search composition algorithm and its trace verification.

At every node the algorithm shifts the function so that min(f(∅), f(M)) = 0,
finds an approximate local maximum S, and (while rounds remain and S is a
proper non-empty subset) recurses on f restricted to S^c and on
T -> f(S^c ∪ T) over S, before returning the best of S, S^c, T1 ∪ T2, M, ∅.
"""

import logging
from typing import NamedTuple

from pydantic import BaseModel, NonNegativeInt, PositiveFloat, PositiveInt

from submax.core.config import get_settings
from submax.core.oracle import (
    Subset,
    ValueOracle,
    isolated,
    pin_union,
    restrict,
    shift,
)
from submax.models.trace import CANDIDATE_ORDER, Candidate, TraceNode, TraceReport, VerificationCheck
from submax.services.exact import brute_force_opt
from submax.services.localsearch import LsConfig, WarmStart, ls_approx_local_max, ls_query_budget

logger = logging.getLogger(__name__)

ROOT_ID = "r"

# Queries a node makes outside shift + local search: S^c, T1 ∪ T2, and the
# fresh evaluation of the returned set.
ARGMAX_QUERIES = 3


class TraceVerificationError(ValueError):
    """Trace verification could not run (missing optima, malformed input)."""


class AlphaBoundError(TraceVerificationError):
    """AlphaBound arguments outside the domain of the claimed bound."""


class AlgConfig(BaseModel):
    """Accuracy and recursion depth of the recursive algorithm."""

    epsilon: PositiveFloat
    nrounds: NonNegativeInt = 2
    warm_start: WarmStart = "double-greedy"
    max_moves: PositiveInt | None = None

    def ls_config(self) -> LsConfig:
        return LsConfig(epsilon=self.epsilon, max_moves=self.max_moves, warm_start=self.warm_start)


class AlgOutcome(NamedTuple):
    subset: Subset
    value: float
    trace: TraceNode


def alg(oracle: ValueOracle, cfg: AlgConfig) -> AlgOutcome:
    """Run the recursive algorithm with cfg.nrounds rounds.

    The returned value is a fresh evaluation of the returned set under the
    (unshifted) input oracle; the trace holds every node's shifted values.
    """
    outcome = _alg(oracle, cfg, cfg.nrounds, 0, ROOT_ID)
    logger.debug(
        "alg m=%d nrounds=%d eps=%g -> %s value=%.6g queries=%d",
        oracle.ground_size,
        cfg.nrounds,
        cfg.epsilon,
        outcome.subset,
        outcome.value,
        outcome.trace.queries,
    )
    return outcome


def _alg(oracle: ValueOracle, cfg: AlgConfig, rounds: int, level: int, node_id: str) -> AlgOutcome:
    ledger = oracle.ledger
    start = ledger.count
    m = oracle.ground_size

    with ledger.at_level(level):
        shifted = shift(oracle)
        ls = ls_approx_local_max(shifted, cfg.ls_config())
    ls_queries = ledger.count - start

    s = ls.set
    s_comp = s.complement()
    with ledger.at_level(level):
        s_comp_value = shifted.evaluate(s_comp)

    candidates: list[tuple[Candidate, Subset, float]] = [
        ("S", s, ls.value),
        ("Sc", s_comp, s_comp_value),
    ]
    children: list[TraceNode] = []
    t1_value = t2_value = union_value = None
    child_queries = 0

    if rounds > 0 and not s.is_empty() and not s.is_full():
        f1 = restrict(shifted, s_comp)
        first = _alg(f1, cfg, rounds - 1, level + 1, f"{node_id}.1")
        f2 = pin_union(shifted, s_comp, s)
        second = _alg(f2, cfg, rounds - 1, level + 1, f"{node_id}.2")
        union = f1.lift(first.subset) | f2.lift(second.subset)
        with ledger.at_level(level):
            union_value = shifted.evaluate(union)
        candidates.append(("T1uT2", union, union_value))
        children = [first.trace, second.trace]
        t1_value, t2_value = first.value, second.value
        child_queries = first.trace.queries + second.trace.queries

    candidates.append(("M", oracle.full(), shifted.full_value))
    candidates.append(("empty", oracle.empty(), shifted.empty_value))

    chosen, chosen_set, chosen_value = candidates[0]
    for label, subset, value in candidates[1:]:
        if value > chosen_value:
            chosen, chosen_set, chosen_value = label, subset, value

    with ledger.at_level(level):
        value = oracle.evaluate(chosen_set)

    queries = ledger.count - start
    trace = TraceNode(
        node_id=node_id,
        level=level,
        depth=rounds,
        ground_size=m,
        shift=shifted.constant,
        s_set=s.members(),
        s_value=ls.value,
        s_comp_value=s_comp_value,
        empty_value=shifted.empty_value,
        full_value=shifted.full_value,
        t1_value=t1_value,
        t2_value=t2_value,
        t1_union_t2_value=union_value,
        chosen=chosen,
        chosen_value=chosen_value,
        result_set=chosen_set.members(),
        ls_moves=ls.moves,
        ls_queries=ls_queries,
        local_queries=queries - child_queries,
        queries=queries,
        children=children,
    )
    return AlgOutcome(chosen_set, value, trace)


# --- Closed-form lower bounds on alpha_i ---


class AlphaBound(BaseModel):
    """Arguments (x_OPT, x_0, x_M) of alpha_i together with epsilon."""

    x_opt: float
    x_0: float
    x_m: float
    epsilon: float = 0.0


def _require_non_negative(b: AlphaBound) -> None:
    if min(b.x_opt, b.x_0, b.x_m) < 0:
        raise AlphaBoundError(f"alpha bounds need non-negative arguments, got {b}")


def alpha0_bound(b: AlphaBound) -> float:
    """alpha_0 >= max((x_opt + x_0 + x_m) / 3, x_m, x_0)."""
    _require_non_negative(b)
    return max((b.x_opt + b.x_0 + b.x_m) / 3.0, b.x_m, b.x_0)


def alpha1_bound(b: AlphaBound) -> float:
    """alpha_1 >= max((1-eps)/3 x_opt + (1-eps)/2 x_end, x_0, x_m) when one endpoint is 0."""
    _require_non_negative(b)
    if b.x_0 > 0 and b.x_m > 0:
        raise AlphaBoundError("alpha_1 bound covers only x_0 = 0 or x_m = 0")
    e = b.epsilon
    linear = (1.0 - e) / 3.0 * b.x_opt + (1.0 - e) / 2.0 * max(b.x_0, b.x_m)
    return max(linear, b.x_0, b.x_m)


def alpha2_bound(b: AlphaBound) -> float:
    """alpha_2 >= (2/5 - eps) x_opt."""
    _require_non_negative(b)
    return (0.4 - b.epsilon) * b.x_opt


def alpha_lower_bound(rounds: int, b: AlphaBound) -> float:
    """Best closed-form lower bound on alpha_rounds at b.

    alpha is monotone in each argument, so the depth-1 bound may lower either
    endpoint to 0; every depth can return M or ∅.
    """
    _require_non_negative(b)
    if rounds == 0:
        return alpha0_bound(b)
    if rounds == 1:
        return max(
            alpha1_bound(b.model_copy(update={"x_0": 0.0})),
            alpha1_bound(b.model_copy(update={"x_m": 0.0})),
        )
    if rounds == 2:
        return max(alpha2_bound(b), b.x_0, b.x_m)
    return max(b.x_0, b.x_m)


# --- Verification ---


def node_optima(oracle: ValueOracle, trace: TraceNode, max_m: int | None = None) -> dict[str, float]:
    """Brute-force optimum of every node's shifted oracle, rebuilt from the trace.

    Queries go to an independent ledger.
    """
    optima: dict[str, float] = {}

    def visit(node_oracle: ValueOracle, node: TraceNode) -> None:
        if node_oracle.ground_size != node.ground_size:
            raise TraceVerificationError(
                f"node {node.node_id}: trace has m={node.ground_size}, "
                f"replayed oracle has m={node_oracle.ground_size}"
            )
        shifted = shift(node_oracle)
        optima[node.node_id] = brute_force_opt(shifted, max_m=max_m).opt_value
        if node.children:
            s = Subset.from_indices(node.s_set, node.ground_size)
            visit(restrict(shifted, ~s), node.children[0])
            visit(pin_union(shifted, ~s, s), node.children[1])

    visit(isolated(oracle), trace)
    return optima


def _check(node_id: str, name: str, lhs: float, rhs: float, tol: float, detail: str = "") -> VerificationCheck:
    slack = lhs - rhs
    scale = tol * max(1.0, abs(lhs), abs(rhs))
    return VerificationCheck(
        node_id=node_id, name=name, passed=slack >= -scale, lhs=lhs, rhs=rhs, slack=slack, detail=detail
    )


def verify_trace(
    trace: TraceNode,
    exact_values: dict[str, float],
    epsilon: float,
    tolerance: float | None = None,
) -> TraceReport:
    """Check the local-max, composition and ratio inequalities at every node.

    Composition arguments are clamped at 0 before the alpha bounds apply.
    """
    tol = get_settings().float_tolerance if tolerance is None else tolerance
    report = TraceReport()
    eps = epsilon

    for node in trace.walk():
        if node.node_id not in exact_values:
            raise TraceVerificationError(f"no exact optimum supplied for node {node.node_id}")
        opt = exact_values[node.node_id]
        nid = node.node_id

        candidates = node.candidates()
        best = max(candidates.values())
        report.checks.append(
            VerificationCheck(
                node_id=nid,
                name="argmax",
                passed=node.chosen_value == best
                and candidates[node.chosen] == node.chosen_value
                and next(k for k in CANDIDATE_ORDER if candidates.get(k) == best) == node.chosen,
                lhs=node.chosen_value,
                rhs=best,
                slack=node.chosen_value - best,
            )
        )
        report.checks.append(
            _check(
                nid,
                "lmsthird",
                2.0 * (1.0 + eps) * node.s_value + node.s_comp_value,
                opt + node.full_value + node.empty_value,
                tol,
            )
        )

        if node.recursed:
            union = node.t1_union_t2_value
            report.checks.append(
                _check(nid, "glue", union, node.t1_value + node.t2_value - node.s_comp_value, tol)
            )
            first = AlphaBound(
                x_opt=max(opt + node.empty_value - (1.0 + eps) * node.s_value, 0.0),
                x_0=max(node.empty_value, 0.0),
                x_m=max(node.s_comp_value, 0.0),
                epsilon=eps,
            )
            second = AlphaBound(
                x_opt=max(opt + node.full_value - (1.0 + eps) * node.s_value, 0.0),
                x_0=max(node.s_comp_value, 0.0),
                x_m=max(node.full_value, 0.0),
                epsilon=eps,
            )
            rounds = node.depth - 1
            bound_first = alpha_lower_bound(rounds, first)
            bound_second = alpha_lower_bound(rounds, second)
            report.checks.append(
                _check(
                    nid,
                    "composition",
                    union,
                    bound_first + bound_second - node.s_comp_value,
                    tol,
                    detail=f"alpha_{rounds} bounds {bound_first:.6g} + {bound_second:.6g}",
                )
            )
            report.checks.append(_check(nid, "composition-weak", union, bound_second, tol))

    report.checks.extend(_root_checks(trace, exact_values[trace.node_id], eps, tol))
    return report


def _root_checks(root: TraceNode, opt: float, eps: float, tol: float) -> list[VerificationCheck]:
    consistent = all(v <= opt + tol * max(1.0, abs(opt)) for v in root.candidates().values())
    checks = []
    if root.depth == 2:
        if consistent:
            checks.append(_check(root.node_id, "ratio-two-fifths", root.chosen_value, (0.4 - eps) * opt, tol))
        else:
            checks.append(
                VerificationCheck(
                    node_id=root.node_id,
                    name="ratio-two-fifths",
                    passed=None,
                    detail="recorded candidate values exceed the supplied optimum",
                )
            )
    if root.depth == 0 and consistent:
        checks.append(
            _check(
                root.node_id,
                "ratio-depth-zero",
                root.chosen_value,
                (opt + root.full_value + root.empty_value) / (3.0 * (1.0 + eps)),
                tol,
            )
        )
    return checks


def node_query_budget(m: int, epsilon: float) -> int:
    """Worst-case queries of one node outside its children."""
    return ls_query_budget(m, epsilon) + ARGMAX_QUERIES


def check_query_recursion(trace: TraceNode, epsilon: float) -> list[VerificationCheck]:
    """Subtree queries <= m * L(m) at every node, L being the per-node query budget."""
    observed = max(node.ls_queries for node in trace.walk())
    checks = []
    for node in trace.walk():
        m = max(node.ground_size, 1)
        bound = m * node_query_budget(node.ground_size, epsilon)
        checks.append(
            VerificationCheck(
                node_id=node.node_id,
                name="query-recursion",
                passed=node.queries <= bound,
                lhs=float(bound),
                rhs=float(node.queries),
                slack=float(bound - node.queries),
                detail=f"max observed local-search queries {observed}",
            )
        )
    return checks


class SweepRow(BaseModel):
    depth: int
    epsilon: float
    value: float
    queries: int


def depth_sweep(oracle: ValueOracle, epsilons: list[float], depths: list[int]) -> list[SweepRow]:
    """Run alg for every (depth, epsilon); each run counts on its own ledger."""
    if any(d < 0 for d in depths):
        raise ValueError("depths must be non-negative")
    rows = []
    for depth in depths:
        for eps in epsilons:
            view = isolated(oracle)
            outcome = alg(view, AlgConfig(epsilon=eps, nrounds=depth))
            rows.append(SweepRow(depth=depth, epsilon=eps, value=outcome.value, queries=view.ledger.count))
    return rows
