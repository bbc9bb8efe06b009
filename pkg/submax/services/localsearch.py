"""Local search to an approximate local maximum, with double-greedy warm starts."""

import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt

from submax.core.config import get_settings
from submax.core.oracle import Subset, ValueOracle
from submax.core.rng import SplitMix64

logger = logging.getLogger(__name__)

WarmStart = Literal["double-greedy", "best-singleton", "empty"]


class LsConfig(BaseModel):
    """Local-search accuracy and safety settings."""

    epsilon: PositiveFloat
    max_moves: PositiveInt | None = None
    warm_start: WarmStart = "double-greedy"

    def delta(self, m: int) -> float:
        """Per-move improvement threshold epsilon / m."""
        return self.epsilon / m if m else 0.0


class LsResult(BaseModel):
    """Outcome of one local-search run."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    set: Subset
    value: float
    moves: int
    warm_start_value: float
    queries: int = 0


class LocalSearchError(RuntimeError):
    """Local search could not complete."""


class MoveLimitExceeded(LocalSearchError):
    """The move cap was hit; the partial result is attached."""

    def __init__(self, message: str, partial_result: LsResult):
        super().__init__(message)
        self.partial_result = partial_result


# --- Double greedy ---


def _double_greedy(oracle: ValueOracle, rng: SplitMix64 | None) -> tuple[Subset, float]:
    """Shared double-greedy pass: 2m + 2 queries, X grows while Y shrinks until X = Y."""
    m = oracle.ground_size
    x, y = 0, (1 << m) - 1
    fx = oracle.evaluate_mask(x)
    fy = oracle.evaluate_mask(y)
    for i in range(m):
        bit = 1 << i
        f_add = oracle.evaluate_mask(x | bit)
        f_drop = oracle.evaluate_mask(y & ~bit)
        a = f_add - fx
        b = f_drop - fy
        if rng is None:
            take = a >= b
        else:
            a_pos, b_pos = max(a, 0.0), max(b, 0.0)
            if a_pos + b_pos == 0:
                take = a >= b
            else:
                take = rng.next_float() < a_pos / (a_pos + b_pos)
        if take:
            x |= bit
            fx = f_add
        else:
            y &= ~bit
            fy = f_drop
    return Subset(x, m), fx


def double_greedy_det(oracle: ValueOracle) -> Subset:
    """Deterministic double greedy; f(T) >= (f(OPT) + f(∅) + f(M)) / 3."""
    return _double_greedy(oracle, None)[0]


def double_greedy_rand(oracle: ValueOracle, rng: SplitMix64) -> Subset:
    """Randomized double greedy; E[f(T)] >= f(OPT) / 2 for non-negative f."""
    return _double_greedy(oracle, rng)[0]


def _warm_start(oracle: ValueOracle, kind: WarmStart) -> tuple[Subset, float]:
    m = oracle.ground_size
    if kind == "double-greedy":
        return _double_greedy(oracle, None)
    if kind == "empty":
        return oracle.empty(), oracle.evaluate_mask(0)
    best_mask, best_value = 0, oracle.evaluate_mask(0)
    for i in range(m):
        value = oracle.evaluate_mask(1 << i)
        if value > best_value:
            best_mask, best_value = 1 << i, value
    return Subset(best_mask, m), best_value


# --- Local search ---


def ls_approx_local_max(oracle: ValueOracle, cfg: LsConfig) -> LsResult:
    """Single-element local search from a warm start.

    Scans indices in ascending order and takes the first add/remove whose
    value exceeds (1 + epsilon/m) * max(f(S), 0), restarting the scan after
    every move. Meant to run on a shifted oracle.
    """
    m = oracle.ground_size
    start = oracle.ledger.count
    s, value = _warm_start(oracle, cfg.warm_start)
    warm_value = value
    mask = s.mask
    delta = cfg.delta(m)
    moves = 0

    improved = True
    while improved:
        improved = False
        threshold = (1.0 + delta) * max(value, 0.0)
        for j in range(m):
            candidate = mask ^ (1 << j)
            candidate_value = oracle.evaluate_mask(candidate)
            if candidate_value > threshold:
                if cfg.max_moves is not None and moves >= cfg.max_moves:
                    partial = LsResult(
                        set=Subset(mask, m),
                        value=value,
                        moves=moves,
                        warm_start_value=warm_value,
                        queries=oracle.ledger.count - start,
                    )
                    raise MoveLimitExceeded(
                        f"local search exceeded {cfg.max_moves} moves (epsilon={cfg.epsilon}, m={m})",
                        partial,
                    )
                logger.debug("LS move %d: toggle %d, %.6g -> %.6g", moves + 1, j, value, candidate_value)
                mask, value = candidate, candidate_value
                moves += 1
                improved = True
                break

    if moves == 0 and value <= 0.0 and m > 0:
        empty_value = oracle.evaluate_mask(0)
        full_value = oracle.evaluate_mask((1 << m) - 1)
        endpoint_mask, endpoint_value = (
            (0, empty_value) if empty_value >= full_value else ((1 << m) - 1, full_value)
        )
        if endpoint_value > value:
            mask, value = endpoint_mask, endpoint_value

    return LsResult(
        set=Subset(mask, m),
        value=value,
        moves=moves,
        warm_start_value=warm_value,
        queries=oracle.ledger.count - start,
    )


def is_approx_local_max(
    oracle: ValueOracle,
    s: Subset,
    epsilon: float,
    mode: Literal["single", "exhaustive"] = "single",
    tolerance: float | None = None,
) -> bool:
    """Check (1+epsilon)-approximate local maximality of s.

    single: every one-element add/remove is at most (1 + epsilon/m) * max(f(s), 0).
    exhaustive: (1+epsilon) f(s) >= f(s ∪ T) and >= f(s ∩ T) for every T.
    """
    settings = get_settings()
    tol = settings.float_tolerance if tolerance is None else tolerance
    m = oracle.ground_size
    if s.ground_size != m:
        raise ValueError(f"subset over {s.ground_size} elements, oracle over {m}")

    if mode == "single":
        f_s = oracle.evaluate(s)
        threshold = (1.0 + (epsilon / m if m else 0.0)) * max(f_s, 0.0)
        slack = tol * max(1.0, abs(threshold))
        return all(
            oracle.evaluate_mask(s.mask ^ (1 << j)) <= threshold + slack for j in range(m)
        )

    if mode == "exhaustive":
        if m > settings.max_exhaustive_local_max_m:
            raise ValueError(
                f"exhaustive local-max check needs m <= {settings.max_exhaustive_local_max_m}, got {m}"
            )
        table = oracle.evaluate_many(np.arange(1 << m, dtype=np.int64))
        masks = np.arange(1 << m, dtype=np.int64)
        threshold = (1.0 + epsilon) * float(table[s.mask])
        slack = tol * max(1.0, abs(threshold))
        supersets = table[(masks & s.mask) == s.mask]
        subsets = table[(masks & ~s.mask) == 0]
        return bool(supersets.max() <= threshold + slack and subsets.max() <= threshold + slack)

    raise ValueError(f"unknown mode {mode!r}")


def move_bound(epsilon: float, m: int) -> float:
    """Upper bound on improving moves from a warm start within a factor 3 of OPT."""
    if m == 0:
        return 0.0
    return math.log(3.0 * (1.0 + epsilon)) / math.log1p(epsilon / m)


def ls_query_budget(m: int, epsilon: float) -> int:
    """Worst-case queries of shift + double greedy + local search on m elements."""
    moves = math.ceil(move_bound(epsilon, m))
    return 2 + (2 * m + 2) + (moves + 1) * m + 2
