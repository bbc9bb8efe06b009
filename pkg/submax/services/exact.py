"""Brute-force ground truth for small instances."""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from submax.core.config import get_settings
from submax.core.oracle import Subset, ValueOracle

logger = logging.getLogger(__name__)

_CHUNK = 1 << 14


class ExactSolverError(ValueError):
    """Instance too large for enumeration, or an undefined ratio."""


class ExactResult(BaseModel):
    """Exact optimum; ties go to the smallest bitmask."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    opt_set: Subset
    opt_value: float
    evaluations: int


def _check_cap(m: int, cap: int, what: str) -> None:
    if m > cap:
        raise ExactSolverError(f"{what} is capped at m <= {cap}, got m = {m}")


def value_table(oracle: ValueOracle, max_m: int | None = None) -> np.ndarray:
    """All 2^m values of oracle indexed by bitmask (2^m queries)."""
    cap = get_settings().max_brute_m if max_m is None else max_m
    m = oracle.ground_size
    _check_cap(m, cap, "value table")
    total = 1 << m
    table = np.empty(total, dtype=np.float64)
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        table[lo:hi] = oracle.evaluate_many(np.arange(lo, hi, dtype=np.int64))
    return table


def brute_force_opt(oracle: ValueOracle, max_m: int | None = None) -> ExactResult:
    """Exhaustively maximize f over all 2^m subsets."""
    cap = get_settings().max_brute_m if max_m is None else max_m
    m = oracle.ground_size
    _check_cap(m, cap, "brute force")
    total = 1 << m
    best_mask, best_value = 0, -np.inf
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        values = oracle.evaluate_many(np.arange(lo, hi, dtype=np.int64))
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_mask, best_value = lo + i, float(values[i])
    logger.debug("brute force m=%d: opt=%.6g at %#x", m, best_value, best_mask)
    return ExactResult(opt_set=Subset(best_mask, m), opt_value=best_value, evaluations=total)


def enumerate_exact_local_maxima(oracle: ValueOracle, max_m: int | None = None) -> list[Subset]:
    """All S with f(S) >= f(S ± j) for every single element j."""
    cap = get_settings().max_local_maxima_m if max_m is None else max_m
    m = oracle.ground_size
    _check_cap(m, cap, "local-maxima enumeration")
    table = value_table(oracle, max_m=cap)
    masks = np.arange(1 << m, dtype=np.int64)
    stable = np.ones(1 << m, dtype=bool)
    for j in range(m):
        stable &= table >= table[masks ^ (1 << j)]
    return [Subset(int(x), m) for x in np.flatnonzero(stable)]


def is_exact_local_max_all_t(table: np.ndarray, mask: int) -> bool:
    """f(S) >= f(S ∪ T) and f(S) >= f(S − T) for all T, read off a value table."""
    masks = np.arange(len(table), dtype=np.int64)
    value = table[mask]
    supersets = table[(masks & mask) == mask]
    subsets = table[(masks & ~mask) == 0]
    return bool(supersets.max() <= value and subsets.max() <= value)


def ratio(value: float, exact: ExactResult, tolerance: float | None = None) -> float:
    """value / OPT, with 0/0 defined as 1.

    Values within tolerance of 0 count as 0 against a zero optimum.
    """
    tol = get_settings().float_tolerance if tolerance is None else tolerance
    if exact.opt_value < 0:
        raise ExactSolverError(f"ratio needs a non-negative optimum, got {exact.opt_value}")
    if exact.opt_value == 0:
        if abs(value) <= tol:
            return 1.0
        raise ExactSolverError(f"value {value} against a zero optimum")
    return value / exact.opt_value
