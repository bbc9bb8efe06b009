"""Ground sets, subsets, value oracles and the oracle combinators.

Every algorithm in submax talks to a set function only through a
``ValueOracle``. Public evaluation (``evaluate``, ``evaluate_mask``,
``evaluate_many``) is what the query ledger counts; the private ``_value``
chain used by derived oracles is never counted, so a query to a derived
oracle costs exactly one query on the shared ledger.
"""

import logging
import threading
from abc import ABC, abstractmethod
from collections import defaultdict
from collections.abc import Callable, Iterable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

# Batch evaluation packs masks into int64.
MAX_BATCH_M = 62


class OracleContractError(ValueError):
    """Raised when a subset or oracle violates a dimension or disjointness contract."""


class OracleCancelled(RuntimeError):
    """A query was issued on a ledger whose run has been cancelled."""


@dataclass(frozen=True, slots=True)
class GroundSet:
    """A ground set M of m elements with optional element labels."""

    m: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.m < 0:
            raise OracleContractError(f"ground set size must be non-negative, got {self.m}")
        if self.labels is not None:
            if len(self.labels) != self.m:
                raise OracleContractError(
                    f"expected {self.m} labels, got {len(self.labels)}"
                )
            if len(set(self.labels)) != self.m:
                raise OracleContractError("element labels must be distinct")

    def empty(self) -> "Subset":
        return Subset.empty(self.m)

    def full(self) -> "Subset":
        return Subset.full(self.m)

    def label(self, subset: "Subset") -> list[str]:
        """Member labels of subset, or the member indices when the ground set is unlabelled."""
        if subset.ground_size != self.m:
            raise OracleContractError(f"subset over {subset.ground_size} elements, ground set has {self.m}")
        if self.labels is None:
            return [str(i) for i in subset.members()]
        return [self.labels[i] for i in subset.members()]


@dataclass(frozen=True, slots=True)
class Subset:
    """A subset of a ground set, stored as a dense bitmask."""

    mask: int
    ground_size: int

    def __post_init__(self) -> None:
        if self.ground_size < 0:
            raise OracleContractError("ground_size must be non-negative")
        if self.mask < 0 or self.mask >> self.ground_size:
            raise OracleContractError(
                f"mask {self.mask:#x} has members outside a ground set of size {self.ground_size}"
            )

    @classmethod
    def empty(cls, m: int) -> "Subset":
        return cls(0, m)

    @classmethod
    def full(cls, m: int) -> "Subset":
        return cls((1 << m) - 1, m)

    @classmethod
    def from_indices(cls, indices: Iterable[int], m: int) -> "Subset":
        mask = 0
        for i in indices:
            if not 0 <= i < m:
                raise OracleContractError(f"element {i} is outside a ground set of size {m}")
            mask |= 1 << i
        return cls(mask, m)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def members(self) -> list[int]:
        return [i for i in range(self.ground_size) if self.mask >> i & 1]

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __contains__(self, element: object) -> bool:
        return isinstance(element, int) and 0 <= element < self.ground_size and bool(
            self.mask >> element & 1
        )

    def is_empty(self) -> bool:
        return self.mask == 0

    def is_full(self) -> bool:
        return self.mask == (1 << self.ground_size) - 1

    def _check(self, other: "Subset") -> None:
        if other.ground_size != self.ground_size:
            raise OracleContractError(
                f"ground size mismatch: {self.ground_size} vs {other.ground_size}"
            )

    def union(self, other: "Subset") -> "Subset":
        self._check(other)
        return Subset(self.mask | other.mask, self.ground_size)

    def intersection(self, other: "Subset") -> "Subset":
        self._check(other)
        return Subset(self.mask & other.mask, self.ground_size)

    def difference(self, other: "Subset") -> "Subset":
        self._check(other)
        return Subset(self.mask & ~other.mask, self.ground_size)

    def complement(self) -> "Subset":
        return Subset(((1 << self.ground_size) - 1) ^ self.mask, self.ground_size)

    def toggle(self, element: int) -> "Subset":
        """The subset with element added if absent, removed if present."""
        if not 0 <= element < self.ground_size:
            raise OracleContractError(f"element {element} out of range")
        return Subset(self.mask ^ (1 << element), self.ground_size)

    def is_subset_of(self, other: "Subset") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: "Subset") -> bool:
        self._check(other)
        return self.mask & other.mask == 0

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __invert__ = complement

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.members()) + "}"


def union(s: Subset, t: Subset) -> Subset:
    return s.union(t)


def intersection(s: Subset, t: Subset) -> Subset:
    return s.intersection(t)


def difference(s: Subset, t: Subset) -> Subset:
    return s.difference(t)


def complement(s: Subset) -> Subset:
    return s.complement()


class QueryLedger:
    """Counts value queries, attributed to the current recursion level.

    Increments are guarded by a lock so concurrent readers see exact totals;
    the level attribution is per ledger, so one run per ledger at a time.
    Once the optional cancel event is set, every further query raises
    OracleCancelled, which stops a run at its next evaluation.
    """

    def __init__(self, cancel: threading.Event | None = None) -> None:
        self.cancel = cancel
        self._lock = threading.Lock()
        self._count = 0
        self._per_level: defaultdict[int, int] = defaultdict(int)
        self._level = 0

    @property
    def count(self) -> int:
        return self._count

    @property
    def level(self) -> int:
        return self._level

    @property
    def per_level(self) -> dict[int, int]:
        with self._lock:
            return dict(sorted(self._per_level.items()))

    def record(self, n: int = 1) -> None:
        if self.cancel is not None and self.cancel.is_set():
            raise OracleCancelled(f"run cancelled after {self._count} queries")
        with self._lock:
            self._count += n
            self._per_level[self._level] += n

    def snapshot(self) -> tuple[int, dict[int, int]]:
        """Total and per-level counts, read under the lock."""
        with self._lock:
            return self._count, dict(sorted(self._per_level.items()))

    @contextmanager
    def at_level(self, level: int) -> Iterator["QueryLedger"]:
        """Attribute queries issued inside the block to the given level."""
        previous = self._level
        self._level = level
        try:
            yield self
        finally:
            self._level = previous

    def __repr__(self) -> str:
        return f"QueryLedger(count={self._count}, per_level={self.per_level})"


class ValueOracle(ABC):
    """Abstract set function f: 2^M -> R accessed through value queries.

    Subclasses implement ``_value`` (and optionally the vectorised ``_values``).
    Oracles are immutable after construction.
    """

    def __init__(
        self, ground_size: int, ledger: QueryLedger | None = None, labels: Sequence[str] | None = None
    ) -> None:
        if ground_size < 0:
            raise OracleContractError("ground_size must be non-negative")
        self._ground_size = ground_size
        self._labels = GroundSet(ground_size, tuple(labels)).labels if labels is not None else None
        self.ledger = ledger if ledger is not None else QueryLedger()

    @property
    def ground_size(self) -> int:
        return self._ground_size

    def ground_set(self) -> GroundSet:
        return GroundSet(self._ground_size, self._labels)

    def empty(self) -> Subset:
        return Subset.empty(self._ground_size)

    def full(self) -> Subset:
        return Subset.full(self._ground_size)

    @abstractmethod
    def _value(self, mask: int) -> float:
        """Uncounted evaluation of the set encoded by mask."""
        ...

    def _values(self, masks: np.ndarray) -> np.ndarray:
        """Uncounted evaluation of a batch of masks; override to vectorise."""
        return np.fromiter((self._value(int(x)) for x in masks), dtype=np.float64, count=len(masks))

    def evaluate(self, s: Subset) -> float:
        """Return f(s), counting one query."""
        if s.ground_size != self._ground_size:
            raise OracleContractError(
                f"subset over {s.ground_size} elements passed to an oracle over {self._ground_size}"
            )
        self.ledger.record()
        return self._value(s.mask)

    def evaluate_mask(self, mask: int) -> float:
        """Return f of the set encoded by mask, counting one query."""
        if mask < 0 or mask >> self._ground_size:
            raise OracleContractError(f"mask {mask:#x} out of range for m={self._ground_size}")
        self.ledger.record()
        return self._value(mask)

    def evaluate_many(self, masks: Sequence[int] | np.ndarray) -> np.ndarray:
        """Return f for every mask in the batch, counting one query per mask."""
        if self._ground_size > MAX_BATCH_M:
            raise OracleContractError(
                f"batch evaluation supports at most {MAX_BATCH_M} elements"
            )
        arr = np.asarray(masks, dtype=np.int64)
        if arr.size and (arr.min() < 0 or int(arr.max()) >> self._ground_size):
            raise OracleContractError("batch contains masks outside the ground set")
        self.ledger.record(int(arr.size))
        return self._values(arr)

    def __call__(self, s: Subset) -> float:
        return self.evaluate(s)


class FunctionOracle(ValueOracle):
    """Oracle backed by an arbitrary Python callable over subsets."""

    def __init__(
        self,
        ground_size: int,
        fn: Callable[[Subset], float],
        ledger: QueryLedger | None = None,
    ) -> None:
        super().__init__(ground_size, ledger)
        self._fn = fn

    def _value(self, mask: int) -> float:
        return float(self._fn(Subset(mask, self._ground_size)))


class ModularOracle(ValueOracle):
    """f(S) = sum of w_i over i in S."""

    def __init__(self, weights: Sequence[float], ledger: QueryLedger | None = None) -> None:
        super().__init__(len(weights), ledger)
        self.weights = np.asarray(weights, dtype=np.float64)

    def _value(self, mask: int) -> float:
        return float(sum(w for i, w in enumerate(self.weights) if mask >> i & 1))

    def _values(self, masks: np.ndarray) -> np.ndarray:
        bits = (masks[:, None] >> np.arange(self._ground_size, dtype=np.int64)) & 1
        return bits.astype(np.float64) @ self.weights


def _bit_positions(masks: np.ndarray, index: Sequence[int]) -> np.ndarray:
    """Scatter bit i of each local mask to position index[i]."""
    out = np.zeros_like(masks)
    for i, g in enumerate(index):
        out |= ((masks >> i) & 1) << g
    return out


class DerivedOracle(ValueOracle):
    """An oracle defined in terms of a parent oracle; shares the parent's ledger."""

    def __init__(self, parent: ValueOracle, ground_size: int) -> None:
        super().__init__(ground_size, parent.ledger)
        self.parent = parent


class IsolatedOracle(ValueOracle):
    """Same function as the parent, counted on a ledger of its own."""

    def __init__(self, parent: ValueOracle, ledger: QueryLedger | None = None) -> None:
        super().__init__(parent.ground_size, ledger)
        self.parent = parent

    def _value(self, mask: int) -> float:
        return self.parent._value(mask)

    def _values(self, masks: np.ndarray) -> np.ndarray:
        return self.parent._values(masks)


class ShiftedOracle(DerivedOracle):
    """f'(T) = f(T) - min(f(∅), f(M)).

    The constant costs two queries on the parent, made once at construction.
    """

    def __init__(self, parent: ValueOracle) -> None:
        super().__init__(parent, parent.ground_size)
        base_empty = parent.evaluate(parent.empty())
        base_full = parent.evaluate(parent.full())
        self.constant = min(base_empty, base_full)
        self.empty_value = base_empty - self.constant
        self.full_value = base_full - self.constant

    def _value(self, mask: int) -> float:
        return self.parent._value(mask) - self.constant

    def _values(self, masks: np.ndarray) -> np.ndarray:
        return self.parent._values(masks) - self.constant


class IndexedOracle(DerivedOracle):
    """Derived oracle over a subset of the parent's elements, with its index map."""

    def __init__(self, parent: ValueOracle, elements: Subset) -> None:
        if elements.ground_size != parent.ground_size:
            raise OracleContractError(
                f"element set over {elements.ground_size} elements does not index "
                f"an oracle over {parent.ground_size}"
            )
        self.index: tuple[int, ...] = tuple(elements.members())
        super().__init__(parent, len(self.index))

    def _lift_mask(self, local: int) -> int:
        out = 0
        i = 0
        while local:
            if local & 1:
                out |= 1 << self.index[i]
            local >>= 1
            i += 1
        return out

    def lift(self, local: Subset) -> Subset:
        """Map a subset of this oracle's ground set into the parent's index space."""
        if local.ground_size != self._ground_size:
            raise OracleContractError(
                f"subset over {local.ground_size} elements cannot be lifted from m={self._ground_size}"
            )
        return Subset(self._lift_mask(local.mask), self.parent.ground_size)


class RestrictedOracle(IndexedOracle):
    """f_1(T) = f(T) for T a subset of M_1, re-indexed to 0..|M_1|-1."""

    def _value(self, mask: int) -> float:
        return self.parent._value(self._lift_mask(mask))

    def _values(self, masks: np.ndarray) -> np.ndarray:
        if self.parent.ground_size > MAX_BATCH_M:
            return super()._values(masks)
        return self.parent._values(_bit_positions(masks, self.index))


class PinnedOracle(IndexedOracle):
    """f_2(T) = f(P ∪ T) for T a subset of M_2, with P pinned and disjoint from M_2."""

    def __init__(self, parent: ValueOracle, pinned: Subset, elements: Subset) -> None:
        if pinned.ground_size != parent.ground_size:
            raise OracleContractError("pinned set does not match the oracle's ground set")
        if pinned.mask & elements.mask:
            overlap = Subset(pinned.mask & elements.mask, pinned.ground_size)
            raise OracleContractError(f"pinned set overlaps the free elements on {overlap}")
        super().__init__(parent, elements)
        self.pinned = pinned

    def _value(self, mask: int) -> float:
        return self.parent._value(self.pinned.mask | self._lift_mask(mask))

    def _values(self, masks: np.ndarray) -> np.ndarray:
        if self.parent.ground_size > MAX_BATCH_M:
            return super()._values(masks)
        return self.parent._values(_bit_positions(masks, self.index) | self.pinned.mask)


def evaluate(oracle: ValueOracle, s: Subset) -> float:
    """f(s); one query."""
    return oracle.evaluate(s)


def shift(oracle: ValueOracle) -> ShiftedOracle:
    """Shift so that min(f'(∅), f'(M)) = 0."""
    return ShiftedOracle(oracle)


def restrict(oracle: ValueOracle, m1: Subset) -> RestrictedOracle:
    """View oracle on subsets of m1 only."""
    return RestrictedOracle(oracle, m1)


def pin_union(oracle: ValueOracle, pinned: Subset, m2: Subset) -> PinnedOracle:
    """T -> f(pinned ∪ T) over subsets T of m2."""
    return PinnedOracle(oracle, pinned, m2)


def lift(oracle: IndexedOracle, local: Subset) -> Subset:
    return oracle.lift(local)


def isolated(oracle: ValueOracle) -> IsolatedOracle:
    """A view of oracle with a fresh, independent ledger."""
    return IsolatedOracle(oracle)
