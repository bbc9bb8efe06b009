"""Instance construction, generation, (de)serialization and submodularity checks."""

import hashlib
import logging
import re
from collections.abc import Iterator
from itertools import combinations
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter, ValidationError, model_validator

from submax.core.config import get_settings
from submax.core.oracle import MAX_BATCH_M, QueryLedger, Subset, ValueOracle
from submax.core.rng import SplitMix64
from submax.models.instance import (
    CoverageInstance,
    CutInstance,
    DirectedCutInstance,
    Instance,
)

logger = logging.getLogger(__name__)

_instance_adapter: TypeAdapter[Instance] = TypeAdapter(Instance)
_JSON_POSITION = re.compile(r"line (\d+) column (\d+)")


class InstanceValidationError(ValueError):
    """Invalid instance, generator parameters or check request."""


class InstanceParseError(InstanceValidationError):
    """Malformed instance text, with the position or field path of the problem."""

    def __init__(
        self,
        message: str,
        line: int | None = None,
        column: int | None = None,
        location: str | None = None,
        original_exception: Exception | None = None,
    ):
        super().__init__(message)
        self.line = line
        self.column = column
        self.location = location
        self.original_exception = original_exception


# --- Oracles ---


class CutOracle(ValueOracle):
    """Undirected cut function; also serves directed cuts when directed=True."""

    def __init__(self, m: int, edges, directed: bool = False, ledger: QueryLedger | None = None, labels=None):
        super().__init__(m, ledger, labels)
        self.directed = directed
        self._edges = [(int(u), int(v), float(w)) for u, v, w in edges]
        self._tails = np.array([u for u, _, _ in self._edges], dtype=np.int64)
        self._heads = np.array([v for _, v, _ in self._edges], dtype=np.int64)
        self._weights = np.array([w for _, _, w in self._edges], dtype=np.float64)

    def _value(self, mask: int) -> float:
        total = 0.0
        if self.directed:
            for u, v, w in self._edges:
                if mask >> u & 1 and not mask >> v & 1:
                    total += w
        else:
            for u, v, w in self._edges:
                if (mask >> u ^ mask >> v) & 1:
                    total += w
        return total

    def _values(self, masks: np.ndarray) -> np.ndarray:
        if not self._edges:
            return np.zeros(len(masks), dtype=np.float64)
        tail_in = (masks[:, None] >> self._tails) & 1
        head_in = (masks[:, None] >> self._heads) & 1
        crossing = tail_in & (1 - head_in) if self.directed else tail_in ^ head_in
        return crossing.astype(np.float64) @ self._weights


class CoverageOracle(ValueOracle):
    """f(S) = total weight of universe items covered by the sets chosen in S."""

    def __init__(self, m: int, weights, sets, ledger: QueryLedger | None = None, labels=None):
        super().__init__(m, ledger, labels)
        self._weights = np.asarray(weights, dtype=np.float64)
        cover = [0] * len(weights)
        for i, items in enumerate(sets):
            for item in items:
                cover[item] |= 1 << i
        self._cover = cover
        # Bit masks only fit int64 below MAX_BATCH_M; larger ground sets use the int path.
        self._cover_arr = np.array(cover, dtype=np.int64) if m <= MAX_BATCH_M else None

    def _value(self, mask: int) -> float:
        return float(sum(w for c, w in zip(self._cover, self._weights) if c & mask))

    def _values(self, masks: np.ndarray) -> np.ndarray:
        if not self._cover:
            return np.zeros(len(masks), dtype=np.float64)
        if self._cover_arr is None:
            return super()._values(masks)
        covered = (masks[:, None] & self._cover_arr) != 0
        return covered.astype(np.float64) @ self._weights


def build_oracle(inst: Instance, ledger: QueryLedger | None = None) -> ValueOracle:
    """Build the value oracle an instance describes."""
    match inst:
        case CutInstance():
            return CutOracle(inst.m, inst.edges, ledger=ledger, labels=inst.labels)
        case DirectedCutInstance():
            return CutOracle(inst.m, inst.edges, directed=True, ledger=ledger, labels=inst.labels)
        case CoverageInstance():
            return CoverageOracle(inst.m, inst.weights, inst.sets, ledger=ledger, labels=inst.labels)
    raise InstanceValidationError(f"unsupported instance type {type(inst).__name__}")


# --- Generation ---


class RandomParams(BaseModel):
    """Generator parameters; cut kinds use p and the weight range, coverage kinds
    use universe, density and the weight range."""

    p: float = Field(0.5, ge=0.0, le=1.0)
    weight_low: float = Field(0.0, ge=0.0)
    weight_high: float = Field(1.0, ge=0.0)
    universe: int = Field(8, ge=0)
    density: float = Field(0.3, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_range(self):
        if self.weight_low > self.weight_high:
            raise ValueError("weight_low must not exceed weight_high")
        return self


def random_instance(
    kind: Literal["random-cut", "random-coverage"],
    m: int,
    seed: int,
    params: RandomParams | dict | None = None,
) -> Instance:
    """Deterministic instance from (kind, m, seed, params) via splitmix64.

    random-cut visits pairs i < j in lexicographic order, keeps an edge when a
    draw falls below p, then draws its weight. random-coverage draws the
    universe weights first, then membership of every (set, item) pair.
    """
    if m < 1:
        raise InstanceValidationError(f"m must be at least 1, got {m}")
    try:
        params = (
            params
            if isinstance(params, RandomParams)
            else RandomParams.model_validate(params or {})
        )
    except ValidationError as exc:
        raise InstanceValidationError(f"invalid generator parameters: {exc}") from exc

    rng = SplitMix64(seed)
    lo, hi = params.weight_low, params.weight_high
    if kind == "random-cut":
        edges = []
        for i, j in combinations(range(m), 2):
            if rng.next_float() < params.p:
                edges.append((i, j, rng.uniform(lo, hi)))
        inst = CutInstance(kind="random-cut", m=m, edges=edges, seed=seed)
    elif kind == "random-coverage":
        weights = [rng.uniform(lo, hi) for _ in range(params.universe)]
        sets = [
            [k for k in range(params.universe) if rng.next_float() < params.density]
            for _ in range(m)
        ]
        inst = CoverageInstance(
            kind="random-coverage",
            m=m,
            universe=params.universe,
            weights=weights,
            sets=sets,
            seed=seed,
        )
    else:
        raise InstanceValidationError(f"unknown random kind {kind!r}")
    logger.debug("Generated %s instance m=%d seed=%d", kind, m, seed)
    return inst


def all_graphs(m: int) -> Iterator[CutInstance]:
    """Every unit-weight undirected graph on m vertices, in edge-bitmask order."""
    pairs = list(combinations(range(m), 2))
    for code in range(1 << len(pairs)):
        edges = [(u, v, 1.0) for bit, (u, v) in enumerate(pairs) if code >> bit & 1]
        yield CutInstance(m=m, edges=edges, name=f"graph{m}-{code}")


def fingerprint(inst: Instance) -> str:
    return hashlib.sha256(serialize(inst).encode("utf-8")).hexdigest()


def instance_id(inst: Instance) -> str:
    """Stable identifier used to key and sort report rows."""
    if inst.name:
        return inst.name
    if inst.seed is not None:
        return f"{inst.kind}-m{inst.m}-s{inst.seed}"
    return f"{inst.kind}-m{inst.m}-{fingerprint(inst)[:12]}"


# --- Serialization ---


def serialize(inst: Instance) -> str:
    """Compact JSON text of an instance (optional fields omitted when unset)."""
    return _instance_adapter.dump_json(inst, exclude_none=True).decode("utf-8")


def parse(text: str) -> Instance:
    """Parse and validate instance JSON text."""
    try:
        return _instance_adapter.validate_json(text)
    except ValidationError as exc:
        err = exc.errors()[0]
        if err["type"] == "json_invalid":
            detail = str(err.get("ctx", {}).get("error", err["msg"]))
            found = _JSON_POSITION.search(detail)
            line, column = (int(found[1]), int(found[2])) if found else (None, None)
            raise InstanceParseError(
                f"malformed instance JSON: {detail}",
                line=line,
                column=column,
                original_exception=exc,
            ) from exc
        location = ".".join(str(part) for part in err["loc"])
        raise InstanceParseError(
            f"invalid instance at {location or '<root>'}: {err['msg']}",
            location=location,
            original_exception=exc,
        ) from exc


def read_instance(path: str | Path) -> Instance:
    return parse(Path(path).read_text(encoding="utf-8"))


def write_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(serialize(inst) + "\n", encoding="utf-8")


# --- Submodularity ---


class SubmodularityWitness(BaseModel):
    """A violated pairwise inequality f(S+j) + f(S+k) >= f(S+j+k) + f(S)."""

    s: list[int]
    j: int
    k: int
    lhs: float
    rhs: float


class SubmodularityVerdict(BaseModel):
    passed: bool
    mode: Literal["exhaustive", "sampled"]
    checked: int
    witness: SubmodularityWitness | None = None
    negative_set: list[int] | None = None
    negative_value: float | None = None


def _members(mask: int, m: int) -> list[int]:
    return [i for i in range(m) if mask >> i & 1]


def check_submodular(
    oracle: ValueOracle,
    mode: Literal["exhaustive", "sampled"] = "exhaustive",
    trials: int | None = None,
    rng: SplitMix64 | None = None,
    tolerance: float | None = None,
) -> SubmodularityVerdict:
    """Check submodularity through the pairwise-element characterization, and f >= 0.

    Exhaustive mode tabulates all 2^m values once and checks every (S, j, k);
    sampled mode draws (S, j, k) from rng and costs four queries per trial.
    """
    settings = get_settings()
    m = oracle.ground_size
    tol = settings.float_tolerance if tolerance is None else tolerance

    if mode == "exhaustive":
        if m > settings.max_exhaustive_submodular_m:
            raise InstanceValidationError(
                f"exhaustive check needs m <= {settings.max_exhaustive_submodular_m}, got {m}"
            )
        table = oracle.evaluate_many(np.arange(1 << m, dtype=np.int64))
        scale = tol * max(1.0, float(np.abs(table).max(initial=0.0)))
        negative = np.flatnonzero(table < -scale)
        verdict = SubmodularityVerdict(passed=True, mode=mode, checked=0)
        if negative.size:
            first = int(negative[0])
            verdict.passed = False
            verdict.negative_set = _members(first, m)
            verdict.negative_value = float(table[first])
        masks = np.arange(1 << m, dtype=np.int64)
        for j, k in combinations(range(m), 2):
            bj, bk = 1 << j, 1 << k
            base = masks[(masks & (bj | bk)) == 0]
            lhs = table[base | bj] + table[base | bk]
            rhs = table[base | bj | bk] + table[base]
            verdict.checked += int(base.size)
            bad = np.flatnonzero(lhs < rhs - scale)
            if bad.size:
                i = int(bad[0])
                verdict.passed = False
                verdict.witness = SubmodularityWitness(
                    s=_members(int(base[i]), m), j=j, k=k, lhs=float(lhs[i]), rhs=float(rhs[i])
                )
                break
        return verdict

    if mode == "sampled":
        if m < 2:
            return SubmodularityVerdict(passed=True, mode=mode, checked=0)
        trials = settings.sampled_trials if trials is None else trials
        if trials < 1:
            raise InstanceValidationError("sampled mode needs at least one trial")
        rng = rng or SplitMix64(0)
        verdict = SubmodularityVerdict(passed=True, mode=mode, checked=0)
        for _ in range(trials):
            mask = 0
            for chunk in range(0, m, 64):
                mask |= rng.next_u64() << chunk
            mask &= (1 << m) - 1
            j = rng.next_below(m)
            k = rng.next_below(m - 1)
            if k >= j:
                k += 1
            bj, bk = 1 << j, 1 << k
            mask &= ~(bj | bk)
            f_s = oracle.evaluate_mask(mask)
            f_j = oracle.evaluate_mask(mask | bj)
            f_k = oracle.evaluate_mask(mask | bk)
            f_jk = oracle.evaluate_mask(mask | bj | bk)
            verdict.checked += 1
            scale = tol * max(1.0, abs(f_s), abs(f_j), abs(f_k), abs(f_jk))
            for value, at in ((f_s, mask), (f_j, mask | bj), (f_k, mask | bk), (f_jk, mask | bj | bk)):
                if value < -scale and verdict.negative_set is None:
                    verdict.passed = False
                    verdict.negative_set = _members(at, m)
                    verdict.negative_value = value
            if f_j + f_k < f_jk + f_s - scale:
                verdict.passed = False
                verdict.witness = SubmodularityWitness(
                    s=_members(mask, m), j=min(j, k), k=max(j, k), lhs=f_j + f_k, rhs=f_jk + f_s
                )
                break
        return verdict

    raise InstanceValidationError(f"unknown check mode {mode!r}")
