"""Benchmark configuration and report models."""

import re
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, field_validator, model_validator

from submax.models.trace import TraceNode, VerificationCheck

ALGORITHM_NAME = re.compile(r"alg@\d+|ls|dg-det|dg-rand|brute")

ReportFormat = Literal["csv", "markdown", "json"]


class GeneratorSpec(BaseModel):
    """count seeded instances of one random family, seeds seed, seed+1, ..."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["random-cut", "random-coverage"]
    m: PositiveInt
    seed: NonNegativeInt = 0
    count: PositiveInt = 1
    params: dict[str, Any] = {}


class SuiteSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: Literal["all-graphs"]
    m: NonNegativeInt = Field(le=6)


class BenchConfig(BaseModel):
    """A bench run: instance sources crossed with algorithms and epsilons."""

    model_config = ConfigDict(extra="forbid")

    files: list[str] = []
    generators: list[GeneratorSpec] = []
    suites: list[SuiteSpec] = []
    algorithms: list[str] = Field(min_length=1)
    epsilons: list[PositiveFloat] = [0.05]
    trials: PositiveInt = 1  # randomized baselines only
    base_seed: NonNegativeInt = 0
    format: ReportFormat = "csv"
    verify: bool = False
    include_traces: bool = False

    @field_validator("algorithms")
    @classmethod
    def validate_algorithms(cls, v: list[str]) -> list[str]:
        unknown = [name for name in v if not ALGORITHM_NAME.fullmatch(name)]
        if unknown:
            raise ValueError(f"unknown algorithms: {', '.join(unknown)}")
        if len(set(v)) != len(v):
            raise ValueError("algorithms must be distinct")
        return v

    @field_validator("epsilons")
    @classmethod
    def validate_epsilons(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("at least one epsilon is required")
        return v

    @model_validator(mode="after")
    def check_sources(self):
        if not (self.files or self.generators or self.suites):
            raise ValueError("at least one instance source (files, generators, suites) is required")
        return self


class RunRow(BaseModel):
    """One (instance, algorithm, epsilon) cell."""

    instance: str
    m: int
    algorithm: str
    epsilon: float
    depth: int | None = None
    value: float | None = None
    opt: float | None = None
    ratio: float | None = None
    queries: int | None = None
    moves: int | None = None
    verified: bool | None = None
    value_std: float | None = None
    error: str | None = None
    failures: list[VerificationCheck] = []
    trace: TraceNode | None = None
    wall_time_s: float | None = None

    def sort_key(self) -> tuple[str, str, float]:
        return (self.instance, self.algorithm, self.epsilon)


class Aggregate(BaseModel):
    """Ratio statistics of one (algorithm, epsilon) over all instances with a known optimum.

    ``query_slope`` is the log-log slope of the mean query count against m; it is
    set only when the rows span at least 3 distinct ground set sizes.
    """

    algorithm: str
    epsilon: float
    instances: int
    min_ratio: float | None = None
    mean_ratio: float | None = None
    sizes: list[int] = []
    query_slope: float | None = None


class RunReport(BaseModel):
    rows: list[RunRow] = []
    aggregates: list[Aggregate] = []

    @property
    def verification_failed(self) -> bool:
        return any(row.verified is False for row in self.rows)

    @property
    def errors(self) -> list[RunRow]:
        return [row for row in self.rows if row.error is not None]


class ScalingFit(BaseModel):
    """Least-squares fit of log(queries) against log(m)."""

    family: Literal["random-cut", "random-coverage", "zero"]
    epsilon: float
    nrounds: int
    sizes: list[int]
    queries: list[int]
    slope: float
    intercept: float
    residuals: list[float]
