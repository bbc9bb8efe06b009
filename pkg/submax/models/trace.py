"""Recursion trace of the recursive algorithm and its verification report."""

from collections.abc import Iterator
from typing import Literal

from pydantic import BaseModel, model_validator

Candidate = Literal["S", "Sc", "T1uT2", "M", "empty"]

# Argmax order; the first maximal candidate wins.
CANDIDATE_ORDER: tuple[Candidate, ...] = ("S", "Sc", "T1uT2", "M", "empty")


class TraceNode(BaseModel):
    """One call of the recursive algorithm.

    Values are under the node's shifted oracle; ``depth`` is the number of
    remaining recursion rounds and ``level`` the distance from the root.
    """

    node_id: str
    level: int
    depth: int
    ground_size: int
    shift: float
    s_set: list[int]
    s_value: float
    s_comp_value: float
    empty_value: float
    full_value: float
    t1_value: float | None = None
    t2_value: float | None = None
    t1_union_t2_value: float | None = None
    chosen: Candidate
    chosen_value: float
    result_set: list[int]
    ls_moves: int = 0
    ls_queries: int = 0
    local_queries: int = 0
    queries: int = 0
    children: list["TraceNode"] = []

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.children) not in (0, 2):
            raise ValueError(f"node {self.node_id} has {len(self.children)} children")
        if self.children and self.t1_union_t2_value is None:
            raise ValueError(f"node {self.node_id} recursed without a T1 ∪ T2 value")
        return self

    @property
    def recursed(self) -> bool:
        return bool(self.children)

    def candidates(self) -> dict[Candidate, float]:
        """Recorded candidate values in argmax order."""
        values: dict[Candidate, float] = {"S": self.s_value, "Sc": self.s_comp_value}
        if self.t1_union_t2_value is not None:
            values["T1uT2"] = self.t1_union_t2_value
        values["M"] = self.full_value
        values["empty"] = self.empty_value
        return values

    def walk(self) -> Iterator["TraceNode"]:
        """Pre-order traversal."""
        yield self
        for child in self.children:
            yield from child.walk()


class VerificationCheck(BaseModel):
    """One inequality lhs >= rhs at one node; passed is None when inapplicable."""

    node_id: str
    name: str
    passed: bool | None
    lhs: float | None = None
    rhs: float | None = None
    slack: float | None = None
    detail: str = ""


class TraceReport(BaseModel):
    checks: list[VerificationCheck] = []

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    @property
    def failures(self) -> list[VerificationCheck]:
        return [c for c in self.checks if c.passed is False]

    def by_name(self, name: str) -> list[VerificationCheck]:
        return [c for c in self.checks if c.name == name]
