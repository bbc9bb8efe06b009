"""Serializable instance descriptions (graphs and coverage systems).

Field declaration order is the JSON key order of the instance file format,
so every model declares ``kind`` and ``m`` first.
"""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt, model_validator

Edge = tuple[NonNegativeInt, NonNegativeInt, NonNegativeFloat]


class _InstanceBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def check_labels(self):
        labels = getattr(self, "labels", None)
        if labels is not None:
            if len(labels) != self.m:
                raise ValueError(f"expected {self.m} labels, got {len(labels)}")
            if len(set(labels)) != self.m:
                raise ValueError("labels must be distinct")
        return self

    def _check_endpoints(self, edges: list[Edge], what: str) -> None:
        for pos, (u, v, _) in enumerate(edges):
            if u >= self.m or v >= self.m:
                raise ValueError(f"{what} {pos} endpoint out of range for m={self.m}: ({u}, {v})")
            if u == v:
                raise ValueError(f"{what} {pos} is a self-loop on vertex {u}")


class CutInstance(_InstanceBase):
    """Undirected weighted graph; f(S) is the weight of edges crossing (S, S^c)."""

    kind: Literal["cut", "random-cut"] = "cut"
    m: NonNegativeInt
    edges: list[Edge] = []
    labels: list[str] | None = None
    name: str | None = None
    seed: int | None = None  # provenance of generated instances

    @model_validator(mode="after")
    def check_edges(self):
        self._check_endpoints(self.edges, "edge")
        return self


class DirectedCutInstance(_InstanceBase):
    """Directed weighted graph; f(S) is the weight of arcs leaving S."""

    kind: Literal["directed-cut"] = "directed-cut"
    m: NonNegativeInt
    edges: list[Edge] = []
    labels: list[str] | None = None
    name: str | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def check_edges(self):
        self._check_endpoints(self.edges, "arc")
        return self


class CoverageInstance(_InstanceBase):
    """Weighted coverage: ground element i covers the universe items sets[i]."""

    kind: Literal["coverage", "random-coverage"] = "coverage"
    m: NonNegativeInt
    universe: NonNegativeInt
    weights: list[NonNegativeFloat]
    sets: list[list[NonNegativeInt]]
    labels: list[str] | None = None
    name: str | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def check_system(self):
        if len(self.weights) != self.universe:
            raise ValueError(
                f"expected {self.universe} universe weights, got {len(self.weights)}"
            )
        if len(self.sets) != self.m:
            raise ValueError(f"expected {self.m} sets, got {len(self.sets)}")
        for i, items in enumerate(self.sets):
            for item in items:
                if item >= self.universe:
                    raise ValueError(
                        f"set {i} references universe item {item} >= universe size {self.universe}"
                    )
        return self


Instance = Annotated[
    Union[CutInstance, DirectedCutInstance, CoverageInstance],
    Field(discriminator="kind"),
]

InstanceKind = Literal["cut", "directed-cut", "coverage", "random-coverage", "random-cut"]
RANDOM_KINDS = ("random-cut", "random-coverage")
