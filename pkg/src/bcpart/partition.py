"""Ordered vertex partitions and their 0/1 incidence vectors.

A Partition holds k classes in nondecreasing weight order; classes may
be empty unless a caller requires otherwise.  Incidence vectors are
indexed class-major: entry i*n + v corresponds to (vertex v, class i).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .graphs import Graph, Instance, is_connected


class Partition:
    __slots__ = ("classes", "class_weights")

    def __init__(self, classes: Sequence[Iterable[int]], class_weights: Sequence[int]):
        cls = tuple(frozenset(c) for c in classes)
        w = tuple(class_weights)
        if len(cls) != len(w):
            raise ValueError("one weight per class required")
        seen = set()
        for c in cls:
            if seen & c:
                raise ValueError("classes must be pairwise disjoint")
            seen |= c
        for a, b in zip(w, w[1:]):
            if a > b:
                raise ValueError("class weights must be nondecreasing")
        self.classes = cls
        self.class_weights = w

    @classmethod
    def from_classes(cls, weights: Sequence[int], classes: Sequence[Iterable[int]]) -> "Partition":
        """Canonically ordered partition: classes sorted by (weight, least id)."""
        cw = [(sum(weights[v] for v in c), frozenset(c)) for c in classes]
        cw.sort(key=lambda t: (t[0], min(t[1]) if t[1] else -1))
        return cls([c for _, c in cw], [w for w, _ in cw])

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def value(self) -> int:
        """Objective value: the weight of the first (lightest) class."""
        return self.class_weights[0] if self.class_weights else 0

    @property
    def covered(self) -> frozenset[int]:
        out = frozenset()
        for c in self.classes:
            out |= c
        return out

    def is_full(self, n: int) -> bool:
        return len(self.covered) == n and all(self.classes)

    def incidence_vector(self, n: int) -> np.ndarray:
        xi = np.zeros(self.k * n, dtype=np.int8)
        for i, c in enumerate(self.classes):
            for v in c:
                xi[i * n + v] = 1
        return xi

    def __eq__(self, other):
        return (
            isinstance(other, Partition)
            and self.classes == other.classes
            and self.class_weights == other.class_weights
        )

    def __hash__(self):
        return hash((self.classes, self.class_weights))

    def __repr__(self):
        body = " | ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in self.classes)
        return f"Partition({body}; weights={self.class_weights})"


def validate_partition(instance: Instance, partition: Partition,
                       require_full: bool = False,
                       require_nonempty: bool = False) -> None:
    """Raise ValueError unless the partition is structurally sound:
    disjoint weight-ordered classes, each nonempty class connected,
    class weights consistent with the instance weights."""
    if partition.k != instance.k:
        raise ValueError(f"expected {instance.k} classes, got {partition.k}")
    for i, c in enumerate(partition.classes):
        for v in c:
            if not (0 <= v < instance.n):
                raise ValueError(f"vertex {v} out of range")
        w = instance.weight_of(c)
        if w != partition.class_weights[i]:
            raise ValueError(f"class {i} records weight {partition.class_weights[i]}, has {w}")
        if c and not is_connected(instance.graph, c):
            raise ValueError(f"class {i} is not connected: {sorted(c)}")
        if require_nonempty and not c:
            raise ValueError(f"class {i} is empty")
    if require_full and len(partition.covered) != instance.n:
        raise ValueError("partition does not cover every vertex")
