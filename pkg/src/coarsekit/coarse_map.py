"""Total maps between finite metric spaces and their coarse moduli."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .entourage import Entourage
from .space import MetricSpace

__all__ = [
    "CoarseMap",
    "expansion_modulus",
    "closeness",
    "max_fiber",
    "graph_of",
    "equivalence_defects",
]


class CoarseMap:
    """A function table source -> target, stored as an index array."""

    def __init__(self, source: MetricSpace, target: MetricSpace, table):
        table = np.array(table, dtype=np.int64, copy=True).reshape(-1)
        if len(table) != len(source):
            raise ValueError("map table must be total on the source")
        if len(table) and (table.min() < 0 or table.max() >= len(target)):
            raise ValueError("map image leaves the target")
        table.setflags(write=False)
        self.source = source
        self.target = target
        self.table = table

    @classmethod
    def from_dict(cls, source: MetricSpace, target: MetricSpace, table: dict) -> CoarseMap:
        table = {str(k): v for k, v in table.items()}
        missing = set(source.points) - set(table)
        if missing:
            raise ValueError(f"map is not defined on {sorted(missing)}")
        return cls(source, target, [target.index(table[p]) for p in source.points])

    @classmethod
    def from_function(cls, source: MetricSpace, target: MetricSpace, fn: Callable[[int], int]) -> CoarseMap:
        return cls(source, target, [fn(i) for i in range(len(source))])

    @classmethod
    def identity(cls, space: MetricSpace) -> CoarseMap:
        return cls(space, space, np.arange(len(space)))

    @classmethod
    def constant(cls, source: MetricSpace, target: MetricSpace, value: int) -> CoarseMap:
        return cls(source, target, np.full(len(source), value))

    def __call__(self, i: int) -> int:
        return int(self.table[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoarseMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return hash(self.table.tobytes())

    def __repr__(self) -> str:
        return f"CoarseMap({self.source.label!r} -> {self.target.label!r})"

    def then(self, g: CoarseMap) -> CoarseMap:
        """Composite g o self."""
        if self.target != g.source:
            raise ValueError("maps are not composable")
        return CoarseMap(self.source, g.target, g.table[self.table])

    def as_dict(self) -> dict[str, str]:
        return {self.source.points[i]: self.target.points[j] for i, j in enumerate(self.table)}

    @property
    def is_bijective(self) -> bool:
        return len(self.source) == len(self.target) and len(set(self.table.tolist())) == len(self.table)


def expansion_modulus(f: CoarseMap, R: int) -> int:
    """Least S with d(x, x') <= R  =>  d(f x, f x') <= S."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    if len(f.source) == 0:
        return 0
    image_dist = f.target.dist[np.ix_(f.table, f.table)]
    return int(image_dist[f.source.dist <= R].max())


def closeness(f: CoarseMap, g: CoarseMap) -> int:
    """sup_x d(f(x), g(x))."""
    if f.source != g.source or f.target != g.target:
        raise ValueError("maps have different source or target")
    if len(f.source) == 0:
        return 0
    return int(f.target.dist[f.table, g.table].max())


def max_fiber(f: CoarseMap) -> int:
    """Largest preimage size; f is uniformly N-to-one for N = max_fiber(f)."""
    if len(f.table) == 0:
        return 0
    return int(np.bincount(f.table, minlength=len(f.target)).max())


def graph_of(f: CoarseMap) -> Entourage:
    """{(f(x), x)} as a subset of target x source."""
    return Entourage(f.target, f.source, ((int(y), x) for x, y in enumerate(f.table)))


def equivalence_defects(f: CoarseMap, g: CoarseMap) -> tuple[int, int]:
    """(closeness(g o f, id_X), closeness(f o g, id_Y)) for a candidate coarse inverse g."""
    if g.source != f.target or g.target != f.source:
        raise ValueError("g is not a candidate inverse of f")
    return (closeness(f.then(g), CoarseMap.identity(f.source)),
            closeness(g.then(f), CoarseMap.identity(f.target)))
