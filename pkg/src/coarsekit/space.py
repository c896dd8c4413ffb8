"""
Finite metric spaces with exact integer distances.

Every backend (explicit matrix, graph shortest path, lattice with the l1
metric) is normalized to a symmetric integer distance matrix at construction.
Points are addressed by index internally; identifiers are opaque strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "MetricSpace",
    "PointSubset",
    "HeightFunction",
    "growth_profile",
    "doubling",
    "subspace",
    "space_of_height",
    "height_coordinates",
    "components_at_scale",
    "interval",
    "path_graph",
]


class MetricSpace:
    """Finite set of points with an exact nonnegative integer metric.

    Instances are immutable; the distance matrix is stored read-only.
    """

    def __init__(self, points: Sequence[str], dist, label: str = "", *, check: bool = True):
        points = tuple(str(p) for p in points)
        dist = np.array(dist, dtype=np.int64, copy=True)
        n = len(points)
        if dist.shape != (n, n):
            raise ValueError(f"distance matrix has shape {dist.shape}, expected {(n, n)}")
        if len(set(points)) != n:
            raise ValueError("point identifiers must be unique")
        dist.setflags(write=False)
        self.points = points
        self.dist = dist
        self.label = label
        self._index = {p: i for i, p in enumerate(points)}
        if check:
            self.check_axioms()

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_matrix(cls, points, matrix, label: str = "") -> MetricSpace:
        return cls(points, matrix, label)

    @classmethod
    def from_graph(cls, points, edges: Iterable[tuple[str, str]], label: str = "") -> MetricSpace:
        """Shortest-path metric of an undirected graph; the graph must be connected."""
        points = [str(p) for p in points]
        index = {p: i for i, p in enumerate(points)}
        rows, cols = [], []
        for a, b in edges:
            rows.append(index[str(a)])
            cols.append(index[str(b)])
        n = len(points)
        adj = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        d = csgraph.shortest_path(adj, method="D", directed=False, unweighted=True)
        if np.isinf(d).any():
            raise ValueError("graph is disconnected; shortest-path metric is not finite")
        return cls(points, d.astype(np.int64), label, check=False)

    @classmethod
    def from_lattice(cls, coords: Iterable[Sequence[int]], label: str = "", points=None) -> MetricSpace:
        """Subset of Z^k with the l1 metric."""
        arr = np.array([tuple(int(c) for c in np.atleast_1d(x)) for x in coords], dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("lattice coordinates must all have the same dimension")
        if points is None:
            if arr.shape[1] == 1:
                points = [str(c[0]) for c in arr]
            else:
                points = ["(" + ",".join(str(v) for v in c) + ")" for c in arr]
        d = np.abs(arr[:, None, :] - arr[None, :, :]).sum(axis=2)
        return cls(points, d, label, check=False)

    # -- basic interrogation ----------------------------------------------

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"MetricSpace({self.label!r}, {len(self)} points)"

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, MetricSpace):
            return NotImplemented
        return self.points == other.points and np.array_equal(self.dist, other.dist)

    def __hash__(self) -> int:
        return hash(self.points)

    def index(self, point: str) -> int:
        try:
            return self._index[str(point)]
        except KeyError:
            raise KeyError(f"{point!r} is not a point of {self.label or 'space'}") from None

    def indices(self, points: Iterable[str]) -> list[int]:
        return [self.index(p) for p in points]

    def distance(self, a: str, b: str) -> int:
        """Distance between two points given by identifier."""
        return int(self.dist[self.index(a), self.index(b)])

    def ball(self, i: int, radius: int) -> np.ndarray:
        return np.flatnonzero(self.dist[i] <= radius)

    @property
    def diameter(self) -> int:
        return int(self.dist.max()) if len(self) else 0

    def check_axioms(self) -> None:
        d = self.dist
        n = len(self)
        if n == 0:
            return
        if (d < 0).any():
            raise ValueError("distances must be nonnegative")
        if (np.diag(d) != 0).any():
            raise ValueError("dist(x, x) must be 0")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix is not symmetric")
        off = d + np.eye(n, dtype=np.int64)
        if (off <= 0).any():
            raise ValueError("distinct points must be at positive distance")
        for k in range(n):
            if (d > d[:, k, None] + d[None, k, :]).any():
                raise ValueError("triangle inequality fails")


@dataclass(frozen=True)
class PointSubset:
    parent: MetricSpace
    members: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(str(m) for m in self.members))
        missing = [m for m in self.members if m not in self.parent._index]
        if missing:
            raise ValueError(f"points not in {self.parent.label!r}: {sorted(missing)}")


@dataclass(frozen=True)
class HeightFunction:
    """Positive integer function on the points of `parent`, stored by index."""

    parent: MetricSpace
    values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if len(values) != len(self.parent):
            raise ValueError("height function must assign a value to every point")
        if any(v < 1 for v in values):
            raise ValueError("height values must be >= 1")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dict(cls, parent: MetricSpace, values: dict) -> HeightFunction:
        out = [None] * len(parent)
        for k, v in values.items():
            out[parent.index(k)] = v
        if any(v is None for v in out):
            raise ValueError("height function must assign a value to every point")
        return cls(parent, tuple(out))

    @property
    def bound(self) -> int:
        return max(self.values)

    @property
    def total(self) -> int:
        return sum(self.values)


def growth_profile(space: MetricSpace, R: int) -> int:
    """Largest cardinality of a closed R-ball."""
    if R < 0:
        raise ValueError("R must be nonnegative")
    if len(space) == 0:
        return 0
    return int((space.dist <= R).sum(axis=1).max())


def _doubled_id(p: str, i: int) -> str:
    return f"({p},{i})"


def doubling(space: MetricSpace, n: int) -> MetricSpace:
    """The n-th doubling X x {1..n}, with d((x,i),(y,j)) = d(x,y) + |i-j|.

    Points are ordered x-major: (x,1), ..., (x,n), (x',1), ...
    """
    if n < 1:
        raise ValueError("doubling order must be >= 1")
    levels = np.arange(n)
    d = space.dist[:, None, :, None] + np.abs(levels[:, None] - levels[None, :])[None, :, None, :]
    m = len(space) * n
    points = [_doubled_id(p, i) for p in space.points for i in range(1, n + 1)]
    label = f"{space.label}^({n})" if space.label else ""
    return MetricSpace(points, d.reshape(m, m), label, check=False)


def subspace(space: MetricSpace, A) -> MetricSpace:
    """Restriction of the metric to A (a PointSubset or iterable of ids), in parent order."""
    members = A.members if isinstance(A, PointSubset) else frozenset(str(a) for a in A)
    if not members:
        raise ValueError("subspace must be nonempty")
    idx = sorted(space.index(m) for m in members)
    points = [space.points[i] for i in idx]
    return MetricSpace(points, space.dist[np.ix_(idx, idx)], space.label, check=False)


def height_coordinates(h: HeightFunction) -> list[tuple[int, int]]:
    """(base index, level) of every point of X(h), in the order used by space_of_height."""
    return [(x, i) for x, hx in enumerate(h.values) for i in range(1, hx + 1)]


def space_of_height(h: HeightFunction) -> MetricSpace:
    """X(h) = {(x, i) : 1 <= i <= h(x)} inside the doubling of order max(h)."""
    coords = height_coordinates(h)
    n = h.bound
    idx = [x * n + (i - 1) for x, i in coords]
    big = doubling(h.parent, n)
    points = [big.points[k] for k in idx]
    label = f"{h.parent.label}(h)" if h.parent.label else ""
    return MetricSpace(points, big.dist[np.ix_(idx, idx)], label, check=False)


def components_at_scale(space: MetricSpace, R: int) -> list[list[int]]:
    """Classes of the equivalence relation generated by dist <= R.

    Each class is a sorted list of indices; classes are ordered by their
    smallest member.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    n = len(space)
    if n == 0:
        return []
    adj = sparse.csr_matrix(space.dist <= R)
    _, labels = csgraph.connected_components(adj, directed=False)
    classes: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        classes.setdefault(int(lab), []).append(i)
    return sorted(classes.values(), key=lambda c: c[0])


def interval(lo: int, hi: int, label: str = "") -> MetricSpace:
    """Z cap [lo, hi] with |.| metric; point ids are the integers."""
    return MetricSpace.from_lattice([[k] for k in range(lo, hi + 1)], label or f"Z[{lo},{hi}]")


def path_graph(n: int, label: str = "") -> MetricSpace:
    points = [str(k) for k in range(n)]
    edges = [(str(k), str(k + 1)) for k in range(n - 1)]
    return MetricSpace.from_graph(points, edges, label or f"P{n}")
