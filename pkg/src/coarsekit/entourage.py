"""
Entourages, partial translations, and the splitting of an entourage into
disjoint graphs of partial translations.

Pairs are always oriented (target, source): a pair (y, x) lives in
left x right, matching the convention that the graph of f: X -> Y is
the set {(f(x), x)} inside Y x X.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .space import MetricSpace

__all__ = [
    "Entourage",
    "PartialTranslation",
    "diagonal",
    "compose",
    "adjoint",
    "decompose",
    "max_degree",
    "asymptotic_parameter",
]


class Entourage:
    """A finite relation between two metric spaces, stored as index pairs."""

    def __init__(self, left: MetricSpace, right: MetricSpace, pairs: Iterable[tuple[int, int]]):
        self.left = left
        self.right = right
        arr = np.array(list(pairs), dtype=np.int64).reshape(-1, 2)
        bad = (arr < 0).any(axis=1) | (arr[:, 0] >= len(left)) | (arr[:, 1] >= len(right))
        if bad.any():
            raise ValueError(f"pair {tuple(arr[bad][0].tolist())} out of range")
        self.pairs = frozenset(map(tuple, arr.tolist()))

    @classmethod
    def _trusted(cls, left: MetricSpace, right: MetricSpace, pairs: frozenset) -> Entourage:
        """Skip validation; `pairs` must already be in-range Python int pairs."""
        E = cls.__new__(cls)
        E.left, E.right, E.pairs = left, right, pairs
        return E

    @classmethod
    def from_ids(cls, left: MetricSpace, right: MetricSpace, pairs) -> Entourage:
        return cls(left, right, [(left.index(y), right.index(x)) for y, x in pairs])

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    def __eq__(self, other) -> bool:
        if not isinstance(other, Entourage):
            return NotImplemented
        return self.left == other.left and self.right == other.right and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"Entourage({len(self.pairs)} pairs)"

    def __le__(self, other: Entourage) -> bool:
        return self.pairs <= other.pairs

    def __or__(self, other: Entourage) -> Entourage:
        _check_same(self, other)
        return Entourage._trusted(self.left, self.right, self.pairs | other.pairs)

    @property
    def is_square(self) -> bool:
        return self.left == self.right

    @property
    def width(self) -> int:
        """Largest distance spanned by a pair; only defined when left == right."""
        if not self.is_square:
            raise ValueError("width is only defined for an entourage on a single space")
        if not self.pairs:
            return 0
        return max(int(self.left.dist[y, x]) for y, x in self.pairs)

    def id_pairs(self) -> list[tuple[str, str]]:
        return [(self.left.points[y], self.right.points[x]) for y, x in sorted(self.pairs)]


class PartialTranslation:
    """Injective partial map of a space into itself.

    `table` maps source index -> target index; its graph is {(t(x), x)}.
    """

    def __init__(self, space: MetricSpace, table: dict[int, int]):
        table = {int(k): int(v) for k, v in table.items()}
        if len(set(table.values())) != len(table):
            raise ValueError("partial translation must be injective")
        n = len(space)
        if any(not (0 <= k < n and 0 <= v < n) for k, v in table.items()):
            raise ValueError("partial translation refers to points outside the space")
        self.space = space
        self.table = table

    @classmethod
    def identity(cls, space: MetricSpace) -> PartialTranslation:
        return cls(space, {i: i for i in range(len(space))})

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(self.table)

    @property
    def ran(self) -> frozenset[int]:
        return frozenset(self.table.values())

    @property
    def displacement(self) -> int:
        if not self.table:
            return 0
        return max(int(self.space.dist[x, tx]) for x, tx in self.table.items())

    def graph(self) -> Entourage:
        return Entourage(self.space, self.space, ((tx, x) for x, tx in self.table.items()))

    def __repr__(self) -> str:
        return f"PartialTranslation({len(self.table)} points, displacement {self.displacement})"


def _check_same(E: Entourage, F: Entourage) -> None:
    if E.left != F.left or E.right != F.right:
        raise ValueError("entourages live on different spaces")


def diagonal(space: MetricSpace) -> Entourage:
    return Entourage(space, space, ((i, i) for i in range(len(space))))


def compose(E: Entourage, F: Entourage) -> Entourage:
    """E o F = {(x, z) : (x, y) in E and (y, z) in F for some y}."""
    if E.right != F.left:
        raise ValueError("cannot compose: middle spaces differ")
    by_left: dict[int, list[int]] = {}
    for y, z in F.pairs:
        by_left.setdefault(y, []).append(z)
    out = {(x, z) for x, y in E.pairs for z in by_left.get(y, ())}
    return Entourage._trusted(E.left, F.right, frozenset(out))


def adjoint(E: Entourage) -> Entourage:
    return Entourage._trusted(E.right, E.left, frozenset((x, y) for y, x in E.pairs))


def max_degree(E: Entourage) -> int:
    """Largest in- or out-degree of E viewed as a bipartite graph."""
    if not E.pairs:
        return 0
    out_deg: dict[int, int] = {}
    in_deg: dict[int, int] = {}
    for y, x in E.pairs:
        out_deg[x] = out_deg.get(x, 0) + 1
        in_deg[y] = in_deg.get(y, 0) + 1
    return max(max(out_deg.values()), max(in_deg.values()))


def decompose(E: Entourage) -> list[PartialTranslation]:
    """Split E into max_degree(E) partial translations with disjoint graphs.

    Proper edge coloring of the bipartite graph source -> target with
    alternating-path recoloring, so the number of colors is exactly the
    maximum degree (Konig's edge coloring theorem).
    """
    if not E.is_square:
        raise ValueError("decompose needs an entourage on a single space")
    k = max_degree(E)
    # at_src[x][c] = y  and  at_tgt[y][c] = x  for an edge (y, x) of color c
    at_src: dict[int, dict[int, int]] = {}
    at_tgt: dict[int, dict[int, int]] = {}

    def free(side: dict[int, dict[int, int]], v: int) -> int:
        used = side.get(v, {})
        return next(c for c in range(k) if c not in used)

    for y, x in sorted(E.pairs):
        a = free(at_src, x)
        b = free(at_tgt, y)
        if a != b and a in at_tgt.get(y, {}):
            # flip the a/b alternating path starting at y; it cannot reach x
            path = []
            v, on_tgt, c = y, True, a
            while True:
                side = at_tgt if on_tgt else at_src
                if c not in side.get(v, {}):
                    break
                w = side[v][c]
                path.append((v, w, on_tgt, c))
                v, on_tgt, c = w, not on_tgt, (b if c == a else a)
            for v, w, tgt_side, c in path:
                yy, xx = (v, w) if tgt_side else (w, v)
                del at_tgt[yy][c]
                del at_src[xx][c]
            for v, w, tgt_side, c in path:
                yy, xx = (v, w) if tgt_side else (w, v)
                c2 = b if c == a else a
                at_tgt[yy][c2] = xx
                at_src[xx][c2] = yy
        at_src.setdefault(x, {})[a] = y
        at_tgt.setdefault(y, {})[a] = x

    tables: list[dict[int, int]] = [{} for _ in range(k)]
    for x, colors in at_src.items():
        for c, y in colors.items():
            tables[c][x] = y
    return [PartialTranslation(E.left, t) for t in tables if t]


def asymptotic_parameter(S1: Entourage, S2: Entourage) -> float:
    """Least R with each of S1, S2 inside the R-thickening of the other.

    Returns math.inf when exactly one side is empty.
    """
    _check_same(S1, S2)
    if not S1.pairs and not S2.pairs:
        return 0
    if not S1.pairs or not S2.pairs:
        return math.inf
    a = np.array(sorted(S1.pairs))
    b = np.array(sorted(S2.pairs))
    # pairwise max(d(y, y'), d(x, x'))
    gap = np.maximum(S1.left.dist[np.ix_(a[:, 0], b[:, 0])], S1.right.dist[np.ix_(a[:, 1], b[:, 1])])
    return int(max(gap.min(axis=0).max(), gap.min(axis=1).max()))
