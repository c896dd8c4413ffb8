"""
Uniformly finite chains in degrees 0-2 with integer coefficients.

A degree-n chain is a finitely supported integer function on ordered
(n+1)-tuples of point indices. The boundary is the alternating sum over
slots of "insert a point at slot i and sum", so a pair (y, x) in degree 1
has boundary delta_x - delta_y; in particular the indicator of the graph
{(t(x), x)} of a partial translation t has boundary 1_dom(t) - 1_ran(t).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .coarse_map import CoarseMap
from .entourage import PartialTranslation
from .matching import hall_violator, hopcroft_karp
from .space import HeightFunction, MetricSpace, components_at_scale, height_coordinates, space_of_height

__all__ = [
    "UFChain",
    "H0Class",
    "HallCertificate",
    "boundary",
    "boundary_of_translation",
    "pushforward",
    "h0_class",
    "class_witness",
    "bijectivize",
    "verify_hall_certificate",
    "bijection_to_cycle",
    "boundary_matrix",
    "elementary_divisors",
]

MAX_DEGREE = 2


class UFChain:
    """Immutable integer chain; zero coefficients are never stored."""

    def __init__(self, space: MetricSpace, degree: int, coeffs: Mapping[tuple, int] | None = None):
        if not 0 <= degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 0..{MAX_DEGREE}")
        n = len(space)
        clean: dict[tuple[int, ...], int] = {}
        for key, c in (coeffs or {}).items():
            key = (int(key),) if np.isscalar(key) else tuple(int(k) for k in key)
            if len(key) != degree + 1:
                raise ValueError(f"tuple {key} has wrong length for degree {degree}")
            if any(not 0 <= k < n for k in key):
                raise ValueError(f"tuple {key} refers to points outside the space")
            c = int(c)
            total = clean.get(key, 0) + c
            if total:
                clean[key] = total
            else:
                clean.pop(key, None)
        self.space = space
        self.degree = degree
        self.coeffs = clean

    @classmethod
    def indicator(cls, space: MetricSpace, degree: int, tuples: Iterable) -> UFChain:
        return cls(space, degree, {t: 1 for t in set(_as_tuple(t) for t in tuples)})

    @classmethod
    def from_values(cls, space: MetricSpace, values: Iterable[int]) -> UFChain:
        """Degree-0 chain from a value per point index."""
        return cls(space, 0, {(i,): v for i, v in enumerate(values)})

    @property
    def propagation(self) -> int:
        if self.degree == 0 or not self.coeffs:
            return 0
        d = self.space.dist
        return max(int(d[a, b]) for key in self.coeffs for a, b in combinations(key, 2))

    def values(self) -> np.ndarray:
        """Dense value vector of a degree-0 chain (object dtype, exact)."""
        if self.degree != 0:
            raise ValueError("values() is only defined in degree 0")
        out = np.zeros(len(self.space), dtype=object)
        for (i,), c in self.coeffs.items():
            out[i] = c
        return out

    def _check(self, other: UFChain) -> None:
        if self.space != other.space or self.degree != other.degree:
            raise ValueError("chains live on different spaces or degrees")

    def __add__(self, other: UFChain) -> UFChain:
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return UFChain(self.space, self.degree, out)

    def __neg__(self) -> UFChain:
        return UFChain(self.space, self.degree, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: UFChain) -> UFChain:
        return self + (-other)

    def __mul__(self, scalar: int) -> UFChain:
        return UFChain(self.space, self.degree, {k: scalar * c for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, UFChain):
            return NotImplemented
        return self.space == other.space and self.degree == other.degree and self.coeffs == other.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return f"UFChain(degree={self.degree}, {len(self.coeffs)} terms, propagation={self.propagation})"


def _as_tuple(t) -> tuple[int, ...]:
    return (int(t),) if np.isscalar(t) else tuple(int(k) for k in t)


def boundary(c: UFChain) -> UFChain:
    """Alternating face sum; (z_0, ..., z_n) contributes (-1)^i to z with slot i removed."""
    if c.degree == 0:
        raise ValueError("degree-0 chains have no boundary")
    out: dict[tuple[int, ...], int] = {}
    for key, coef in c.coeffs.items():
        for i in range(len(key)):
            face = key[:i] + key[i + 1:]
            out[face] = out.get(face, 0) + (coef if i % 2 == 0 else -coef)
    return UFChain(c.space, c.degree - 1, out)


def boundary_of_translation(t: PartialTranslation) -> UFChain:
    """1_dom(t) - 1_ran(t)."""
    out = {(x,): 1 for x in t.dom}
    for y in t.ran:
        out[(y,)] = out.get((y,), 0) - 1
    return UFChain(t.space, 0, out)


def pushforward(f: CoarseMap, c: UFChain) -> UFChain:
    if c.space != f.source:
        raise ValueError("chain does not live on the source of the map")
    out: dict[tuple[int, ...], int] = {}
    for key, coef in c.coeffs.items():
        image = tuple(int(f.table[k]) for k in key)
        out[image] = out.get(image, 0) + coef
    return UFChain(f.target, c.degree, out)


@dataclass(frozen=True)
class H0Class:
    """Degree-0 class at scale R, recorded as one sum per R-component."""

    space: MetricSpace
    scale: int
    components: tuple[tuple[int, ...], ...]
    component_sums: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return not any(self.component_sums)

    def __eq__(self, other) -> bool:
        if not isinstance(other, H0Class):
            return NotImplemented
        return (self.space == other.space and self.scale == other.scale
                and self.component_sums == other.component_sums)

    def __hash__(self) -> int:
        return hash((self.scale, self.component_sums))


def h0_class(h: UFChain, R: int) -> H0Class:
    if h.degree != 0:
        raise ValueError("h0_class takes a degree-0 chain")
    comps = components_at_scale(h.space, R)
    vals = h.values()
    sums = tuple(int(sum(vals[i] for i in comp)) for comp in comps)
    return H0Class(h.space, R, tuple(tuple(c) for c in comps), sums)


def class_witness(g: UFChain, R: int) -> UFChain | None:
    """A degree-1 chain c with propagation <= R and boundary(c) == g, or None.

    Flow is routed along a BFS spanning tree of each R-component: every
    tree edge (parent, child) carries the total excess of the child subtree.
    """
    cls = h0_class(g, R)
    if not cls.is_zero:
        return None
    space = g.space
    vals = g.values()
    out: dict[tuple[int, int], int] = {}
    for comp in cls.components:
        root = comp[0]
        parent = {root: root}
        order = [root]
        queue = deque([root])
        members = np.array(comp)
        while queue:
            u = queue.popleft()
            for v in members[space.dist[u, members] <= R]:
                v = int(v)
                if v not in parent:
                    parent[v] = u
                    order.append(v)
                    queue.append(v)
        excess = {v: int(vals[v]) for v in comp}
        for v in reversed(order[1:]):
            p = parent[v]
            e = excess[v]
            # boundary of (p, v) is delta_v - delta_p; orient so coefficients are positive
            if e > 0:
                out[(p, v)] = e
            elif e < 0:
                out[(v, p)] = -e
            excess[p] += e
    return UFChain(space, 1, out)


@dataclass(frozen=True)
class HallCertificate:
    """A set W on one side whose allowed-neighbourhood is smaller than W."""

    side: str  # "X" or "Y"
    members: tuple[int, ...]
    neighborhood_size: int

    def to_json(self, f: CoarseMap) -> dict:
        space = f.source if self.side == "X" else f.target
        return {"side": self.side, "set": [space.points[i] for i in self.members],
                "neighborhood_size": self.neighborhood_size}


def _allowed(f: CoarseMap, S: int) -> np.ndarray:
    """Boolean |X| x |Y| matrix of pairs with d(f(x), y) <= S."""
    return f.target.dist[f.table] <= S


def bijectivize(f: CoarseMap, S: int, seed: int | None = None) -> CoarseMap | HallCertificate:
    """A bijection g with d(f(x), g(x)) <= S for all x, or a Hall certificate.

    `seed` permutes neighbour order, which changes tie-breaks only.
    """
    nx, ny = len(f.source), len(f.target)
    if nx != ny:
        if nx > ny:
            return HallCertificate("X", tuple(range(nx)), ny)
        return HallCertificate("Y", tuple(range(ny)), nx)
    allowed = _allowed(f, S)
    adj = [list(np.flatnonzero(row)) for row in allowed]
    if seed is not None:
        rng = random.Random(seed)
        for nbrs in adj:
            rng.shuffle(nbrs)
    match_l, match_r = hopcroft_karp(adj, ny)
    if all(m != -1 for m in match_l):
        return CoarseMap(f.source, f.target, match_l)
    W, NW = hall_violator(adj, match_l, match_r)
    return HallCertificate("X", tuple(W), len(NW))


def verify_hall_certificate(f: CoarseMap, S: int, cert: HallCertificate) -> bool:
    """Recount the neighbourhood directly and confirm it is smaller than the set."""
    allowed = _allowed(f, S)
    members = list(cert.members)
    if not members:
        return False
    if cert.side == "X":
        nbhd = np.flatnonzero(allowed[members].any(axis=0))
    else:
        nbhd = np.flatnonzero(allowed[:, members].any(axis=1))
    return len(nbhd) == cert.neighborhood_size and len(nbhd) < len(set(members))


def bijection_to_cycle(h1: HeightFunction, h2: HeightFunction, g: CoarseMap) -> UFChain:
    """Project a bijection X(h1) -> X(h2) to a degree-1 chain on the base.

    Each point (y, i) with g(y, i) = (x, j) adds 1 to the pair (x, y), so
    the boundary of the result is h1 - h2.
    """
    if h1.parent != h2.parent:
        raise ValueError("height functions live on different base spaces")
    if g.source != space_of_height(h1) or g.target != space_of_height(h2):
        raise ValueError("g is not a map X(h1) -> X(h2)")
    if not g.is_bijective:
        raise ValueError("g is not a bijection")
    src = height_coordinates(h1)
    tgt = height_coordinates(h2)
    out: dict[tuple[int, int], int] = {}
    for k, image in enumerate(g.table):
        y = src[k][0]
        x = tgt[int(image)][0]
        out[(x, y)] = out.get((x, y), 0) + 1
    return UFChain(h1.parent, 1, out)


def boundary_matrix(space: MetricSpace, R: int) -> np.ndarray:
    """Integer matrix of the degree-1 boundary on ordered pairs at distance <= R.

    Rows are points; one column per ordered pair (y, x) with y != x.
    Diagonal pairs have zero boundary and are omitted.
    """
    n = len(space)
    ys, xs = np.nonzero((space.dist <= R) & ~np.eye(n, dtype=bool))
    m = np.zeros((n, len(ys)), dtype=np.int64)
    cols = np.arange(len(ys))
    m[xs, cols] += 1
    m[ys, cols] -= 1
    return m


def elementary_divisors(matrix: np.ndarray) -> list[int]:
    """Nonzero invariant factors of an integer matrix (Smith normal form diagonal)."""
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix
    from sympy.polys.matrices.normalforms import invariant_factors

    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return []
    dm = DomainMatrix([[ZZ(int(v)) for v in row] for row in matrix], (rows, cols), ZZ)
    return [int(v) for v in invariant_factors(dm) if v != 0]
