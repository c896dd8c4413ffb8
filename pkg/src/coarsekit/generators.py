"""Seeded random instances for property checks and experiment sweeps."""

from __future__ import annotations

import numpy as np
from scipy.sparse import csgraph, csr_matrix

from .coarse_map import CoarseMap
from .entourage import Entourage, PartialTranslation
from .space import HeightFunction, MetricSpace
from .uf_homology import UFChain

__all__ = [
    "random_space",
    "random_map",
    "random_translation",
    "random_entourage",
    "random_chain",
    "random_height",
    "random_band",
]

SPACE_KINDS = ("line", "graph", "grid", "weighted")


def random_space(rng: np.random.Generator, n: int, kind: str | None = None, label: str = "") -> MetricSpace:
    """A random n-point space drawn from one of the backends."""
    kind = kind or SPACE_KINDS[rng.integers(len(SPACE_KINDS))]
    label = label or f"{kind}{n}"
    if kind == "line":
        coords = np.sort(rng.choice(3 * n + 1, size=n, replace=False))
        return MetricSpace.from_lattice([[c] for c in coords], label)
    if kind == "grid":
        side = int(np.ceil(np.sqrt(2 * n))) + 1
        cells = rng.choice(side * side, size=n, replace=False)
        return MetricSpace.from_lattice([divmod(int(c), side) for c in sorted(cells)], label)
    if kind in ("graph", "weighted"):
        edges = [(int(rng.integers(k)), k) for k in range(1, n)]
        extra = int(rng.integers(0, n + 1))
        for _ in range(extra):
            a, b = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
            if a != b:
                edges.append((int(a), int(b)))
        points = [f"v{k}" for k in range(n)]
        if kind == "graph":
            return MetricSpace.from_graph(points, [(points[a], points[b]) for a, b in edges], label)
        w = np.zeros((n, n))
        for a, b in edges:
            w[a, b] = w[b, a] = int(rng.integers(1, 4))
        d = csgraph.shortest_path(csr_matrix(w), directed=False)
        return MetricSpace(points, d.astype(np.int64), label)
    raise ValueError(f"unknown space kind {kind!r}")


def random_map(rng: np.random.Generator, source: MetricSpace, target: MetricSpace,
               max_fiber: int | None = None) -> CoarseMap:
    """Uniform random map, optionally with every fiber of size <= max_fiber."""
    ny = len(target)
    if max_fiber is None:
        return CoarseMap(source, target, rng.integers(ny, size=len(source)))
    if max_fiber * ny < len(source):
        raise ValueError("target too small for the fiber bound")
    slots = np.repeat(np.arange(ny), max_fiber)
    return CoarseMap(source, target, rng.permutation(slots)[:len(source)])


def random_translation(rng: np.random.Generator, space: MetricSpace, size: int | None = None) -> PartialTranslation:
    n = len(space)
    size = int(rng.integers(0, n + 1)) if size is None else size
    dom = rng.choice(n, size=size, replace=False)
    ran = rng.choice(n, size=size, replace=False)
    return PartialTranslation(space, dict(zip(dom.tolist(), ran.tolist())))


def random_entourage(rng: np.random.Generator, space: MetricSpace, size: int) -> Entourage:
    n = len(space)
    size = min(size, n * n)
    cells = rng.choice(n * n, size=size, replace=False)
    return Entourage(space, space, (divmod(int(c), n) for c in cells))


def random_chain(rng: np.random.Generator, space: MetricSpace, degree: int, terms: int,
                 R: int | None = None, coeff_range: int = 5) -> UFChain:
    """Random chain; with R given, only tuples of diameter <= R are used."""
    n = len(space)
    coeffs: dict[tuple[int, ...], int] = {}
    tries = 0
    while len(coeffs) < terms and tries < 50 * terms + 50:
        tries += 1
        key = tuple(int(k) for k in rng.integers(n, size=degree + 1))
        if R is not None and space.dist[np.ix_(key, key)].max() > R:
            continue
        c = int(rng.integers(-coeff_range, coeff_range + 1))
        if c:
            coeffs[key] = c
    return UFChain(space, degree, coeffs)


def random_height(rng: np.random.Generator, space: MetricSpace, top: int = 3) -> HeightFunction:
    return HeightFunction(space, tuple(int(v) for v in rng.integers(1, top + 1, size=len(space))))


def random_band(rng: np.random.Generator, space: MetricSpace, R: int, fiber: int = 1,
                density: float = 0.6, complex_entries: bool = True):
    """Random operator with support inside {d <= R}."""
    from .operator_model import BandOperator

    allowed = np.kron(space.dist <= R, np.ones((fiber, fiber), dtype=bool))
    mask = allowed & (rng.random(allowed.shape) < density)
    vals = rng.integers(-3, 4, size=allowed.shape).astype(complex)
    if complex_entries:
        vals = vals + 1j * rng.integers(-3, 4, size=allowed.shape)
    return BandOperator(space, space, np.where(mask, vals, 0), fiber)
