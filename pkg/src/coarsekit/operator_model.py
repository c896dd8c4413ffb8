"""
Finite band-operator model of uniform Roe algebras.

An operator l2(X) (x) C^Dc -> l2(Y) (x) C^Dr is a sparse complex matrix whose
row (y, a) sits at position y*Dr + a and whose column (x, b) sits at
x*Dc + b. Support is structural: a pair (y, x) is in the support when some
stored entry of the (y, x) block is nonzero. Entries smaller than TAU in
modulus are dropped after every arithmetic operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .coarse_map import CoarseMap, expansion_modulus, max_fiber
from .entourage import Entourage, PartialTranslation
from .space import MetricSpace, components_at_scale, doubling
from .uf_homology import UFChain, boundary_matrix, elementary_divisors

__all__ = [
    "TAU",
    "BandOperator",
    "BandBoundViolation",
    "support",
    "propagation",
    "isometry_from_translation",
    "UniformCoverPlan",
    "plan_uniform_cover",
    "uniform_cover",
    "cover_image_subspace",
    "cover_adjoint_subspace",
    "covering_radius",
    "conjugate",
    "block_norm",
    "extract_coarse_relation",
    "alpha0",
    "Alpha0Report",
    "alpha0_injectivity_check",
    "doubling_block_permutation",
    "embed_blocks",
]

TAU = 1e-12


class BandBoundViolation(AssertionError):
    """STS* spread further than the covering bound allows."""


class BandOperator:
    def __init__(self, row_space: MetricSpace, col_space: MetricSpace, matrix,
                 row_fiber: int = 1, col_fiber: int | None = None):
        col_fiber = row_fiber if col_fiber is None else col_fiber
        if row_fiber < 1 or col_fiber < 1:
            raise ValueError("fiber dimensions must be positive")
        shape = (len(row_space) * row_fiber, len(col_space) * col_fiber)
        m = sparse.csr_matrix(matrix, dtype=complex, copy=True)
        if m.shape != shape:
            raise ValueError(f"matrix has shape {m.shape}, expected {shape}")
        m.data[np.abs(m.data) < TAU] = 0
        m.eliminate_zeros()
        m.sort_indices()
        self.row_space = row_space
        self.col_space = col_space
        self.row_fiber = row_fiber
        self.col_fiber = col_fiber
        self.matrix = m

    @classmethod
    def from_entries(cls, row_space, col_space, entries, row_fiber: int = 1, col_fiber: int | None = None):
        """Build from {(row point, row fiber, col point, col fiber): value} by index."""
        col_fiber = row_fiber if col_fiber is None else col_fiber
        rows, cols, vals = [], [], []
        for (y, a, x, b), v in entries.items():
            if not (0 <= a < row_fiber and 0 <= b < col_fiber):
                raise ValueError("fiber index out of range")
            rows.append(y * row_fiber + a)
            cols.append(x * col_fiber + b)
            vals.append(v)
        shape = (len(row_space) * row_fiber, len(col_space) * col_fiber)
        m = sparse.coo_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=shape)
        return cls(row_space, col_space, m, row_fiber, col_fiber)

    @classmethod
    def identity(cls, space: MetricSpace, fiber: int = 1) -> BandOperator:
        return cls(space, space, sparse.identity(len(space) * fiber, dtype=complex), fiber)

    @classmethod
    def zero(cls, row_space, col_space, row_fiber: int = 1, col_fiber: int | None = None):
        col_fiber = row_fiber if col_fiber is None else col_fiber
        shape = (len(row_space) * row_fiber, len(col_space) * col_fiber)
        return cls(row_space, col_space, sparse.csr_matrix(shape, dtype=complex), row_fiber, col_fiber)

    @classmethod
    def diagonal_projection(cls, space: MetricSpace, members, fiber: int = 1) -> BandOperator:
        diag = np.zeros(len(space) * fiber)
        for x in members:
            diag[x * fiber:(x + 1) * fiber] = 1
        return cls(space, space, sparse.diags(diag), fiber)

    @property
    def fiber_dim(self) -> int:
        if self.row_fiber != self.col_fiber:
            raise ValueError("operator changes fiber dimension")
        return self.row_fiber

    def entries(self) -> dict[tuple[int, int, int, int], complex]:
        coo = self.matrix.tocoo()
        out = {}
        for r, c, v in zip(coo.row, coo.col, coo.data):
            y, a = divmod(int(r), self.row_fiber)
            x, b = divmod(int(c), self.col_fiber)
            out[(y, a, x, b)] = complex(v)
        return out

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def structural_support(self) -> frozenset[tuple[int, int]]:
        coo = self.matrix.tocoo()
        return frozenset(zip((coo.row // self.row_fiber).tolist(), (coo.col // self.col_fiber).tolist()))

    def _conformable_sum(self, other: BandOperator) -> None:
        if (self.row_space != other.row_space or self.col_space != other.col_space
                or self.row_fiber != other.row_fiber or self.col_fiber != other.col_fiber):
            raise ValueError("operators are not conformable for addition")

    def _wrap(self, matrix, row_space, col_space, row_fiber, col_fiber) -> BandOperator:
        return BandOperator(row_space, col_space, matrix, row_fiber, col_fiber)

    def __add__(self, other: BandOperator) -> BandOperator:
        self._conformable_sum(other)
        return self._wrap(self.matrix + other.matrix, self.row_space, self.col_space,
                          self.row_fiber, self.col_fiber)

    def __sub__(self, other: BandOperator) -> BandOperator:
        self._conformable_sum(other)
        return self._wrap(self.matrix - other.matrix, self.row_space, self.col_space,
                          self.row_fiber, self.col_fiber)

    def __neg__(self) -> BandOperator:
        return self._wrap(-self.matrix, self.row_space, self.col_space, self.row_fiber, self.col_fiber)

    def __mul__(self, scalar) -> BandOperator:
        return self._wrap(self.matrix * scalar, self.row_space, self.col_space, self.row_fiber, self.col_fiber)

    __rmul__ = __mul__

    def __matmul__(self, other: BandOperator) -> BandOperator:
        if self.col_space != other.row_space or self.col_fiber != other.row_fiber:
            raise ValueError("operators are not conformable for multiplication")
        return self._wrap(self.matrix @ other.matrix, self.row_space, other.col_space,
                          self.row_fiber, other.col_fiber)

    def adjoint(self) -> BandOperator:
        return self._wrap(self.matrix.conj().T, self.col_space, self.row_space, self.col_fiber, self.row_fiber)

    @property
    def H(self) -> BandOperator:
        return self.adjoint()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BandOperator):
            return NotImplemented
        if (self.row_space != other.row_space or self.col_space != other.col_space
                or self.row_fiber != other.row_fiber or self.col_fiber != other.col_fiber):
            return False
        return (self.matrix != other.matrix).nnz == 0

    def __repr__(self) -> str:
        return (f"BandOperator({len(self.row_space)}x{self.row_fiber} <- "
                f"{len(self.col_space)}x{self.col_fiber}, nnz={self.matrix.nnz})")


def support(T: BandOperator) -> Entourage:
    return Entourage._trusted(T.row_space, T.col_space, T.structural_support())


def propagation(T: BandOperator) -> int:
    if T.row_space != T.col_space:
        raise ValueError("propagation needs row and column spaces to coincide")
    return support(T).width


def isometry_from_translation(t: PartialTranslation) -> BandOperator:
    """Partial isometry with v(delta_x) = delta_t(x) on dom(t) and 0 elsewhere."""
    entries = {(tx, 0, x, 0): 1.0 for x, tx in t.table.items()}
    return BandOperator.from_entries(t.space, t.space, entries)


@dataclass(frozen=True)
class UniformCoverPlan:
    """Choices behind a covering isometry of f with truncated fiber C^D.

    `fiber_enumerations[y]` lists f^{-1}(y) in order (x_1, ..., x_i).
    Index n of the k-th preimage of a point with an i-point fiber is sent to
    `slot(i, k, n)` in the output fiber. With `stride` = N (the default) the
    block A_k^i is the residue class k-1 mod N; with stride i it is the
    residue class k-1 mod i.
    """

    f: CoarseMap
    D: int
    N: int
    fiber_enumerations: dict[int, tuple[int, ...]]
    scheme: str = "slotted"
    output_fiber: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "output_fiber", self.N * self.D)

    def stride(self, i: int) -> int:
        return self.N if self.scheme == "slotted" else i

    def slot(self, i: int, k: int, n: int) -> int:
        return n * self.stride(i) + (k - 1)

    def fiber_partitions(self) -> dict[int, list[list[int]]]:
        """For each fiber size i, the truncated blocks A_k^i (k = 1..i) of the output fiber."""
        out = {}
        for i in range(1, self.N + 1):
            out[i] = [[self.slot(i, k, n) for n in range(self.D)] for k in range(1, i + 1)]
        return out


def plan_uniform_cover(f: CoarseMap, D: int, scheme: str = "slotted") -> UniformCoverPlan:
    if scheme not in ("slotted", "interleaved"):
        raise ValueError("scheme must be 'slotted' or 'interleaved'")
    N = max_fiber(f)
    if D < max(N, 1):
        raise ValueError(f"fiber truncation D={D} is smaller than the maximal fiber size N={N}")
    enum: dict[int, list[int]] = {}
    for x, y in enumerate(f.table):
        enum.setdefault(int(y), []).append(x)
    return UniformCoverPlan(f, D, max(N, 1), {y: tuple(xs) for y, xs in enum.items()}, scheme)


def uniform_cover(plan: UniformCoverPlan) -> BandOperator:
    """Covering isometry S(delta_{x_k} (x) delta_n) = delta_y (x) delta_{slot(i, k, n)}."""
    f = plan.f
    entries = {}
    for y, xs in plan.fiber_enumerations.items():
        i = len(xs)
        for k, x in enumerate(xs, start=1):
            for n in range(plan.D):
                entries[(y, plan.slot(i, k, n), x, n)] = 1.0
    return BandOperator.from_entries(f.target, f.source, entries, plan.output_fiber, plan.D)


def cover_image_subspace(plan: UniformCoverPlan, V) -> list[int]:
    """Coordinate subspace W of the output fiber with S(l2(X) (x) V) inside l2(Y) (x) W."""
    sizes = {len(xs) for xs in plan.fiber_enumerations.values()}
    W = {plan.slot(i, k, n) for i in sizes for k in range(1, i + 1) for n in V}
    return sorted(W)


def cover_adjoint_subspace(plan: UniformCoverPlan, V) -> list[int]:
    """Coordinate subspace W of C^D with S*(l2(Y) (x) V) inside l2(X) (x) W."""
    sizes = {len(xs) for xs in plan.fiber_enumerations.values()}
    inverse = {plan.slot(i, k, n): n for i in sizes for k in range(1, i + 1) for n in range(plan.D)}
    return sorted({inverse[m] for m in V if m in inverse})


def covering_radius(S: BandOperator, f: CoarseMap) -> int:
    """Least R1 with (y, x) in supp(S)  =>  d(y, f(x)) <= R1."""
    if S.row_space != f.target or S.col_space != f.source:
        raise ValueError("S does not act between the spaces of f")
    pairs = S.structural_support()
    if not pairs:
        return 0
    return max(int(f.target.dist[y, f.table[x]]) for y, x in pairs)


def conjugate(S: BandOperator, T: BandOperator, f: CoarseMap | None = None,
              R1: int | None = None) -> BandOperator:
    """S T S*; with f given, the band bound is checked on the result.

    The bound is expansion_modulus(f, prop T) + 2 R1, where R1 defaults to
    the covering radius of S with respect to f.
    """
    out = S @ T @ S.adjoint()
    if f is not None:
        if R1 is None:
            R1 = covering_radius(S, f)
        bound = expansion_modulus(f, propagation(T)) + 2 * R1
        got = propagation(out)
        if got > bound:
            raise BandBoundViolation(f"propagation {got} exceeds {bound}")
    return out


def block_norm(block: np.ndarray, method: str = "svd", tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of a small dense block."""
    if block.size == 0:
        return 0.0
    if method == "svd":
        return float(np.linalg.norm(block, 2))
    if method != "power":
        raise ValueError("method must be 'svd' or 'power'")
    gram = block.conj().T @ block
    v = np.ones(gram.shape[0], dtype=complex) / np.sqrt(gram.shape[0])
    # a start vector orthogonal to the top eigenspace would stall; mix in a fixed perturbation
    v += 1e-3 * np.arange(1, gram.shape[0] + 1)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        new = float(np.real(np.vdot(v, w)))
        v = w / nw
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def extract_coarse_relation(U: BandOperator, delta: float, R: int, r: int, method: str = "svd") -> Entourage:
    """Union of B x A over ball blocks with ||1_B U 1_A|| > delta.

    B ranges over balls of radius R//2 in the row space and A over balls of
    radius r//2 in the column space, so diam B <= R and diam A <= r.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if U.row_fiber != 1 or U.col_fiber != 1:
        raise ValueError("extraction needs fiber dimension 1")
    Y, X = U.row_space, U.col_space
    m = U.matrix.tocsr()
    row_balls = {tuple(Y.ball(y, R // 2)) for y in range(len(Y))}
    col_balls = {tuple(X.ball(x, r // 2)) for x in range(len(X))}
    pairs: set[tuple[int, int]] = set()
    for B in row_balls:
        sub = m[list(B), :]
        if sub.nnz == 0:
            continue
        for A in col_balls:
            block = sub[:, list(A)]
            if block.nnz == 0:
                continue
            if block_norm(block.toarray(), method) > delta:
                pairs.update((b, a) for b in B for a in A)
    return Entourage(Y, X, pairs)


def alpha0(h: UFChain, R: int) -> tuple[int, ...]:
    """Rank vector of the diagonal projection with multiplicities h in K_0 of the R-band algebra.

    The R-band algebra of a finite space is the direct sum of full matrix
    algebras over its R-components, so its K_0 is Z^{#components} and the
    class of diag(h) is the vector of per-component sums of h.
    """
    if h.degree != 0:
        raise ValueError("alpha0 takes a degree-0 chain")
    vals = h.values()
    return tuple(int(sum(vals[i] for i in comp)) for comp in components_at_scale(h.space, R))


@dataclass
class Alpha0Report:
    scale: int
    points: int
    components: int
    boundary_rank: int
    homology_rank: int
    elementary_divisors: list[int]
    image_in_kernel: bool
    kernel_rank: int
    injective: bool

    @property
    def passed(self) -> bool:
        return (self.injective and self.image_in_kernel
                and all(d == 1 for d in self.elementary_divisors)
                and self.homology_rank == self.components)

    def as_dict(self) -> dict:
        out = dict(vars(self))
        out["passed"] = self.passed
        return out


def alpha0_injectivity_check(space: MetricSpace, R: int) -> Alpha0Report:
    """Compare the Smith normal form of the scale-R boundary with the component-sum map.

    H_0 at scale R is Z^n / im(boundary). With all elementary divisors equal
    to 1 it is free of rank n - rank; alpha0 is injective exactly when its
    kernel (rank n - #components, saturated) equals the image of the
    boundary, i.e. when im(boundary) lies in ker(alpha0), is saturated, and
    the ranks agree.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    n = len(space)
    comps = components_at_scale(space, R)
    m = boundary_matrix(space, R)
    divisors = elementary_divisors(m)
    rank = len(divisors)
    comp_of = np.empty(n, dtype=np.int64)
    for c, members in enumerate(comps):
        comp_of[members] = c
    # alpha0 of every boundary column
    sums = np.zeros((len(comps), m.shape[1]), dtype=np.int64)
    np.add.at(sums, comp_of, m)
    image_in_kernel = not sums.any()
    kernel_rank = n - len(comps)
    saturated = all(d == 1 for d in divisors)
    injective = image_in_kernel and saturated and rank == kernel_rank
    return Alpha0Report(
        scale=R,
        points=n,
        components=len(comps),
        boundary_rank=rank,
        homology_rank=n - rank,
        elementary_divisors=divisors,
        image_in_kernel=image_in_kernel,
        kernel_rank=kernel_rank,
        injective=injective,
    )


def doubling_block_permutation(space: MetricSpace, n: int) -> np.ndarray:
    """perm[i*|X| + x] = index of (x, i+1) in doubling(space, n).

    Block order (level-major) is how an n x n matrix of operators on l2(X)
    is laid out; the doubling orders its points x-major.
    """
    m = len(space)
    perm = np.empty(m * n, dtype=np.int64)
    for i in range(n):
        for x in range(m):
            perm[i * m + x] = x * n + i
    return perm


def embed_blocks(space: MetricSpace, n: int, blocks, doubled: MetricSpace | None = None) -> BandOperator:
    """Send an n x n array of operators on l2(X) to the operator on l2(X^(n)).

    `blocks[i][j]` is a |X| x |X| matrix; entry ((x, i), (y, j)) of the
    result is blocks[i][j][x, y].
    """
    m = len(space)
    big = sparse.bmat([[sparse.csr_matrix(np.asarray(blocks[i][j], dtype=complex).reshape(m, m))
                        for j in range(n)] for i in range(n)], format="csr")
    perm = doubling_block_permutation(space, n)
    P = sparse.csr_matrix((np.ones(m * n), (perm, np.arange(m * n))), shape=(m * n, m * n))
    doubled = doubled if doubled is not None else doubling(space, n)
    return BandOperator(doubled, doubled, P @ big @ P.T)
