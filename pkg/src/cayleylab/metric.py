"""Word metric, balls, doubling constants, nets and covers on Cayley graphs."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .groups import FiniteGroup, GeneratingSet

UNREACHABLE = np.iinfo(np.int16).max


@dataclass(eq=False)
class RegularMultigraph:
    """A d-regular multigraph as an n x d neighbour array.

    Row x lists the neighbours of x in generator order; repeats and self-loops
    are allowed and each slot counts as one edge end.
    """

    neighbors: np.ndarray
    name: str = ""
    _dist: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.neighbors = np.asarray(self.neighbors, dtype=np.int64)
        if self.neighbors.ndim != 2:
            raise ValueError("neighbors must be an n x d array")
        n = self.neighbors.shape[0]
        if n and (self.neighbors.min() < 0 or self.neighbors.max() >= n):
            raise ValueError("neighbour index out of range")

    @property
    def n(self) -> int:
        return int(self.neighbors.shape[0])

    @property
    def degree(self) -> int:
        return int(self.neighbors.shape[1])

    def adjacency(self) -> np.ndarray:
        """Dense edge-multiplicity matrix; a self-loop slot adds 1 to A[x, x]."""
        A = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), self.degree)
        np.add.at(A, (rows, self.neighbors.ravel()), 1.0)
        return A

    def is_symmetric(self) -> bool:
        A = self.adjacency()
        return bool(np.array_equal(A, A.T))

    def _compute_dist(self) -> np.ndarray:
        A = csr_matrix(self.adjacency() > 0)
        d = shortest_path(A, method="D", unweighted=True)
        d[np.isinf(d)] = UNREACHABLE
        return d.astype(np.int16)

    @property
    def dist(self) -> np.ndarray:
        if self._dist is None:
            self._dist = self._compute_dist()
        return self._dist

    @property
    def diameter(self) -> int:
        return int(self.dist.max())

    def ball(self, x: int, r: float) -> np.ndarray:
        """Vertices of the closed ball B(x, r), sorted."""
        return np.flatnonzero(self.dist[x] <= r)

    def ball_mask(self, x: int, r: float) -> np.ndarray:
        return self.dist[x] <= r

    def ball_sizes(self, x: int = 0) -> np.ndarray:
        """|B(x, r)| for r = 0..diam."""
        counts = np.bincount(self.dist[x].astype(np.int64), minlength=self.diameter + 1)
        return np.cumsum(counts[: self.diameter + 1])


@dataclass(eq=False)
class CayleyGraph(RegularMultigraph):
    group: FiniteGroup | None = None
    gens: GeneratingSet | None = None

    def _compute_dist(self) -> np.ndarray:
        # one BFS from the identity, spread by left-invariance d(x, y) = d(e, x^-1 y)
        row = _bfs(self.neighbors, 0)
        G = self.group
        return row[G.table[G.inverse]].astype(np.int16)


def _bfs(neighbors: np.ndarray, source: int) -> np.ndarray:
    n = neighbors.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source])
    level = 0
    while frontier.size:
        level += 1
        nxt = np.unique(neighbors[frontier].ravel())
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = level
        frontier = nxt
    if (dist < 0).any():
        raise ValueError("graph is not connected")
    return dist


def build_cayley(G: FiniteGroup, S: GeneratingSet) -> CayleyGraph:
    """Cay(G; S) with edges x ~ x*s, neighbour lists in generator order."""
    nbrs = G.table[:, list(S.elements)]
    return CayleyGraph(nbrs, name=G.name, group=G, gens=S)


# ---------------------------------------------------------------------------
# doubling


@dataclass
class DoublingProfile:
    ball_sizes: list[int]
    c_real: float
    c_real_radius: float
    c_int: float
    c_int_radius: int
    diam: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "ball_size", "ratio_2r_over_r"])
        sizes = self.ball_sizes
        for r, b in enumerate(sizes):
            ratio = _size(sizes, 2 * r) / b
            w.writerow([r, b, repr(ratio)])
        return buf.getvalue()


def _size(sizes, r: int) -> int:
    return sizes[min(r, len(sizes) - 1)]


def doubling_profile(X: RegularMultigraph, basepoint: int = 0) -> DoublingProfile:
    """Doubling constants of a vertex-transitive graph from one basepoint.

    For real R in [r, r+1) the balls are B(r) and B(2r) or B(2r+1), so the
    supremum over real radii is a maximum over these integer pairs.
    """
    sizes = [int(s) for s in X.ball_sizes(basepoint)]
    D = len(sizes) - 1
    c_real, c_real_R = 1.0, 0.0
    for r in range(D + 1):
        for R2, R in ((2 * r, float(r)), (2 * r + 1, r + 0.5)):
            ratio = _size(sizes, R2) / sizes[r]
            if ratio > c_real:
                c_real, c_real_R = ratio, R
    c_int, c_int_r = 1.0, 1
    for r in range(1, D + 1):
        ratio = _size(sizes, 2 * r) / sizes[r]
        if ratio > c_int:
            c_int, c_int_r = ratio, r
    return DoublingProfile(sizes, c_real, c_real_R, c_int, c_int_r, D)


# ---------------------------------------------------------------------------
# nets and covers


def greedy_net(X: RegularMultigraph, tau: float, region=None) -> list[int]:
    """Maximal separated set, greedy in vertex-index order.

    Integer convention: with t = floor(tau), net points are pairwise at
    distance > t and every vertex of the region lies within t of the net.
    """
    t = math.floor(tau)
    verts = np.arange(X.n) if region is None else np.sort(np.asarray(list(region)))
    covered = np.zeros(X.n, dtype=bool)
    net = []
    for v in verts:
        if not covered[v]:
            net.append(int(v))
            covered |= X.dist[v] <= t
    return net


def greedy_cover(X: RegularMultigraph, r: float, region=None) -> list[int]:
    """Greedy set cover of ``region`` (default: all of X) by balls B(c, r),
    c in region: repeatedly take the ball covering the most uncovered
    vertices, ties to the lowest index."""
    verts = np.arange(X.n) if region is None else np.sort(np.asarray(list(region)))
    balls = (X.dist[np.ix_(verts, verts)] <= r).astype(np.float64)
    uncovered = np.ones(len(verts))
    centers = []
    while uncovered.any():
        gain = balls @ uncovered
        j = int(np.argmax(gain))
        centers.append(int(verts[j]))
        uncovered[balls[j] > 0] = 0.0
    return centers


@dataclass
class CoverCheck:
    R: float
    eps: float
    count: int
    bound: float
    passed: bool
    centers: list[int]


def cover_count_check(X: RegularMultigraph, R: float, eps: float, c: float | None = None,
                      K: float = 4.0) -> CoverCheck:
    """Cover B(e, R) by balls of radius eps*R; compare with c^(K log2(1/eps))."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if c is None:
        c = doubling_profile(X).c_real
    region = X.ball(0, R)
    centers = greedy_cover(X, eps * R, region)
    bound = c ** (K * math.log2(1 / eps))
    return CoverCheck(R, eps, len(centers), bound, len(centers) <= bound, centers)


def intersection_multiplicity(X: RegularMultigraph, centers, r: float) -> int:
    """max_x #{i : d(x, c_i) <= r} for centers whose r/3-balls are disjoint."""
    centers = list(centers)
    inner = X.dist[centers] <= r / 3
    if (inner.sum(axis=0) > 1).any():
        raise ValueError("balls of radius r/3 about the centers are not disjoint")
    return int((X.dist[centers] <= r).sum(axis=0).max())


# ---------------------------------------------------------------------------
# measure lemmas


@dataclass
class InequalityEntry:
    label: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class MeasureReport:
    measlem: list[InequalityEntry]
    smallmeas: list[InequalityEntry]
    meassym: list[InequalityEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.measlem + self.smallmeas + self.meassym)


def smallmeas_bound(n: int, diam: int, c: float, eps: float) -> float:
    """1 + n q^j with q = 1 - 1/(2c), j = number of admissible /10 shrinks.

    Shrinking R -> R/10 is allowed while 10 <= R; j steps reach D/10^j, which
    must still contain the eps*D ball.
    """
    q = 1 - 1 / (2 * c)
    j = 0
    R = float(diam)
    while R >= 10 and R / 10 >= eps * diam:
        R /= 10
        j += 1
    return 1 + n * q**j


def measure_lemma_checks(X: RegularMultigraph, c: float | None = None,
                         rng: np.random.Generator | None = None,
                         meassym_constant: float = 8.0,
                         eps_grid=tuple(2.0**-j for j in range(1, 7)),
                         n_points: int = 3) -> MeasureReport:
    """Evaluate the ball-measure inequalities at a few random vertices.

    A violation is recorded as a failed entry, never raised.
    """
    if c is None:
        c = doubling_profile(X).c_real
    rng = rng or np.random.default_rng(0)
    D = X.diameter
    n = X.n
    points = sorted({0, *map(int, rng.choice(n, size=min(n_points, n), replace=False))})
    q = 1 - 1 / (2 * c)
    measlem, small, sym = [], [], []
    for x in points:
        row = X.dist[x]
        for R in range(10, D + 1):
            lhs = q * np.count_nonzero(row <= R)
            rhs = np.count_nonzero(row <= R / 10)
            measlem.append(InequalityEntry(f"x={x},R={R}", float(lhs), float(rhs), bool(lhs >= rhs)))
        for eps in eps_grid:
            mu = float(np.count_nonzero(row <= eps * D))
            b = smallmeas_bound(n, D, c, eps)
            small.append(InequalityEntry(f"x={x},eps={eps}", mu, b, mu <= b))
            b = meassym_constant * (1 + eps * n)
            sym.append(InequalityEntry(f"x={x},eps={eps}", mu, b, mu <= b))
    return MeasureReport(measlem, small, sym)
