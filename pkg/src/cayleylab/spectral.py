"""Laplacian spectra, eigenvalue multiplicities and the inequalities built on them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .metric import RegularMultigraph, greedy_cover, greedy_net


def assemble_laplacian(X) -> np.ndarray:
    """Dense Laplacian I - A/d of a regular multigraph.

    ``X`` is a RegularMultigraph or a list of neighbour lists; ragged lists
    (non-regular input) are rejected. A self-loop slot adds the vertex's own
    value to the neighbour sum, so it lowers the diagonal by 1/d.
    """
    if not isinstance(X, RegularMultigraph):
        lengths = {len(row) for row in X}
        if len(lengths) != 1:
            raise ValueError("Laplacian needs a regular multigraph")
        X = RegularMultigraph(np.array([list(row) for row in X]))
    if X.degree == 0:
        raise ValueError("degree must be positive")
    A = X.adjacency()
    if not np.array_equal(A, A.T):
        raise ValueError("neighbour relation is not symmetric")
    return np.eye(X.n) - A / X.degree


def gradient_sq(X: RegularMultigraph, f: np.ndarray) -> np.ndarray:
    """|grad f(x)|^2 = (1/2d) sum_{y~x} (f(x) - f(y))^2, vectorised over the
    columns of ``f`` when it is 2-D."""
    f = np.asarray(f, dtype=float)
    diff = f[:, None, ...] - f[X.neighbors]
    return (diff**2).sum(axis=1) / (2 * X.degree)


@dataclass
class Spectrum:
    """Sorted eigenpairs of the Laplacian, clustered into eigenspaces.

    ``eigenvalue(k)`` and ``eigenspace(k)`` use 1-based numbering with
    repetition, so lambda_1 = 0 and lambda_2 <= lambda_3 <= ...
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: list[np.ndarray]
    tol_cluster: float
    _cluster_of: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self._cluster_of = np.empty(len(self.eigenvalues), dtype=np.int64)
        for i, c in enumerate(self.clusters):
            self._cluster_of[c] = i

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def multiplicities(self) -> list[int]:
        return [len(c) for c in self.clusters]

    @property
    def cluster_values(self) -> list[float]:
        return [float(self.eigenvalues[c].mean()) for c in self.clusters]

    def cluster_of(self, k: int) -> int:
        return int(self._cluster_of[k - 1])

    def eigenvalue(self, k: int) -> float:
        return float(self.eigenvalues[k - 1])

    def eigenspace(self, k: int) -> np.ndarray:
        """Orthonormal basis (n x m_k) of W_k, the eigenspace containing lambda_k."""
        return self.eigenvectors[:, self.clusters[self.cluster_of(k)]]

    def multiplicity(self, k: int) -> int:
        return len(self.clusters[self.cluster_of(k)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eigenvalue", "cluster"])
        for i, lam in enumerate(self.eigenvalues):
            w.writerow([i + 1, repr(float(lam)), int(self._cluster_of[i]) + 1])
        return buf.getvalue()


def cluster_eigenvalues(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage clusters of sorted values: a gap > tol starts a new one."""
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    return np.split(np.arange(len(values)), breaks)


def full_spectrum(L: np.ndarray, tol_cluster: float | None = None, rel_gap: float = 1e-6) -> Spectrum:
    L = np.asarray(L, dtype=float)
    try:
        w, V = scipy.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    if tol_cluster is None:
        tol_cluster = rel_gap * max(1.0, float(w[-1]))
    if tol_cluster <= 0:
        raise ValueError("tol_cluster must be positive")
    return Spectrum(w, V, cluster_eigenvalues(w, tol_cluster), tol_cluster)


def graph_spectrum(X: RegularMultigraph, **kw) -> Spectrum:
    return full_spectrum(assemble_laplacian(X), **kw)


def stokes_check(X: RegularMultigraph, phi: np.ndarray, lam: float) -> float:
    """|sum |grad phi|^2 - lam sum phi^2| / max(1, sum phi^2)."""
    phi = np.asarray(phi, dtype=float)
    mass = float(phi @ phi)
    return abs(float(gradient_sq(X, phi).sum()) - lam * mass) / max(1.0, mass)


def rayleigh_quotients(X: RegularMultigraph, fs) -> list[float]:
    """Energy over global-mean-centred mass for each test function."""
    fs = [np.asarray(f, dtype=float) for f in fs]
    supports = np.array([f != 0 for f in fs])
    if (supports.sum(axis=0) > 1).any():
        raise ValueError("test functions must have pairwise disjoint supports")
    out = []
    for f in fs:
        var = float(((f - f.mean()) ** 2).sum())
        if var <= 1e-14 * max(1.0, float(f @ f)):
            raise ValueError("test function is constant")
        out.append(float(gradient_sq(X, f).sum()) / var)
    return out


def rayleigh_upper_bound(X: RegularMultigraph, fs) -> float:
    """Upper bound on lambda_k, k = len(fs), from disjointly supported functions."""
    return max(rayleigh_quotients(X, fs))


def ball_average_map(X: RegularMultigraph, W: np.ndarray, centers, r: float) -> np.ndarray:
    """Row j: averages of the basis columns of W over the ball B(c_j, r)."""
    masks = (X.dist[list(centers)] <= r).astype(float)
    return (masks @ W) / masks.sum(axis=1, keepdims=True)


def numerical_rank(M: np.ndarray, rel: float = 1e-8) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] <= 1e-12:
        return 0
    return int((s > rel * s[0]).sum())


@dataclass
class MultiplicityCertificate:
    k: int
    delta: float
    radius: float
    M: int
    rank: int
    multiplicity: int
    certified: bool
    centers: list[int]
    cover_method: str = "set_cover"
    null_rayleigh: float | None = None
    lemma_product: float | None = None


def multiplicity_certificate(X: RegularMultigraph, spectrum: Spectrum, k: int, delta: float,
                             c: float | None = None, P_hat: float | None = None,
                             K: float = 1.0) -> MultiplicityCertificate:
    """Rank of the ball-average map on W_k for a greedy cover at radius delta*diam.

    rank == m_k certifies m_k <= M. When the map has a kernel, the Rayleigh
    quotient of a null vector and lam_k * c^K * P_hat * (delta*diam)^2 are
    reported for comparison with 1.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    r = delta * X.diameter
    W = spectrum.eigenspace(k)
    m = W.shape[1]
    # any cover by r-balls certifies; the net is tried when the set cover's
    # centres happen to sit on a common nodal set
    for method, centers in (("set_cover", greedy_cover(X, r)), ("net", greedy_net(X, r))):
        Phi = ball_average_map(X, W, centers, r)
        rank = numerical_rank(Phi)
        if rank == m:
            break
    cert = MultiplicityCertificate(k, delta, r, len(centers), rank, m, rank == m, centers, method)
    if rank < m:
        _, _, Vt = np.linalg.svd(Phi, full_matrices=True)
        phi = W @ Vt[-1]
        cert.null_rayleigh = float(gradient_sq(X, phi).sum() / (phi @ phi))
        if c is not None and P_hat is not None:
            cert.lemma_product = spectrum.eigenvalue(k) * c**K * P_hat * r**2
    return cert


def certify_by_halving(X: RegularMultigraph, spectrum: Spectrum, k: int = 2, delta0: float = 0.25,
                       **kw) -> tuple[MultiplicityCertificate, list[MultiplicityCertificate]]:
    """Halve delta from delta0 until certified or delta*diam < 1.

    Returns the last certificate tried and the full trail.
    """
    trail = []
    delta = delta0
    while True:
        cert = multiplicity_certificate(X, spectrum, k, delta, **kw)
        trail.append(cert)
        if cert.certified or delta * X.diameter / 2 < 1:
            return cert, trail
        delta /= 2


def cutoff_function(X: RegularMultigraph, center: int, R: float) -> np.ndarray:
    """1 on B(R), 1 - d(x, B(R))/R on B(2R) minus B(R), 0 beyond."""
    if R < 1:
        raise ValueError("R must be >= 1")
    d = X.dist[center].astype(float)
    rR = math.floor(R)
    u = 1 - (d - rR) / R
    u[d <= R] = 1.0
    u[d > 2 * R] = 0.0
    return np.clip(u, 0.0, 1.0)


@dataclass
class ReversePoincareResult:
    lhs: float
    rhs: float
    passed: bool


def reverse_poincare_check(X: RegularMultigraph, phi: np.ndarray, lam: float, center: int,
                           R: int, tol: float = 1e-10) -> ReversePoincareResult:
    """sum_{B(R)} |grad phi|^2 <= (128/(d R^2) + 2 lam) sum_{B(2R)} phi^2."""
    lhs, rhs = reverse_poincare_sides(X, np.asarray(phi, float)[:, None], np.array([lam]), center, R)
    return ReversePoincareResult(float(lhs[0]), float(rhs[0]), bool(lhs[0] <= rhs[0] + tol))


def reverse_poincare_sides(X: RegularMultigraph, V: np.ndarray, lams: np.ndarray, center: int,
                           R: int, grad: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the reverse Poincare inequality for every column of V."""
    if R < 1:
        raise ValueError("R must be >= 1")
    if grad is None:
        grad = gradient_sq(X, V)
    row = X.dist[center]
    inner = (row <= R).astype(float)
    outer = (row <= 2 * R).astype(float)
    lhs = inner @ grad
    rhs = (128 / (X.degree * R**2) + 2 * np.asarray(lams)) * (outer @ V**2)
    return lhs, rhs
