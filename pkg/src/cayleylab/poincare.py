"""Local Poincare constants as generalized eigenvalues, and their maximum."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .metric import RegularMultigraph


def _forms(X: RegularMultigraph, center: int, R: float) -> tuple[np.ndarray, np.ndarray]:
    """Centred mass form on B(x,R) and R^2 times the gradient form on B(x,3R),
    both over the vertices of B(x,3R). Edges leaving B(x,3R) are dropped."""
    big = X.ball(center, 3 * R)
    pos = -np.ones(X.n, dtype=np.int64)
    pos[big] = np.arange(len(big))
    m = len(big)

    inner = pos[X.ball(center, R)]
    A = np.zeros((m, m))
    A[np.ix_(inner, inner)] = -1.0 / len(inner)
    A[inner, inner] += 1.0

    nb = pos[X.neighbors[big]]
    rows = np.repeat(np.arange(m), X.degree)
    cols = nb.ravel()
    keep = (cols >= 0) & (cols != rows)
    adj = np.zeros((m, m))
    np.add.at(adj, (rows[keep], cols[keep]), 1.0)
    # sum_x (1/2d) sum_{y~x, y in ball} (f(x)-f(y))^2 = f^T (Deg - Adj) f / d
    grad = (np.diag(adj.sum(axis=1)) - adj) / X.degree
    return A, R**2 * grad


def local_poincare(X: RegularMultigraph, center: int, R: float, tol: float = 1e-10) -> float:
    """sup_f sum_{B(R)} |f - mean_R f|^2 / (R^2 sum_{B(3R)} |grad f|^2)."""
    if R < 1:
        raise ValueError("R must be >= 1")
    A, B = _forms(X, center, R)
    w, U = scipy.linalg.eigh(B)
    scale = max(1.0, float(np.abs(w).max()))
    live = w > tol * scale
    null = U[:, ~live]
    if null.size and np.abs(A @ null).max() > 1e-9:
        return math.inf
    Q = U[:, live] / np.sqrt(w[live])
    theta = scipy.linalg.eigvalsh(Q.T @ A @ Q)
    return max(0.0, float(theta[-1]))


def default_R_grid(diam: int) -> list[int]:
    return sorted(set(range(1, math.ceil(diam / 3) + 1)) | {max(diam, 1)})


@dataclass
class PoincareEstimate:
    P_hat: float
    argmax: tuple[int, int]
    R_grid: list[int]
    centers: list[int]
    locals: dict[tuple[int, int], float] = field(repr=False)
    transitivity_deviation: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["center", "R", "P_local"])
        for (c, R), v in sorted(self.locals.items()):
            w.writerow([c, R, repr(v)])
        return buf.getvalue()


def global_poincare(X: RegularMultigraph, R_grid=None, centers=None,
                    rng: np.random.Generator | None = None, extra_centers: int = 2) -> PoincareEstimate:
    """Maximise local constants over the grid at the first center; the other
    centers (two random ones by default) measure vertex-transitivity."""
    if R_grid is None:
        R_grid = default_R_grid(X.diameter)
    R_grid = list(R_grid)
    if not R_grid:
        raise ValueError("empty radius grid")
    if centers is None:
        rng = rng or np.random.default_rng(0)
        others = rng.choice(np.arange(1, X.n), size=min(extra_centers, X.n - 1), replace=False) if X.n > 1 else []
        centers = [0, *map(int, others)]
    centers = list(centers)
    locals_ = {(c, R): local_poincare(X, c, R) for c in centers for R in R_grid}
    base = {R: locals_[(centers[0], R)] for R in R_grid}
    dev = 0.0
    for c in centers[1:]:
        for R in R_grid:
            a, b = locals_[(c, R)], base[R]
            if math.isfinite(a) and math.isfinite(b):
                dev = max(dev, abs(a - b) / max(1.0, abs(b)))
            elif a != b:
                dev = math.inf
    (c, R), P = max(locals_.items(), key=lambda kv: kv[1])
    return PoincareEstimate(P, (c, R), R_grid, centers, locals_, dev)


@dataclass
class KSCCheck:
    P_hat: float
    c: float
    ratio: float
    constant: float
    passed: bool


def ksc_bound_check(X: RegularMultigraph, c: float, constant: float = 16.0,
                    estimate: PoincareEstimate | None = None) -> KSCCheck:
    """P_hat <= constant * c^3 for Cayley graphs."""
    est = estimate or global_poincare(X)
    ratio = est.P_hat / c**3
    return KSCCheck(est.P_hat, c, ratio, constant, ratio <= constant)
