"""Left action of G on eigenspaces, its kernel, and the quotient pushdown."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import (
    FiniteGroup,
    GeneratingSet,
    abelian_invariant_factors,
    is_normal,
    quotient_group,
    subgroup_as_group,
    subgroup_generated,
)
from .metric import RegularMultigraph, build_cayley, doubling_profile
from .spectral import Spectrum, assemble_laplacian, full_spectrum


class ActionError(RuntimeError):
    """Numerical evidence inconsistent with exact group structure."""


def action_permutation(G: FiniteGroup, g: int) -> np.ndarray:
    """Index array p with (rho(g) f)(x) = f(g^-1 x) = f[p[x]]."""
    return G.table[G.inverse[g], :]


def commutation_check(G: FiniteGroup, L: np.ndarray, sample, vectors) -> float:
    """max ||L rho(g) f - rho(g) L f|| / ||f|| over the sampled g and f."""
    worst = 0.0
    for g in sample:
        p = action_permutation(G, g)
        for f in vectors:
            f = np.asarray(f, dtype=float)
            r = np.linalg.norm(L @ f[p] - (L @ f)[p]) / np.linalg.norm(f)
            worst = max(worst, float(r))
    return worst


@dataclass
class ActionRestriction:
    basis: np.ndarray
    matrices: np.ndarray
    invariance_residual: float
    tol: float

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def restrict_action(G: FiniteGroup, basis: np.ndarray, tol: float = 1e-6) -> ActionRestriction:
    """M_g = V^T R_g V for every g, after checking R_g V stays inside span(V)."""
    V = np.asarray(basis, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n, m = V.shape
    mats = np.empty((G.order, m, m))
    resid = 0.0
    for lo in range(0, G.order, 256):
        perms = G.table[G.inverse[lo:lo + 256]]
        shifted = V[perms]                   # (g, x, m)
        block = np.einsum("xi,gxj->gij", V, shifted)
        mats[lo:lo + 256] = block
        resid = max(resid, float(np.abs(shifted - np.einsum("xi,gij->gxj", V, block)).max()))
    if resid > tol:
        raise ActionError(f"eigenspace is not invariant (residual {resid:.2e}); check clustering")
    return ActionRestriction(V, mats, resid, tol)


def restrict_to_eigenspace(G: FiniteGroup, spectrum: Spectrum, k: int, tol: float = 1e-6) -> ActionRestriction:
    return restrict_action(G, spectrum.eigenspace(k), tol)


@dataclass
class KernelReport:
    H: frozenset
    index: int
    deviations: np.ndarray = field(repr=False)
    eps: float = 1e-6
    separation: float = math.inf


def kernel(G: FiniteGroup, action: ActionRestriction, eps: float = 1e-6) -> KernelReport:
    """Elements acting as the identity, validated exactly as a normal subgroup."""
    m = action.dim
    dev = np.linalg.norm(action.matrices - np.eye(m), axis=(1, 2))
    members = np.flatnonzero(dev <= eps)
    H = frozenset(int(h) for h in members)
    if subgroup_generated(G, H) != H:
        raise ActionError("numerical kernel is not closed under multiplication")
    if not is_normal(G, H):
        raise ActionError("numerical kernel is not normal")
    outside = dev[dev > eps]
    sep = float(outside.min()) if outside.size else math.inf
    if sep <= 10 * eps:
        raise ActionError(f"kernel separation gap too small ({sep:.2e} <= 10 eps)")
    return KernelReport(H, G.order // len(H), dev, eps, sep)


def quotient_cayley(G: FiniteGroup, S: GeneratingSet, H) -> tuple[RegularMultigraph, FiniteGroup, np.ndarray]:
    """Cay(G/H; S) keeping the full multiset image of S (identity images become
    self-loops)."""
    Q, proj = quotient_group(G, H)
    images = [int(proj[s]) for s in S]
    nbrs = Q.table[:, images]
    graph = RegularMultigraph(nbrs, name=f"{G.name}/H")
    return graph, Q, proj


@dataclass
class QuotientAnalysis:
    graph: RegularMultigraph
    Q: FiniteGroup
    proj: np.ndarray
    spectrum: Spectrum
    f_hat: np.ndarray
    coset_variance: float
    pushdown_residual: float
    lambda2_quotient: float
    lam: float
    loops: int

    @property
    def order(self) -> int:
        return self.Q.order


def quotient_pushdown(G: FiniteGroup, H, S: GeneratingSet, f: np.ndarray, lam: float,
                      tol: float = 1e-8) -> QuotientAnalysis:
    graph, Q, proj = quotient_cayley(G, S, H)
    f = np.asarray(f, dtype=float)
    counts = np.bincount(proj, minlength=Q.order)
    f_hat = np.bincount(proj, weights=f, minlength=Q.order) / counts
    var = float(((f - f_hat[proj]) ** 2).max())
    if var > tol:
        raise ActionError(f"f is not constant on cosets (max squared deviation {var:.2e})")
    Lq = assemble_laplacian(graph)
    resid = float(np.linalg.norm(Lq @ f_hat - lam * f_hat) / max(np.linalg.norm(f_hat), 1e-300))
    if resid > tol:
        raise ActionError(f"pushdown is not an eigenfunction (residual {resid:.2e})")
    spec = full_spectrum(Lq)
    lam2q = spec.eigenvalue(2) if Q.order > 1 else math.nan
    if Q.order > 1 and lam2q > lam + tol:
        raise ActionError(f"lambda_2(G/H) = {lam2q} exceeds lambda = {lam}")
    loops = int((graph.neighbors == np.arange(graph.n)[:, None]).sum())
    return QuotientAnalysis(graph, Q, proj, spec, f_hat, var, resid, lam2q, lam, loops)


@dataclass
class CheegerResult:
    h: float | None
    exact: bool
    lower_bound: float
    argmin: list[int] | None = None


def edge_boundary(X: RegularMultigraph, U) -> int:
    inside = np.zeros(X.n, dtype=bool)
    inside[list(U)] = True
    return int((~inside[X.neighbors[inside]]).sum())


def cheeger(X: RegularMultigraph, max_exact: int = 24, transitive: bool = False) -> CheegerResult:
    """Cheeger constant min_{|U| <= n/2} |E(U, U^c)| / |U| by subset enumeration.

    Self-loops never cross the cut. Above ``max_exact`` vertices only the
    connectivity bound 2/n is returned. For vertex-transitive graphs a minimiser
    can be translated to contain vertex 0, so only those subsets are scanned.
    """
    n = X.n
    lower = 2 / n if n > 1 else math.inf
    if n <= 1:
        return CheegerResult(None, False, lower)
    if n > max_exact:
        return CheegerResult(None, False, lower)
    bits = 1 << np.arange(n, dtype=np.int64)
    best, best_mask = math.inf, 0
    chunk = 1 << 16
    step = 2 if transitive else 1
    total = (1 << n) // step
    for start in range(0 if transitive else 1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64) * step + (step - 1)
        member = (masks[:, None] & bits) != 0                       # (c, n)
        size = member.sum(axis=1)
        ok = size <= n / 2
        if not ok.any():
            continue
        member, size, masks = member[ok], size[ok], masks[ok]
        cross = (member[:, :, None] & ~member[:, X.neighbors]).sum(axis=(1, 2))
        ratio = cross / size
        j = int(np.argmin(ratio))
        if ratio[j] < best:
            best, best_mask = float(ratio[j]), int(masks[j])
    U = [i for i in range(n) if best_mask >> i & 1]
    return CheegerResult(best, True, lower, U)


@dataclass
class ChainLink:
    label: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class RepresentationReport:
    order: int
    degree: int
    c_real: float
    diam: int
    dim_W: int | None = None
    lambda2: float | None = None
    kernel: frozenset | None = None
    image_order: int | None = None
    quotient: QuotientAnalysis | None = None
    cheeger: CheegerResult | None = None
    chain: list[ChainLink] = field(default_factory=list)
    dim_bound: float | None = None
    image_bound: float | None = None
    growth_exponent: float | None = None
    measured_exponent: float | None = None
    commutation_residual: float | None = None
    representation_residual: float | None = None

    @property
    def passed(self) -> bool:
        return all(link.passed for link in self.chain)


def representation_report(G: FiniteGroup, S: GeneratingSet, K_dim: float = 1.0, K_image: float = 1.0,
                          rng: np.random.Generator | None = None, X=None, spectrum: Spectrum | None = None,
                          tol: float = 1e-10) -> RepresentationReport:
    """Spectrum -> W_2 -> action -> kernel -> quotient -> Cheeger, link by link."""
    rng = rng or np.random.default_rng(0)
    X = X or build_cayley(G, S)
    prof = doubling_profile(X)
    c, D, d, n = prof.c_real, prof.diam, S.degree, G.order
    rep = RepresentationReport(n, d, c, D)
    if n == 1:
        return rep
    L = assemble_laplacian(X)
    spectrum = spectrum or full_spectrum(L)
    lam = spectrum.eigenvalue(2)
    W = spectrum.eigenspace(2)
    rep.lambda2, rep.dim_W = lam, W.shape[1]

    sample = rng.choice(n, size=min(50, n), replace=False)
    vecs = rng.standard_normal((3, n))
    rep.commutation_residual = commutation_check(G, L, sample, vecs)

    act = restrict_action(G, W)
    a, b = rng.integers(0, n, size=(2, 1000))
    prod = np.einsum("pij,pjk->pik", act.matrices[a], act.matrices[b])
    rep.representation_residual = float(np.abs(prod - act.matrices[G.table[a, b]]).max())

    ker = kernel(G, act)
    rep.kernel, rep.image_order = ker.H, ker.index
    qa = quotient_pushdown(G, ker.H, S, W[:, 0], lam)
    rep.quotient = qa
    ch = cheeger(qa.graph, transitive=True)
    rep.cheeger = ch

    nq = qa.order
    floor_bound = 2 / (d * nq) ** 2
    rep.chain.append(ChainLink("lambda2(G) >= lambda2(G/H)", lam, qa.lambda2_quotient,
                               lam >= qa.lambda2_quotient - 1e-8))
    if ch.exact:
        cheeger_bound = ch.h**2 / (2 * d**2)
        rep.chain.append(ChainLink("lambda2(G/H) >= h^2/(2d^2)", qa.lambda2_quotient, cheeger_bound,
                                   qa.lambda2_quotient >= cheeger_bound - tol))
        rep.chain.append(ChainLink("h^2/(2d^2) >= 2/(d|G/H|)^2", cheeger_bound, floor_bound,
                                   cheeger_bound >= floor_bound - tol))
        rep.chain.append(ChainLink("h >= 2/|G/H|", ch.h, 2 / nq, ch.h >= 2 / nq - tol))
    else:
        rep.chain.append(ChainLink("lambda2(G/H) >= 2/(d|G/H|)^2", qa.lambda2_quotient, floor_bound,
                                   qa.lambda2_quotient >= floor_bound - tol))
    rep.chain.append(ChainLink("|G/H| >= sqrt(2/(d^2 lambda2))", nq, math.sqrt(2 / (d**2 * lam)),
                               nq >= math.sqrt(2 / (d**2 * lam)) - tol))
    rep.chain.append(ChainLink("|rho(G)| |H| = |G|", nq * len(ker.H), n, nq * len(ker.H) == n))

    logc = math.log(c)
    rep.dim_bound = math.exp(K_dim * logc**2)
    rep.image_bound = D / c**K_image
    rep.growth_exponent = 1 / math.log2(c)
    rep.measured_exponent = math.log(nq) / math.log(n)
    return rep


@dataclass
class ZMCertificate:
    attempted: bool
    reason: str = ""
    A: frozenset | None = None
    N: frozenset | None = None
    index: int | None = None
    M: int | None = None
    invariant_factors: list[int] | None = None
    jordan_reference: float | None = None


def zm_certificate(G: FiniteGroup, H, max_enum: int = 64, k: int | None = None) -> ZMCertificate:
    """Normal abelian A <= Q = G/H (generated by <= 2 elements) with the largest
    cyclic quotient Z_M; N is its preimage in G, so [G:N] = [Q:A]."""
    Q, proj = quotient_group(G, H)
    if Q.order > max_enum:
        return ZMCertificate(False, f"|G/H| = {Q.order} exceeds enumeration cap {max_enum}")
    candidates: dict[frozenset, None] = {}
    for a, b in itertools.combinations_with_replacement(range(Q.order), 2):
        if Q.mul(a, b) != Q.mul(b, a):
            continue
        candidates.setdefault(subgroup_generated(Q, {a, b}), None)
    best = None
    for A in candidates:
        if not is_normal(Q, A):
            continue
        sub, _ = subgroup_as_group(Q, A)
        factors = abelian_invariant_factors(sub) or [1]
        key = (factors[-1], len(A), tuple(-x for x in sorted(A)))
        if best is None or key > best[0]:
            best = (key, A, factors)
    _, A, factors = best
    N = frozenset(int(g) for g in np.flatnonzero(np.isin(proj, list(A))))
    if not is_normal(G, N):
        raise ActionError("preimage of A is not normal in G")
    jordan = None
    if k is not None:
        jordan = float(k) ** (k**2)
    return ZMCertificate(True, "", A, N, Q.order // len(A), factors[-1], factors, jordan)
