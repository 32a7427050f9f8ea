"""Random padded partitions, good sets, and test-function eigenvalue bounds.

Randomness: every partition draw takes its own ``numpy.random.Generator``
(PCG64). Monte Carlo sample ``i`` of a run seeded with ``seed`` uses the i-th
child of ``SeedSequence(seed)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .metric import RegularMultigraph, greedy_net
from .spectral import rayleigh_quotients


class InfeasibleError(ValueError):
    """The requested construction has no valid parameters on this graph."""


@dataclass
class RandomPartition:
    tau: float
    alpha: float
    pi: list[int]
    net: list[int]
    blocks: list[np.ndarray]
    block_of: np.ndarray
    seed: int | None

    def to_json(self) -> str:
        return json.dumps({
            "tau": self.tau,
            "alpha": self.alpha,
            "pi": self.pi,
            "net": self.net,
            "blocks": [b.tolist() for b in self.blocks],
            "seed": self.seed,
        })


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def random_padded_partition(X: RegularMultigraph, tau: float, seed=None,
                            net: list[int] | None = None) -> RandomPartition:
    """S_i = B(x_pi(i), alpha*tau) minus earlier blocks, over a greedy tau/4-net,
    with alpha ~ U[1/4, 1/2] and pi a uniform permutation. Empty blocks are
    dropped."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if net is None:
        net = greedy_net(X, tau / 4)
    rng = _rng(seed)
    alpha = float(rng.uniform(0.25, 0.5))
    pi = [int(i) for i in rng.permutation(len(net))]
    block_of = np.full(X.n, -1, dtype=np.int64)
    blocks = []
    for i in pi:
        members = np.flatnonzero((X.dist[net[i]] <= alpha * tau) & (block_of < 0))
        if members.size:
            block_of[members] = len(blocks)
            blocks.append(members)
    if (block_of < 0).any():
        raise AssertionError("net does not cover the graph at radius alpha*tau")
    seed_repr = seed if isinstance(seed, (int, type(None))) else None
    return RandomPartition(tau, alpha, pi, list(net), blocks, block_of, seed_repr)


def padding_distances(X: RegularMultigraph, block_of: np.ndarray) -> np.ndarray:
    """dist(x, X minus P(x)) for every x; inf when P(x) = X."""
    outside = block_of[None, :] != block_of[:, None]
    d = np.where(outside, X.dist, np.iinfo(np.int16).max).min(axis=1).astype(float)
    d[~outside.any(axis=1)] = math.inf
    return d


def distance_to_complement(X: RegularMultigraph, S) -> np.ndarray:
    """dist(x, X minus S) for every vertex (0 off S)."""
    mask = np.zeros(X.n, dtype=bool)
    mask[np.asarray(list(S), dtype=np.int64)] = True
    if mask.all():
        return np.full(X.n, math.inf)
    return X.dist[:, ~mask].min(axis=1).astype(float)


def padding_radius(tau: float, A: float, c: float) -> float:
    return tau / (A * (1 + math.log(c)))


@dataclass
class PaddingReport:
    tau: float
    A: float
    t: float
    samples: int
    per_point_frequency: np.ndarray = field(repr=False)
    min_frequency: float = 0.0
    threshold: float = 0.0
    passed: bool = False
    mean_padded_mass_fraction: float = 0.0
    min_padded_mass_fraction: float = 0.0
    fraction_good_partitions: float = 0.0
    max_net_points_near: int = 0

    def to_csv(self) -> str:
        lines = ["vertex,frequency"]
        lines += [f"{i},{f!r}" for i, f in enumerate(self.per_point_frequency.tolist())]
        return "\n".join(lines) + "\n"


def padding_probability_test(X: RegularMultigraph, tau: float, A: float = 16.0, samples: int = 400,
                             seed: int = 0, c: float | None = None) -> PaddingReport:
    """Monte Carlo frequency with which each point is padded at radius
    t = tau / (A (1 + ln c))."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if c is None:
        from .metric import doubling_profile
        c = doubling_profile(X).c_real
    t = padding_radius(tau, A, c)
    net = greedy_net(X, tau / 4)
    hits = np.zeros(X.n)
    fractions = np.empty(samples)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(samples)):
        P = random_padded_partition(X, tau, child, net=net)
        padded = padding_distances(X, P.block_of) >= t
        hits += padded
        fractions[i] = padded.mean()
    freq = hits / samples
    threshold = 0.5 - 3 * math.sqrt(0.25 / samples)
    net_arr = np.array(net)
    m = int((X.dist[:, net_arr] <= tau).sum(axis=1).max())
    return PaddingReport(
        tau, A, t, samples, freq, float(freq.min()), threshold, bool(freq.min() >= threshold),
        float(fractions.mean()), float(fractions.min()), float((fractions >= 0.5).mean()), m,
    )


# ---------------------------------------------------------------------------
# good sets


@dataclass
class GoodSetFamily:
    k: int
    tau: float
    t: float
    sets: list[np.ndarray]
    measures: list[int]
    padded_fractions: list[float]
    seed: int
    attempts: int = 1


def padded_fraction(X: RegularMultigraph, S, t: float) -> float:
    S = np.asarray(list(S), dtype=np.int64)
    d = distance_to_complement(X, S)
    return float((d[S] >= t).mean())


def is_good(X: RegularMultigraph, S, t: float) -> bool:
    return padded_fraction(X, S, t) >= 0.25


def search_tau(X: RegularMultigraph, k: int) -> int:
    """Largest integer tau with max_x |B(x, 2 tau)| <= |X| / (8k) (0 if none)."""
    sizes = X.ball_sizes(0)
    tau = 0
    while 2 * (tau + 1) < len(sizes) and sizes[2 * (tau + 1)] * 8 * k <= X.n:
        tau += 1
    return tau


def _single_set(X: RegularMultigraph, c: float, A: float, seed: int) -> GoodSetFamily:
    """One set of measure in [n/(2c), (1 - 1/(2c)) n]: the largest ball about the
    identity that fits under the upper limit."""
    n = X.n
    sizes = X.ball_sizes(0)
    upper = (1 - 1 / (2 * c)) * n
    r = max(i for i, s in enumerate(sizes) if s <= upper)
    S = X.ball(0, r)
    if not n / (2 * c) <= len(S) <= upper:
        raise InfeasibleError(f"no ball has measure in [{n / (2 * c):.3g}, {upper:.3g}]")
    tau = X.diameter / 20
    t = padding_radius(tau, A, c)
    return GoodSetFamily(1, tau, t, [S], [len(S)], [padded_fraction(X, S, t)], seed)


def build_good_family(X: RegularMultigraph, k: int, seed: int = 0, c: float | None = None,
                      A: float = 16.0, max_resamples: int = 50) -> GoodSetFamily:
    """k disjoint good sets with n/(8k) <= |S_i| <= n/(4k).

    k = 1 returns a single ball sized between n/(2c) and (1 - 1/(2c)) n.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if c is None:
        from .metric import doubling_profile
        c = doubling_profile(X).c_real
    if k == 1:
        return _single_set(X, c, A, seed)
    n = X.n
    tau = search_tau(X, k)
    if tau < 1:
        raise InfeasibleError(f"no tau >= 1 with |B(2 tau)| <= n/(8k) for n={n}, k={k}")
    t = padding_radius(tau, A, c)
    lo, hi = n / (8 * k), n / (4 * k)
    net = greedy_net(X, tau / 4)
    seeds = np.random.SeedSequence(seed).spawn(max_resamples)
    good_mass = 0.0
    for attempt, child in enumerate(seeds, start=1):
        P = random_padded_partition(X, tau, child, net=net)
        good = [b for b in P.blocks if is_good(X, b, t)]
        good_mass = sum(len(b) for b in good)
        if good_mass < n / 4:
            continue
        bins: list[list[np.ndarray]] = [[] for _ in range(k)]
        load = [0] * k
        # first-fit decreasing; stable sort keeps block order on ties
        for b in sorted(good, key=len, reverse=True):
            for j in range(k):
                if load[j] + len(b) <= hi:
                    bins[j].append(b)
                    load[j] += len(b)
                    break
        if all(lo <= m <= hi for m in load):
            sets = [np.sort(np.concatenate(bs)) for bs in bins]
            fracs = [padded_fraction(X, S, t) for S in sets]
            # padding distances only grow under union
            assert all(f >= 0.25 for f in fracs), "union of good sets is not good"
            return GoodSetFamily(k, tau, t, sets, load, fracs, seed, attempt)
    raise InfeasibleError(
        f"packing failed after {max_resamples} partitions (tau={tau}, last good mass {good_mass}/{n})"
    )


@dataclass
class EigenvalueBound:
    k: int
    bound: float
    family: GoodSetFamily
    rayleigh: list[float]
    normalized: float
    tau_reference: float


def test_functions(X: RegularMultigraph, family: GoodSetFamily) -> list[np.ndarray]:
    fs = []
    for S in family.sets:
        f = distance_to_complement(X, S)
        f[np.isinf(f)] = 0.0
        fs.append(f)
    return fs


def lambda_k_upper_bound(X: RegularMultigraph, k: int, seed: int = 0, c: float | None = None,
                         A: float = 16.0) -> EigenvalueBound:
    """Certified upper bound on lambda_k from f_i = dist(., X minus S_i).

    k = 2 uses a single test function on one set; k >= 3 uses k good sets.
    """
    if k < 2:
        raise ValueError("k must be >= 2 (lambda_1 = 0)")
    if c is None:
        from .metric import doubling_profile
        c = doubling_profile(X).c_real
    family = build_good_family(X, 1 if k == 2 else k, seed, c=c, A=A)
    values = rayleigh_quotients(X, test_functions(X, family))
    bound = max(values)
    normalized = bound * X.diameter**2 / (k**2 * (1 + math.log(c)) ** 2)
    # reference scale diam / e^(c ln k), reported next to the searched tau only
    tau_ref = X.diameter / math.exp(c * math.log(k))
    return EigenvalueBound(k, bound, family, values, normalized, tau_ref)
