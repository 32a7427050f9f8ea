"""Full per-group analysis and the invariant suites run by ``verify``."""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .action import representation_report, zm_certificate
from .config import Constants
from .groups import FiniteGroup, GeneratingSet, GroupSpec, build_group
from .metric import (
    CayleyGraph,
    DoublingProfile,
    build_cayley,
    cover_count_check,
    doubling_profile,
    greedy_net,
    intersection_multiplicity,
    measure_lemma_checks,
)
from .partitions import (
    InfeasibleError,
    lambda_k_upper_bound,
    padding_probability_test,
    random_padded_partition,
)
from .poincare import global_poincare, ksc_bound_check
from .spectral import (
    Spectrum,
    certify_by_halving,
    gradient_sq,
    graph_spectrum,
    reverse_poincare_sides,
)

SCHEMA = 1


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool
    relation: str = "<="

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "relation": self.relation,
                "rhs": self.rhs, "passed": self.passed}


@dataclass
class Context:
    """Everything derived from one group spec that later stages reuse."""

    spec: GroupSpec
    G: FiniteGroup
    S: GeneratingSet
    X: CayleyGraph
    profile: DoublingProfile
    spectrum: Spectrum
    constants: Constants
    checks: list[Check] = field(default_factory=list)

    @property
    def c(self) -> float:
        return self.profile.c_real

    def check(self, name: str, lhs: float, rhs: float, passed: bool, relation: str = "<=") -> bool:
        self.checks.append(Check(name, float(lhs), float(rhs), bool(passed), relation))
        return bool(passed)


def prepare(spec: GroupSpec, constants: Constants | None = None) -> Context:
    constants = constants or Constants()
    G, S = build_group(spec)
    X = build_cayley(G, S)
    profile = doubling_profile(X)
    spectrum = graph_spectrum(X, rel_gap=constants.cluster_rel_gap)
    return Context(spec, G, S, X, profile, spectrum, constants)


def _rng(seed: int, stage: str) -> np.random.Generator:
    # one independent stream per stage so stages can be skipped or reordered
    key = int.from_bytes(hashlib.sha256(stage.encode()).digest()[:4], "little")
    return np.random.default_rng([seed, key])


# ---------------------------------------------------------------------------
# suites


def suite_stokes(ctx: Context) -> dict:
    from .spectral import assemble_laplacian
    X, sp, K = ctx.X, ctx.spectrum, ctx.constants
    V, lam = sp.eigenvectors, sp.eigenvalues
    grad = gradient_sq(X, V).sum(axis=0)
    mass = (V**2).sum(axis=0)
    resid = np.abs(grad - lam * mass) / np.maximum(1.0, mass)
    orth = float(np.abs(V.T @ V - np.eye(X.n)).max())
    eig_resid = float((np.linalg.norm(assemble_laplacian(X) @ V - V * lam, axis=0) / np.linalg.norm(V, axis=0)).max())
    ctx.check("stokes residual (max over eigenpairs)", resid.max(), K.tol_stokes, resid.max() <= K.tol_stokes)
    ctx.check("orthonormality", orth, K.tol_orthonormal, orth <= K.tol_orthonormal)
    ctx.check("eigenpair residual", eig_resid, K.tol_residual, eig_resid <= K.tol_residual)
    ctx.check("lambda_1 = 0", abs(lam[0]), 1e-9, abs(lam[0]) <= 1e-9)
    const = np.full(X.n, 1 / math.sqrt(X.n))
    overlap = float(np.linalg.norm(sp.eigenspace(1).T @ const))
    ctx.check("constants in first eigenspace", overlap, 1 - 1e-8, overlap >= 1 - 1e-8, ">=")
    return {"max_residual": float(resid.max()), "orthonormality": orth, "eigenpair_residual": eig_resid,
            "eigenpairs": X.n}


def suite_reverse_poincare(ctx: Context, seed: int) -> dict:
    X, sp, K = ctx.X, ctx.spectrum, ctx.constants
    radii = range(1, X.diameter // 2 + 1)
    rng = _rng(seed, "reverse-poincare")
    centers = sorted(map(int, rng.choice(X.n, size=min(3, X.n), replace=False)))
    grad = gradient_sq(X, sp.eigenvectors)
    checked = violations = 0
    worst = 0.0
    for c in centers:
        for R in radii:
            lhs, rhs = reverse_poincare_sides(X, sp.eigenvectors, sp.eigenvalues, c, R, grad)
            bad = lhs > rhs + K.tol_reverse
            violations += int(bad.sum())
            checked += len(lhs)
            ratio = np.divide(lhs, rhs, out=np.zeros_like(lhs), where=rhs > 0)
            worst = max(worst, float(ratio.max()))
    ctx.check("reverse Poincare violations", violations, 0, violations == 0, "==")
    return {"centers": centers, "radii": [radii.start, radii.stop - 1] if len(radii) else [],
            "checked": checked, "violations": violations, "max_lhs_over_rhs": worst}


def padding_tau(X) -> int:
    return max(1, X.diameter)


def suite_padding(ctx: Context, seed: int, samples: int) -> dict:
    X, K = ctx.X, ctx.constants
    tau = padding_tau(X)
    rep = padding_probability_test(X, tau, K.A_padding, samples, seed, ctx.c)
    ctx.check("min per-point padding frequency", rep.min_frequency, rep.threshold, rep.passed, ">=")
    return {"tau": tau, "A": rep.A, "t": rep.t, "samples": samples, "seed": seed,
            "min_frequency": rep.min_frequency, "threshold": rep.threshold, "passed": rep.passed,
            "mean_padded_mass_fraction": rep.mean_padded_mass_fraction,
            "min_padded_mass_fraction": rep.min_padded_mass_fraction,
            "fraction_partitions_half_padded": rep.fraction_good_partitions,
            "max_net_points_in_tau_ball": rep.max_net_points_near, "_report": rep}


def suite_minmax(ctx: Context, seed: int, ks=(2,), strict: bool = False) -> dict:
    """Eigenvalue upper bounds from test functions; infeasible k are skipped
    unless ``strict``."""
    X, sp, K = ctx.X, ctx.spectrum, ctx.constants
    out = {}
    for k in ks:
        if k > X.n:
            continue
        try:
            b = lambda_k_upper_bound(X, k, seed, c=ctx.c, A=K.A_padding)
        except InfeasibleError as exc:
            if strict:
                raise
            out[str(k)] = {"feasible": False, "reason": str(exc)}
            continue
        lam = sp.eigenvalue(k)
        ctx.check(f"lambda_{k} bound validity", lam, b.bound, b.bound >= lam - 1e-12)
        ctx.check(f"lambda_{k} normalized bound tripwire", b.normalized, K.normalized_bound_tripwire,
                  b.normalized <= K.normalized_bound_tripwire)
        fam = b.family
        out[str(k)] = {
            "feasible": True, "bound": b.bound, "lambda": lam, "ratio_bound_over_lambda": b.bound / lam,
            "normalized": b.normalized, "target": K.normalized_bound_target,
            "within_target": b.normalized <= K.normalized_bound_target,
            "tau": fam.tau, "tau_reference": b.tau_reference, "t": fam.t, "sets": len(fam.sets),
            "set_measures": fam.measures, "padded_fractions": fam.padded_fractions,
            "rayleigh": b.rayleigh, "partition_attempts": fam.attempts,
        }
    return out


def suite_measure(ctx: Context, seed: int) -> dict:
    X, K, c = ctx.X, ctx.constants, ctx.c
    rep = measure_lemma_checks(X, c, _rng(seed, "measure"), K.K_meassym)
    ok = lambda entries: all(e.passed for e in entries)
    ctx.check("measure lemma (all R in [10, diam])", sum(not e.passed for e in rep.measlem), 0, ok(rep.measlem), "==")
    ctx.check("small-ball measure bound", sum(not e.passed for e in rep.smallmeas), 0, ok(rep.smallmeas), "==")
    ctx.check("symmetric small-ball bound", sum(not e.passed for e in rep.meassym), 0, ok(rep.meassym), "==")

    D = X.diameter
    covers = []
    for eps in (0.5, 0.25):
        cc = cover_count_check(X, D, eps, c, K.K_cover)
        ctx.check(f"cover count eps={eps}", cc.count, cc.bound, cc.passed)
        covers.append({"R": D, "eps": eps, "count": cc.count, "bound": cc.bound, "passed": cc.passed})
    mults = []
    for r in sorted({max(1, D // 4), max(1, D // 2), 3}):
        centers = greedy_net(X, 2 * r / 3)
        m = intersection_multiplicity(X, centers, r)
        bound = c**K.K_mult
        ctx.check(f"intersection multiplicity r={r}", m, bound, m <= bound)
        mults.append({"r": r, "centers": len(centers), "multiplicity": m, "bound": bound})
    return {
        "measlem_checked": len(rep.measlem), "measlem_failures": sum(not e.passed for e in rep.measlem),
        "smallmeas": [e.__dict__ for e in rep.smallmeas],
        "meassym": [e.__dict__ for e in rep.meassym],
        "covers": covers, "intersection_multiplicity": mults,
    }


def suite_poincare(ctx: Context, seed: int) -> dict:
    X, K, c = ctx.X, ctx.constants, ctx.c
    est = global_poincare(X, rng=_rng(seed, "poincare"))
    ksc = ksc_bound_check(X, c, K.K_ksc, est)
    ctx.check("P_hat <= K c^3", ksc.P_hat, K.K_ksc * c**3, ksc.passed)
    ctx.check("Poincare transitivity", est.transitivity_deviation, K.transitivity_tol,
              est.transitivity_deviation <= K.transitivity_tol)
    return {"P_hat": est.P_hat, "argmax": list(est.argmax), "R_grid": est.R_grid, "centers": est.centers,
            "ksc_ratio": ksc.ratio, "ksc_constant": K.K_ksc, "passed": ksc.passed,
            "transitivity_deviation": est.transitivity_deviation, "_estimate": est}


def suite_multiplicity(ctx: Context, k: int = 2, delta0: float = 0.25, P_hat: float | None = None) -> dict:
    X, sp, K, c = ctx.X, ctx.spectrum, ctx.constants, ctx.c
    if X.n < 2:
        return {"skipped": "trivial group"}
    cert, trail = certify_by_halving(X, sp, k, delta0, c=c, P_hat=P_hat, K=K.K_lemma)
    ref = math.exp(K.K_multiplicity * math.log(c) * (math.log(c) + math.log(k)))
    ctx.check(f"multiplicity certificate k={k}", cert.rank, cert.multiplicity, cert.certified, "==")
    ctx.check(f"m_{k} <= M", cert.multiplicity, cert.M, cert.multiplicity <= cert.M)
    return {
        "k": k, "delta0": cert.delta, "radius": cert.radius, "M": cert.M, "rank": cert.rank,
        "m_k": cert.multiplicity, "certified": cert.certified, "cover_method": cert.cover_method,
        "reference_bound": ref,
        "trail": [{"delta": t.delta, "M": t.M, "rank": t.rank, "certified": t.certified,
                   "cover_method": t.cover_method, "null_rayleigh": t.null_rayleigh,
                   "lemma_product": t.lemma_product} for t in trail],
    }


def suite_action(ctx: Context, seed: int) -> dict:
    G, S, K = ctx.G, ctx.S, ctx.constants
    if G.order == 1:
        return {"degenerate": True}
    rep = representation_report(G, S, K.K_dim, K.K_image, _rng(seed, "action"), ctx.X, ctx.spectrum)
    ctx.check("commutation residual", rep.commutation_residual, 1e-10, rep.commutation_residual <= 1e-10)
    ctx.check("representation property", rep.representation_residual, 1e-6, rep.representation_residual <= 1e-6)
    ctx.check("pushdown residual", rep.quotient.pushdown_residual, K.tol_residual,
              rep.quotient.pushdown_residual <= K.tol_residual)
    for link in rep.chain:
        ctx.check(link.label, link.lhs, link.rhs, link.passed, "==" if " = " in link.label else ">=")
    zm = zm_certificate(G, rep.kernel, K.max_enum, rep.dim_W)
    q = rep.quotient
    out = {
        "dim_W2": rep.dim_W, "lambda2": rep.lambda2,
        "kernel": sorted(G.label(h) for h in rep.kernel), "kernel_order": len(rep.kernel),
        "image_order": rep.image_order, "c_real": rep.c_real, "diam": rep.diam,
        "quotient": {"order": q.order, "degree": q.graph.degree, "self_loops": q.loops,
                     "lambda2": q.lambda2_quotient, "pushdown_residual": q.pushdown_residual,
                     "coset_variance": q.coset_variance},
        "cheeger": {"h": rep.cheeger.h, "exact": rep.cheeger.exact, "lower_bound": rep.cheeger.lower_bound},
        "chain": [link.__dict__ for link in rep.chain],
        "dim_bound": rep.dim_bound, "image_bound": rep.image_bound,
        "growth_exponent": rep.growth_exponent, "measured_exponent": rep.measured_exponent,
        "commutation_residual": rep.commutation_residual,
        "representation_residual": rep.representation_residual,
        "zm_certificate": {"attempted": zm.attempted, "reason": zm.reason, "index": zm.index, "M": zm.M,
                           "invariant_factors": zm.invariant_factors, "A_order": len(zm.A) if zm.A else None,
                           "jordan_reference": zm.jordan_reference},
        "_report": rep,
    }
    diam_check = ctx.X.diameter * ctx.c >= G.order ** (1 / math.log2(ctx.c))
    out["diameter_growth"] = {"lhs": ctx.X.diameter * ctx.c, "rhs": G.order ** (1 / math.log2(ctx.c)),
                              "holds_with_slack_c": diam_check,
                              "holds_without_slack": ctx.X.diameter >= G.order ** (1 / math.log2(ctx.c))}
    return out


SUITES = ("stokes", "reverse-poincare", "padding", "minmax", "action", "measure", "poincare", "multiplicity")


def run_suite(name: str, ctx: Context, seed: int, samples: int = 400) -> dict:
    if name == "stokes":
        return suite_stokes(ctx)
    if name == "reverse-poincare":
        return suite_reverse_poincare(ctx, seed)
    if name == "padding":
        if ctx.X.diameter < 8:
            return {"skipped": "diameter < 8"}
        return suite_padding(ctx, seed, samples)
    if name == "minmax":
        return suite_minmax(ctx, seed, ks=range(2, 9))
    if name == "action":
        return suite_action(ctx, seed)
    if name == "measure":
        return suite_measure(ctx, seed)
    if name == "poincare":
        return suite_poincare(ctx, seed)
    if name == "multiplicity":
        return suite_multiplicity(ctx)
    raise ValueError(f"unknown suite {name!r}")


# ---------------------------------------------------------------------------
# full report


def _clean(obj):
    """JSON-safe, deterministic conversion; private '_' keys are dropped."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_clean(v) for v in obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def canonical_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def determinism_hash(report: dict) -> str:
    body = {k: v for k, v in report.items() if k not in ("runtime", "determinism_hash")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


@dataclass
class Analysis:
    report: dict
    sidecars: dict[str, str]
    passed: bool


def analyze(spec: GroupSpec, k: int = 2, delta: float = 0.25, samples: int = 400, seed: int = 0,
            constants: Constants | None = None) -> Analysis:
    """Run every stage on one group; raises InfeasibleError for an infeasible k."""
    constants = constants or Constants()
    timing = {}
    t0 = time.perf_counter()
    ctx = prepare(spec, constants)
    timing["prepare"] = time.perf_counter() - t0
    G, S, X, sp, prof = ctx.G, ctx.S, ctx.X, ctx.spectrum, ctx.profile

    def stage(name, fn, *args, **kw):
        t = time.perf_counter()
        out = fn(*args, **kw)
        timing[name] = time.perf_counter() - t
        return out

    report: dict = {
        "schema": SCHEMA,
        "tool": {"name": "cayleylab", "version": __version__},
        "seed": seed,
        "options": {"k": k, "delta": delta, "samples": samples, "seed": seed},
        "config": constants.to_dict(),
        "group": {"name": spec.name, "kind": spec.kind, "spec": spec.to_dict(), "order": G.order,
                  "degree": S.degree, "generators": [G.label(s) for s in S]},
        "doubling": {"ball_sizes": prof.ball_sizes, "c_real": prof.c_real, "c_real_radius": prof.c_real_radius,
                     "c_int": prof.c_int, "c_int_radius": prof.c_int_radius, "diam": prof.diam},
    }
    lam = sp.eigenvalues
    report["spectrum"] = {
        "lambda": {f"lambda_{i}": float(lam[i - 1]) for i in range(2, min(8, X.n) + 1)},
        "multiplicity": {f"m_{i}": sp.multiplicity(i) for i in range(2, min(4, X.n) + 1)},
        "clusters": [{"value": v, "multiplicity": m}
                     for v, m in zip(sp.cluster_values[:10], sp.multiplicities[:10])],
        "tol_cluster": sp.tol_cluster,
    }
    report["stokes"] = stage("stokes", suite_stokes, ctx)
    report["measure"] = stage("measure", suite_measure, ctx, seed)
    poin = stage("poincare", suite_poincare, ctx, seed)
    report["poincare"] = poin
    if X.n > 1:
        report["multiplicity_certificate"] = stage("multiplicity", suite_multiplicity, ctx, 2, delta, poin["P_hat"])
    report["reverse_poincare"] = stage("reverse-poincare", suite_reverse_poincare, ctx, seed)
    pad = None
    if X.diameter >= 1 and X.n > 1:
        pad = stage("padding", suite_padding, ctx, seed, samples)
        report["padding"] = pad
    if X.n > 1:
        ks = sorted({2, k}) if k >= 2 else [2]
        report["lambda_bounds"] = stage("minmax", suite_minmax, ctx, seed, ks, True)
        report["representation"] = stage("action", suite_action, ctx, seed)

    report["checks"] = [c.to_dict() for c in ctx.checks]
    passed = all(c.passed for c in ctx.checks)
    report["all_passed"] = passed
    report = _clean(report)
    report["determinism_hash"] = determinism_hash(report)
    report["runtime"] = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                         "seconds": {k2: round(v, 6) for k2, v in timing.items()}}

    sidecars = {
        "ball_profile.csv": prof.to_csv(),
        "spectrum.csv": sp.to_csv(),
        "poincare.csv": poin["_estimate"].to_csv(),
    }
    if pad is not None:
        sidecars["padding.csv"] = pad["_report"].to_csv()
        part = random_padded_partition(X, pad["tau"], seed)
        sidecars["partition.json"] = part.to_json() + "\n"
    if "representation" in report:
        H = [G.index_of(lbl) for lbl in report["representation"]["kernel"]]
        sidecars["quotient.json"] = json.dumps(quotient_dump(G, S, H), indent=2) + "\n"
    return Analysis(report, sidecars, passed)


def quotient_dump(G: FiniteGroup, S: GeneratingSet, H) -> dict:
    from .action import quotient_cayley
    graph, Q, proj = quotient_cayley(G, S, H)
    cosets = [[G.label(g) for g in np.flatnonzero(proj == q)] for q in range(Q.order)]
    edges = [[int(q), int(r)] for q in range(Q.order) for r in graph.neighbors[q]]
    return {"cosets": cosets, "edges": edges, "degree": graph.degree}


def write_analysis(result: Analysis, out_dir: str | Path, name: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.report.json"
    path.write_text(canonical_json(result.report))
    for suffix, text in result.sidecars.items():
        (out / f"{name}.{suffix}").write_text(text)
    return path
