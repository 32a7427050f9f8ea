"""Acceptance criteria 1-11, one pass/fail line each.

Run under pytest (lines are repeated in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cayleylab.action import representation_report, zm_certificate
from cayleylab.analysis import _rng, canonical_json, determinism_hash
from cayleylab.cli import main
from cayleylab.groups import subgroup_generated
from cayleylab.metric import measure_lemma_checks
from cayleylab.partitions import InfeasibleError, lambda_k_upper_bound, padding_probability_test
from cayleylab.poincare import global_poincare, ksc_bound_check
from cayleylab.spectral import certify_by_halving, gradient_sq, reverse_poincare_sides, stokes_check
from cayleylab.zoo import zoo_names

from conftest import zoo_context

LINES: list[str] = []


def record(n, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title}" + (f" ({detail})" if detail else "")
    LINES.append(line)
    print(line)
    assert ok, line


def test_01_closed_form_spectra():
    worst, mult_ok = 0.0, True
    for n in (12, 64, 256):
        sp = zoo_context(f"c{n}").spectrum
        worst = max(worst, abs(sp.eigenvalue(2) - (1 - math.cos(2 * math.pi / n))))
        mult_ok &= sp.multiplicity(2) == 2
    for k in (4, 6):
        sp = zoo_context(f"z2_{k}").spectrum
        mult_ok &= sp.multiplicities == [math.comb(k, j) for j in range(k + 1)]
        worst = max(worst, float(np.abs(np.array(sp.cluster_values) - 2 * np.arange(k + 1) / k).max()))
    record(1, "closed-form cycle and hypercube spectra", worst <= 1e-9 and mult_ok, f"max error {worst:.1e}")


def test_02_stokes():
    worst = 0.0
    for name in zoo_names():
        ctx = zoo_context(name)
        V, lam = ctx.spectrum.eigenvectors, ctx.spectrum.eigenvalues
        worst = max(worst, max(stokes_check(ctx.X, V[:, j], lam[j]) for j in range(ctx.X.n)))
    record(2, "energy identity for every eigenpair", worst <= 1e-8, f"max residual {worst:.1e}")


def test_03_reverse_poincare():
    violations = checked = 0
    for name in zoo_names():
        ctx = zoo_context(name)
        X, sp = ctx.X, ctx.spectrum
        grad = gradient_sq(X, sp.eigenvectors)
        centers = _rng(0, "reverse-poincare").choice(X.n, size=3, replace=False)
        for c in centers:
            for R in range(1, X.diameter // 2 + 1):
                lhs, rhs = reverse_poincare_sides(X, sp.eigenvectors, sp.eigenvalues, int(c), R, grad)
                violations += int((lhs > rhs + 1e-10).sum())
                checked += len(lhs)
    record(3, "reverse Poincare, constants 128 and 2", violations == 0,
           f"{checked} cases, {violations} violations")


def test_04_minmax():
    emitted = invalid = 0
    worst = 0.0
    for name in zoo_names():
        ctx = zoo_context(name)
        for k in range(2, 9):
            try:
                b = lambda_k_upper_bound(ctx.X, k, seed=0, c=ctx.c)
            except InfeasibleError:
                continue
            emitted += 1
            invalid += b.bound < ctx.spectrum.eigenvalue(k)
            worst = max(worst, b.normalized)
    ok = emitted > 0 and invalid == 0 and worst <= 1e4
    record(4, "test-function bounds exceed lambda_k", ok,
           f"{emitted} bounds, max normalized ratio {worst:.1f}, target 200 {'met' if worst <= 200 else 'not met'}")


def test_05_padding():
    mins = {}
    for name in zoo_names():
        ctx = zoo_context(name)
        if ctx.X.diameter < 8:
            continue
        rep = padding_probability_test(ctx.X, ctx.X.diameter, A=16, samples=400, seed=1, c=ctx.c)
        mins[name] = (rep.min_frequency, rep.threshold)
    ok = bool(mins) and all(f >= t for f, t in mins.values())
    record(5, "padding frequency at A = 16, 400 samples", ok,
           ", ".join(f"{k} {f:.3f}" for k, (f, _) in mins.items()) + f"; threshold {0.5 - 3 * math.sqrt(0.25 / 400):.3f}")


def test_06_multiplicity_certificate():
    report = []
    ok = True
    for name in zoo_names():
        ctx = zoo_context(name)
        cert, _ = certify_by_halving(ctx.X, ctx.spectrum, 2, 0.25)
        ref = math.exp(math.log(ctx.c) * (math.log(ctx.c) + math.log(2)))
        ok &= cert.certified and cert.rank == ctx.spectrum.multiplicity(2)
        report.append(f"{name} m2={cert.multiplicity}<=M={cert.M} ref={ref:.0f}")
    record(6, "rank certificate m_2 <= M on every zoo graph", ok, "; ".join(report))


def test_07_measure_lemmas():
    measlem = meassym = 0
    ok = True
    for name in zoo_names():
        ctx = zoo_context(name)
        rep = measure_lemma_checks(ctx.X, ctx.c, np.random.default_rng(0), meassym_constant=8)
        if ctx.X.diameter >= 10:
            assert rep.measlem
        measlem += len(rep.measlem)
        meassym += len(rep.meassym)
        ok &= all(e.passed for e in rep.measlem) and all(e.passed for e in rep.meassym)
    record(7, "ball-measure lemmas", ok, f"{measlem} shrink cases, {meassym} small-ball cases")


def test_08_ksc():
    worst, ok = 0.0, True
    for name in zoo_names():
        ctx = zoo_context(name)
        chk = ksc_bound_check(ctx.X, ctx.c, 16, global_poincare(ctx.X))
        ok &= chk.passed
        worst = max(worst, chk.ratio)
    record(8, "P_hat <= 16 c^3", ok, f"max P_hat/c^3 = {worst:.4f}")


def test_09_action_pipeline():
    c12 = zoo_context("c12")
    r12 = representation_report(c12.G, c12.S, X=c12.X, spectrum=c12.spectrum)
    ok = r12.kernel == {c12.G.identity} and r12.image_order == 12
    pr = zoo_context("prism62")
    rp = representation_report(pr.G, pr.S, X=pr.X, spectrum=pr.spectrum)
    q = rp.quotient
    ok &= {pr.G.label(h) for h in rp.kernel} == {"(0,0)", "(0,1)"}
    ok &= q.order == 6 and q.loops == 6 and q.graph.degree == 3
    ok &= q.pushdown_residual <= 1e-8
    ok &= all(link.passed for link in rp.chain)
    ok &= rp.cheeger.exact and abs(rp.cheeger.h - 2 / 3) <= 1e-12
    record(9, "kernel, quotient, pushdown and Cheeger chain", bool(ok),
           f"|rho(C12)|={r12.image_order}, |G/H|={q.order}, h={rp.cheeger.h:.4f}")


def test_10_zm_certificate():
    pr = zoo_context("prism62")
    rp = representation_report(pr.G, pr.S, X=pr.X, spectrum=pr.spectrum)
    z1 = zm_certificate(pr.G, rp.kernel)
    s4 = zoo_context("s4").G
    V4 = subgroup_generated(s4, {s4.index_of("(1 2)(3 4)"), s4.index_of("(1 3)(2 4)")})
    z2 = zm_certificate(s4, V4)
    # the preimage of A3 in S4 is the alternating group A4
    A4 = subgroup_generated(s4, {s4.index_of("(1 2 3)"), s4.index_of("(1 2 4)")})
    ok = (z1.index, z1.M) == (1, 6) and (z2.index, z2.M) == (2, 3) and len(z2.A) == 3 and z2.N == A4
    record(10, "Z_M certificates", ok, f"prism (index {z1.index}, M {z1.M}); S4/V4 (index {z2.index}, M {z2.M})")


def test_11_determinism(tmp_path):
    zoo = tmp_path / "zoo"
    main(["zoo", "emit", str(zoo)])
    diffs = []
    for run in ("a", "b"):
        assert main(["analyze", str(zoo), "--seed", "5", "--out", str(tmp_path / run)]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        a, b = f.read_bytes(), (tmp_path / "b" / f.name).read_bytes()
        if f.name.endswith(".report.json"):
            ja, jb = json.loads(a), json.loads(b)
            ja.pop("runtime"), jb.pop("runtime")
            same = canonical_json(ja).encode() == canonical_json(jb).encode()
            same &= ja["determinism_hash"] == determinism_hash(jb)
        else:
            same = a == b
        if not same:
            diffs.append(f.name)
    record(11, "identical reports for identical seeds", not diffs,
           f"{len(list((tmp_path / 'a').iterdir()))} files compared" + (f"; differ: {diffs}" if diffs else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
