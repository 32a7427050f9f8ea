import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cayleylab.action import (
    ActionError,
    action_permutation,
    cheeger,
    commutation_check,
    edge_boundary,
    kernel,
    quotient_cayley,
    quotient_pushdown,
    representation_report,
    restrict_action,
    restrict_to_eigenspace,
    zm_certificate,
)
from cayleylab.groups import GeneratingSet, group_from_table, is_normal, subgroup_generated
from cayleylab.metric import RegularMultigraph
from cayleylab.spectral import assemble_laplacian

from conftest import make, zoo_context


def rotation(theta):
    return np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])


def fourier_basis(G, n, coord=lambda lbl: int(lbl)):
    a = np.array([coord(G.label(i)) for i in range(G.order)])
    V = np.stack([np.cos(2 * np.pi * a / n), np.sin(2 * np.pi * a / n)], axis=1)
    return V / np.linalg.norm(V, axis=0), a


def first_coord(lbl):
    return int(lbl.strip("()").split(",")[0])


def test_commutation_examples(c12):
    G, _, X = c12
    L = assemble_laplacian(X)
    e0 = np.eye(12)[0]
    assert commutation_check(G, L, [G.identity], [e0]) == 0.0
    assert commutation_check(G, L, [G.index_of("3")], [e0]) <= 1e-14


def test_commutation_on_zoo(zoo):
    rng = np.random.default_rng(0)
    L = assemble_laplacian(zoo.X)
    sample = rng.choice(zoo.G.order, size=min(50, zoo.G.order), replace=False)
    assert commutation_check(zoo.G, L, sample, rng.standard_normal((3, zoo.G.order))) <= 1e-10


def test_action_is_left_translation(c12):
    G, _, _ = c12
    g = G.index_of("5")
    f = np.arange(12.0)
    p = action_permutation(G, g)
    for x in range(12):
        assert f[p][G.mul(g, x)] == f[x]


def test_trivial_representation():
    ctx = zoo_context("c12")
    act = restrict_to_eigenspace(ctx.G, ctx.spectrum, 1)
    assert np.allclose(act.matrices, 1.0)
    assert kernel(ctx.G, act).H == frozenset(range(12))


def test_c12_rotations(c12):
    G, _, _ = c12
    V, a = fourier_basis(G, 12)
    act = restrict_action(G, V)
    for g in range(12):
        assert np.allclose(act.matrices[g], rotation(2 * np.pi * a[g] / 12), atol=1e-12)
    ker = kernel(G, act)
    assert ker.H == {G.identity} and ker.index == 12


def test_prism_rotations(prism):
    G, _, _ = prism
    V, a = fourier_basis(G, 6, first_coord)
    act = restrict_action(G, V)
    for g in range(12):
        assert np.allclose(act.matrices[g], rotation(2 * np.pi * a[g] / 6), atol=1e-12)
    ker = kernel(G, act)
    assert {G.label(h) for h in ker.H} == {"(0,0)", "(0,1)"} and ker.index == 6
    assert is_normal(G, ker.H)


def test_non_invariant_basis_rejected(c12):
    G, _, _ = c12
    with pytest.raises(ActionError):
        restrict_action(G, np.eye(12)[:, :1])


@pytest.mark.parametrize("name", ["c12", "prism62", "d16", "heis3", "s4", "q8_table", "z2_4"])
def test_kernel_is_exact_normal_subgroup(name):
    ctx = zoo_context(name)
    ker = kernel(ctx.G, restrict_to_eigenspace(ctx.G, ctx.spectrum, 2))
    assert subgroup_generated(ctx.G, ker.H) == ker.H
    assert is_normal(ctx.G, ker.H)
    assert ker.separation > 10 * ker.eps


def test_quotient_by_trivial_subgroup(c12):
    G, S, X = c12
    graph, Q, proj = quotient_cayley(G, S, {G.identity})
    assert Q.order == 12 and np.array_equal(graph.neighbors, X.neighbors)
    f = zoo_context("c12").spectrum.eigenspace(2)[:, 0]
    qa = quotient_pushdown(G, {G.identity}, S, f, zoo_context("c12").spectrum.eigenvalue(2))
    assert np.allclose(qa.f_hat, f)


def test_prism_quotient(prism):
    G, S, _ = prism
    H = {G.index_of("(0,0)"), G.index_of("(0,1)")}
    V, a = fourier_basis(G, 6, first_coord)
    qa = quotient_pushdown(G, H, S, V[:, 0], 1 / 3)
    assert qa.order == 6 and qa.graph.degree == 3 and qa.loops == 6
    assert qa.pushdown_residual <= 1e-8
    assert qa.lambda2_quotient == pytest.approx(1 / 3)
    # f_hat is cos(2 pi a / 6) up to the normalisation of V
    for q in range(6):
        members = np.flatnonzero(qa.proj == q)
        assert qa.f_hat[q] == pytest.approx(V[members[0], 0])


def test_pushdown_rejects_non_invariant(prism):
    G, S, _ = prism
    H = {G.index_of("(0,0)"), G.index_of("(0,1)")}
    with pytest.raises(ActionError):
        quotient_pushdown(G, H, S, np.arange(12.0), 1 / 3)


def test_cheeger_examples():
    C6 = RegularMultigraph(np.array([[(i + 1) % 6, (i - 1) % 6] for i in range(6)]))
    res = cheeger(C6)
    assert res.exact and res.h == pytest.approx(2 / 3)
    assert cheeger(C6, transitive=True).h == pytest.approx(2 / 3)
    G, S, K4 = make("cyclic", {"n": 4}, [1, 2])
    assert S.degree == 3 and cheeger(K4).h == pytest.approx(2.0)
    assert edge_boundary(K4, [0, 1]) == 4


def test_cheeger_brute_force_oracle():
    X = zoo_context("prism62").X
    import itertools
    best = min(edge_boundary(X, U) / len(U)
               for r in range(1, 7) for U in itertools.combinations(range(12), r))
    assert cheeger(X).h == pytest.approx(best)
    assert cheeger(X, transitive=True).h == pytest.approx(best)


def test_cheeger_skips_large_graphs():
    res = cheeger(zoo_context("c64").X)
    assert not res.exact and res.h is None and res.lower_bound == pytest.approx(2 / 64)


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 14))
def test_cheeger_of_cycle(n):
    X = make("cyclic", {"n": n}, [1])[2]
    h = cheeger(X).h
    assert h == pytest.approx(2 / (n // 2))
    assert h >= 2 / n


def test_representation_c12():
    ctx = zoo_context("c12")
    rep = representation_report(ctx.G, ctx.S, X=ctx.X, spectrum=ctx.spectrum)
    assert rep.image_order == 12 and rep.passed
    assert rep.image_order >= math.sqrt(2 / (4 * rep.lambda2))
    assert math.sqrt(2 / (4 * rep.lambda2)) == pytest.approx(1.93, abs=0.01)


def test_representation_prism():
    ctx = zoo_context("prism62")
    rep = representation_report(ctx.G, ctx.S, X=ctx.X, spectrum=ctx.spectrum)
    assert rep.image_order == 6 and rep.dim_W == 2 and rep.passed
    assert rep.cheeger.h == pytest.approx(2 / 3)
    assert rep.representation_residual <= 1e-6


def test_representation_trivial_group():
    G = group_from_table(np.array([[0]]))
    rep = representation_report(G, GeneratingSet((0,)))
    assert rep.lambda2 is None and rep.chain == []


def test_zm_examples():
    P = zoo_context("prism62").G
    H = frozenset({P.index_of("(0,0)"), P.index_of("(0,1)")})
    z = zm_certificate(P, H)
    assert (z.index, z.M) == (1, 6)
    S4 = zoo_context("s4").G
    V4 = subgroup_generated(S4, {S4.index_of("(1 2)(3 4)"), S4.index_of("(1 3)(2 4)")})
    z = zm_certificate(S4, V4)
    assert (z.index, z.M) == (2, 3) and len(z.A) == 3 and len(z.N) == 12
    assert is_normal(S4, z.N)
    z = zm_certificate(S4, frozenset(range(24)))
    assert z.M == 1 and z.index == 1


def test_zm_enumeration_cap():
    ctx = zoo_context("c256")
    z = zm_certificate(ctx.G, frozenset({ctx.G.identity}))
    assert not z.attempted and "cap" in z.reason
