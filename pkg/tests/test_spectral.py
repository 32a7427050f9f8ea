import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cayleylab.metric import RegularMultigraph
from cayleylab.spectral import (
    assemble_laplacian,
    ball_average_map,
    certify_by_halving,
    cluster_eigenvalues,
    cutoff_function,
    full_spectrum,
    gradient_sq,
    graph_spectrum,
    multiplicity_certificate,
    numerical_rank,
    rayleigh_quotients,
    rayleigh_upper_bound,
    reverse_poincare_check,
    stokes_check,
)

from conftest import make, zoo_context


def values(G, X):
    return np.array([int(G.label(i)) for i in range(X.n)])


def test_c4_spectrum():
    X = make("cyclic", {"n": 4}, [1])[2]
    assert np.allclose(graph_spectrum(X).eigenvalues, [0, 1, 1, 2], atol=1e-12)


def test_single_vertex_with_loops():
    L = assemble_laplacian([[0, 0, 0]])
    assert L.tolist() == [[0.0]]


def test_ragged_rejected():
    with pytest.raises(ValueError):
        assemble_laplacian([[1], [0, 0]])


def test_prism_closed_form():
    X = zoo_context("prism62").X
    oracle = sorted(1 - (2 * math.cos(2 * math.pi * k / 6) + s) / 3 for k in range(6) for s in (1, -1))
    sp = graph_spectrum(X)
    assert np.allclose(sp.eigenvalues, oracle, atol=1e-12)
    assert sp.eigenvalue(2) == pytest.approx(1 / 3) and sp.multiplicity(2) == 2


@pytest.mark.parametrize("n", [12, 64, 256])
def test_cycle_closed_form(n):
    sp = zoo_context(f"c{n}").spectrum
    oracle = np.sort(1 - np.cos(2 * np.pi * np.arange(n) / n))
    assert np.abs(sp.eigenvalues - oracle).max() <= 1e-9
    assert sp.multiplicity(2) == 2


@pytest.mark.parametrize("k", [4, 6])
def test_hypercube_binomial_clusters(k):
    sp = zoo_context(f"z2_{k}").spectrum
    assert sp.multiplicities == [math.comb(k, j) for j in range(k + 1)]
    assert np.allclose(sp.cluster_values, [2 * j / k for j in range(k + 1)], atol=1e-12)


def test_c12_lambda2():
    sp = zoo_context("c12").spectrum
    assert sp.eigenvalue(2) == pytest.approx(1 - math.sqrt(3) / 2, abs=1e-12)
    assert sp.eigenvalue(3) == pytest.approx(sp.eigenvalue(2))
    assert sp.eigenspace(2).shape == (12, 2)


def test_spectrum_agrees_with_eigvalsh(zoo):
    L = assemble_laplacian(zoo.X)
    assert np.allclose(zoo.spectrum.eigenvalues, np.linalg.eigvalsh(L), atol=1e-10)
    assert zoo.spectrum.eigenvalues[-1] <= 2 + 1e-12


def test_cluster_eigenvalues():
    cl = cluster_eigenvalues(np.array([0.0, 0.5, 0.5 + 1e-9, 1.0]), 1e-6)
    assert [len(c) for c in cl] == [1, 2, 1]


def test_spectrum_csv():
    lines = zoo_context("c12").spectrum.to_csv().splitlines()
    assert len(lines) == 13


def test_stokes_examples(c12):
    G, _, X = c12
    assert stokes_check(X, np.ones(12), 0.0) == 0.0
    phi = np.cos(2 * np.pi * values(G, X) / 12)
    assert stokes_check(X, phi, 1 - math.sqrt(3) / 2) <= 1e-10


def test_stokes_all_eigenpairs(zoo):
    sp = zoo.spectrum
    for j in range(zoo.X.n):
        assert stokes_check(zoo.X, sp.eigenvectors[:, j], sp.eigenvalues[j]) <= 1e-8


def test_tent_bound(c12):
    G, _, X = c12
    v = values(G, X)
    tent = np.array([1, 2, 3, 3, 2, 1, 0, 0, 0, 0, 0, 0], dtype=float)[v]
    assert gradient_sq(X, tent).sum() == pytest.approx(3)
    assert ((tent - tent.mean()) ** 2).sum() == pytest.approx(16)
    assert rayleigh_upper_bound(X, [tent]) == pytest.approx(3 / 16)
    assert 3 / 16 >= 1 - math.sqrt(3) / 2


def test_two_antipodal_tents(c12):
    G, _, X = c12
    v = values(G, X)
    a = np.array([1, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0], dtype=float)
    b = np.roll(a, 6)
    bound = rayleigh_upper_bound(X, [a[v], b[v]])
    assert bound >= zoo_context("c12").spectrum.eigenvalue(3)


def test_rayleigh_errors(c12):
    X = c12[2]
    with pytest.raises(ValueError):
        rayleigh_quotients(X, [np.ones(12)])
    f = np.zeros(12)
    f[0] = 1
    with pytest.raises(ValueError):
        rayleigh_quotients(X, [f, f])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 12, elements=st.floats(-10, 10)))
def test_minmax_single_function(f):
    X = zoo_context("c12").X
    if np.ptp(f) < 1e-3:
        return
    assert rayleigh_upper_bound(X, [f]) >= zoo_context("c12").spectrum.eigenvalue(2) - 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 12, elements=st.floats(-5, 5)), arrays(np.float64, 12, elements=st.floats(-5, 5)))
def test_gradient_form_is_symmetric_bilinear(f, g):
    # polarisation of the energy reproduces <f, L g>
    X = zoo_context("c12").X
    L = assemble_laplacian(X)
    e = lambda h: gradient_sq(X, h).sum()
    assert (e(f + g) - e(f - g)) / 4 == pytest.approx(f @ L @ g, abs=1e-8)


def test_ball_averages(c12):
    G, _, X = c12
    sp = zoo_context("c12").spectrum
    W1 = sp.eigenspace(1)
    Phi = ball_average_map(X, W1, [0, 5], 2)
    assert np.allclose(Phi, Phi[0, 0]) and numerical_rank(Phi) == 1
    centers = [G.index_of(str(v)) for v in (0, 3, 6, 9)]
    assert numerical_rank(ball_average_map(X, sp.eigenspace(2), centers, 1)) == 2
    assert numerical_rank(ball_average_map(X, sp.eigenspace(2), [0], 6)) == 0


def test_certificate_c12():
    X, sp = zoo_context("c12").X, zoo_context("c12").spectrum
    cert = multiplicity_certificate(X, sp, 2, 1 / 6)
    assert cert.certified and cert.rank == 2 and cert.M == 4
    cert = multiplicity_certificate(X, sp, 2, 1.0)
    assert not cert.certified and cert.rank == 0 and cert.null_rayleigh is not None


def test_certificate_hypercube():
    ctx = zoo_context("z2_4")
    cert = multiplicity_certificate(ctx.X, ctx.spectrum, 2, 0.25)
    assert cert.certified and cert.M <= 16 and cert.multiplicity == 4


def test_halving_on_zoo(zoo):
    cert, trail = certify_by_halving(zoo.X, zoo.spectrum, 2, 0.25)
    assert cert.certified and cert.multiplicity <= cert.M
    assert trail[-1] is cert


def test_cutoff_function(c12):
    G, _, X = c12
    v = values(G, X)
    u = cutoff_function(X, G.index_of("0"), 2)
    d = np.minimum(v, 12 - v)
    assert (u[d <= 2] == 1).all() and (u[d == 3] == 0.5).all() and (u[d >= 4] == 0).all()
    assert (cutoff_function(X, 0, 6) == 1).all()


def test_cutoff_is_lipschitz(zoo):
    X = zoo.X
    for R in range(1, max(2, X.diameter // 2 + 1)):
        u = cutoff_function(X, 0, R)
        assert np.abs(u[:, None] - u[X.neighbors]).max() <= 1 / R + 1e-12


def test_reverse_poincare_examples(c12):
    G, _, X = c12
    assert reverse_poincare_check(X, np.ones(12), 0.0, 0, 2).passed
    phi = np.cos(2 * np.pi * values(G, X) / 12)
    for center in range(12):
        assert reverse_poincare_check(X, phi, 1 - math.sqrt(3) / 2, center, 2).passed


def test_full_spectrum_on_loops():
    # C6 with one loop per vertex: eigenvalues of a quotient of the prism
    n = 6
    nbrs = np.array([[(i + 1) % n, (i - 1) % n, i] for i in range(n)])
    sp = full_spectrum(assemble_laplacian(RegularMultigraph(nbrs)))
    oracle = np.sort([(2 - 2 * math.cos(2 * math.pi * k / n)) / 3 for k in range(n)])
    assert np.allclose(sp.eigenvalues, oracle)
