import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onesided.coloring import (
    WeakResultWarning,
    alpha_identity_exact,
    alpha_uncovered_bound,
    color_3_expander,
    color_expander,
    find_independent_set,
    group_rows,
    hoffman_threshold,
    model_3_from_pi,
    round_coloring,
    round_independent_set,
    stationary_distribution,
    variance_bound,
)
from onesided.errors import InputError, PreconditionError
from onesided.graph_core import (
    Graph,
    ModelMatrix,
    Partition,
    check_k_delta_coloring,
    coloring_quality,
    indicator_residuals,
    normalized_adjacency,
    permutation_match,
)
from onesided.instances import (
    complete_bipartite,
    complete_multipartite,
    erdos_renyi,
    planted_independent_set,
    random_regular,
    sbm_from_model,
)
from onesided.recovery import RecoveryParams
from onesided.spectral import eig_sym

import oracles
from conftest import BALANCED, REPEATED, c4, triangle


# ------------------------------------------------------ stationary vector


def test_stationary_examples():
    assert np.allclose(stationary_distribution(np.array([[0, 1], [1, 0.]])), [.5, .5])
    assert np.allclose(stationary_distribution(REPEATED), [.5, .25, .25])
    assert np.allclose(stationary_distribution(BALANCED), [1 / 3] * 3)


def test_stationary_disconnected():
    M = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0.]])
    with pytest.raises(InputError, match="disconnected"):
        stationary_distribution(M)


def test_stationary_non_reversible():
    M = np.array([[0, .9, .1], [.1, 0, .9], [.9, .1, 0]])
    with pytest.raises(InputError, match="reversible"):
        stationary_distribution(M)


@st.composite
def reversible_models(draw, max_k=6):
    k = draw(st.integers(2, max_k))
    seed = draw(st.integers(0, 10 ** 6))
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.1, 1, (k, k))
    W = (W + W.T) / 2
    np.fill_diagonal(W, 0)
    if k > 2 and draw(st.booleans()):
        W[0, 1] = W[1, 0] = 0  # sparser pattern, still connected
    return W / W.sum(axis=1, keepdims=True), W.sum(axis=1) / W.sum()


@settings(max_examples=100, deadline=None)
@given(reversible_models())
def test_stationary_property(model):
    M, pi_true = model
    pi = stationary_distribution(M)
    assert np.allclose(pi, pi_true, atol=1e-9)
    assert np.allclose(pi, oracles.stationary_by_power(M), atol=1e-9)
    flow = pi[:, None] * M
    assert np.allclose(flow, flow.T, atol=1e-9)


# ------------------------------------------------------ 3-color models


def test_model3_examples():
    assert np.allclose(model_3_from_pi([1 / 3] * 3).entries, BALANCED)
    assert np.allclose(model_3_from_pi([.5, .25, .25]).entries, REPEATED)
    with pytest.raises(InputError, match=r"entry \(1, 2\)"):
        model_3_from_pi([.6, .2, .2])


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 1.0))
def test_model3_round_trip(a, frac):
    # pi_a + pi_b >= 1/2 for all pairs <=> every pi_a <= 1/2
    pi = np.array([a, frac * (1 - a), (1 - frac) * (1 - a)])
    if np.any(pi <= 1e-6) or np.any(pi > 0.5):
        return
    M = model_3_from_pi(pi)
    assert M.is_stochastic() and M.has_zero_diagonal() and M.is_reversible(pi)
    assert np.allclose(stationary_distribution(M), pi, atol=1e-9)


# ------------------------------------------------------------ alpha


def test_alpha_examples():
    g, alpha = alpha_uncovered_bound(REPEATED)
    assert g.groups == [[0], [1, 2]]
    assert alpha == pytest.approx(0.5)
    assert np.allclose(g.p, [0.5, 0])
    g, alpha = alpha_uncovered_bound(BALANCED)
    assert alpha == 0 and np.allclose(g.p, [1 / 3] * 3)
    assert alpha_uncovered_bound(np.array([[0, 1], [1, 0.]]))[1] == 0


def test_group_rows_tolerance():
    M = np.array([[0, .5, .5], [.95, 0, .05], [1, 0, 0]])
    assert group_rows(M, 0.1) == [[0], [1, 2]]
    assert group_rows(M, 0.01) == [[0], [1], [2]]


@settings(max_examples=100, deadline=None)
@given(reversible_models(), st.floats(0, 0.6))
def test_alpha_identity(model, tol):
    M, pi = model
    grouping, alpha = alpha_uncovered_bound(M, row_tol=tol)
    assert abs(1 - grouping.p.sum() - alpha) <= 1e-9
    assert alpha_identity_exact(pi, grouping.groups)


# ----------------------------------------------------------- rounding


def test_round_independent_examples():
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert round_independent_set(path, [0, 2]).tolist() == [0, 2]
    assert round_independent_set(path, [0, 1, 2]).tolist() == [2]
    tri = round_independent_set(triangle(), [0, 1, 2])
    assert len(tri) == 1 and oracles.is_independent([(0, 1), (1, 2), (0, 2)], tri.tolist())


@st.composite
def small_graph_and_set(draw):
    n = draw(st.integers(1, 12))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    S = draw(st.lists(st.integers(0, n - 1), unique=True))
    return n, edges, S


@settings(max_examples=200, deadline=None)
@given(small_graph_and_set())
def test_round_independent_guarantee(case):
    n, edges, S = case
    g = Graph.from_edges(n, edges if edges else np.zeros((0, 2)))
    out = round_independent_set(g, S).tolist()
    assert set(out) <= set(S)
    assert oracles.is_independent(edges, out)
    best = oracles.max_independent_subset(edges, S)
    assert len(out) >= len(best) - (len(S) - len(best))


def test_round_coloring_examples():
    assert round_coloring(c4(), Partition(np.array([0, 1, 0, 1]), 2)).covered_fraction == 1
    r = round_coloring(triangle(), Partition(np.zeros(3, dtype=int), 1))
    assert r.covered_fraction == pytest.approx(1 / 3)
    r = round_coloring(c4(), Partition(np.array([0, 1, 0, 0]), 2))
    assert r.covered_fraction >= 0.5
    check_k_delta_coloring(c4(), r.independent_sets)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(1, 4), st.integers(0, 10 ** 6))
def test_round_coloring_two_epsilon(n, k, seed):
    rng = np.random.default_rng(seed)
    g = erdos_renyi(n, 0.4, seed)
    chi = rng.integers(0, k, n)
    mono = [tuple(e) for e in g.edges.tolist() if chi[e[0]] == chi[e[1]]]
    eps = oracles.min_vertex_cover(mono, n) / n
    r = round_coloring(g, Partition(chi, k))
    assert r.covered_fraction >= 1 - 2 * eps - 1e-12
    check_k_delta_coloring(g, r.independent_sets)


# ------------------------------------------------------- color_expander


def test_color_expander_tripartite():
    g = complete_multipartite([3, 3, 3])
    r = color_expander(g, 3, RecoveryParams(lam=0.4))
    assert r.covered_fraction == 1
    check_k_delta_coloring(g, r.independent_sets)


def test_color_expander_balanced_sbm():
    inst = sbm_from_model(BALANCED, 300, 40, seed=5)
    r = color_expander(inst.graph, 3)
    assert r.covered_fraction >= 0.9
    assert r.provenance["lambda2"] == pytest.approx(eig_sym(normalized_adjacency(inst.graph)).lambda2())


@pytest.mark.xfail(strict=True, reason="lambda2 <= 0.15 is below the spectral floor of 40-regular graphs (about 0.31)")
def test_balanced_sbm_lambda2_example():
    inst = sbm_from_model(BALANCED, 300, 40, seed=5)
    assert eig_sym(normalized_adjacency(inst.graph)).lambda2() <= 0.15


def test_color_expander_repeated_rows():
    inst = sbm_from_model(REPEATED, 400, 40, seed=5)
    r = color_expander(inst.graph, 3)
    assert r.covered_fraction >= 0.45
    assert r.k_effective == 2


def test_color_expander_requires_connected():
    from onesided.instances import disjoint_union
    with pytest.raises(PreconditionError, match="components"):
        color_expander(disjoint_union(c4(), c4()), 2)


def test_color_expander_weak_result_warns():
    g = complete_multipartite([1, 1, 1, 1, 1])  # K5: nothing beats one vertex
    with pytest.warns(WeakResultWarning):
        r = color_expander(g, 2, RecoveryParams(lam=0.9))  # only the constant eigenvector
    check_k_delta_coloring(g, r.independent_sets)


# ----------------------------------------------------- color_3_expander


def test_color3_tripartite():
    g = complete_multipartite([4, 4, 4])
    r = color_3_expander(g, 0.1)
    assert r.covered_fraction == 1 and r.k_effective == 3


def test_color3_balanced_sbm():
    inst = sbm_from_model(BALANCED, 600, 50, seed=2)
    r = color_3_expander(inst.graph, 0.05)
    assert r.covered_fraction >= 0.95


def test_color3_unbalanced_sbm():
    M = model_3_from_pi([0.45, 0.3, 0.25])
    inst = sbm_from_model(M, 600, 50, seed=0)
    assert inst.graph.is_regular
    r = color_3_expander(inst.graph, 0.05)
    assert r.covered_fraction >= 0.9


def test_color3_rejects_irregular():
    with pytest.raises(PreconditionError, match="regular"):
        color_3_expander(complete_bipartite(2, 3), 0.1)


# ------------------------------------------------- find_independent_set


def test_indep_kdd():
    g = complete_bipartite(6, 6)
    S = find_independent_set(g, 0.0, 0.5, 2)
    assert len(S) == 6
    check_k_delta_coloring(g, [S])


def test_indep_planted():
    g, I = planted_independent_set(500, 44, 0.05, seed=0)
    S, info = find_independent_set(g, 0.05, 0.5, 3, return_info=True)
    assert info.bottom_rank <= 3
    assert len(S) >= 0.2 * 500
    check_k_delta_coloring(g, [S])


def test_indep_triangle():
    S = find_independent_set(triangle(), 0.1, 0.4, 3)
    assert len(S) == 1


def test_indep_rank_cap():
    g = random_regular(40, 3, 0)
    with pytest.raises(PreconditionError, match="rank cap"):
        find_independent_set(g, 0.1, 0.1, 1)


def test_indep_gamma_range():
    with pytest.raises(InputError):
        find_independent_set(triangle(), 0.3, 0.4, 3)


def test_hoffman_consistency_planted():
    for seed in range(3):
        g, I = planted_independent_set(500, 44, 0.05, seed=seed)
        mu = len(I) / g.n
        lam_min = eig_sym(normalized_adjacency(g)).lambda_min()
        assert lam_min <= hoffman_threshold(mu) + 1e-7


# ----------------------------------------------------- variance bounds


@pytest.mark.parametrize("M", [BALANCED, REPEATED, model_3_from_pi([0.45, 0.3, 0.25]).entries])
def test_variance_and_indicator_bounds(M):
    for seed in range(3):
        inst = sbm_from_model(M, 300, 40, seed=seed)
        A = normalized_adjacency(inst.graph)
        p = inst.partition
        lam2 = eig_sym(A).lambda2()
        q = coloring_quality(inst.graph, p)
        c = p.class_sizes.min() / p.n
        assert q.per_pair_variance.max() <= variance_bound(lam2, c, q.delta_vertex_cover)
        delta = q.per_pair_variance.max()
        assert np.all(indicator_residuals(A, p) <= delta / c + 1e-12)


def test_indicator_bound_arbitrary_partitions():
    g = random_regular(60, 6, 4)
    A = normalized_adjacency(g)
    rng = np.random.default_rng(0)
    for _ in range(20):
        chi = rng.integers(0, 3, 60)
        chi[:3] = [0, 1, 2]
        p = Partition(chi, 3)
        from onesided.graph_core import per_pair_variance
        delta = per_pair_variance(A, p).max()
        c = p.class_sizes.min() / 60
        assert np.all(indicator_residuals(A, p) <= delta / c + 1e-12)
