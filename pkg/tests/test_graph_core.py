import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onesided.errors import InputError, NotIndependentError, ParseError
from onesided.graph_core import (
    Graph,
    ModelMatrix,
    Partition,
    check_k_delta_coloring,
    coloring_quality,
    format_edge_list,
    format_partition,
    model_matrix,
    normalized_adjacency,
    parse_edge_list,
    parse_partition,
    per_pair_variance,
    permutation_match,
    load_graph,
    save_graph,
)
from onesided.instances import complete_multipartite, random_regular
from onesided.spectral import eig_sym

import oracles
from conftest import C4, TRI, c4, triangle


@st.composite
def graphs(draw, max_n=10, weighted=False):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1, max_size=len(pairs)))
    w = None
    if weighted:
        w = draw(st.lists(st.floats(0.1, 5.0), min_size=len(chosen), max_size=len(chosen)))
    return Graph.from_edges(n, chosen, w)


@st.composite
def graph_and_partition(draw, max_n=10, max_k=4):
    g = draw(graphs(max_n, weighted=draw(st.booleans())))
    k = draw(st.integers(1, min(max_k, g.n)))
    chi = draw(st.lists(st.integers(0, k - 1), min_size=g.n, max_size=g.n))
    chi[:k] = list(range(k))  # every class nonempty
    return g, Partition(np.array(chi), k)


# ---------------------------------------------------------------- loading


def test_load_triangle():
    g = parse_edge_list("0 1\n1 2\n0 2")
    assert g.n == 3 and g.m == 3
    assert g.degree.tolist() == [2, 2, 2]


def test_load_weighted_edge():
    g = parse_edge_list("0 1 2.5")
    assert g.degree.tolist() == [2.5, 2.5]


@pytest.mark.parametrize("text,line,fragment", [
    ("0 0", 1, "self-loop"),
    ("0 1\n\n1 2\n2 1", 4, "duplicate"),
    ("0 1\n1 2 -1", 2, "non-positive"),
    ("0 1\n1 2 0", 2, "non-positive"),
    ("# c\n0 x", 2, "cannot parse"),
    ("0 1 2 3", 1, "expected"),
])
def test_parse_errors_report_line(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse_edge_list(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_duplicates_merge_when_requested():
    g = parse_edge_list("0 1 1.5\n1 0 2", merge_duplicates=True)
    assert g.m == 1 and g.weights.tolist() == [3.5]


def test_comments_blank_lines_and_header():
    g = parse_edge_list("# n=5\n\n0 1  # trailing\n# note\n3 4\n")
    assert g.n == 5 and g.m == 2


@settings(max_examples=60, deadline=None)
@given(graphs(weighted=True))
def test_edge_list_round_trip(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("rt") / "g.el"
    save_graph(g, path)
    h = load_graph(path)
    assert h.n == g.n
    assert np.array_equal(h.edges, g.edges)
    assert np.array_equal(h.weights, g.weights)  # bit-exact
    assert format_edge_list(h) == format_edge_list(g)


def test_partition_round_trip():
    p = Partition(np.array([2, 0, 1, 1, 0]), 4)
    q = parse_partition(format_partition(p))
    assert q.k == 4 and np.array_equal(q.chi, p.chi)
    with pytest.raises(ParseError):
        parse_partition("0 1\n2 0")


@settings(max_examples=80, deadline=None)
@given(graphs(weighted=True))
def test_graph_invariants(g):
    deg = np.zeros(g.n)
    for (u, v), w in zip(g.edges, g.weights):
        deg[u] += w
        deg[v] += w
    assert np.allclose(g.degree, deg, rtol=1e-12, atol=0)
    assert np.all(g.edges[:, 0] < g.edges[:, 1])
    assert len({tuple(e) for e in g.edges.tolist()}) == g.m
    assert g.is_regular == (g.degree.max() / g.degree.min() <= 1 + 1e-9 if g.degree.min() > 0 else False)


# -------------------------------------------------------- normalization


def test_normalized_triangle():
    A = normalized_adjacency(triangle())
    off = A[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 0.5)
    assert np.allclose(eig_sym(A).eigenvalues, [1, -0.5, -0.5])


def test_normalized_c4_and_k22_hoffman():
    ev = eig_sym(normalized_adjacency(c4())).eigenvalues
    assert np.allclose(ev, [1, 0, 0, -1], atol=1e-12)
    mu = 0.5
    assert ev[-1] <= -mu / (1 - mu) + 1e-12


def test_isolated_vertex_rejected():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(InputError, match="vertex 2"):
        normalized_adjacency(g)


@settings(max_examples=60, deadline=None)
@given(graphs(weighted=True))
def test_normalized_matches_oracle(g):
    if g.degree.min() == 0:
        return
    A = normalized_adjacency(g)
    ref = oracles.normalized(oracles.adjacency(g.n, g.edges.tolist(), g.weights.tolist()))
    assert np.allclose(A, ref, atol=1e-12)
    assert np.max(np.abs(np.linalg.eigvalsh(A))) <= 1 + 1e-9


# ---------------------------------------------------------- model matrix


def test_model_balanced_tripartite():
    g = complete_multipartite([4, 4, 4])
    p = Partition(np.repeat(np.arange(3), 4), 3)
    M = model_matrix(normalized_adjacency(g), p).entries
    assert np.allclose(M, [[0, .5, .5], [.5, 0, .5], [.5, .5, 0]], atol=1e-12)


def test_model_single_class_regular():
    g = random_regular(20, 4, 0)
    M = model_matrix(normalized_adjacency(g), Partition(np.zeros(20, dtype=int), 1)).entries
    assert M.shape == (1, 1) and M[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_model_c4_alternating():
    M = model_matrix(normalized_adjacency(c4()), Partition(np.array([0, 1, 0, 1]), 2)).entries
    assert np.allclose(M, [[0, 1], [1, 0]], atol=1e-12)


def test_model_empty_class_named():
    with pytest.raises(InputError, match="class 2"):
        model_matrix(normalized_adjacency(c4()), Partition(np.array([0, 1, 0, 1]), 3))


@settings(max_examples=80, deadline=None)
@given(graph_and_partition())
def test_model_entrywise_equals_matrix_form(gp):
    g, p = gp
    if g.degree.min() == 0:
        return
    At = normalized_adjacency(g)
    M = model_matrix(At, p).entries
    ref = oracles.model_entrywise(At, p.chi.tolist(), p.k)
    assert np.allclose(M, ref, atol=1e-9)
    # reversibility in class-size weights
    sizes = p.class_sizes
    assert np.allclose(sizes[:, None] * M, (sizes[:, None] * M).T, atol=1e-9)
    # row sums are the per-class average row sum
    rows = At.sum(axis=1)
    for a in range(p.k):
        assert M[a].sum() == pytest.approx(rows[p.chi == a].mean(), abs=1e-9)
    assert np.allclose(per_pair_variance(At, p), oracles.variance_entrywise(At, p.chi.tolist(), p.k), atol=1e-9)


def test_regular_rows_sum_to_one():
    g = random_regular(30, 6, 2)
    p = Partition(np.arange(30) % 3, 3)
    M = model_matrix(normalized_adjacency(g), p).entries
    assert np.allclose(M.sum(axis=1), 1, atol=1e-9)


# -------------------------------------------------------- coloring quality


def test_quality_proper_coloring():
    q = coloring_quality(c4(), Partition(np.array([0, 1, 0, 1]), 2))
    assert q.delta_vertex_cover == 0 and q.monochromatic_edges == 0


def test_quality_tripartite_zero_variance():
    g = complete_multipartite([3, 3, 3])
    q = coloring_quality(g, Partition(np.repeat(np.arange(3), 3), 3), ModelMatrix(np.array([[0, .5, .5], [.5, 0, .5], [.5, .5, 0]])))
    assert np.allclose(q.per_pair_variance, 0, atol=1e-15)
    assert q.model_distance == pytest.approx(0, abs=1e-12)


def test_quality_path_single_color():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    q = coloring_quality(g, Partition(np.zeros(3, dtype=int), 1))
    assert q.delta_vertex_cover == oracles.FROZEN["path_cover_fraction"]


def test_quality_reports_degree_measure():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    q = coloring_quality(g, Partition(np.array([0, 0, 1, 1]), 2))
    assert q.delta_vertex_cover == 0.5
    assert q.delta_vertex_cover_degree == pytest.approx(4 / 6)


@settings(max_examples=150, deadline=None)
@given(graph_and_partition(max_n=9))
def test_cover_two_approx_against_brute_force(gp):
    g, p = gp
    mono = [tuple(e) for e in g.edges.tolist() if p.chi[e[0]] == p.chi[e[1]]]
    q = coloring_quality(g, p, mat=oracles.adjacency(g.n, g.edges.tolist()))
    opt = oracles.min_vertex_cover(mono, g.n)
    cover = q.delta_vertex_cover * g.n
    assert cover <= 2 * opt
    assert cover == len(oracles.greedy_matching_cover(mono))


# ------------------------------------------------------ (k, delta) checks


def test_k_delta_examples():
    t = triangle()
    assert check_k_delta_coloring(t, [{0}, {1}, {2}]) == 0
    assert check_k_delta_coloring(t, [{0}, {1}]) == pytest.approx(1 / 3)
    with pytest.raises(NotIndependentError) as info:
        check_k_delta_coloring(Graph.from_edges(2, [(0, 1)]), [{0, 1}])
    assert info.value.witness == (0, 1)
    with pytest.raises(InputError, match="overlap"):
        check_k_delta_coloring(t, [{0}, {0, 1}])


# ------------------------------------------------------ permutation match


def test_permutation_match_examples():
    assert permutation_match(np.array([0, 1, 2]), np.array([1, 2, 0]))[1] == 1.0
    assert permutation_match(np.array([0, 0, 1, 1]), np.array([0, 0, 0, 1]))[1] == 0.75


def test_permutation_match_constructed_ninety_percent():
    rng = np.random.default_rng(0)
    chi = np.repeat(np.arange(3), 100)
    perm = np.array([2, 0, 1])
    est = perm[chi]
    wrong = rng.choice(300, 30, replace=False)
    est[wrong] = -1  # uncovered vertices count as mismatches
    assert permutation_match(Partition(chi, 3), est)[1] == pytest.approx(0.9)


def test_permutation_match_size_mismatch():
    with pytest.raises(InputError):
        permutation_match(np.array([0, 1]), np.array([0, 1, 1]))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.lists(st.integers(0, 4), min_size=1, max_size=12), st.data())
def test_permutation_match_vs_oracle(k, raw, data):
    chi = [x % k for x in raw]
    est = data.draw(st.lists(st.integers(-1, k - 1), min_size=len(chi), max_size=len(chi)))
    got = permutation_match(np.array(chi), np.array(est))[1]
    assert got == pytest.approx(oracles.permutation_agreement(chi, est, k))


def test_permutation_match_many_colors_uses_assignment():
    rng = np.random.default_rng(1)
    chi = rng.integers(0, 12, 200)
    perm = rng.permutation(12)
    assert permutation_match(chi, perm[chi])[1] == 1.0
