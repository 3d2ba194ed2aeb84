import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onesided import kernels
from onesided.graph_core import Graph

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_python_backend_always_present():
    assert "python" in BACKENDS
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_env_forces_fallback():
    code = "from onesided import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, ONESIDED_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@st.composite
def graphs_with_colors(draw, max_n=25):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(2, 4))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=60)) if pairs else []
    colors = draw(st.lists(st.integers(-1, k - 1), min_size=n, max_size=n))
    return Graph.from_edges(n, edges if edges else np.zeros((0, 2))), np.array(colors), k


@needs_compiled
@settings(max_examples=150, deadline=None)
@given(graphs_with_colors())
def test_matching_cover_equivalent(case):
    g, _, _ = case
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    eu, ev = g.edges[:, 0].astype(np.int64), g.edges[:, 1].astype(np.int64)
    assert np.array_equal(py.matching_cover(eu, ev, g.n), cy.matching_cover(eu, ev, g.n))


@needs_compiled
@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(2, 6), st.integers(1, 4), st.integers(0, 10 ** 6), st.booleans())
def test_assign_combos_equivalent(n, m, k, seed, ties):
    rng = np.random.default_rng(seed)
    k = min(k, m)
    dist = rng.integers(0, 3, (n, m)).astype(float) if ties else rng.random((n, m))
    combos = np.array([rng.choice(m, k, replace=False) for _ in range(5)], dtype=np.int64)
    a = BACKENDS["python"].assign_combos(dist, combos)
    b = BACKENDS["cython"].assign_combos(dist, combos)
    assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_compiled
@settings(max_examples=150, deadline=None)
@given(graphs_with_colors(), st.floats(0, 4))
def test_uncolor_equivalent(case, threshold):
    g, colors, k = case
    indptr, indices = g.csr_arrays
    a = BACKENDS["python"].uncolor_fixpoint(indptr, indices, colors, k, threshold)
    b = BACKENDS["cython"].uncolor_fixpoint(indptr, indices, colors, k, threshold)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


@needs_compiled
@settings(max_examples=150, deadline=None)
@given(graphs_with_colors())
def test_safe_recolor_equivalent(case):
    g, colors, k = case
    indptr, indices = g.csr_arrays
    a = BACKENDS["python"].safe_recolor_fixpoint(indptr, indices, colors, k)
    b = BACKENDS["cython"].safe_recolor_fixpoint(indptr, indices, colors, k)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


def test_uncolor_fixpoint_reached():
    # after the loop no colored vertex violates the threshold
    from onesided.instances import random_regular
    g = random_regular(80, 6, 0)
    rng = np.random.default_rng(1)
    colors = rng.integers(0, 3, 80)
    indptr, indices = g.csr_arrays
    for name, mod in BACKENDS.items():
        out, _ = mod.uncolor_fixpoint(indptr, indices, colors, 3, 1.0)
        for x in range(80):
            if out[x] < 0:
                continue
            nb = indices[indptr[x]:indptr[x + 1]]
            cnt = np.bincount(out[nb][out[nb] >= 0], minlength=3)
            assert all(cnt[c] >= 1.0 for c in range(3) if c != out[x]), name
