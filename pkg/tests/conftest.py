import numpy as np
import pytest

from onesided.graph_core import Graph
from onesided import instances as inst

TRI = [(0, 1), (1, 2), (0, 2)]
C4 = [(0, 1), (1, 2), (2, 3), (0, 3)]

BALANCED = np.array([[0, .5, .5], [.5, 0, .5], [.5, .5, 0]])
REPEATED = np.array([[0, .5, .5], [1, 0, 0], [1, 0, 0.]])


def triangle():
    return Graph.from_edges(3, TRI)


def c4():
    return Graph.from_edges(4, C4)


def _er_connected_degrees(n, p, seed):
    for sub in range(100):
        g = inst.erdos_renyi(n, p, seed * 1000 + sub)
        if g.degree.min() > 0:
            return g
    raise RuntimeError("no ER sample without isolated vertices")


def build_corpus():
    """100 graphs: random regular (n = 50, 200), ER, SBM, bipartite, unions."""
    out = []
    for i, d in enumerate([3, 4, 5, 6, 8, 10, 12, 16, 20, 24] * 2):
        out.append((f"rr50_d{d}_{i}", inst.random_regular(50, d if 50 * d % 2 == 0 else d + 1, seed=i)))
    for i, d in enumerate([3, 4, 6, 8, 10, 16, 20, 30, 40, 60] * 2):
        out.append((f"rr200_d{d}_{i}", inst.random_regular(200, d, seed=100 + i)))
    for i in range(20):
        n = 40 + 10 * (i % 6)
        p = [0.1, 0.15, 0.2, 0.3, 0.5][i % 5]
        out.append((f"er{n}_{p}_{i}", _er_connected_degrees(n, p, i)))
    models = [BALANCED, REPEATED, np.array([[0, 1], [1, 0.]])]
    for i in range(15):
        M = models[i % 3]
        out.append((f"sbm{i}", inst.sbm_from_model(M, 120 + 12 * i, 6 + 2 * i, seed=i).graph))
    for i in range(5):
        out.append((f"bireg{i}", inst.biregular_random(30 + 15 * i, 60, 4 + 4 * i, seed=i, check=False)))
    for i in range(5):
        out.append((f"kab{i}", inst.complete_bipartite(3 + i, 5 + 2 * i)))
    for i in range(5):
        out.append((f"even_cycle{i}", inst.cycle(6 + 4 * i)))
    unions = [
        inst.disjoint_union(c4(), triangle()),
        inst.disjoint_union(inst.random_regular(30, 4, 1), inst.random_regular(40, 6, 2)),
        inst.disjoint_union(inst.complete_bipartite(4, 4), inst.random_regular(20, 3, 3)),
        inst.disjoint_union(inst.cycle(9), inst.cycle(10), c4()),
        inst.disjoint_union(triangle(), triangle(), triangle()),
        inst.disjoint_union(inst.complete_bipartite(2, 5), inst.complete_graph(6)),
        inst.disjoint_union(inst.biregular_random(20, 40, 6, 5, check=False), c4()),
        inst.disjoint_union(inst.random_regular(50, 10, 6), inst.complete_bipartite(5, 5)),
        inst.disjoint_union(inst.cycle(7), inst.path(5)),
        inst.disjoint_union(inst.sbm_from_model(BALANCED, 60, 8, 7).graph, inst.cycle(12)),
    ]
    for i, g in enumerate(unions):
        out.append((f"union{i}", g))
    assert len(out) == 100
    return out


_CORPUS = None


@pytest.fixture(scope="session")
def corpus():
    global _CORPUS
    if _CORPUS is None:
        _CORPUS = build_corpus()
    return _CORPUS


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
