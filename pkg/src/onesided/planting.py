"""Random planting of a k-coloring in a regular host and its recovery:
list recovery, uncoloring, safe recoloring, and brute force on the leftover
components."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import CompletionFailure, ImproperColoringError, InputError, RecoveryFailure
from .graph_core import (
    Graph,
    Partition,
    is_proper,
    load_graph,
    load_partition,
    model_matrix,
    monochromatic_mask,
    normalized_adjacency,
    per_pair_variance,
    save_graph,
    save_partition,
)
from .recovery import CandidateList, RecoveryParams, recover_partitions
from .spectral import eig_sym, threshold_rank

FREE = kernels.FREE


class HypothesisWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class PartialColoring:
    colors: np.ndarray
    k: int

    def __post_init__(self):
        c = np.asarray(self.colors, dtype=np.int64)
        if len(c) and (c.min() < FREE or c.max() >= self.k):
            raise InputError(f"colors must lie in -1..{self.k - 1}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "colors", c)

    @property
    def free_set(self) -> np.ndarray:
        return np.flatnonzero(self.colors == FREE)

    @property
    def free_fraction(self) -> float:
        return float(np.mean(self.colors == FREE)) if len(self.colors) else 0.0

    def is_proper(self, g: Graph) -> bool:
        return is_proper(g, self.colors)

    def assert_proper(self, g: Graph):
        a, b = self.colors[g.edges[:, 0]], self.colors[g.edges[:, 1]]
        bad = np.flatnonzero((a >= 0) & (a == b))
        if len(bad):
            w = tuple(int(x) for x in g.edges[bad[0]])
            raise ImproperColoringError(f"edge {w} joins two vertices colored {int(a[bad[0]])}", w)
        return self


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    host: Graph
    planted: Partition
    graph: Graph
    d: float
    seed: Optional[int] = None

    @property
    def k(self) -> int:
        return self.planted.k

    @property
    def removed(self) -> int:
        return self.host.m - self.graph.m


def plant_coloring(h: Graph, chi: Partition, seed=None) -> PlantedInstance:
    """Delete every edge of ``h`` that is monochromatic under ``chi``."""
    if chi.n != h.n:
        raise InputError(f"partition covers {chi.n} vertices, host has {h.n}")
    keep = ~monochromatic_mask(h, chi.chi)
    g = Graph(h.n, h.edges[keep], h.weights[keep])
    d = float(h.degree.max()) if h.n else 0.0
    if h.n and not h.is_regular:
        d = float(h.degree.mean())
    return PlantedInstance(h, chi, g, d, seed)


def plant_k_coloring(h: Graph, k: int, seed=0) -> PlantedInstance:
    """chi(x) uniform on [k] independently, then delete monochromatic edges.
    The host degree d is the regular degree (mean degree for irregular hosts)."""
    if k < 2:
        raise InputError("k must be at least 2")
    rng = np.random.default_rng([int(seed), 1])
    chi = Partition(rng.integers(0, k, size=h.n), k)
    if not h.is_regular:
        warnings.warn("host is not regular; d is taken as its mean degree", HypothesisWarning, stacklevel=2)
    return plant_coloring(h, chi, seed)


def save_planted(inst: PlantedInstance, prefix):
    """Write <prefix>.host.el, <prefix>.part and <prefix>.json."""
    prefix = str(prefix)
    save_graph(inst.host, prefix + ".host.el")
    save_partition(inst.planted, prefix + ".part")
    Path(prefix + ".json").write_text(json.dumps({"k": inst.k, "d": inst.d, "seed": inst.seed}, sort_keys=True) + "\n")


def load_planted(prefix) -> PlantedInstance:
    prefix = str(prefix)
    meta = json.loads(Path(prefix + ".json").read_text())
    host = load_graph(prefix + ".host.el")
    chi = load_partition(prefix + ".part", n=host.n)
    inst = plant_coloring(host, Partition(chi.chi, int(meta["k"])), meta.get("seed"))
    return PlantedInstance(inst.host, inst.planted, inst.graph, float(meta["d"]), meta.get("seed"))


def planted_matrix(g: Graph, d: float, k: int):
    """k / ((k - 1) d) * A_G, the normalization matched to the host degree."""
    if not d > 0:
        raise InputError("host degree d must be positive")
    return (k / ((k - 1) * d)) * g.sparse


def recover_partial_list(inst_graph: Graph, d: float, k: int, params: Optional[RecoveryParams] = None,
                         spec=None) -> CandidateList:
    params = params or RecoveryParams()
    mat = planted_matrix(inst_graph, d, k).toarray()
    return recover_partitions(mat, k, params, spec=spec if spec is not None else eig_sym(mat))


def uncolor(inst_graph: Graph, chi_hat, d: float, k: int) -> PartialColoring:
    """Repeatedly uncolor any colored vertex with fewer than d/(6k) colored
    neighbours of some other color; ascending vertex order per pass."""
    colors = chi_hat.chi if isinstance(chi_hat, Partition) else chi_hat.colors if isinstance(chi_hat, PartialColoring) else np.asarray(chi_hat)
    indptr, indices = inst_graph.csr_arrays
    out, _ = kernels.uncolor_fixpoint(indptr, indices, colors, k, d / (6.0 * k))
    return PartialColoring(out, k).assert_proper(inst_graph)


def safe_recolor(inst_graph: Graph, pc: PartialColoring, k: int) -> PartialColoring:
    """Give each FREE vertex whose colored neighbours use exactly k - 1 colors
    the missing color, until nothing changes."""
    pc.assert_proper(inst_graph)
    indptr, indices = inst_graph.csr_arrays
    out, _ = kernels.safe_recolor_fixpoint(indptr, indices, pc.colors, k)
    return PartialColoring(out, k).assert_proper(inst_graph)


def free_components(inst_graph: Graph, pc: PartialColoring):
    """Connected components of the graph induced on the FREE vertices, each
    sorted, ordered by smallest vertex."""
    free = pc.free_set
    if not len(free):
        return []
    sub = inst_graph.sparse[free][:, free]
    _, lab = connected_components(sub, directed=False)
    comps = [free[lab == c] for c in range(lab.max() + 1)]
    return sorted(comps, key=lambda c: int(c[0]))


def _complete_component(inst_graph, colors, comp, k):
    """Lexicographically first proper coloring of ``comp`` given fixed colors
    outside it, or None."""
    pos = {int(x): i for i, x in enumerate(comp)}
    allowed, inner = [], []
    for x in comp.tolist():
        nb = inst_graph.neighbors(x)
        fixed = {int(colors[y]) for y in nb if colors[y] >= 0}
        allowed.append([c for c in range(k) if c not in fixed])
        inner.append([pos[int(y)] for y in nb if int(y) in pos and pos[int(y)] < pos[x]])
    m = len(comp)
    assign = [-1] * m
    choice = [0] * m
    i = 0
    while 0 <= i < m:
        opts = allowed[i]
        placed = False
        while choice[i] < len(opts):
            c = opts[choice[i]]
            choice[i] += 1
            if all(assign[j] != c for j in inner[i]):
                assign[i] = c
                placed = True
                break
        if placed:
            i += 1
            if i < m:
                choice[i] = 0
        else:
            assign[i] = -1
            choice[i] = 0
            i -= 1
    return assign if i == m else None


def finish_by_components(inst_graph: Graph, pc: PartialColoring, k: int, size_limit: Optional[int] = None) -> Partition:
    """Brute force each FREE component (size at most ``size_limit``, default
    ceil(ln n)) over colorings consistent with the colored neighbours;
    lexicographically first completion wins."""
    pc.assert_proper(inst_graph)
    n = inst_graph.n
    if size_limit is None:
        size_limit = max(1, math.ceil(math.log(n))) if n > 1 else 1
    colors = pc.colors.copy()
    for comp in free_components(inst_graph, pc):
        if len(comp) > size_limit:
            raise CompletionFailure(
                f"FREE component of size {len(comp)} containing vertex {int(comp[0])} exceeds limit {size_limit}",
                comp.tolist(), "oversized")
        assign = _complete_component(inst_graph, colors, comp, k)
        if assign is None:
            raise CompletionFailure(
                f"FREE component containing vertex {int(comp[0])} has no consistent coloring", comp.tolist(), "unextendable")
        colors[comp] = assign
    if not is_proper(inst_graph, colors):
        raise ImproperColoringError("completed coloring is not proper", None)
    return Partition(colors, k)


@dataclass
class FullRecoveryResult:
    partition: Partition
    candidate_index: int
    diagnostics: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    host_lambda2: Optional[float] = None


MIN_HOST_DEGREE = 48  # d/(6k) >= 2 at k = 3 with slack


def recover_full(inst: PlantedInstance, params: Optional[RecoveryParams] = None, size_limit: Optional[int] = None,
                 host_spec=None, min_degree: float = MIN_HOST_DEGREE) -> FullRecoveryResult:
    """Candidate list -> uncolor -> safe recolor -> component brute force;
    returns the first candidate that completes to a proper k-coloring.
    Candidates are tried in order of fewest monochromatic edges. Hosts with
    d below ``min_degree`` or lambda2 >= 1/(16k^2) only trigger a warning."""
    params = params or RecoveryParams()
    k, d, g = inst.k, inst.d, inst.graph
    notes = []
    if d < min_degree:
        msg = f"host degree {d:g} < {min_degree:g}; the uncoloring threshold d/(6k) may be too small"
        warnings.warn(msg, HypothesisWarning, stacklevel=2)
        notes.append(msg)
    hs = host_spec if host_spec is not None else eig_sym(normalized_adjacency(inst.host))
    lam2 = hs.lambda2()
    if lam2 >= 1.0 / (16 * k * k):
        msg = f"host lambda2 = {lam2:.4g} >= 1/(16k^2) = {1 / (16 * k * k):.4g}; recovery guarantee does not apply"
        warnings.warn(msg, HypothesisWarning, stacklevel=2)
        notes.append(msg)
    cands = recover_partial_list(g, d, k, params)
    mono = [int(monochromatic_mask(g, p.chi).sum()) for p in cands.partitions]
    order = sorted(range(len(cands)), key=lambda i: (mono[i], i))
    diags = []
    for i in order:
        item = {"candidate": i, "monochromatic_edges": mono[i]}
        try:
            pc = uncolor(g, cands.partitions[i], d, k)
            item["free_after_uncolor"] = int(len(pc.free_set))
            pc = safe_recolor(g, pc, k)
            item["free_after_recolor"] = int(len(pc.free_set))
            part = finish_by_components(g, pc, k, size_limit)
        except (CompletionFailure, ImproperColoringError) as exc:
            item["failure"] = str(exc)
            diags.append(item)
            continue
        item["success"] = True
        diags.append(item)
        return FullRecoveryResult(part, i, diags, notes, lam2)
    raise RecoveryFailure(f"all {len(cands)} candidates failed", diags)


def statistically_bad(inst: PlantedInstance) -> np.ndarray:
    """Vertices with fewer than d/(2k) neighbours of some other planted color."""
    k = inst.k
    chi = inst.planted.chi
    counts = np.zeros((inst.graph.n, k))
    u, v = inst.graph.edges[:, 0], inst.graph.edges[:, 1]
    np.add.at(counts, (u, chi[v]), 1)
    np.add.at(counts, (v, chi[u]), 1)
    other = np.ones((inst.graph.n, k), dtype=bool)
    other[np.arange(inst.graph.n), chi] = False
    bad = np.any(other & (counts < inst.d / (2 * k)), axis=1)
    return np.flatnonzero(bad)


# ------------------------------------------------------- numerical concentration checks


def class_size_deviation(inst: PlantedInstance) -> float:
    """max_a | |chi^-1(a)| - n/k |."""
    return float(np.max(np.abs(inst.planted.class_sizes - inst.graph.n / inst.k)))


def planted_model_deviation(inst: PlantedInstance) -> float:
    """max over a != b of |M_ab - 1/(k-1)| for the host-degree normalization."""
    M = model_matrix(planted_matrix(inst.graph, inst.d, inst.k), inst.planted).entries
    off = ~np.eye(inst.k, dtype=bool)
    return float(np.max(np.abs(M[off] - 1.0 / (inst.k - 1))))


def planted_variance(inst: PlantedInstance) -> float:
    """Largest per-pair variance under the host-degree normalization."""
    return float(np.max(per_pair_variance(planted_matrix(inst.graph, inst.d, inst.k), inst.planted)))


def threshold_rank_after_planting(inst: PlantedInstance, r1: float, r2: float):
    """(measured, bound) for rank_{<= -(r1 + r2)}(G) <= k t1 + t2 where
    t1 = rank_{>= r1}(H), t2 = max(1, rank_{<= -r2}(H)), both matrices
    normalized by the host degree."""
    d = inst.d
    sh = eig_sym(inst.host.sparse.toarray() / d)
    sg = eig_sym(inst.graph.sparse.toarray() / d)
    t1 = threshold_rank(sh, r1, "top")
    t2 = max(1, threshold_rank(sh, r2, "bottom"))
    return threshold_rank(sg, r1 + r2, "bottom"), inst.k * t1 + t2


def edge_density_violations(h: Graph, lambda2: float, trials=1000, seed=0, max_size=None):
    """Count random S with |E(S)| > (d|S|/2)(|S|/n + lambda2) in a d-regular h."""
    rng = np.random.default_rng([int(seed), 41])
    d = float(h.degree.max())
    n = h.n
    max_size = max_size or n
    A = h.sparse
    worst = -np.inf
    violations = 0
    for _ in range(trials):
        s = int(rng.integers(1, max_size + 1))
        S = rng.choice(n, size=s, replace=False)
        mask = np.zeros(n)
        mask[S] = 1.0
        e = float(mask @ (A @ mask)) / 2
        bound = d * s / 2 * (s / n + lambda2)
        worst = max(worst, e - bound)
        violations += e > bound + 1e-9
    return violations, worst


def vertex_expansion_violations(h: Graph, lambda2: float, alpha: float, trials=1000, seed=0):
    """Count random S with |S| <= alpha n and |N(S) \\ S| < (1/(c + sqrt(alpha)) - 1)|S|, c = lambda2."""
    rng = np.random.default_rng([int(seed), 43])
    n = h.n
    cap = max(1, int(alpha * n))
    A = h.sparse
    factor = 1.0 / (lambda2 + math.sqrt(alpha)) - 1
    violations = 0
    worst = np.inf
    for _ in range(trials):
        s = int(rng.integers(1, cap + 1))
        S = rng.choice(n, size=s, replace=False)
        mask = np.zeros(n, dtype=bool)
        mask[S] = True
        nb = (A @ mask.astype(float)) > 0
        out = int(np.sum(nb & ~mask))
        worst = min(worst, out - factor * s)
        violations += out < factor * s - 1e-9
    return violations, worst
