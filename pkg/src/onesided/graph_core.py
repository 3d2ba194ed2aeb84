"""Graphs, partitions, model matrices and coloring-quality measurements."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

from . import kernels
from .errors import InputError, NotIndependentError, ParseError

REGULAR_TOL = 1e-9


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph on vertices 0..n-1.

    ``edges`` is an (m, 2) int array with u < v in lexicographic order and
    ``weights`` the matching positive weights. Use :meth:`from_edges` to build
    one from arbitrary input.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(w) != len(e):
            raise InputError("edges and weights differ in length")
        if len(e):
            if e.min() < 0 or e.max() >= self.n:
                raise InputError(f"edge endpoint outside 0..{self.n - 1}")
            if np.any(e[:, 0] >= e[:, 1]):
                bad = e[np.argmax(e[:, 0] >= e[:, 1])]
                if bad[0] == bad[1]:
                    raise InputError(f"self-loop at vertex {bad[0]}")
                raise InputError("edges must satisfy u < v")
            if not np.all(w > 0) or not np.all(np.isfinite(w)):
                raise InputError("edge weights must be finite and strictly positive")
            key = e[:, 0] * self.n + e[:, 1]
            if np.any(np.diff(key) <= 0):
                order = np.argsort(key, kind="stable")
                key, e, w = key[order], e[order], w[order]
                dup = np.flatnonzero(np.diff(key) == 0)
                if len(dup):
                    u, v = e[dup[0]]
                    raise InputError(f"duplicate edge ({u}, {v})")
        deg = np.bincount(e[:, 0], weights=w, minlength=self.n) + np.bincount(
            e[:, 1], weights=w, minlength=self.n
        )
        object.__setattr__(self, "edges", _frozen(e))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "degree", _frozen(deg.astype(np.float64)))

    @classmethod
    def from_edges(cls, n, edges, weights=None, merge_duplicates=False):
        """Build a graph from (u, v) pairs in any orientation.

        Duplicate pairs raise unless ``merge_duplicates`` is set, in which case
        their weights are summed.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=np.float64)
        if len(e) and np.any(e[:, 0] == e[:, 1]):
            raise InputError(f"self-loop at vertex {e[np.argmax(e[:, 0] == e[:, 1]), 0]}")
        lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
        key = lo * n + hi
        order = np.argsort(key, kind="stable")
        key, lo, hi, w = key[order], lo[order], hi[order], w[order]
        if merge_duplicates and len(key):
            uniq, start = np.unique(key, return_index=True)
            w = np.add.reduceat(w, start)
            lo, hi = lo[start], hi[start]
        return cls(int(n), np.column_stack([lo, hi]), w)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def is_regular(self) -> bool:
        if self.n == 0:
            return True
        lo, hi = self.degree.min(), self.degree.max()
        if lo <= 0:
            return hi <= 0
        return hi / lo <= 1 + REGULAR_TOL

    @property
    def is_unweighted(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency matrix (a fresh copy)."""
        a = np.zeros((self.n, self.n))
        u, v = self.edges[:, 0], self.edges[:, 1]
        a[u, v] = self.weights
        a[v, u] = self.weights
        return a

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        a = sp.coo_matrix(
            (np.concatenate([self.weights, self.weights]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n, self.n),
        )
        return a.tocsr()

    @cached_property
    def csr_arrays(self):
        """(indptr, indices) neighbour lists with sorted neighbours."""
        a = self.sparse
        a.sort_indices()
        return np.asarray(a.indptr, dtype=np.int64), np.asarray(a.indices, dtype=np.int64)

    def neighbors(self, x) -> np.ndarray:
        indptr, indices = self.csr_arrays
        return indices[indptr[x]:indptr[x + 1]]

    def subgraph_edges_mask(self, mask) -> np.ndarray:
        """Boolean mask over edges with both endpoints in ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        return mask[self.edges[:, 0]] & mask[self.edges[:, 1]]


@dataclass(frozen=True, eq=False)
class Partition:
    """Color assignment chi: [n] -> [k] (colors are 0-indexed)."""

    chi: np.ndarray
    k: int
    class_sizes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=np.int64).reshape(-1)
        k = int(self.k)
        if k < 1:
            raise InputError("a partition needs at least one color")
        if len(chi) and (chi.min() < 0 or chi.max() >= k):
            raise InputError(f"colors must lie in 0..{k - 1}")
        object.__setattr__(self, "chi", _frozen(chi))
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "class_sizes", _frozen(np.bincount(chi, minlength=k)))

    @classmethod
    def from_labels(cls, chi, k=None):
        chi = np.asarray(chi, dtype=np.int64)
        if k is None:
            k = int(chi.max()) + 1 if len(chi) else 1
        return cls(chi, k)

    @property
    def n(self) -> int:
        return len(self.chi)

    def Z(self) -> np.ndarray:
        z = np.zeros((self.n, self.k))
        z[np.arange(self.n), self.chi] = 1.0
        return z

    def B(self) -> np.ndarray:
        return np.diag(self.class_sizes.astype(np.float64))

    def classes(self):
        return [np.flatnonzero(self.chi == a) for a in range(self.k)]

    def canonical(self) -> "Partition":
        """Relabel colors by first occurrence (used for deduplication)."""
        order = {}
        out = np.empty_like(self.chi)
        for i, c in enumerate(self.chi.tolist()):
            if c not in order:
                order[c] = len(order)
            out[i] = order[c]
        return Partition(out, self.k)


@dataclass(frozen=True, eq=False)
class ModelMatrix:
    entries: np.ndarray
    stationary: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("model matrix must be square")
        object.__setattr__(self, "entries", _frozen(m))
        if self.stationary is not None:
            object.__setattr__(self, "stationary", _frozen(np.array(self.stationary, dtype=np.float64)))

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def is_stochastic(self, tol=1e-9) -> bool:
        return bool(np.all(self.entries >= -tol) and np.allclose(self.entries.sum(1), 1.0, atol=tol, rtol=0))

    def is_reversible(self, pi=None, tol=1e-9) -> bool:
        pi = self.stationary if pi is None else np.asarray(pi)
        if pi is None:
            raise InputError("reversibility needs a stationary vector")
        f = pi[:, None] * self.entries
        return bool(np.max(np.abs(f - f.T)) <= tol)

    def has_zero_diagonal(self, tol=1e-9) -> bool:
        return bool(np.all(np.abs(np.diag(self.entries)) <= tol))

    def validate(self, stochastic=True, coloring=True, tol=1e-9):
        if stochastic and not self.is_stochastic(tol):
            raise InputError("model matrix is not row-stochastic")
        if coloring and not self.has_zero_diagonal(tol):
            raise InputError("coloring model must have zero diagonal")
        if self.stationary is not None and not self.is_reversible(tol=tol):
            raise InputError("model matrix is not reversible with respect to its stationary vector")
        return self


@dataclass
class ColoringQuality:
    delta_vertex_cover: float
    delta_vertex_cover_degree: float
    model: np.ndarray
    per_pair_variance: np.ndarray
    model_distance: Optional[float] = None
    monochromatic_edges: int = 0


# ---------------------------------------------------------------- text formats


def parse_edge_list(text: str, merge_duplicates=False) -> Graph:
    """Parse the ``u v [w]`` edge-list format.

    A ``# n=<count>`` comment fixes the vertex count (otherwise max id + 1).
    """
    n_header = None
    seen = {}
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].replace(" ", "")
            if body.startswith("n="):
                try:
                    n_header = int(body[2:])
                except ValueError:
                    raise ParseError(f"bad vertex-count header {raw!r}", lineno) from None
            continue
        if not line:
            continue
        parts = line.split("#", 1)[0].split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'u v' or 'u v w', got {raw!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"cannot parse {raw!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError(f"negative vertex id in {raw!r}", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        if not (w > 0) or not math.isfinite(w):
            raise ParseError(f"non-positive weight {parts[2]}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            if not merge_duplicates:
                raise ParseError(f"duplicate edge {key} (first seen on line {seen[key][0]})", lineno)
            ws[seen[key][1]] += w
            continue
        seen[key] = (lineno, len(us))
        us.append(key[0])
        vs.append(key[1])
        ws.append(w)
    n = max(us + vs, default=-1) + 1
    if n_header is not None:
        if n_header < n:
            raise ParseError(f"header n={n_header} smaller than max vertex id + 1 = {n}")
        n = n_header
    return Graph.from_edges(n, np.column_stack([us, vs]) if us else np.zeros((0, 2)), np.array(ws))


def load_graph(path, merge_duplicates=False) -> Graph:
    return parse_edge_list(Path(path).read_text(), merge_duplicates=merge_duplicates)


def format_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n}"]
    for (u, v), w in zip(g.edges.tolist(), g.weights.tolist()):
        lines.append(f"{u} {v}" if w == 1.0 else f"{u} {v} {w!r}")
    return "\n".join(lines) + "\n"


def save_graph(g: Graph, path):
    Path(path).write_text(format_edge_list(g))


def parse_partition(text: str, n=None) -> Partition:
    """Parse ``vertex color`` lines; ``# k=<count>`` fixes the color count."""
    k_header = None
    colors = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].replace(" ", "")
            if body.startswith("k="):
                try:
                    k_header = int(body[2:])
                except ValueError:
                    raise ParseError(f"bad color-count header {raw!r}", lineno) from None
            continue
        if not line:
            continue
        parts = line.split("#", 1)[0].split()
        if len(parts) != 2:
            raise ParseError(f"expected 'vertex color', got {raw!r}", lineno)
        try:
            x, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"cannot parse {raw!r}", lineno) from None
        if x < 0 or c < 0:
            raise ParseError(f"negative id in {raw!r}", lineno)
        if x in colors:
            raise ParseError(f"vertex {x} colored twice", lineno)
        colors[x] = c
    size = max(colors, default=-1) + 1 if n is None else n
    missing = [x for x in range(size) if x not in colors]
    if missing:
        raise ParseError(f"vertex {missing[0]} has no color")
    if len(colors) != size:
        raise ParseError(f"partition mentions vertices outside 0..{size - 1}")
    chi = np.array([colors[x] for x in range(size)], dtype=np.int64)
    k = max(int(chi.max()) + 1 if size else 1, k_header or 0)
    return Partition(chi, k)


def load_partition(path, n=None) -> Partition:
    return parse_partition(Path(path).read_text(), n=n)


def format_partition(p: Partition) -> str:
    return "\n".join([f"# k={p.k}"] + [f"{x} {c}" for x, c in enumerate(p.chi.tolist())]) + "\n"


def save_partition(p: Partition, path):
    Path(path).write_text(format_partition(p))


# ------------------------------------------------------------------ matrices


def normalized_adjacency(g: Graph, sparse=False):
    """D^{-1/2} A D^{-1/2}; rejects isolated vertices."""
    if g.n and g.degree.min() <= 0:
        raise InputError(f"vertex {int(np.argmin(g.degree))} is isolated (degree 0)")
    s = 1.0 / np.sqrt(g.degree)
    if sparse:
        d = sp.diags(s)
        return (d @ g.sparse @ d).tocsr()
    a = g.adjacency()
    a *= s[:, None]
    a *= s[None, :]
    return a


def class_degrees(mat, p: Partition) -> np.ndarray:
    """n x k matrix D with D[x, b] = sum over y in class b of mat[x, y]."""
    z = sp.csr_matrix((np.ones(p.n), (np.arange(p.n), p.chi)), shape=(p.n, p.k))
    out = mat @ z
    return np.asarray(out.todense() if sp.issparse(out) else out)


def _check_nonempty(p: Partition):
    empty = np.flatnonzero(p.class_sizes == 0)
    if len(empty):
        raise InputError(f"color class {int(empty[0])} is empty")


def model_matrix(mat, p: Partition) -> ModelMatrix:
    """M(mat, chi) = B^{-1} Z^T mat Z."""
    if mat.shape[0] != p.n:
        raise InputError(f"matrix has {mat.shape[0]} rows but partition covers {p.n} vertices")
    _check_nonempty(p)
    z = p.Z()
    ztaz = z.T @ np.asarray(class_degrees(mat, p))
    return ModelMatrix(ztaz / p.class_sizes[:, None])


def per_pair_variance(mat, p: Partition) -> np.ndarray:
    """var[a, b] = mean over x in class a of (D_x^b - mean_a D^b)^2."""
    _check_nonempty(p)
    d = class_degrees(mat, p)
    var = np.zeros((p.k, p.k))
    for a, idx in enumerate(p.classes()):
        block = d[idx]
        var[a] = ((block - block.mean(axis=0)) ** 2).mean(axis=0)
    return var


def indicator_residuals(mat, p: Partition) -> np.ndarray:
    """Per class a: || mat z_a - W z_a ||^2 with z_a the unit class indicator
    and W = Z M B^{-1} Z^T the block model matrix."""
    _check_nonempty(p)
    d = class_degrees(mat, p)
    m = model_matrix(mat, p).entries
    out = np.zeros(p.k)
    for a in range(p.k):
        resid = d[:, a] - m[p.chi, a]
        out[a] = float(resid @ resid) / p.class_sizes[a]
    return out


def monochromatic_mask(g: Graph, chi) -> np.ndarray:
    chi = np.asarray(chi)
    return chi[g.edges[:, 0]] == chi[g.edges[:, 1]]


def matching_cover_of_edges(g: Graph, edge_mask) -> np.ndarray:
    """Vertex mask of a greedy maximal matching over the selected edges,
    scanned in the graph's (sorted) edge order."""
    e = g.edges[np.asarray(edge_mask, dtype=bool)]
    return kernels.matching_cover(e[:, 0], e[:, 1], g.n)


def coloring_quality(g: Graph, p: Partition, M_target=None, mat=None) -> ColoringQuality:
    """Monochromatic cover fraction, measured model and per-pair variances.

    ``mat`` defaults to the normalized adjacency of ``g``. The cover fraction
    is reported both in the uniform and the degree-weighted vertex measure.
    """
    if p.n != g.n:
        raise InputError(f"partition covers {p.n} vertices, graph has {g.n}")
    mono = monochromatic_mask(g, p.chi)
    cover = matching_cover_of_edges(g, mono)
    total_deg = g.degree.sum()
    if mat is None:
        mat = normalized_adjacency(g, sparse=True)
    live = Partition.from_labels(p.chi, p.k)
    nonempty = np.flatnonzero(live.class_sizes > 0)
    if len(nonempty) < p.k:
        # measure on the nonempty classes only and embed back
        remap = -np.ones(p.k, dtype=np.int64)
        remap[nonempty] = np.arange(len(nonempty))
        sub = Partition(remap[p.chi], len(nonempty))
        model = np.full((p.k, p.k), np.nan)
        var = np.full((p.k, p.k), np.nan)
        model[np.ix_(nonempty, nonempty)] = model_matrix(mat, sub).entries
        var[np.ix_(nonempty, nonempty)] = per_pair_variance(mat, sub)
    else:
        model = model_matrix(mat, p).entries
        var = per_pair_variance(mat, p)
    dist = None
    if M_target is not None:
        target = M_target.entries if isinstance(M_target, ModelMatrix) else np.asarray(M_target)
        dist = float(np.nanmax(np.abs(target - model)))
    return ColoringQuality(
        delta_vertex_cover=float(cover.sum()) / g.n if g.n else 0.0,
        delta_vertex_cover_degree=float(g.degree[cover].sum() / total_deg) if total_deg > 0 else 0.0,
        model=model,
        per_pair_variance=var,
        model_distance=dist,
        monochromatic_edges=int(mono.sum()),
    )


def check_k_delta_coloring(g: Graph, sets) -> float:
    """Return delta = 1 - (covered vertices)/n for disjoint independent sets."""
    owner = -np.ones(g.n, dtype=np.int64)
    for i, s in enumerate(sets):
        s = np.asarray(list(s), dtype=np.int64)
        if len(s) and (s.min() < 0 or s.max() >= g.n):
            raise InputError(f"set {i} contains a vertex outside the graph")
        clash = s[owner[s] >= 0]
        if len(clash) or len(np.unique(s)) != len(s):
            x = int(clash[0]) if len(clash) else int(s[np.argmax(np.bincount(s) > 1)])
            raise InputError(f"sets overlap at vertex {x}")
        owner[s] = i
    u, v = g.edges[:, 0], g.edges[:, 1]
    bad = np.flatnonzero((owner[u] >= 0) & (owner[u] == owner[v]))
    if len(bad):
        w = (int(u[bad[0]]), int(v[bad[0]]))
        raise NotIndependentError(f"set {int(owner[w[0]])} is not independent: edge {w}", w)
    return 1.0 - float((owner >= 0).sum()) / g.n


def is_proper(g: Graph, labels) -> bool:
    """True if no edge joins two vertices with the same non-negative label."""
    labels = np.asarray(labels)
    a, b = labels[g.edges[:, 0]], labels[g.edges[:, 1]]
    return not bool(np.any((a >= 0) & (a == b)))


def _labels_of(obj, n):
    if isinstance(obj, Partition):
        return obj.chi, obj.k
    if hasattr(obj, "independent_sets"):
        lab = -np.ones(n, dtype=np.int64)
        for i, s in enumerate(obj.independent_sets):
            lab[np.asarray(list(s), dtype=np.int64)] = i
        return lab, max(1, len(obj.independent_sets))
    lab = np.asarray(obj, dtype=np.int64)
    return lab, int(lab.max()) + 1 if len(lab) and lab.max() >= 0 else 1


def permutation_match(chi, chi_hat):
    """Best relabeling of ``chi_hat`` onto ``chi``.

    Returns (perm, agreement) where perm[b] is the reference color assigned to
    estimated color b and agreement is the matched fraction of vertices
    (uncovered / FREE vertices count as mismatches). Exhaustive over
    permutations for up to 8 colors, an optimal assignment solver above.
    """
    ref, k_ref = _labels_of(chi, None)
    n = len(ref)
    est, k_est = _labels_of(chi_hat, n)
    if len(est) != n:
        raise InputError(f"size mismatch: {n} vs {len(est)}")
    size = max(k_ref, k_est)
    conf = np.zeros((size, size), dtype=np.int64)
    ok = est >= 0
    np.add.at(conf, (est[ok], ref[ok]), 1)
    if size <= 8:
        best, best_perm = -1, None
        cols = np.arange(size)
        for perm in itertools.permutations(range(size)):
            val = int(conf[cols, perm].sum())
            if val > best:
                best, best_perm = val, perm
        perm = list(best_perm)
    else:
        rows, cols = linear_sum_assignment(-conf)
        perm = [0] * size
        for r, c in zip(rows, cols):
            perm[r] = int(c)
        best = int(conf[rows, cols].sum())
    return perm[:k_est], best / n if n else 1.0
