"""Instance generators: random regular and biregular graphs, block models
realizing a target model matrix, and the blow-up / low-lambda3 constructions."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AlgorithmFailure, InputError
from .graph_core import Graph, ModelMatrix, Partition, coloring_quality, normalized_adjacency
from .spectral import eig_sym

SWITCH_TRIES = 400


# ------------------------------------------------------------ pairing core


def _switch_repair(bad, good, edges, forbidden, rng, bipartite):
    """Fix rejected stub pairs by double-edge switches with random good edges."""
    for u, v in bad:
        for _ in range(SWITCH_TRIES):
            if not good:
                return False
            j = int(rng.integers(len(good)))
            x, y = good[j]
            if not bipartite and rng.random() < 0.5:
                x, y = y, x
            if bipartite:
                e1, e2 = (u, y), (x, v)
                if e1 == e2 or e1 in edges or e2 in edges:
                    continue
            else:
                if u == y or v == x:
                    continue
                e1 = (u, y) if u < y else (y, u)
                e2 = (x, v) if x < v else (v, x)
                if e1 == e2 or e1 in edges or e2 in edges:
                    continue
                if forbidden is not None and (e1 in forbidden or e2 in forbidden):
                    continue
            old = good[j] if bipartite else (min(good[j]), max(good[j]))
            edges.discard(old)
            good[j] = e1
            good.append(e2)
            edges.add(e1)
            edges.add(e2)
            break
        else:
            return False
    return True


def random_graph_with_degrees(deg, rng, forbidden=None, restarts=50) -> np.ndarray:
    """Simple graph with the given degree sequence (configuration pairing plus
    switch repair). Returns an (m, 2) edge array with u < v."""
    deg = np.asarray(deg, dtype=np.int64)
    if deg.sum() % 2:
        raise InputError("degree sum must be even")
    n = len(deg)
    if np.any(deg < 0) or (n and deg.max() >= n):
        raise InputError("infeasible degree sequence")
    for _ in range(restarts):
        stubs = np.repeat(np.arange(n), deg)
        rng.shuffle(stubs)
        edges, good, bad = set(), [], []
        for u, v in stubs.reshape(-1, 2).tolist():
            key = (u, v) if u < v else (v, u)
            if u == v or key in edges or (forbidden is not None and key in forbidden):
                bad.append((u, v))
            else:
                edges.add(key)
                good.append(key)
        if _switch_repair(bad, good, edges, forbidden, rng, bipartite=False):
            return np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    raise AlgorithmFailure("could not realize the degree sequence within the retry budget")


def random_bipartite_with_degrees(deg_a, deg_b, rng, restarts=50) -> np.ndarray:
    """Simple bipartite graph with side degrees deg_a, deg_b; returns (a, b)
    pairs in local indices. Dense blocks are built as complements."""
    deg_a = np.asarray(deg_a, dtype=np.int64)
    deg_b = np.asarray(deg_b, dtype=np.int64)
    na, nb = len(deg_a), len(deg_b)
    if deg_a.sum() != deg_b.sum():
        raise InputError("bipartite degree sums differ")
    if (na and deg_a.max() > nb) or (nb and deg_b.max() > na) or np.any(deg_a < 0) or np.any(deg_b < 0):
        raise InputError("infeasible bipartite degrees")
    if na and nb and deg_a.sum() > na * nb / 2:
        comp = random_bipartite_with_degrees(nb - deg_a, na - deg_b, rng, restarts)
        full = np.ones((na, nb), dtype=bool)
        if len(comp):
            full[comp[:, 0], comp[:, 1]] = False
        return np.argwhere(full).astype(np.int64)
    for _ in range(restarts):
        sa = np.repeat(np.arange(na), deg_a)
        sb = np.repeat(np.arange(nb), deg_b)
        rng.shuffle(sb)
        edges, good, bad = set(), [], []
        for pair in zip(sa.tolist(), sb.tolist()):
            if pair in edges:
                bad.append(pair)
            else:
                edges.add(pair)
                good.append(pair)
        if _switch_repair(bad, good, edges, None, rng, bipartite=True):
            return np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    raise AlgorithmFailure("could not realize the bipartite degrees within the retry budget")


def spread_degrees(total, size, rng):
    """``size`` integers differing by at most one, summing to ``total``, with
    the larger values on a random subset."""
    base, extra = divmod(int(total), int(size))
    deg = np.full(size, base, dtype=np.int64)
    deg[rng.permutation(size)[:extra]] += 1
    return deg


# -------------------------------------------------------------- simple graphs


def lambda2_of(g: Graph) -> float:
    return eig_sym(normalized_adjacency(g)).lambda2()


def random_regular(n, d, seed=0, max_lambda2=None, retries=20) -> Graph:
    """Random simple d-regular graph; with ``max_lambda2`` set, regenerate
    (sub-seeds 0, 1, ...) until lambda2 of the normalized adjacency is below it."""
    if n * d % 2:
        raise InputError(f"n*d = {n * d} is odd")
    if not 0 <= d < n:
        raise InputError(f"need 0 <= d < n, got d={d}, n={n}")
    for attempt in range(retries):
        rng = np.random.default_rng([int(seed), 101, attempt])
        if d > (n - 1) / 2:
            comp = random_graph_with_degrees(np.full(n, n - 1 - d), rng)
            full = np.triu(np.ones((n, n), dtype=bool), 1)
            if len(comp):
                full[comp[:, 0], comp[:, 1]] = False
            edges = np.argwhere(full)
        else:
            edges = random_graph_with_degrees(np.full(n, d), rng)
        g = Graph.from_edges(n, edges)
        if max_lambda2 is None or lambda2_of(g) <= max_lambda2:
            return g
    raise AlgorithmFailure(f"no {d}-regular graph with lambda2 <= {max_lambda2} in {retries} attempts")


def erdos_renyi(n, p, seed=0) -> Graph:
    rng = np.random.default_rng([int(seed), 103])
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < p
    return Graph.from_edges(n, np.column_stack([iu[0][keep], iu[1][keep]]))


def cycle(n) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_multipartite(sizes) -> Graph:
    lab = np.repeat(np.arange(len(sizes)), sizes)
    n = len(lab)
    iu = np.triu_indices(n, 1)
    keep = lab[iu[0]] != lab[iu[1]]
    return Graph.from_edges(n, np.column_stack([iu[0][keep], iu[1][keep]]))


def complete_bipartite(a, b) -> Graph:
    return complete_multipartite([a, b])


def disjoint_union(*graphs) -> Graph:
    edges, weights, off = [], [], 0
    for g in graphs:
        edges.append(g.edges + off)
        weights.append(g.weights)
        off += g.n
    return Graph(off, np.vstack(edges) if edges else np.zeros((0, 2)), np.concatenate(weights) if weights else np.zeros(0))


# ---------------------------------------------------------------- biregular


def biregular_random(n1, n2, d1, seed=0, check=True, retries=20) -> Graph:
    """Random simple bipartite graph, degree d1 on the first n1 vertices and
    d2 = n1 d1 / n2 on the last n2; with ``check`` set, regenerated until
    lambda2 <= 2/sqrt(min(d1, d2)) + 0.1."""
    if (n1 * d1) % n2:
        raise InputError(f"n1*d1 = {n1 * d1} is not divisible by n2 = {n2}")
    d2 = n1 * d1 // n2
    if d1 > n2 or d2 > n1:
        raise InputError("degrees exceed the opposite side")
    limit = 2 / math.sqrt(min(d1, d2)) + 0.1 if min(d1, d2) > 0 else math.inf
    for attempt in range(retries):
        rng = np.random.default_rng([int(seed), 107, attempt])
        pairs = random_bipartite_with_degrees(np.full(n1, d1), np.full(n2, d2), rng)
        g = Graph.from_edges(n1 + n2, np.column_stack([pairs[:, 0], pairs[:, 1] + n1]))
        if not check or lambda2_of(g) <= limit:
            return g
    raise AlgorithmFailure(f"spectral check failed {retries} times (limit {limit:.4g})")


# -------------------------------------------------------------- block models


def largest_remainder(weights, total) -> np.ndarray:
    """Integers proportional to ``weights`` summing to ``total`` (ties to lower index)."""
    w = np.asarray(weights, dtype=np.float64)
    raw = w / w.sum() * total
    out = np.floor(raw).astype(np.int64)
    rem = int(total - out.sum())
    order = np.argsort(-(raw - out), kind="stable")
    out[order[:rem]] += 1
    return out


def _endpoint_counts(sizes, M, d):
    """Symmetric integer matrix T (T_aa = twice the internal edges) with
    T_ab close to n_a d M_ab and row sums n_a d where reachable."""
    k = len(sizes)
    T = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        for b in range(a + 1, k):
            if M[a, b] > 0 or M[b, a] > 0:
                T[a, b] = T[b, a] = int(round((sizes[a] * d * M[a, b] + sizes[b] * d * M[b, a]) / 2))
        if M[a, a] > 0:
            T[a, a] = 2 * int(round(sizes[a] * d * M[a, a] / 2))
    allowed = (M > 0) | (M.T > 0)
    target = sizes * d
    for _ in range(10 * k * k + 100):
        r = target - T.sum(axis=1)
        if not r.any():
            break
        moved = False
        for a in range(k):
            if r[a] and allowed[a, a] and r[a] % 2 == 0 and T[a, a] + r[a] >= 0:
                T[a, a] += r[a]
                moved = True
                break
        if moved:
            continue
        pos, neg = np.flatnonzero(r > 0), np.flatnonzero(r < 0)
        for a in pos:
            for b in pos:
                if a < b and allowed[a, b]:
                    T[a, b] += 1
                    T[b, a] += 1
                    moved = True
                    break
            if moved:
                break
        if moved:
            continue
        for a in neg:
            for b in neg:
                if a < b and T[a, b] > 0:
                    T[a, b] -= 1
                    T[b, a] -= 1
                    moved = True
                    break
            if moved:
                break
        if moved:
            continue
        for a in pos:
            for b in neg:
                for c in range(k):
                    if c not in (a, b) and allowed[a, c] and T[b, c] > 0:
                        T[a, c] += 1
                        T[c, a] += 1
                        T[b, c] -= 1
                        T[c, b] -= 1
                        moved = True
                        break
                if moved:
                    break
            if moved:
                break
        if not moved:
            break
    return T


def _cyclic_allocation(T_row, size, rng):
    """Per-vertex stub counts towards each class: floor(T/size) plus a cyclic
    layout of the remainders so every vertex total differs by at most one."""
    k = len(T_row)
    base = T_row // size
    rem = T_row - base * size
    deg = np.tile(base, (size, 1))
    labels = np.repeat(np.arange(k), rem)
    perm = rng.permutation(size)
    for pos, b in enumerate(labels.tolist()):
        deg[perm[pos % size], b] += 1
    return deg


@dataclass
class SBMInstance:
    graph: Graph
    partition: Partition
    model: ModelMatrix
    class_sizes: np.ndarray
    model_distance: float
    endpoint_counts: np.ndarray


def sbm_from_model(M, n, d, seed=0, allow_diagonal=False) -> SBMInstance:
    """Block graph whose class sizes follow the stationary vector of M and
    whose cross-class degrees follow d*M_ab; blocks are random near-biregular
    bipartite graphs, so the result is exactly d-regular whenever the
    endpoint counts admit it."""
    from .coloring import stationary_distribution

    Mm = M if isinstance(M, ModelMatrix) else ModelMatrix(M)
    m = Mm.entries
    if not allow_diagonal and not Mm.has_zero_diagonal():
        raise InputError("coloring model must have zero diagonal")
    pi = stationary_distribution(m)
    sizes = largest_remainder(pi, n)
    if np.any(sizes == 0):
        raise InputError("a class would be empty; increase n")
    rng = np.random.default_rng([int(seed), 109])
    T = _endpoint_counts(sizes, m, d)
    k = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    alloc = [_cyclic_allocation(T[a], sizes[a], rng) for a in range(k)]
    edges = []
    for a in range(k):
        for b in range(a, k):
            if T[a, b] == 0:
                continue
            if a == b:
                local = random_graph_with_degrees(alloc[a][:, a], rng)
                edges.append(local + offsets[a])
            else:
                pairs = random_bipartite_with_degrees(alloc[a][:, b], alloc[b][:, a], rng)
                edges.append(np.column_stack([pairs[:, 0] + offsets[a], pairs[:, 1] + offsets[b]]))
    g = Graph.from_edges(n, np.vstack(edges) if edges else np.zeros((0, 2)))
    part = Partition(np.repeat(np.arange(k), sizes), k)
    q = coloring_quality(g, part, ModelMatrix(m))
    return SBMInstance(g, part, ModelMatrix(m, stationary=pi), sizes, float(q.model_distance), T)


def planted_independent_set(n, d, gamma, seed=0):
    """d-regular graph on n vertices whose first round((1/2 - gamma) n)
    vertices form an independent set; every edge of the set goes to the
    rest, which is padded with a random regular graph. Returns (graph, set)."""
    s = int(round((0.5 - gamma) * n))
    rest = n - s
    cross = s * d / rest
    if cross != int(cross) or cross > d:
        raise InputError(f"need s*d/(n-s) integral and <= d; got {cross} (pick d accordingly)")
    cross = int(cross)
    M = np.array([[0.0, 1.0], [cross / d, 1 - cross / d]])
    inst = sbm_from_model(M, n, d, seed=seed, allow_diagonal=True)
    if not np.array_equal(inst.class_sizes, [s, rest]):
        raise InputError("class sizes do not match the requested split")
    return inst.graph, np.arange(s)


# ------------------------------------------------------------- blow-ups


@dataclass
class BlowupInstance:
    graph: Graph
    groups: list
    r: np.ndarray
    pi: np.ndarray
    pi_hat: np.ndarray
    M_hat: np.ndarray
    group_sizes: np.ndarray
    embedding: list
    lambda2: float
    max_degree_ratio: float
    coloring: Optional[Partition] = None
    notes: list = field(default_factory=list)


def choose_even_weights(pi, groups, tol, max_total=400):
    """Smallest even-integer vector r (entries >= 2) with ||r/sum r - pi||_inf
    <= tol and the same argmax in each group; otherwise the closest found."""
    pi = np.asarray(pi)
    best = None
    for half_total in range(len(pi), max_total // 2 + 1):
        r = 2 * largest_remainder(pi, half_total)
        if np.any(r == 0):
            continue
        pi_hat = r / r.sum()
        err = float(np.max(np.abs(pi_hat - pi)))
        same = all(max(g, key=lambda a: (pi[a], -a)) == max(g, key=lambda a: (r[a], -a)) for g in groups)
        if same and (best is None or err < best[1]):
            best = (r, err)
        if same and err <= tol:
            return r, err, True
    if best is None:
        raise InputError("no even weight vector preserves the group maxima")
    return best[0], best[1], False


def blowup_instance(M, base: Graph, eps=0.1, seed=0, gamma=None, degree=None, row_tol=1e-9,
                    max_degree_ratio=None, base_sets=None) -> BlowupInstance:
    """Embed copies of ``base`` (2n vertices) into a block structure that
    realizes the model M with repeated-row groups.

    For each group S_i with heaviest class a*: if r_{a*} <= sum of the other
    r_a, use (sum of r_a)/2 copies of base; otherwise use (sum of the other
    r_a) copies plus (r_{a*} - others) n isolated vertices. Between groups i
    and j a random near-biregular graph gives each vertex of group i about
    ``degree`` * sum_{b in S_j} M_hat[f(i), b] neighbours in group j, with
    M_hat[a, b] = (pi_hat_b / pi_b) M[a, b]. ``degree`` defaults to n.
    With ``base_sets`` = two disjoint independent sets of base, the
    constructed coloring witness is returned too.
    """
    from .coloring import group_rows, stationary_distribution

    m = M.entries if isinstance(M, ModelMatrix) else np.asarray(M, dtype=np.float64)
    k = m.shape[0]
    if base.n % 2:
        raise InputError("base graph must have an even number of vertices")
    half = base.n // 2
    degree = half if degree is None else int(degree)
    pi = stationary_distribution(m)
    groups = group_rows(m, row_tol)
    gamma = eps if gamma is None else gamma
    tol = min(gamma / (2 * k), eps / 2 * pi.min())
    r, err, ok = choose_even_weights(pi, groups, tol)
    notes = [] if ok else [f"closest even weights miss the tolerance: {err:.4g} > {tol:.4g}"]
    pi_hat = r / r.sum()
    M_hat = m * (pi_hat / pi)[None, :]
    rng = np.random.default_rng([int(seed), 113])

    blocks, embedding, color_parts = [], [], []
    group_sizes, offsets = [], []
    cursor = 0
    for gi, g in enumerate(groups):
        star = max(g, key=lambda a: (pi[a], -a))
        others = [a for a in g if a != star]
        r_star, r_oth = int(r[star]), int(sum(r[a] for a in others))
        if r_star <= r_oth:
            copies, isolated = (r_star + r_oth) // 2, 0
        else:
            copies, isolated = r_oth, (r_star - r_oth) * half
        size = copies * base.n + isolated
        assert size == half * (r_star + r_oth)
        offsets.append(cursor)
        group_sizes.append(size)
        for c in range(copies):
            off = cursor + c * base.n
            blocks.append(base.edges + off)
            embedding.append({"group": gi, "copy": c, "offset": off})
        if base_sets is not None:
            color_parts.append(_group_colors(g, star, others, r, copies, isolated, base, base_sets))
        cursor += size
    group_sizes = np.array(group_sizes, dtype=np.int64)
    reps = [max(g, key=lambda a: (pi[a], -a)) for g in groups]
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            w_ij = float(sum(M_hat[reps[i], b] for b in groups[j]))
            w_ji = float(sum(M_hat[reps[j], a] for a in groups[i]))
            if w_ij <= 0 and w_ji <= 0:
                continue
            total = int(round((group_sizes[i] * degree * w_ij + group_sizes[j] * degree * w_ji) / 2))
            total = min(total, int(group_sizes[i] * group_sizes[j]))
            da = spread_degrees(total, group_sizes[i], rng)
            db = spread_degrees(total, group_sizes[j], rng)
            pairs = random_bipartite_with_degrees(da, db, rng)
            blocks.append(np.column_stack([pairs[:, 0] + offsets[i], pairs[:, 1] + offsets[j]]))
    n_total = int(group_sizes.sum())
    graph = Graph.from_edges(n_total, np.vstack(blocks) if blocks else np.zeros((0, 2)))
    inner = np.zeros(n_total)
    for b in blocks[:len(embedding)]:
        np.add.at(inner, b[:, 0], 1)
        np.add.at(inner, b[:, 1], 1)
    ratio = float(inner.max() / graph.degree.min()) if graph.degree.min() > 0 else math.inf
    if max_degree_ratio is not None and ratio > max_degree_ratio:
        raise InputError(f"base-copy degree ratio {ratio:.4g} exceeds {max_degree_ratio}")
    lam2 = lambda2_of(graph) if graph.degree.min() > 0 else float("nan")
    coloring = None
    if base_sets is not None:
        coloring = Partition(np.concatenate(color_parts), k)
    return BlowupInstance(graph, groups, r, pi, pi_hat, M_hat, group_sizes, embedding, lam2, ratio, coloring, notes)


def _group_colors(g, star, others, r, copies, isolated, base, base_sets):
    """Witness colors for one group: the two independent sets of every copy
    get different colors, isolated padding takes the heaviest color."""
    I1, I2 = (np.asarray(s, dtype=np.int64) for s in base_sets)
    if copies and (r[star] <= sum(r[a] for a in others)):
        halves = np.concatenate([np.full(int(r[a]), a) for a in [star] + others])
        first, second = halves[:copies], halves[copies:]
    else:
        first = np.full(copies, star)
        second = np.concatenate([np.full(int(r[a]), a) for a in others]) if others else np.zeros(0, dtype=np.int64)
    out = []
    for c in range(copies):
        col = np.full(base.n, int(first[c]))
        col[I2] = int(second[c])
        col[I1] = int(first[c])
        out.append(col)
    out.append(np.full(isolated, star))
    return np.concatenate(out).astype(np.int64)


@dataclass
class Lambda3Instance:
    graph: Graph
    s: int
    base_n: int
    extra_base_edges: int
    tripartite_sides: tuple
    lambda3: float
    regular_degree: int


def lambda3_size(n, d_avg) -> int:
    """floor((n + sqrt(n (n - 4 d_avg))) / 2), lowered by one when s (n - s)
    is odd so the degree correction has even total."""
    disc = n * (n - 4 * d_avg)
    if disc < 0:
        raise InputError(f"average degree {d_avg} too large for n = {n}")
    s = int(math.floor((n + math.sqrt(disc)) / 2 + 1e-12))
    if (s * (n - s)) % 2:
        s -= 1
    return s


def lambda3_instance(base: Graph, seed=0, eps=0.05) -> Lambda3Instance:
    """Make ``base`` part of an exactly |S|-regular graph: add an independent
    set S, join it completely to V(base) minus a degree-correcting bipartite
    graph H', and add a disjoint |S|-regular tripartite graph with sides
    |S|, |S|, (1/2 - eps) n.

    Rounding policy: |S| = floor of the exact root (see :func:`lambda3_size`);
    the surplus s(n - s) - 2|E| is absorbed by a sparse random graph added
    on V(base), and H' then has degree d(x) + extra(x) on V(base) and exactly
    n - s on S.
    """
    n = base.n
    two_e = int(round(base.degree.sum()))
    d_avg = two_e / n
    s = lambda3_size(n, d_avg)
    surplus = s * (n - s) - two_e
    if surplus < 0:
        raise InputError("rounded |S| leaves a negative degree surplus")
    rng = np.random.default_rng([int(seed), 127])
    extra_deg = spread_degrees(surplus, n, rng)
    forbidden = set(map(tuple, base.edges.tolist()))
    extra = random_graph_with_degrees(extra_deg, rng, forbidden=forbidden) if surplus else np.zeros((0, 2), dtype=np.int64)
    base_deg = np.rint(base.degree).astype(np.int64) + extra_deg
    if base_deg.max() > s:
        raise InputError("a base vertex has degree above |S|; base is too dense")
    hprime = random_bipartite_with_degrees(base_deg, np.full(s, n - s), rng)
    full = np.ones((n, s), dtype=bool)
    if len(hprime):
        full[hprime[:, 0], hprime[:, 1]] = False
    cross = np.argwhere(full)
    edges = [base.edges, extra, np.column_stack([cross[:, 0], cross[:, 1] + n])]
    # tripartite part, sides s, s, m3 (m3 even)
    m3 = 2 * int(round((0.5 - eps) * n / 2))
    off = n + s
    o1, o2, o3 = off, off + s, off + 2 * s
    d12 = s - m3 // 2
    if d12 < 0:
        raise InputError("tripartite side too large for |S|")
    p12 = random_bipartite_with_degrees(np.full(s, d12), np.full(s, d12), rng)
    half_lo, half_hi = s // 2, s - s // 2
    to1 = np.where(np.arange(m3) % 2 == 0, half_hi, half_lo)
    to2 = s - to1
    p13 = random_bipartite_with_degrees(np.full(s, m3 // 2), to1, rng)
    p23 = random_bipartite_with_degrees(np.full(s, m3 // 2), to2, rng)
    edges += [
        np.column_stack([p12[:, 0] + o1, p12[:, 1] + o2]),
        np.column_stack([p13[:, 0] + o1, p13[:, 1] + o3]),
        np.column_stack([p23[:, 0] + o2, p23[:, 1] + o3]),
    ]
    total = o3 + m3
    g = Graph.from_edges(total, np.vstack([e for e in edges if len(e)]))
    if not (g.degree.min() == s and g.degree.max() == s):
        raise AlgorithmFailure(f"construction is not {s}-regular (degrees {g.degree.min()}..{g.degree.max()})")
    lam = eig_sym(normalized_adjacency(g)).eigenvalues
    return Lambda3Instance(g, s, n, int(len(extra)), (s, s, m3), float(lam[2]), s)


# ----------------------------------------------------------- generator specs


@dataclass
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    KINDS = ("regular", "sbm", "biregular", "blowup", "lambda3", "er", "indset")

    def validate(self):
        p = self.params
        if self.kind not in self.KINDS:
            raise InputError(f"unknown generator kind {self.kind!r}")
        need = {
            "regular": ("n", "d"), "sbm": ("M", "n", "d"), "biregular": ("n1", "n2", "d1"),
            "blowup": ("M", "base"), "lambda3": ("base",), "er": ("n", "p"), "indset": ("n", "d", "gamma"),
        }[self.kind]
        missing = [key for key in need if key not in p]
        if missing:
            raise InputError(f"generator {self.kind!r} is missing {missing}")
        if self.kind == "regular" and (p["n"] * p["d"]) % 2:
            raise InputError("n*d must be even")
        if self.kind == "biregular" and (p["n1"] * p["d1"]) % p["n2"]:
            raise InputError("n1*d1 must be divisible by n2")
        return self

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "params": self.params, "seed": self.seed}, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], dict(data.get("params", {})), int(data.get("seed", 0))).validate()

    def build(self, base_loader=None):
        """Returns (graph, partition or None, extra dict)."""
        self.validate()
        p, s = self.params, self.seed
        if self.kind == "regular":
            return random_regular(int(p["n"]), int(p["d"]), s, p.get("max_lambda2")), None, {}
        if self.kind == "er":
            return erdos_renyi(int(p["n"]), float(p["p"]), s), None, {}
        if self.kind == "sbm":
            inst = sbm_from_model(np.array(p["M"], dtype=float), int(p["n"]), int(p["d"]), s)
            return inst.graph, inst.partition, {"model_distance": inst.model_distance,
                                                "class_sizes": inst.class_sizes.tolist()}
        if self.kind == "biregular":
            return biregular_random(int(p["n1"]), int(p["n2"]), int(p["d1"]), s), None, {}
        if self.kind == "indset":
            g, I = planted_independent_set(int(p["n"]), int(p["d"]), float(p["gamma"]), s)
            part = np.ones(g.n, dtype=np.int64)
            part[I] = 0
            return g, Partition(part, 2), {"independent_set_size": len(I)}
        base = base_loader(p["base"]) if base_loader else p["base"]
        if self.kind == "blowup":
            inst = blowup_instance(np.array(p["M"], dtype=float), base, float(p.get("eps", 0.1)), s,
                                   degree=p.get("degree"))
            return inst.graph, None, {"r": inst.r.tolist(), "group_sizes": inst.group_sizes.tolist(),
                                      "lambda2": inst.lambda2, "max_degree_ratio": inst.max_degree_ratio}
        inst = lambda3_instance(base, s, float(p.get("eps", 0.05)))
        return inst.graph, None, {"s": inst.s, "lambda3": inst.lambda3}
