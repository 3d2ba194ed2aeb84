"""Coloring and independent-set algorithms for one-sided expanders, with the
model-matrix analytics they rely on."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import InputError, PreconditionError
from .graph_core import (
    Graph,
    ModelMatrix,
    Partition,
    check_k_delta_coloring,
    matching_cover_of_edges,
    monochromatic_mask,
    normalized_adjacency,
    per_pair_variance,
)
from .recovery import RecoveryParams, epsilon_net, recover_partitions
from .spectral import eig_sym, small_top_rank_bound, threshold_rank


class WeakResultWarning(UserWarning):
    pass


@dataclass
class ColoringResult:
    independent_sets: list
    covered_fraction: float
    k_effective: int
    provenance: dict = field(default_factory=dict)

    def labels(self, n) -> np.ndarray:
        lab = -np.ones(n, dtype=np.int64)
        for i, s in enumerate(self.independent_sets):
            lab[np.asarray(s, dtype=np.int64)] = i
        return lab

    def to_dict(self):
        return {
            "sets": [np.asarray(s).tolist() for s in self.independent_sets],
            "covered_fraction": self.covered_fraction,
            "k_effective": self.k_effective,
            "provenance": self.provenance,
        }


@dataclass
class RowGrouping:
    groups: list
    representatives: list
    p: np.ndarray

    @property
    def k_prime(self) -> int:
        return len(self.groups)


# ------------------------------------------------------------ model analytics


def _entries(M):
    return M.entries if isinstance(M, ModelMatrix) else np.asarray(M, dtype=np.float64)


def stationary_distribution(M, tol=1e-9) -> np.ndarray:
    """Stationary vector of a reversible chain, by chaining pi_b / pi_a =
    M_ab / M_ba along a BFS spanning tree of the nonzero pattern."""
    m = _entries(M)
    k = m.shape[0]
    if np.any(m < -tol) or not np.allclose(m.sum(axis=1), 1.0, atol=tol, rtol=0):
        raise InputError("model matrix is not row-stochastic")
    pi = np.zeros(k)
    pi[0] = 1.0
    seen = [0]
    visited = np.zeros(k, dtype=bool)
    visited[0] = True
    head = 0
    while head < len(seen):
        a = seen[head]
        head += 1
        for b in range(k):
            if visited[b] or b == a or (m[a, b] <= 0 and m[b, a] <= 0):
                continue
            if m[a, b] <= 0 or m[b, a] <= 0:
                raise InputError(f"model is not reversible: M[{a},{b}]={m[a, b]} but M[{b},{a}]={m[b, a]}")
            pi[b] = pi[a] * m[a, b] / m[b, a]
            visited[b] = True
            seen.append(b)
    if not visited.all():
        raise InputError(
            f"nonzero pattern is disconnected (class {int(np.argmin(visited))} unreachable); stationary distribution not unique"
        )
    pi /= pi.sum()
    flow = pi[:, None] * m
    gap = float(np.max(np.abs(flow - flow.T)))
    if gap > tol:
        raise InputError(f"model is not reversible (max |pi_a M_ab - pi_b M_ba| = {gap:.3g})")
    return pi


def model_3_from_pi(pi) -> ModelMatrix:
    """The reversible zero-diagonal 3x3 model with stationary vector pi:
    M_ab = (2 pi_a + 2 pi_b - 1) / (2 pi_a)."""
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (3,):
        raise InputError("pi must have three entries")
    if np.any(pi <= 0) or abs(pi.sum() - 1) > 1e-9:
        raise InputError("pi must be positive and sum to 1")
    m = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            if a != b:
                val = (2 * pi[a] + 2 * pi[b] - 1) / (2 * pi[a])
                if val < -1e-12:
                    raise InputError(f"entry ({a}, {b}) would be negative: pi_{a} + pi_{b} = {pi[a] + pi[b]:.6g} < 1/2")
                m[a, b] = max(val, 0.0)
    return ModelMatrix(m, stationary=pi)


def group_rows(M, row_tol=0.1) -> list:
    """Groups of rows within ``row_tol`` (max-abs) of each other, closed
    transitively; groups ordered by smallest member."""
    m = _entries(M)
    k = m.shape[0]
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(k):
        for b in range(a + 1, k):
            if np.max(np.abs(m[a] - m[b])) <= row_tol:
                parent[find(b)] = find(a)
    groups = {}
    for a in range(k):
        groups.setdefault(find(a), []).append(a)
    return sorted(groups.values(), key=lambda g: g[0])


def alpha_uncovered_bound(M, row_tol=0.1, pi=None):
    """(RowGrouping, alpha) with alpha = sum_a min(pi_a, sum of pi over the
    other members of a's group). Asserts 1 - sum_i p_i = alpha."""
    m = _entries(M)
    if pi is None:
        pi = M.stationary if isinstance(M, ModelMatrix) and M.stationary is not None else stationary_distribution(m)
    pi = np.asarray(pi, dtype=np.float64)
    groups = group_rows(m, row_tol)
    alpha = 0.0
    reps, p = [], []
    for g in groups:
        tot = math.fsum(pi[g])
        for a in g:
            alpha += min(pi[a], tot - pi[a])
        star = max(g, key=lambda a: (pi[a], -a))
        reps.append(star)
        p.append(max(0.0, pi[star] - (tot - pi[star])))
    p = np.array(p)
    if abs(1 - math.fsum(p) - alpha) > 1e-9:
        raise AssertionError(f"1 - sum p = {1 - p.sum()} differs from alpha = {alpha}")
    return RowGrouping(groups, reps, p), alpha


def alpha_identity_exact(pi, groups) -> bool:
    """Check 1 - sum p_i == alpha in exact rational arithmetic."""
    q = [Fraction(float(x)) for x in pi]
    total = sum(q)
    alpha = Fraction(0)
    psum = Fraction(0)
    for g in groups:
        tot = sum(q[a] for a in g)
        for a in g:
            alpha += min(q[a], tot - q[a])
        star = max(g, key=lambda a: (q[a], -a))
        psum += max(Fraction(0), q[star] - (tot - q[star]))
    return total - psum == alpha


def variance_bound(lambda2, c, delta, const=8.0) -> float:
    """const * (lambda2 / c + delta / (lambda2 c))."""
    return const * (lambda2 / c + delta / (lambda2 * c))


def hoffman_threshold(mu) -> float:
    """An independent set of measure mu forces an eigenvalue <= -mu / (1 - mu)."""
    return -mu / (1 - mu)


# ------------------------------------------------------------------ rounding


def round_independent_set(g: Graph, S) -> np.ndarray:
    """S minus the endpoints of a greedy maximal matching of the edges inside S."""
    mask = np.zeros(g.n, dtype=bool)
    mask[np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64)] = True
    cover = matching_cover_of_edges(g, g.subgraph_edges_mask(mask))
    return np.flatnonzero(mask & ~cover)


def _round_labels(g: Graph, chi) -> np.ndarray:
    """Labels after removing a maximal-matching cover of monochromatic edges
    (-1 marks removed vertices). Matchings of different classes are vertex
    disjoint, so one pass over all monochromatic edges rounds every class."""
    chi = np.asarray(chi, dtype=np.int64)
    cover = matching_cover_of_edges(g, monochromatic_mask(g, chi))
    out = chi.copy()
    out[cover] = -1
    return out


def round_coloring(g: Graph, p: Partition) -> ColoringResult:
    lab = _round_labels(g, p.chi)
    sets = [np.flatnonzero(lab == a) for a in range(p.k)]
    covered = float((lab >= 0).sum()) / g.n
    return ColoringResult(sets, covered, sum(1 for s in sets if len(s)), {"rounded_from_k": p.k})


# ------------------------------------------------------------- algorithms


def _require_connected(g: Graph):
    ncomp, _ = connected_components(g.sparse, directed=False)
    if ncomp != 1:
        raise PreconditionError(f"graph has {ncomp} connected components")


def _best_rounding(g, candidates, key_prefix):
    """Best (covered, -sets) over the candidate list; first wins ties."""
    best = None
    for i, p in enumerate(candidates.partitions):
        lab = _round_labels(g, p.chi)
        covered = int((lab >= 0).sum())
        nsets = len(np.unique(lab[lab >= 0]))
        key = (covered, -nsets)
        if best is None or key > best[0]:
            best = (key, key_prefix + (i,), lab, p)
    return best


def _finish(g, best, extra):
    key, where, lab, p = best
    labels = np.unique(lab[lab >= 0])
    sets = [np.flatnonzero(lab == a) for a in labels]
    check_k_delta_coloring(g, sets)  # hard postcondition
    result = ColoringResult(sets, key[0] / g.n, len(sets), extra)
    return result


def color_expander(g: Graph, k: int, params: Optional[RecoveryParams] = None, sigma: float = 0.5) -> ColoringResult:
    """Sweep k' = k, ..., 2: list candidate k'-partitions from the extreme
    eigenspace of the normalized adjacency, round each by removing a
    monochromatic matching cover, keep the best covered fraction."""
    params = (params or RecoveryParams()).validate()
    if k < 2:
        raise InputError("k must be at least 2")
    _require_connected(g)
    A = normalized_adjacency(g)
    spec = eig_sym(A)
    # the top rank at tau bounds the bottom rank at lam when lam^2 = tau(1 - sigma) + sigma
    s_sigma = min(sigma, params.lam ** 2 / 2)
    tau = (params.lam ** 2 - s_sigma) / (1 - s_sigma)
    top_bound = small_top_rank_bound(spec, tau, s_sigma)
    dim = threshold_rank(spec, params.lam, "top") + threshold_rank(spec, params.lam, "bottom")
    best = None
    count = 0
    for kp in range(k, 1, -1):
        pk = replace(params, min_class_fraction=min(params.min_class_fraction, 1.0 / kp))
        cands = recover_partitions(A, kp, pk, spec=spec)
        count += len(cands)
        b = _best_rounding(g, cands, (k - kp,))
        if b is not None and (best is None or b[0] > best[0]):
            best = b + (cands.provenance[b[1][-1]], kp)
    if best is None:
        raise PreconditionError("no candidate partitions were produced")
    key, where, lab, p, prov, kp = best
    baseline = len(round_independent_set(g, np.arange(g.n)))
    live = np.unique(p.chi)
    remap = -np.ones(p.k, dtype=np.int64)
    remap[live] = np.arange(len(live))
    var = per_pair_variance(A, Partition(remap[p.chi], len(live))) if len(live) > 1 else np.zeros((1, 1))
    extra = {
        "k_prime": kp,
        "candidate_index": int(where[-1]),
        "candidate": prov,
        "candidates_evaluated": count,
        "lambda2": spec.lambda2(),
        "lambda_min": spec.lambda_min(),
        "subspace_dim": dim,
        "top_rank_bound": {"tau": tau, "sigma": s_sigma, "top_rank": top_bound.top_rank,
                           "threshold": top_bound.threshold, "bound": top_bound.bound,
                           "bottom_rank": top_bound.bottom_rank},
        "variance": var.tolist(),
        "params": params.to_dict(),
    }
    if key[0] <= baseline:
        warnings.warn("no candidate beats a single rounded independent set", WeakResultWarning, stacklevel=2)
        extra["warning"] = "no candidate beats a single rounded independent set"
    return _finish(g, (key, where, lab, p), extra)


def color_3_expander(g: Graph, gamma: float, params: Optional[RecoveryParams] = None) -> ColoringResult:
    """Three independent sets for a regular graph whose hidden 3-coloring has
    every class below 1/2 - gamma (so rows of its model are gamma-separated
    and every class has fraction at least gamma)."""
    params = params or RecoveryParams()
    if not 0 < gamma < 0.5:
        raise InputError("gamma must lie in (0, 1/2)")
    if not g.is_regular:
        raise PreconditionError("color_3_expander needs a regular graph")
    _require_connected(g)
    params = replace(params, separation_alpha=gamma,
                     min_class_fraction=min(gamma, params.min_class_fraction)).validate(3)
    A = normalized_adjacency(g)
    spec = eig_sym(A)
    cands = recover_partitions(A, 3, params, spec=spec)
    best = _best_rounding(g, cands, ())
    if best is None:
        raise PreconditionError("no candidate partitions were produced")
    key, where, lab, p = best
    sets = [np.flatnonzero(lab == a) for a in range(3)]
    check_k_delta_coloring(g, sets)
    extra = {
        "candidate_index": int(where[-1]),
        "candidate": cands.provenance[where[-1]],
        "candidates_evaluated": len(cands),
        "lambda2": spec.lambda2(),
        "lambda_min": spec.lambda_min(),
        "variance": per_pair_variance(A, p).tolist() if np.all(p.class_sizes > 0) else None,
        "params": params.to_dict(),
    }
    return ColoringResult(sets, key[0] / g.n, sum(1 for s in sets if len(s)), extra)


@dataclass
class IndependentSetInfo:
    bottom_rank: int
    resolution: float
    candidates: int
    best_index: int
    guarantee: float
    vertex_cover_size: int


def find_independent_set(g: Graph, gamma: float, lam: float, rank_cap: int,
                         params: Optional[RecoveryParams] = None, c: float = 1.0, return_info=False):
    """Net the span of the eigenvectors with eigenvalue <= -lam, round every
    net vector u to {x : u_x >= 0} minus a matching cover, keep the largest."""
    params = params or RecoveryParams()
    if not 0 <= gamma < 0.25:
        raise InputError("gamma must lie in [0, 1/4)")
    if not 0 < lam < 1:
        raise InputError("lam must lie in (0, 1)")
    if not g.is_regular:
        raise PreconditionError("find_independent_set needs a regular graph")
    A = normalized_adjacency(g)
    spec = eig_sym(A)
    t = threshold_rank(spec, lam, "bottom")
    if t > rank_cap:
        raise PreconditionError(f"bottom rank at {lam} is {t} > rank cap {rank_cap}")
    # gamma = 0 would need an exact net; fall back to the configured resolution
    resolution = min(1.0, c * math.sqrt(gamma / (1 - lam))) if gamma > 0 else params.net_resolution
    guarantee = (0.5 - gamma - (4 + c) * gamma / (1 - lam)) * g.n
    if t == 0:
        best = round_independent_set(g, np.arange(g.n))
        info = IndependentSetInfo(0, resolution, 0, -1, guarantee, g.n - len(best))
        warnings.warn("no eigenvalue at or below -lam; returning a rounded trivial set", WeakResultWarning, stacklevel=2)
        return (best, info) if return_info else best
    U = spec.eigenvectors[:, -t:]
    coeffs = epsilon_net(t, resolution, seed=[params.seed, 31], max_candidates=params.max_candidates)
    u, v = g.edges[:, 0], g.edges[:, 1]
    best, best_i = None, -1
    chunk = max(1, 2_000_000 // g.n)
    for s in range(0, len(coeffs), chunk):
        signs = (U @ coeffs[s:s + chunk].T) >= 0
        for j in range(signs.shape[1]):
            S = signs[:, j]
            if best is not None and S.sum() <= len(best):
                continue  # rounding never grows the set
            inside = S[u] & S[v]
            cover = kernels.matching_cover(u[inside], v[inside], g.n)
            cand = np.flatnonzero(S & ~cover)
            if best is None or len(cand) > len(best):
                best, best_i = cand, s + j
    check_k_delta_coloring(g, [best])
    info = IndependentSetInfo(t, resolution, len(coeffs), best_i, guarantee, g.n - len(best))
    return (best, info) if return_info else best
