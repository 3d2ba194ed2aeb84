"""Candidate k-partitions from the extreme eigenspaces of a symmetric matrix.

The pipeline nets the span of the eigenvectors whose eigenvalues have
magnitude at least ``lam``, picks small subsets of net vectors, and clusters
the vertices by their coordinates in those vectors.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import InputError, PreconditionError
from .graph_core import ModelMatrix, Partition, permutation_match
from .spectral import RANK_SLACK, SpectralDecomposition, eig_sym

EXHAUSTIVE_MAX_N = 200
EXHAUSTIVE_MAX_K = 3
FULL_SUBSET_LIMIT = 20
NET_CONSTANT = 3.0


class CandidateCapWarning(UserWarning):
    pass


@dataclass
class RecoveryParams:
    lam: float = 0.4
    eta: float = 0.05
    net_resolution: float = 0.5
    rank_cap: int = 8
    separation_alpha: float = 0.5
    min_class_fraction: float = 0.1
    norm_bound: float = 1.0
    max_candidates: int = 20000
    seed: int = 0
    mode: str = "auto"  # auto | exhaustive | heuristic
    lloyd_iters: int = 30
    restarts: int = 4

    def validate(self, k: Optional[int] = None) -> "RecoveryParams":
        if not self.lam > 0:
            raise InputError("lambda must be positive")
        if not self.eta > 0:
            raise InputError("eta must be positive")
        if not 0 < self.net_resolution <= 1:
            raise InputError("net resolution must lie in (0, 1]")
        if self.rank_cap < 1:
            raise InputError("rank cap must be at least 1")
        if self.max_candidates < 1:
            raise InputError("max_candidates must be at least 1")
        if self.mode not in ("auto", "exhaustive", "heuristic"):
            raise InputError(f"unknown mode {self.mode!r}")
        if not self.min_class_fraction > 0:
            raise InputError("min class fraction must be positive")
        if k is not None and self.min_class_fraction > 1.0 / k + 1e-12:
            raise InputError(f"min class fraction {self.min_class_fraction} exceeds 1/k = {1 / k:.4g}")
        return self

    def to_dict(self):
        return asdict(self)


# ----------------------------------------------------------------- nets


def net_size(dim: int, resolution: float) -> int:
    """ceil(C m log m) random probes with m = (4/resolution)^dim (C = 3)."""
    log_m = dim * math.log(4.0 / resolution)
    if log_m > 60:
        return 2 ** 62
    m = math.exp(log_m)
    return int(math.ceil(NET_CONSTANT * m * max(log_m, 1.0)))


def epsilon_net(dim: int, resolution: float, seed=0, max_candidates: int = 20000) -> np.ndarray:
    """Rows are unit vectors of R^dim: the 2*dim signed basis vectors first,
    then random directions, enough to cover the sphere at ``resolution``
    with high probability."""
    if dim < 1:
        raise InputError("net dimension must be at least 1")
    if not 0 < resolution <= 1:
        raise InputError("net resolution must lie in (0, 1]")
    count = net_size(dim, resolution)
    if count + 2 * dim > max_candidates:
        raise InputError(
            f"net of dimension {dim} at resolution {resolution} needs {count + 2 * dim} points "
            f"> max_candidates={max_candidates}; coarsen the resolution or raise the cap"
        )
    basis = np.zeros((2 * dim, dim))
    basis[0::2] = np.eye(dim)
    basis[1::2] = -np.eye(dim)
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((count, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return np.vstack([basis, pts])


class NetVectors:
    """Sequence of unit n-vectors ``basis @ coeffs[i]`` lifted on demand."""

    def __init__(self, basis, coeffs, eigenvalues):
        self.basis = np.asarray(basis)
        self.coeffs = np.asarray(coeffs)
        self.eigenvalues = np.asarray(eigenvalues)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.basis @ self.coeffs[i]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def matrix(self, idx) -> np.ndarray:
        """n x len(idx) matrix of the selected lifted vectors."""
        return self.basis @ self.coeffs[list(idx)].T


def _as_spec(mat, spec):
    return spec if spec is not None else eig_sym(mat)


def extreme_indices(spec: SpectralDecomposition, lam: float) -> np.ndarray:
    """Indices of eigenvalues with magnitude >= lam, by decreasing magnitude."""
    mags = np.abs(spec.eigenvalues)
    idx = np.flatnonzero(mags >= lam - RANK_SLACK)
    return idx[np.argsort(-mags[idx], kind="stable")]


def eigenspace_candidates(mat, params: RecoveryParams, spec: Optional[SpectralDecomposition] = None) -> NetVectors:
    """Net of the unit sphere of span{eigenvectors with |eigenvalue| >= lam}."""
    params.validate()
    spec = _as_spec(mat, spec)
    idx = extreme_indices(spec, params.lam)
    dim = len(idx)
    if dim == 0:
        raise PreconditionError(f"no eigenvalue has magnitude >= {params.lam}")
    if dim > params.rank_cap:
        raise PreconditionError(f"eigenspace dimension {dim} > rank cap {params.rank_cap}")
    coeffs = epsilon_net(dim, params.net_resolution, seed=[params.seed, 11], max_candidates=params.max_candidates)
    return NetVectors(spec.eigenvectors[:, idx], coeffs, spec.eigenvalues[idx])


# ---------------------------------------------------------- clustering


@dataclass
class CandidateList:
    vectors: object
    partitions: list
    provenance: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    max_candidates: Optional[int] = None

    def __len__(self):
        return len(self.partitions)

    def agreements(self, reference: Partition):
        return [permutation_match(reference, p)[1] for p in self.partitions]

    def best(self, reference: Partition):
        """(index, agreement) of the candidate closest to ``reference``."""
        ag = self.agreements(reference)
        i = int(np.argmax(ag))
        return i, ag[i]

    def to_dict(self, reference: Optional[Partition] = None, include_vectors=False):
        out = {
            "count": len(self.partitions),
            "max_candidates": self.max_candidates,
            "partitions": [p.chi.tolist() for p in self.partitions],
            "provenance": self.provenance,
            "warnings": self.warnings,
        }
        if reference is not None:
            ag = self.agreements(reference)
            out["agreement"] = ag
            out["misclassification"] = [1 - a for a in ag]
        if include_vectors and self.vectors is not None:
            out["vectors"] = [np.asarray(v).tolist() for v in self.vectors]
        return out


def canonical_labels(labels: np.ndarray, k: int) -> np.ndarray:
    """Relabel each row so colors appear in order of first occurrence."""
    labels = np.atleast_2d(labels)
    g, n = labels.shape
    out = np.empty_like(labels)
    chunk = max(1, 4_000_000 // max(1, n * k))
    for s in range(0, g, chunk):
        block = labels[s:s + chunk]
        hit = block[:, :, None] == np.arange(k)[None, None, :]
        first = np.where(hit.any(axis=1), hit.argmax(axis=1), n + np.arange(k)[None, :])
        rank = np.argsort(np.argsort(first, axis=1, kind="stable"), axis=1, kind="stable")
        out[s:s + chunk] = np.take_along_axis(rank, block.astype(np.int64), axis=1)
    return out


def _dedupe(labels: np.ndarray, k: int):
    """Unique canonical rows in order of first appearance, with source indices."""
    if len(labels) == 0:
        return labels, np.zeros(0, dtype=np.int64)
    canon = canonical_labels(labels, k)
    _, first = np.unique(canon, axis=0, return_index=True)
    first = np.sort(first)
    return canon[first], first


def _resolve_mode(params: RecoveryParams, n: int, k: int) -> str:
    if params.mode != "auto":
        return params.mode
    return "exhaustive" if n <= EXHAUSTIVE_MAX_N and k <= EXHAUSTIVE_MAX_K else "heuristic"


def _occupied_centers(X, lo, hi, h):
    """Distinct grid points (spacing h from lo, clipped to [lo, hi]) nearest to
    the rows of X."""
    cells = np.clip(np.rint((X - lo) / h), 0, np.floor((hi - lo) / h + 1e-9))
    uniq = np.unique(cells, axis=0)
    return lo + uniq * h


def _grid_cluster(X, k, params):
    n, ell = X.shape
    c = params.min_class_fraction
    bound = 1.0 / math.sqrt(c * n)
    h = params.separation_alpha / math.sqrt(12 * k * n)
    lo = np.maximum(-bound, X.min(axis=0) - h)
    hi = np.minimum(bound, X.max(axis=0) + h)
    hi = np.maximum(hi, lo)
    budget = params.max_candidates
    while True:
        centers = _occupied_centers(X, lo, hi, h)
        if math.comb(len(centers), k) <= budget or len(centers) <= k:
            break
        h *= 1.15
    info = {"mode": "exhaustive", "grid_resolution": h, "grid_points": len(centers)}
    if len(centers) < k:
        # fewer distinct cells than classes: a single guess with all of them
        combos = np.arange(len(centers))[None, :]
    else:
        combos = np.array(list(itertools.combinations(range(len(centers)), k)), dtype=np.int64)
    dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = kernels.assign_combos(dist, combos)
    info["guesses"] = len(combos)
    return labels, info


def _assign(X, centers):
    d = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d, axis=1)


def _lloyd(X, centers, iters):
    labels = _assign(X, centers)
    for _ in range(iters):
        new = centers.copy()
        for a in range(len(centers)):
            sel = labels == a
            if sel.any():
                new[a] = X[sel].mean(axis=0)
        nl = _assign(X, new)
        centers = new
        if np.array_equal(nl, labels):
            break
        labels = nl
    return labels


def _heuristic_seeds(X, k, rng, restarts):
    n = len(X)
    seeds = []
    # farthest-point traversal from the largest row
    idx = [int(np.argmax(np.linalg.norm(X, axis=1)))]
    d = ((X - X[idx[0]]) ** 2).sum(axis=1)
    for _ in range(k - 1):
        j = int(np.argmax(d))
        idx.append(j)
        d = np.minimum(d, ((X - X[j]) ** 2).sum(axis=1))
    seeds.append(("farthest", X[idx]))
    # quantile bins along each coordinate, centers are the bin means
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        bins = np.array_split(order, k)
        seeds.append((f"quantile{j}", np.array([X[b].mean(axis=0) for b in bins])))
    # k-means++ restarts
    for r in range(restarts):
        first = int(rng.integers(n))
        cs = [X[first]]
        d = ((X - cs[0]) ** 2).sum(axis=1)
        for _ in range(k - 1):
            tot = d.sum()
            j = int(rng.choice(n, p=d / tot)) if tot > 0 else int(rng.integers(n))
            cs.append(X[j])
            d = np.minimum(d, ((X - X[j]) ** 2).sum(axis=1))
        seeds.append((f"kmeanspp{r}", np.array(cs)))
    return seeds


def _heuristic_cluster(X, k, params, rng):
    rows, names = [], []
    for name, centers in _heuristic_seeds(X, k, rng, params.restarts):
        rows.append(_assign(X, centers))
        names.append(name)
        rows.append(_lloyd(X, centers.copy(), params.lloyd_iters))
        names.append(name + "+lloyd")
    return np.array(rows, dtype=np.int32), {"mode": "heuristic", "seeds": names}


def spectral_cluster(hat_us, k: int, params: RecoveryParams, mode: Optional[str] = None) -> CandidateList:
    """Cluster vertices by their coordinates in up to k vectors.

    Exhaustive mode enumerates sets of k class centers on a grid of spacing
    alpha/sqrt(12kn) (restricted to cells occupied by some vertex, coarsened
    to stay within ``max_candidates`` guesses) and assigns each vertex to its
    nearest center, ties to the lowest class. Heuristic mode seeds centers
    from the data (farthest points, quantile bins, k-means++) and refines
    them with Lloyd iterations.
    """
    if k < 2:
        raise InputError("k must be at least 2")
    vecs = [np.asarray(u, dtype=np.float64).reshape(-1) for u in (hat_us.T if isinstance(hat_us, np.ndarray) and hat_us.ndim == 2 else hat_us)]
    if not vecs:
        raise InputError("no vectors to cluster")
    if len(vecs) > k:
        raise InputError(f"at most k = {k} vectors may be clustered, got {len(vecs)}")
    X = np.column_stack(vecs)
    n = X.shape[0]
    mode = mode or _resolve_mode(params, n, k)
    if mode == "exhaustive":
        labels, info = _grid_cluster(X, k, params)
    else:
        rng = np.random.default_rng([params.seed, 23, len(vecs)])
        labels, info = _heuristic_cluster(X, k, params, rng)
    uniq, src = _dedupe(labels, k)
    parts = [Partition(row, k) for row in uniq]
    prov = []
    for s in src.tolist():
        item = {"mode": info["mode"], "guess": int(s)}
        if info["mode"] == "heuristic":
            item["seed"] = info["seeds"][s]
        else:
            item["grid_resolution"] = info["grid_resolution"]
        prov.append(item)
    out = CandidateList(vectors=vecs, partitions=parts, provenance=prov, max_candidates=params.max_candidates)
    if len(parts) > params.max_candidates:
        out.partitions = parts[:params.max_candidates]
        out.provenance = prov[:params.max_candidates]
        out.warnings.append(f"candidate list capped at {params.max_candidates}")
    return out


def select_subsets(net: NetVectors, k: int):
    """Index subsets of net vectors fed to the clustering step.

    Vectors equal up to sign are merged first. Short lists use every subset
    of size <= k; long lists use every subset of the eigenbasis directions
    plus one subset chosen greedily by pairwise orthogonality.
    """
    coeffs = net.coeffs
    uniq = []
    for i in range(len(coeffs)):
        if not _has_sign_twin(coeffs, uniq, i):
            uniq.append(i)
        if len(uniq) > FULL_SUBSET_LIMIT:
            break
    if len(uniq) <= FULL_SUBSET_LIMIT:
        return [list(s) for size in range(1, k + 1) for s in itertools.combinations(uniq, size)]
    r = net.dim
    basis = list(range(0, 2 * r, 2))  # +e_i rows of the net
    subsets = [list(s) for size in range(1, min(k, r) + 1) for s in itertools.combinations(basis, size)]
    greedy = [0]
    worst = np.abs(coeffs @ coeffs[0])
    while len(greedy) < min(k, r):
        worst[greedy] = np.inf
        j = int(np.argmin(worst))
        greedy.append(j)
        worst = np.maximum(worst, np.abs(coeffs @ coeffs[j]))
    if sorted(greedy) not in [sorted(s) for s in subsets]:
        subsets.append(greedy)
    return subsets


def _has_sign_twin(coeffs, uniq, i):
    if not uniq:
        return False
    dots = coeffs[uniq] @ coeffs[i]
    return bool(np.any(np.abs(dots) >= 1 - 1e-12))


def recover_partitions(mat, k: int, params: RecoveryParams, spec: Optional[SpectralDecomposition] = None) -> CandidateList:
    """List of candidate k-partitions from the extreme eigenspace of ``mat``."""
    if k < 2:
        raise InputError("k must be at least 2")
    params.validate(k)
    spec = _as_spec(mat, spec)
    net = eigenspace_candidates(mat, params, spec)
    mags = np.abs(spec.eigenvalues)
    notes = []
    near = np.flatnonzero((mags < params.lam - RANK_SLACK) & (mags >= params.lam - params.eta))
    if len(near):
        notes.append(f"{len(near)} eigenvalue(s) within eta below lambda; the eigenspace cut is not well separated")
    subsets = select_subsets(net, k)
    labels, prov = [], []
    for si, subset in enumerate(subsets):
        X = net.matrix(subset)
        cl = spectral_cluster(X, k, params)
        for p, pv in zip(cl.partitions, cl.provenance):
            labels.append(p.chi)
            prov.append(dict(pv, subset=si, net_indices=[int(i) for i in subset]))
        notes.extend(cl.warnings)
    if labels:
        uniq, src = _dedupe(np.array(labels), k)
    else:
        uniq, src = np.zeros((0, mat.shape[0]), dtype=np.int64), np.zeros(0, dtype=np.int64)
    parts = [Partition(row, k) for row in uniq]
    provenance = [prov[s] for s in src.tolist()]
    if len(parts) > params.max_candidates:
        msg = f"candidate list capped at {params.max_candidates} (had {len(parts)})"
        warnings.warn(msg, CandidateCapWarning, stacklevel=2)
        notes.append(msg)
        parts, provenance = parts[:params.max_candidates], provenance[:params.max_candidates]
    return CandidateList(vectors=net, partitions=parts, provenance=provenance, warnings=notes,
                         max_candidates=params.max_candidates)


# ----------------------------------------------------------- model facts


def row_separation(M) -> float:
    """Minimum Euclidean distance between two distinct rows of M."""
    m = M.entries if isinstance(M, ModelMatrix) else np.asarray(M, dtype=np.float64)
    k = m.shape[0]
    if k < 2:
        raise InputError("row separation needs at least two rows")
    diff = m[:, None, :] - m[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2))
    return float(d[~np.eye(k, dtype=bool)].min())


def coordinate_separation(M, D, lam):
    """(measured, bound) for a symmetric M and weights D:

    measured = min over x != y of max over eigenvectors v with |eigenvalue| > lam
    of |D_x v_x - D_y v_y|; bound = sqrt((alpha^2 - 2 c^2 lam^2) / (k (zeta^2 - lam^2)))
    with alpha^2 = min ||D_x M_x - D_y M_y||^2, c = max D, zeta = ||M||.
    """
    M = np.asarray(M, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    k = M.shape[0]
    vals, vecs = np.linalg.eigh(M)
    S = vecs[:, np.abs(vals) > lam]
    cols = D[None, :] * M  # column x scaled by D_x
    alpha_sq = min(float(np.sum((cols[:, x] - cols[:, y]) ** 2)) for x in range(k) for y in range(x + 1, k))
    c = float(D.max())
    zeta = float(np.max(np.abs(vals)))
    bound = math.sqrt(max(0.0, alpha_sq - 2 * c * c * lam * lam) / (k * (zeta ** 2 - lam ** 2)))
    scaled = D[:, None] * S
    measured = min(
        float(np.max(np.abs(scaled[x] - scaled[y]))) if S.shape[1] else 0.0
        for x in range(k) for y in range(x + 1, k)
    )
    return measured, bound
