"""Eigendecomposition, threshold ranks and the bottom-to-top rank inequality."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import InputError, PreconditionError

RANK_SLACK = 1e-9
WITNESS_TOL = 1e-8
ZERO_ROW = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in descending order with aligned orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def residual(self) -> float:
        if self.matrix is None:
            raise InputError("decomposition was built without its source matrix")
        q, lam = self.eigenvectors, self.eigenvalues
        return float(np.max(np.abs(self.matrix @ q - q * lam)))

    def orthogonality_error(self) -> float:
        q = self.eigenvectors
        return float(np.max(np.abs(q.T @ q - np.eye(q.shape[1]))))

    def lambda2(self) -> float:
        return float(self.eigenvalues[1]) if self.n > 1 else float("nan")

    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])


def _dense(m):
    return np.asarray(m.todense()) if sp.issparse(m) else np.asarray(m, dtype=np.float64)


def eig_sym(m) -> SpectralDecomposition:
    """Full symmetric eigendecomposition with a deterministic sign convention
    (the largest-magnitude entry of each eigenvector is positive)."""
    a = _dense(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("matrix must be square")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > 1e-9:
        raise InputError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    a = (a + a.T) / 2
    vals, vecs = np.linalg.eigh(a)
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1].copy()
    if vecs.size:
        pivot = np.argmax(np.abs(vecs), axis=0)
        signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
        signs[signs == 0] = 1.0
        vecs *= signs
    return SpectralDecomposition(vals, vecs, a)


def threshold_rank(spec: SpectralDecomposition, tau: float, side: str = "top") -> int:
    """Number of eigenvalues >= tau (top) or <= -tau (bottom), with a 1e-9
    slack that counts boundary eigenvalues."""
    if tau < 0:
        raise InputError("threshold must be non-negative")
    ev = spec.eigenvalues
    if side == "top":
        return int(np.sum(ev >= tau - RANK_SLACK))
    if side == "bottom":
        return int(np.sum(ev <= -tau + RANK_SLACK))
    raise InputError(f"side must be 'top' or 'bottom', got {side!r}")


def top_rank_at(spec: SpectralDecomposition, threshold: float) -> int:
    """rank_{>= threshold} for any real threshold (may be negative)."""
    return int(np.sum(spec.eigenvalues >= threshold - RANK_SLACK))


@dataclass
class WitnessReport:
    V: np.ndarray
    lam: float
    t: int
    inner: float
    frobenius_sq: float
    trace: float
    inner_ok: bool
    frobenius_ok: bool
    trace_ok: bool

    @property
    def holds(self) -> bool:
        return self.inner_ok and self.frobenius_ok and self.trace_ok

    def to_dict(self):
        return {
            "lam": self.lam, "t": self.t, "inner": self.inner, "frobenius_sq": self.frobenius_sq,
            "trace": self.trace, "inner_ok": self.inner_ok, "frobenius_ok": self.frobenius_ok,
            "trace_ok": self.trace_ok, "holds": self.holds,
        }


def witness_matrix(spec: SpectralDecomposition, lam: float, t: int, tol: float = WITNESS_TOL) -> WitnessReport:
    """Build V (t^2 x n) from the t most negative eigenvectors and check
    <A, V^T V> >= lam^2, ||V^T V||_F^2 <= 1/t and Tr(V^T V) = 1."""
    if t < 1:
        raise InputError("t must be at least 1")
    if spec.matrix is None:
        raise InputError("decomposition was built without its source matrix")
    available = threshold_rank(spec, lam, "bottom")
    if available < t:
        raise PreconditionError(f"bottom rank at {lam} is {available} < t = {t}")
    u = spec.eigenvectors[:, -t:] / math.sqrt(t)  # rows w_i
    norms = np.linalg.norm(u, axis=1)
    live = norms >= ZERO_ROW
    v = np.zeros((t * t, spec.n))
    outer = np.einsum("ia,ib->iab", u, u).reshape(spec.n, t * t)
    v[:, live] = (outer[live] / norms[live, None]).T
    gram = v.T @ v
    inner = float(np.sum(spec.matrix * gram))
    frob = float(np.sum(gram * gram))
    trace = float(np.trace(gram))
    return WitnessReport(
        V=v, lam=float(lam), t=int(t), inner=inner, frobenius_sq=frob, trace=trace,
        inner_ok=inner >= lam * lam - tol,
        frobenius_ok=frob <= 1.0 / t + tol,
        trace_ok=abs(trace - 1.0) <= tol,
    )


@dataclass
class GeneralizedRankCheck:
    eps: float
    C: float
    r: float
    threshold: float
    bound: float
    measured: int
    hypotheses_ok: bool

    @property
    def holds(self) -> bool:
        return (not self.hypotheses_ok) or self.measured >= self.bound - 1e-12


def generalized_rank_check(spec: SpectralDecomposition, M: np.ndarray, eps: float, C: float,
                           tol: float = WITNESS_TOL) -> GeneralizedRankCheck:
    """Given PSD M with <A, M> >= 1 - eps, Tr M = 1 and ||M||_F^2 <= 1/r,
    the top rank at 1 - C*eps is at least (1 - 1/C)^2 r. ``r`` is taken as
    1/||M||_F^2."""
    inner = float(np.sum(spec.matrix * M))
    frob = float(np.sum(M * M))
    trace = float(np.trace(M))
    r = 1.0 / frob if frob > 0 else math.inf
    ok = inner >= 1 - eps - tol and abs(trace - 1) <= tol and C > 1
    threshold = 1 - C * eps
    bound = (1 - 1 / C) ** 2 * r
    return GeneralizedRankCheck(eps, C, r, threshold, bound, top_rank_at(spec, threshold), ok)


@dataclass
class RankReport:
    tau: float
    sigma: float
    tau_prime: float
    bottom_rank: int
    top_rank: int
    lhs: float
    holds: bool
    nonnegative_entries: bool = True
    norm_at_most_one: bool = True
    witness: Optional[dict] = None
    chained: Optional[dict] = None

    @property
    def preconditions_ok(self) -> bool:
        return self.nonnegative_entries and self.norm_at_most_one

    def to_dict(self):
        out = {
            "tau": self.tau, "sigma": self.sigma, "tau_prime": self.tau_prime,
            "bottom_rank": self.bottom_rank, "top_rank": self.top_rank, "lhs": self.lhs,
            "holds": self.holds, "nonnegative_entries": self.nonnegative_entries,
            "norm_at_most_one": self.norm_at_most_one,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.chained is not None:
            out["chained"] = self.chained
        return out


def verify_rank_inequality(spec: SpectralDecomposition, tau: float, sigma: float,
                           with_witness: bool = True) -> RankReport:
    """Check rank_{>= (tau^2 - sigma)/(1 - sigma)} >= sigma^2 * rank_{<= -tau}.

    ``lhs`` is the required lower bound sigma^2 * t (equal to
    ((tau^2 - tau')/(1 - tau'))^2 t for tau < 1). When t >= 1 the bound is
    also derived constructively: the witness V^T V is fed to the
    generalized rank inequality with C = 1/(1 - sigma) and eps = 1 - tau^2.
    Precondition violations of the source matrix are flagged, not refused.
    """
    if not 0 < sigma < 1:
        raise InputError(f"sigma must lie in (0, 1), got {sigma}")
    if tau <= 0:
        raise InputError(f"tau must be positive, got {tau}")
    t = threshold_rank(spec, tau, "bottom")
    tau_prime = (tau * tau - sigma) / (1 - sigma)
    top = top_rank_at(spec, tau_prime)
    lhs = sigma * sigma * t
    nonneg = norm_ok = True
    if spec.matrix is not None:
        nonneg = bool(np.all(spec.matrix >= -1e-12))
    if spec.n:
        norm_ok = bool(np.max(np.abs(spec.eigenvalues)) <= 1 + 1e-9)
    report = RankReport(tau, sigma, tau_prime, t, top, lhs, top >= lhs - 1e-12, nonneg, norm_ok)
    if with_witness and t >= 1 and spec.matrix is not None:
        w = witness_matrix(spec, tau, t)
        report.witness = w.to_dict()
        chain = generalized_rank_check(spec, w.V.T @ w.V, eps=1 - tau * tau, C=1 / (1 - sigma))
        # the chained bound uses r = 1/||M||_F^2 >= t, so it is at least sigma^2 t
        report.chained = {
            "threshold": chain.threshold, "bound": chain.bound, "measured": chain.measured,
            "hypotheses_ok": chain.hypotheses_ok, "holds": chain.holds,
        }
    return report


@dataclass
class TopToBottomReport:
    tau: float
    sigma: float
    top_rank: int
    threshold: float
    bound: float
    bottom_rank: int

    @property
    def holds(self) -> bool:
        return self.bottom_rank <= self.bound + 1e-12


def small_top_rank_bound(spec: SpectralDecomposition, tau: float, sigma: float) -> TopToBottomReport:
    """If rank_{>= tau} <= s then rank_{<= -sqrt(tau(1 - sigma) + sigma)} <= s / sigma^2."""
    if not 0 < sigma < 1:
        raise InputError(f"sigma must lie in (0, 1), got {sigma}")
    s = threshold_rank(spec, tau, "top")
    thr = math.sqrt(tau * (1 - sigma) + sigma)
    return TopToBottomReport(tau, sigma, s, thr, s / sigma ** 2, threshold_rank(spec, thr, "bottom"))


def eigenspace_closeness(X, Y, us, eta):
    """Returns (lhs, rhs) of sum_i ||P u_i||^2 <= eta^-2 sum_i ||(X - Y) u_i||^2.

    ``us`` are eigenvectors of X (columns) whose eigenvalues have magnitude
    at least lam; P projects onto the eigenvectors of Y whose eigenvalues
    have magnitude below lam - eta, where lam is the smallest magnitude among
    the given eigenvalues of X.
    """
    X, Y, us = np.asarray(X), np.asarray(Y), np.asarray(us)
    lam = float(np.min(np.abs(np.sum(us * (X @ us), axis=0))))
    vals, vecs = np.linalg.eigh(Y)
    low = vecs[:, np.abs(vals) < lam - eta]
    lhs = float(np.sum((low.T @ us) ** 2))
    rhs = float(np.sum(((X - Y) @ us) ** 2)) / eta ** 2
    return lhs, rhs
