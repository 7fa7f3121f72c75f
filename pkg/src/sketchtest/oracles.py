"""Independent ground truth: brute-force fits, Monte-Carlo widths and
empirical checks of the structural facts the testers rely on.

Nothing here goes through a query ledger; oracles see their inputs directly.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import BudgetExceeded, DegenerateInput, InvalidArgument, PreconditionViolation

DEFAULT_SUPPORT_BUDGET = 10**6
LSTSQ_RCOND = 1e-10
_CHUNK = 4096


def support_budget() -> int:
    """Support-count cap for exhaustive oracles (env ``SKETCHTEST_BUDGET``)."""
    raw = os.environ.get("SKETCHTEST_BUDGET")
    return int(raw) if raw else DEFAULT_SUPPORT_BUDGET


# -- exhaustive sparse regression ----------------------------------------------

@dataclass(frozen=True)
class SparseFit:
    support: tuple
    coefficients: np.ndarray
    residual: float

    def full_coefficients(self, m: int) -> np.ndarray:
        x = np.zeros(m)
        x[list(self.support)] = self.coefficients
        return x


def count_supports(m: int, K: int) -> int:
    return sum(math.comb(m, s) for s in range(min(K, m) + 1))


def _fit_batch(A, y, supports):
    sub = A[:, supports].transpose(1, 0, 2)  # (B, d, s)
    coef = np.linalg.pinv(sub, rcond=LSTSQ_RCOND) @ y
    resid = np.linalg.norm(np.einsum("bds,bs->bd", sub, coef) - y, axis=1)
    return coef, resid


def best_sparse_fit(A, y, K: int, budget: int | None = None) -> SparseFit:
    """Minimum of ``||A x - y||`` over all x with at most ``K`` nonzeros.

    Every support of size <= K is solved by least squares (minimum-norm on
    rank-deficient supports).  Ties keep the smaller, then lexicographically
    smaller, support.
    """
    A = linalg.check_matrix(A, "dictionary")
    y = np.asarray(y, dtype=float)
    d, m = A.shape
    if y.shape != (d,):
        raise InvalidArgument(f"y has shape {y.shape}, expected ({d},)")
    if K < 0:
        raise InvalidArgument("K must be non-negative")
    K = min(K, m)
    budget = support_budget() if budget is None else budget
    total = count_supports(m, K)
    if total > budget:
        raise BudgetExceeded(f"{total} supports exceed the budget of {budget}", total)

    best = SparseFit((), np.zeros(0), float(np.linalg.norm(y)))
    for size in range(1, K + 1):
        combos = itertools.combinations(range(m), size)
        while True:
            chunk = list(itertools.islice(combos, _CHUNK))
            if not chunk:
                break
            supports = np.array(chunk, dtype=int)
            coef, resid = _fit_batch(A, y, supports)
            j = int(np.argmin(resid))
            if resid[j] < best.residual - 1e-12:
                best = SparseFit(tuple(int(i) for i in supports[j]), coef[j].copy(), float(resid[j]))
    return best


# -- gaussian width -------------------------------------------------------------

@dataclass(frozen=True)
class WidthMC:
    estimate: float
    standard_error: float
    trials: int


def mc_width(S, trials: int, seed, chunk: int = 2048) -> WidthMC:
    """Sample mean and standard error of ``sup_v <g, v>`` over fresh Gaussians."""
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    if S.ndim != 2 or S.shape[1] == 0:
        raise DegenerateInput("point set is empty")
    if trials < 2:
        raise InvalidArgument("mc_width needs at least 2 trials")
    gen = linalg.rng(seed, "mc-width")
    sups = np.empty(trials)
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        sups[start:stop] = (gen.standard_normal((stop - start, S.shape[0])) @ S).max(axis=1)
    return WidthMC(float(sups.mean()), float(sups.std(ddof=1) / math.sqrt(trials)), trials)


def width_bound_finite(size: int) -> float:
    """Upper bound sqrt(2 ln |S|) for a finite set of unit vectors."""
    return math.sqrt(2 * math.log(size)) if size > 1 else 0.0


def width_bound_subspace(k: int) -> float:
    return math.sqrt(k)


def width_bound_sparse(k: int, m: int) -> float:
    """Upper bound 2 sqrt(3 k ln(m/k)) on the width of unit k-sparse vectors (m/k > 2)."""
    return 2 * math.sqrt(3 * k * math.log(m / k))


# -- approximate rank -----------------------------------------------------------

@dataclass(frozen=True)
class ApproxRankResult:
    Y_approx: np.ndarray = field(repr=False)
    inner_dim: int
    entrywise_error: float
    rank_bound: int
    attempts: int
    success: bool
    width_estimate: float

    @property
    def vacuous(self) -> bool:
        """True when the factorisation is no smaller than the ambient dimension."""
        return self.inner_dim >= self.Y_approx.shape[0]


def approx_rank_construct(Y, eps: float, seed, c_jl: float = 1.0, c_valid: float = 1.0,
                          retries: int = 3, width_trials: int = 2000) -> ApproxRankResult:
    """Low-rank entrywise approximation ``Y' = G^T (G Y)`` of a unit-column matrix.

    ``d' = ceil(16 c_jl / eps^2 * max(ln d, w^2))`` with ``w`` a Monte-Carlo
    width estimate of the columns.  A fresh ``G`` is drawn up to ``retries``
    more times while the entrywise error exceeds ``eps``; the best attempt is
    returned either way, with ``success`` saying whether it met ``eps``.
    """
    Y = linalg.check_matrix(Y, "Y")
    d = Y.shape[0]
    if not np.allclose(np.linalg.norm(Y, axis=0), 1.0, atol=1e-9):
        raise InvalidArgument("columns of Y must have unit norm")
    if eps < c_valid / math.sqrt(d):
        raise InvalidArgument(f"eps={eps} is below the valid range c/sqrt(d) = {c_valid / math.sqrt(d):.3g}")

    w = mc_width(Y, width_trials, linalg.derive_seed(seed, "width")).estimate
    inner = max(1, math.ceil(16 * c_jl / eps**2 * max(math.log(d), w**2)))

    best = None
    for attempt in range(retries + 1):
        G = linalg.gaussian_matrix(inner, d, 1 / math.sqrt(inner), linalg.rng(seed, "G", attempt))
        Yp = G.T @ (G @ Y)
        err = float(np.abs(Y - Yp).max())
        if best is None or err < best[1]:
            best = (Yp, err)
        if err <= eps:
            break
    Yp, err = best
    return ApproxRankResult(
        Y_approx=Yp,
        inner_dim=inner,
        entrywise_error=err,
        rank_bound=min(inner, *Y.shape),
        attempts=attempt + 1,
        success=err <= eps,
        width_estimate=w,
    )


# -- cover of the sphere by projected sparse vectors ---------------------------

@dataclass(frozen=True)
class CoverResult:
    max_min_distance: float
    n: int
    sample_count: int
    probe_count: int


def cover_check(n: int, m: int, ell: int, probe_count: int, sample_count: int, seed,
                chunk: int = 8192) -> CoverResult:
    """Largest distance from a random probe on S^{n-1} to the normalised images
    ``Phi x / ||Phi x||`` of sampled discretised ``ell``-sparse vectors.

    Probes are sampled, not a net, so the value is a lower bound on the true
    covering radius of the image cloud.  Phi and the probes depend only on
    ``seed``, so runs differing in ``sample_count`` share both.
    """
    from .generators import discretized_supports

    if not 1 <= ell <= m:
        raise InvalidArgument(f"need 1 <= ell <= m, got ell={ell}, m={m}")
    Phi = linalg.gaussian_matrix(n, m, 1 / math.sqrt(n), linalg.rng(seed, "phi"))
    probes = linalg.unit_sphere(n, probe_count, linalg.rng(seed, "probes")).T
    gen = linalg.rng(seed, "samples")
    best = np.full(probe_count, np.inf)
    for start in range(0, sample_count, chunk):
        count = min(chunk, sample_count - start)
        idx, signs = discretized_supports(gen, m, ell, count)
        img = np.einsum("nck,ck->cn", Phi[:, idx], signs)
        norms = np.linalg.norm(img, axis=1)
        img = img[norms > 0] / norms[norms > 0, None]
        dist2 = np.maximum(0.0, 2.0 - 2.0 * probes @ img.T)
        best = np.minimum(best, dist2.min(axis=1))
    return CoverResult(float(np.sqrt(best.max())), n, sample_count, probe_count)


# -- l_infinity under random rotation -------------------------------------------

@dataclass(frozen=True)
class LinfRotationResult:
    success_fraction: float
    width_estimate: float
    threshold: float
    trials: int
    skipped: bool = False


def linf_rotation_check(S, C_const: float, trials: int, seed, width_trials: int = 4000) -> LinfRotationResult:
    """Fraction of Haar rotations R with ``max_y ||R y||_inf <= C w / sqrt(d)``.

    ``w`` is a Monte-Carlo width estimate of S.  In dimension 1 the check is
    meaningless (every rotation is +-1) and comes back flagged as skipped.
    """
    S = linalg.check_matrix(np.atleast_2d(np.asarray(S, dtype=float)), "S")
    d = S.shape[0]
    if d == 1:
        return LinfRotationResult(float("nan"), float("nan"), float("nan"), 0, skipped=True)
    w = mc_width(S, width_trials, linalg.derive_seed(seed, "width")).estimate
    threshold = C_const * w / math.sqrt(d)
    hits = 0
    for t in range(trials):
        R = linalg.random_rotation(d, linalg.rng(seed, "rotation", t))
        hits += np.abs(R @ S).max() <= threshold
    return LinfRotationResult(hits / trials, w, threshold, trials)


# -- width under near-isometries -------------------------------------------------

@dataclass(frozen=True)
class IsometryWidthResult:
    passed: bool
    width_source: WidthMC
    width_image: WidthMC
    distortion: float


def pairwise_distortion(X, Phi) -> float:
    """Largest ``| ||Phi(x - y)|| / ||x - y|| - 1 |`` over distinct pairs of columns."""
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Phi, dtype=float) @ X
    iu = np.triu_indices(X.shape[1], 1)
    gx = X.T @ X
    gz = Z.T @ Z
    nx, nz = np.diag(gx), np.diag(gz)
    dx = np.sqrt(np.maximum(0.0, nx[:, None] + nx[None, :] - 2 * gx))[iu]
    dz = np.sqrt(np.maximum(0.0, nz[:, None] + nz[None, :] - 2 * gz))[iu]
    keep = dx > 1e-12
    if not keep.any():
        return 0.0
    return float(np.abs(dz[keep] / dx[keep] - 1.0).max())


def isometric_width_check(X, Phi, eps: float, trials: int = 20000, seed=0) -> IsometryWidthResult:
    """Check that the width of ``Phi X`` lies within ``(1 +- eps)`` of the width of X.

    Both Monte-Carlo widths are widened by three standard errors before the
    comparison.  Raises :class:`PreconditionViolation` when Phi distorts some
    pairwise distance of X by more than ``eps``.
    """
    X = linalg.check_matrix(X, "X")
    Phi = np.asarray(Phi, dtype=float)
    distortion = pairwise_distortion(X, Phi)
    if distortion > eps:
        raise PreconditionViolation(f"map is not {eps}-isometric on X (distortion {distortion:.4g})",
                                    measured=distortion)
    wx = mc_width(X, trials, linalg.derive_seed(seed, "source"))
    ws = mc_width(Phi @ X, trials, linalg.derive_seed(seed, "image"))
    lo = (1 - eps) * (wx.estimate - 3 * wx.standard_error) - 3 * ws.standard_error
    hi = (1 + eps) * (wx.estimate + 3 * wx.standard_error) + 3 * ws.standard_error
    return IsometryWidthResult(bool(lo <= ws.estimate <= hi), wx, ws, distortion)


# -- independent hull distance -------------------------------------------------

def project_l1_ball(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{x : ||x||_1 <= radius}`` (sort-based)."""
    if np.abs(v).sum() <= radius:
        return v.copy()
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, len(u) + 1) > css - radius)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def hull_distance_projected(A, radius: float, target, iters: int = 50000, tol: float = 1e-13) -> float:
    """Distance from ``target`` to ``radius * conv(A ∪ -A)`` by accelerated
    projected gradient over the l1 ball, independent of the Frank-Wolfe path."""
    B = radius * np.asarray(A, dtype=float)
    y = np.asarray(target, dtype=float)
    L = float(np.linalg.norm(B, 2) ** 2) or 1.0
    x = np.zeros(B.shape[1])
    z, t = x.copy(), 1.0
    for _ in range(iters):
        x_new = project_l1_ball(z - B.T @ (B @ z - y) / L)
        t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = x_new + (t - 1) / t_new * (x_new - x)
        step = float(np.linalg.norm(x_new - x))
        x, t = x_new, t_new
        if step < tol:
            break
    return float(np.linalg.norm(B @ x - y))


# -- reports ---------------------------------------------------------------------

def inputs_digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(np.asarray(a, dtype="<f8"))
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def oracle_report(operation: str, inputs, value, trials=None, seed=None, standard_error=None) -> dict:
    """JSON-ready record of an oracle evaluation."""
    rep = {"operation": operation, "inputs_digest": inputs_digest(*inputs), "value": value,
           "trials": trials, "seed": seed}
    if standard_error is not None:
        rep["standard_error"] = standard_error
    return rep
