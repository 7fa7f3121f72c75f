"""Linear-query access, sketch operators, and the norm and width estimators.

Testers never read input vectors directly.  They hand a measurement matrix to
:meth:`PointSet.measure`, which returns the inner products and charges one
query per (row, vector) pair to a :class:`QueryLedger`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateInput, InvalidArgument

# Trial-count constants.  The width block size is chosen so that a single block
# mean misses E[sup] by more than u with probability <= 0.1 under Gaussian
# concentration: 2 exp(-b u^2 / (2 sigma^2)) <= 0.1.
NORM_TRIAL_CONSTANT = 16.0
WIDTH_GROUP_CONSTANT = 9.0
WIDTH_BLOCK_CONSTANT = 2.0 * math.log(20.0)


class QueryLedger:
    """Running count of inner products taken against input vectors."""

    def __init__(self, queries_used: int = 0):
        self._used = int(queries_used)
        self._lock = threading.Lock()

    @property
    def queries_used(self) -> int:
        return self._used

    def charge(self, count: int) -> None:
        if count < 0:
            raise InvalidArgument("query charge must be non-negative")
        with self._lock:
            self._used += int(count)

    def __repr__(self):
        return f"QueryLedger(queries_used={self._used})"


class PointSet:
    """``p`` vectors in R^d (stored as columns) behind a query interface."""

    def __init__(self, vectors):
        Y = np.asarray(vectors, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.ndim != 2:
            raise InvalidArgument(f"expected a vector or a d x p matrix, got shape {Y.shape}")
        if Y.shape[1] == 0:
            raise DegenerateInput("point set is empty")
        if Y.shape[0] == 0:
            raise InvalidArgument("vectors have dimension 0")
        if not np.all(np.isfinite(Y)):
            raise InvalidArgument("point set has non-finite entries")
        self._Y = Y

    @property
    def dim(self) -> int:
        return self._Y.shape[0]

    def __len__(self) -> int:
        return self._Y.shape[1]

    def measure(self, M, ledger: QueryLedger | None) -> np.ndarray:
        """Return ``M @ Y`` (``rows x p``) and charge ``rows * p`` queries."""
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            M = M[None, :]
        if M.shape[1] != self.dim:
            raise InvalidArgument(f"measurement rows have length {M.shape[1]}, vectors have {self.dim}")
        if ledger is not None:
            ledger.charge(M.shape[0] * len(self))
        return M @ self._Y

    def with_vector(self, v) -> "PointSet":
        return PointSet(np.column_stack([self._Y, np.asarray(v, dtype=float)]))


def as_points(obj) -> PointSet:
    return obj if isinstance(obj, PointSet) else PointSet(obj)


@dataclass(frozen=True)
class SketchOperator:
    matrix: np.ndarray = field(repr=False)
    seed: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


def make_sketch(d: int, n: int, seed) -> SketchOperator:
    """Gaussian sketch with i.i.d. N(0, 1/n) entries."""
    if d < 1 or n < 1:
        raise InvalidArgument(f"sketch dimensions must be positive, got n={n}, d={d}")
    M = linalg.gaussian_matrix(n, d, 1.0 / math.sqrt(n), linalg.rng(seed, "sketch"))
    return SketchOperator(M, linalg.check_seed(seed))


def apply_sketch(op: SketchOperator, y, ledger: QueryLedger | None) -> np.ndarray:
    """``op.matrix @ y``; ``n`` queries per input vector."""
    if isinstance(y, PointSet):
        return y.measure(op.matrix, ledger)
    y = np.asarray(y, dtype=float)
    if y.shape[0] != op.d:
        raise InvalidArgument(f"vector has length {y.shape[0]}, sketch expects {op.d}")
    out = PointSet(y).measure(op.matrix, ledger)
    return out[:, 0] if y.ndim == 1 else out


# -- norm estimation ------------------------------------------------------------

def _check_eps_delta(eps, delta, eps_max=0.5):
    if not 0 < eps < eps_max:
        raise InvalidArgument(f"eps must lie in (0, {eps_max}), got {eps}")
    if not 0 < delta < 1:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")


def norm_trials(eps: float, delta: float) -> int:
    return math.ceil(NORM_TRIAL_CONSTANT * math.log(2.0 / delta) / eps**2)


def estimate_norms(points, eps: float, delta: float, seed, ledger: QueryLedger | None) -> np.ndarray:
    """Estimated Euclidean norm of every vector, as sqrt(mean of squared
    Gaussian measurements).  One Gaussian matrix is shared by all vectors; each
    vector's estimate individually meets the ``(eps, delta)`` guarantee."""
    _check_eps_delta(eps, delta)
    S = as_points(points)
    T = norm_trials(eps, delta)
    G = linalg.rng(seed, "norm").standard_normal((T, S.dim))
    return np.sqrt(np.mean(S.measure(G, ledger) ** 2, axis=0))


def estimate_norm_in_range(y, eps: float, delta: float, seed, ledger: QueryLedger | None) -> bool:
    """Decide whether ``||y||`` lies in ``[1 - eps, 1 + eps]``.

    The answer is correct with probability at least ``1 - delta`` when the norm
    is inside ``[1 - eps/2, 1 + eps/2]`` or outside ``[1 - 2 eps, 1 + 2 eps]``;
    between those bands either answer may come back.
    """
    S = as_points(y)
    if len(S) != 1:
        raise InvalidArgument("estimate_norm_in_range takes a single vector")
    est = estimate_norms(S, eps, delta, seed, ledger)[0]
    return bool(1.0 - eps <= est <= 1.0 + eps)


# -- gaussian width -------------------------------------------------------------

@dataclass(frozen=True)
class WidthEstimate:
    value: float
    additive_error_target: float
    trials: int
    confidence: float
    groups: int
    block_size: int


def width_groups(delta: float) -> int:
    return math.ceil(WIDTH_GROUP_CONSTANT * math.log(2.0 / delta))


def width_block_size(u: float, sigma2: float = 1.0) -> int:
    return max(1, math.ceil(WIDTH_BLOCK_CONSTANT * sigma2 / u**2))


def width_trials(u: float, delta: float, sigma2: float = 1.0) -> int:
    """Default number of Gaussian trials used by :func:`estimate_width`."""
    return width_groups(delta) * width_block_size(u, sigma2)


def width_layout(u: float, delta: float, trials: int | None = None, sigma2: float = 1.0):
    """``(trials, groups)`` for a width estimate.

    With an explicit trial budget smaller than the default, groups are dropped
    first; below one full block the estimate degrades to a plain mean.
    """
    groups, block = width_groups(delta), width_block_size(u, sigma2)
    if trials is None:
        return groups * block, groups
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    return trials, max(1, min(groups, trials // block))


def trial_suprema(points, gaussians, ledger: QueryLedger | None) -> np.ndarray:
    """``sup_v <g, v>`` for each row ``g`` of ``gaussians``."""
    return as_points(points).measure(gaussians, ledger).max(axis=1)


def estimate_width(S, u: float, delta: float, seed, ledger: QueryLedger | None,
                   trials: int | None = None, sigma2: float = 1.0) -> WidthEstimate:
    """Estimate the gaussian width of a finite set to additive error ``u``.

    Median of block means of ``sup_v <g, v>`` over fresh Gaussians ``g``.  In
    the regime ``u^2 >= 2 ln(20) sigma2`` every block has one trial and this is the
    plain median of per-trial suprema.  Uses ``trials * |S|`` queries.
    """
    if not u > 0:
        raise InvalidArgument(f"additive error target must be positive, got {u}")
    if not 0 < delta < 1:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    S = as_points(S)
    T, groups = width_layout(u, delta, trials, sigma2)
    G = linalg.rng(seed, "width").standard_normal((T, S.dim))
    sups = trial_suprema(S, G, ledger)
    means = [blk.mean() for blk in np.array_split(sups, groups)]
    return WidthEstimate(
        value=float(np.median(means)),
        additive_error_target=float(u),
        trials=T,
        confidence=1.0 - delta,
        groups=groups,
        block_size=T // groups,
    )
