"""Geometry of the scaled symmetric hull ``radius * conv(A ∪ -A)``.

Vertices are addressed by ``(column index, sign)`` and never materialised.
Distances come from conditional gradient (Frank-Wolfe) on
``f(z) = 0.5 ||z - target||^2``; the duality gap at the final iterate gives a
certified lower bound next to the iterate's upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, PreconditionViolation

DEFAULT_MAX_ITERS = 10_000
DEFAULT_TOL = 1e-9
SPARSIFY_CHECK_TOL = 1e-6
SPARSIFY_CHECK_ITERS = 2_000


@dataclass(frozen=True)
class SymmetricHull:
    dictionary: np.ndarray = field(repr=False)
    radius: float = 1.0

    def __post_init__(self):
        A = np.asarray(self.dictionary, dtype=float)
        if A.ndim != 2 or A.shape[1] == 0:
            raise InvalidArgument(f"dictionary must be a non-empty d x m matrix, got {A.shape}")
        if not self.radius > 0:
            raise InvalidArgument(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "dictionary", A)

    @property
    def dim(self) -> int:
        return self.dictionary.shape[0]

    @property
    def size(self) -> int:
        return self.dictionary.shape[1]

    def vertex(self, index: int, sign: int) -> np.ndarray:
        return sign * self.radius * self.dictionary[:, index]

    def max_vertex_norm(self) -> float:
        return self.radius * float(np.linalg.norm(self.dictionary, axis=0).max())


@dataclass(frozen=True)
class SparseCombination:
    """Convex weights over signed vertices, one entry per (index, sign)."""

    indices: np.ndarray
    signs: np.ndarray
    weights: np.ndarray

    @property
    def terms(self):
        return [(int(i), int(s), float(w)) for i, s, w in zip(self.indices, self.signs, self.weights)]

    @property
    def sparsity(self) -> int:
        return len(self.indices)

    def reconstruct(self, hull: SymmetricHull) -> np.ndarray:
        if not len(self.indices):
            return np.zeros(hull.dim)
        coef = self.signs * self.weights * hull.radius
        return hull.dictionary[:, self.indices] @ coef

    def coefficients(self, m: int, radius: float = 1.0) -> np.ndarray:
        """Equivalent coefficient vector x with ``reconstruct == A @ x``."""
        x = np.zeros(m)
        np.add.at(x, self.indices, self.signs * self.weights * radius)
        return x

    @classmethod
    def from_dense(cls, w: np.ndarray, m: int, drop_below: float = 0.0):
        """From a length-``2m`` weight vector laid out as [+a_0.., -a_0..]."""
        keep = np.flatnonzero(w > drop_below)
        # order by (index, sign) with + before -
        order = np.lexsort((keep >= m, keep % m))
        keep = keep[order]
        return cls(indices=keep % m, signs=np.where(keep < m, 1, -1), weights=w[keep].copy())


@dataclass(frozen=True)
class HullDistanceResult:
    distance: float
    lower_bound: float
    gap: float
    witness: SparseCombination
    iterations: int
    converged: bool


def linear_minimization_vertex(H: SymmetricHull, direction) -> tuple[int, int]:
    """Signed vertex maximising ``<direction, v>``.

    Ties go to the smallest index, then to the positive sign.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (H.dim,):
        raise InvalidArgument(f"direction has shape {direction.shape}, expected ({H.dim},)")
    c = H.dictionary.T @ direction
    i = int(np.argmax(np.abs(c)))
    return i, (1 if c[i] >= 0 else -1)


def hull_distance(H: SymmetricHull, target, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
                  step: str = "line-search", stop_below: float | None = None,
                  stop_above: float | None = None) -> HullDistanceResult:
    """Euclidean distance from ``target`` to the hull by conditional gradient.

    ``step`` is ``"line-search"`` (exact minimisation along the FW direction,
    closed form for this quadratic) or ``"standard"`` (``2/(j+2)``).  Iteration
    stops when the duality gap falls to ``tol``, when the upper bound drops to
    ``stop_below``, when the certified lower bound exceeds ``stop_above``, or
    after ``max_iters`` iterations.
    """
    y = np.asarray(target, dtype=float)
    if y.shape != (H.dim,):
        raise InvalidArgument(f"target has shape {y.shape}, expected ({H.dim},)")
    if not np.all(np.isfinite(y)):
        raise InvalidArgument("target has non-finite entries")
    if max_iters < 1 or not tol > 0:
        raise InvalidArgument("max_iters must be >= 1 and tol > 0")
    if step not in ("line-search", "standard"):
        raise InvalidArgument(f"unknown step rule {step!r}")

    A, R, m = H.dictionary, H.radius, H.size
    w = np.zeros(2 * m)

    i, s = linear_minimization_vertex(H, y)
    w[i if s > 0 else m + i] = 1.0
    z = H.vertex(i, s)

    gap = math.inf
    upper = lower = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        r = y - z
        c = A.T @ r
        i = int(np.argmax(np.abs(c)))
        s = 1 if c[i] >= 0 else -1
        v = H.vertex(i, s)
        gap = float(R * abs(c[i]) - r @ z)  # <r, v - z>
        f = 0.5 * float(r @ r)
        upper = math.sqrt(2 * f)
        lower = math.sqrt(max(0.0, 2 * (f - gap)))
        if gap <= tol:
            break
        if stop_below is not None and upper <= stop_below:
            break
        if stop_above is not None and lower > stop_above:
            break
        dz = v - z
        if step == "line-search":
            gamma = min(1.0, max(0.0, gap / float(dz @ dz)))
        else:
            gamma = 2.0 / (it + 2)
        z = z + gamma * dz
        w *= 1.0 - gamma
        w[i if s > 0 else m + i] += gamma

    witness = SparseCombination.from_dense(w / w.sum(), m)
    dist = float(np.linalg.norm(witness.reconstruct(H) - y))
    gap = max(gap, 0.0)
    return HullDistanceResult(
        distance=dist,
        lower_bound=min(lower, dist),
        gap=gap,
        witness=witness,
        iterations=it,
        converged=gap <= tol,
    )


def membership(H: SymmetricHull, target, tau: float, max_iters: int = DEFAULT_MAX_ITERS) -> bool:
    """True iff the conditional-gradient distance to the hull is at most ``tau``."""
    if not tau > 0:
        raise InvalidArgument(f"tau must be positive, got {tau}")
    res = hull_distance(H, target, max_iters=max_iters, stop_below=tau, stop_above=tau)
    return res.distance <= tau


def _greedy_uniform_path(H: SymmetricHull, z: np.ndarray, t: int):
    """Yield ``(index, sign, running_sum)`` for t steps of uniform averaging.

    Step j adds the signed vertex that minimises ``||(sum + v)/(j+1) - z||``.
    That choice is never worse than the linear-minimisation vertex, so the
    ``2 max||v|| / sqrt(j)`` bound of uniform averaging carries over.
    """
    A, R = H.dictionary, H.radius
    sq = R**2 * np.einsum("ij,ij->j", A, A)
    total = np.zeros(H.dim)
    for j in range(t):
        c = A.T @ (total - (j + 1) * z)
        scores = np.column_stack([2 * R * c + sq, -2 * R * c + sq])
        k = int(np.argmin(scores))  # row-major: smallest index first, then +
        i, s = k // 2, (1 if k % 2 == 0 else -1)
        total = total + H.vertex(i, s)
        yield i, s, total


def caratheodory_errors(H: SymmetricHull, z, t: int) -> np.ndarray:
    """``||z_j - z||`` for j = 1..t along the uniform-averaging path."""
    z = np.asarray(z, dtype=float)
    return np.array([np.linalg.norm(total / (j + 1) - z)
                     for j, (_, _, total) in enumerate(_greedy_uniform_path(H, z, t))])


def caratheodory_sparsify(H: SymmetricHull, z, t: int,
                          check_tol: float = SPARSIFY_CHECK_TOL) -> SparseCombination:
    """Uniform average of ``t`` signed vertices within ``2 max||v|| / sqrt(t)`` of ``z``.

    ``z`` must lie in the hull.  A point certified to be more than
    ``check_tol`` outside raises :class:`PreconditionViolation`.
    """
    z = np.asarray(z, dtype=float)
    if t < 1:
        raise InvalidArgument(f"t must be >= 1, got {t}")
    check = hull_distance(H, z, max_iters=SPARSIFY_CHECK_ITERS, stop_below=check_tol, stop_above=check_tol)
    if check.lower_bound > check_tol:
        raise PreconditionViolation(
            f"point lies outside the hull (distance >= {check.lower_bound:.3g})", measured=check.lower_bound)

    counts = np.zeros(2 * H.size)
    for i, s, _ in _greedy_uniform_path(H, z, t):
        counts[i if s > 0 else H.size + i] += 1
    return SparseCombination.from_dense(counts / t, H.size)
