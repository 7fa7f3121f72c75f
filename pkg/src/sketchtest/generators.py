"""Planted and adversarial instances, plus exhaustive RIP and incoherence
certificates for the dictionaries they use."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import BudgetExceeded, CertificationFailure, InvalidArgument

PLANTED_TOL = 1e-10
UNIT_COLUMN_TOL = 1e-12


class DictionaryKind(str, enum.Enum):
    IDENTITY = "identity"
    ORTHOGONAL = "orthogonal"
    GAUSSIAN = "gaussian-normalized"
    UNION_OF_ORTHOBASES = "union-of-orthobases"


def gen_dictionary(d: int, m: int, kind, seed) -> np.ndarray:
    """Unit-column ``d x m`` dictionary of the given kind.

    ``identity`` and ``orthogonal`` need ``m <= d``; ``union-of-orthobases``
    stacks the identity with ``m/d - 1`` Haar rotations and needs ``d | m``.
    """
    kind = DictionaryKind(kind)
    if d < 1 or m < 1:
        raise InvalidArgument(f"dimensions must be positive, got d={d}, m={m}")
    gen = linalg.rng(seed, "dictionary", kind.value)
    if kind is DictionaryKind.IDENTITY:
        if m > d:
            raise InvalidArgument(f"identity dictionary needs m <= d, got m={m}, d={d}")
        return np.eye(d)[:, :m]
    if kind is DictionaryKind.ORTHOGONAL:
        if m > d:
            raise InvalidArgument(f"orthogonal dictionary needs m <= d, got m={m}, d={d}")
        return linalg.random_rotation(d, gen)[:, :m]
    if kind is DictionaryKind.GAUSSIAN:
        return linalg.normalize_columns(gen.standard_normal((d, m)))
    if m % d:
        raise InvalidArgument(f"union of orthobases needs m to be a multiple of d, got m={m}, d={d}")
    blocks = [np.eye(d)] + [linalg.random_rotation(d, gen) for _ in range(m // d - 1)]
    return np.hstack(blocks)


def gen_subspace_dictionary(d: int, m: int, rank: int, seed) -> np.ndarray:
    """Gaussian-normalised columns confined to a random ``rank``-dim subspace."""
    if not 1 <= rank <= d:
        raise InvalidArgument(f"need 1 <= rank <= d, got rank={rank}, d={d}")
    gen = linalg.rng(seed, "subspace")
    basis = linalg.random_rotation(d, gen)[:, :rank]
    return linalg.normalize_columns(basis @ gen.standard_normal((rank, m)))


def gen_sparse_vector(m: int, k: int, seed) -> np.ndarray:
    """Unit vector with a uniform size-``k`` support and Gaussian values on it."""
    if not 1 <= k <= m:
        raise InvalidArgument(f"need 1 <= k <= m, got k={k}, m={m}")
    gen = linalg.rng(seed) if not isinstance(seed, np.random.Generator) else seed
    x = np.zeros(m)
    support = gen.choice(m, size=k, replace=False)
    vals = gen.standard_normal(k)
    while not np.any(vals):
        vals = gen.standard_normal(k)
    x[support] = vals / np.linalg.norm(vals)
    return x


@dataclass
class PlantedInstance:
    Y: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    kind: str
    seed: int
    k: int
    noise: float = 0.0

    @property
    def shape(self):
        d, m = self.A.shape
        return {"d": d, "m": m, "k": self.k, "p": self.Y.shape[1]}

    def check(self) -> None:
        """Raise if the planted invariants do not hold (before noise)."""
        if not np.allclose(self.A @ self.X, self.Y, atol=PLANTED_TOL, rtol=0):
            raise AssertionError("Y != A X")
        norms = np.linalg.norm(self.X, axis=0)
        if not np.allclose(norms, 1.0, atol=PLANTED_TOL):
            raise AssertionError("coefficient columns are not unit norm")
        if np.count_nonzero(self.X, axis=0).max() > self.k:
            raise AssertionError(f"coefficient columns have more than {self.k} nonzeros")
        if not np.allclose(np.linalg.norm(self.A, axis=0), 1.0, atol=UNIT_COLUMN_TOL):
            raise AssertionError("dictionary columns are not unit norm")


def gen_planted(d: int, m: int, k: int, p: int, kind, seed) -> PlantedInstance:
    if p < 1:
        raise InvalidArgument("p must be positive")
    kind = DictionaryKind(kind)
    A = gen_dictionary(d, m, kind, linalg.derive_seed(seed, "A"))
    gen = linalg.rng(seed, "X")
    X = np.column_stack([gen_sparse_vector(m, k, gen) for _ in range(p)])
    inst = PlantedInstance(Y=A @ X, A=A, X=X, kind=kind.value, seed=linalg.check_seed(seed), k=k)
    inst.check()
    return inst


def _noise_directions(Y, gen, orthogonal):
    E = gen.standard_normal(Y.shape)
    if orthogonal:
        norms2 = np.einsum("ij,ij->j", Y, Y)
        E = E - Y * (np.einsum("ij,ij->j", E, Y) / np.where(norms2 > 0, norms2, 1.0))
    return linalg.normalize_columns(E)


def add_noise(instance, eta: float, seed, on_sphere: bool = False) -> np.ndarray:
    """Perturb every column by exactly ``eta`` in an independent random direction.

    With ``on_sphere`` the perturbation keeps each column's norm: the column is
    turned towards a random orthogonal direction by the angle whose chord is
    ``eta``.  Norm-preserving noise is what a tester that screens norms first
    can tolerate.
    """
    if eta < 0:
        raise InvalidArgument("eta must be non-negative")
    Y = instance.Y if isinstance(instance, PlantedInstance) else np.asarray(instance, dtype=float)
    if eta == 0:
        return Y.copy()
    gen = linalg.rng(seed, "noise")
    U = _noise_directions(Y, gen, orthogonal=on_sphere)
    if not on_sphere:
        return Y + eta * U
    r = np.linalg.norm(Y, axis=0)
    if np.any(eta > 2 * r):
        raise InvalidArgument("on-sphere noise needs eta <= 2 ||y|| for every column")
    theta = 2 * np.arcsin(eta / (2 * r))
    return np.cos(theta) * Y + np.sin(theta) * r * U


def substituted_noise_bound(k: int, m: int, p: int) -> float:
    """Admissible noise level for the tolerant unknown-design tester, using the
    sparse-width upper bound ``2 sqrt(3k ln(m/k))`` in place of the exact width
    of unit k-sparse vectors: ``(sqrt 2 - 1) * bound / sqrt(ln p)``."""
    if p < 2:
        raise InvalidArgument("noise bound needs p >= 2")
    return (math.sqrt(2) - 1) * 2 * math.sqrt(3 * k * math.log(m / k)) / math.sqrt(math.log(p))


# -- far inputs for the known-design tester -------------------------------------

@dataclass(frozen=True)
class FarInstance:
    y: np.ndarray
    certified_residual: float
    method: str
    K: int


def gen_far_known(A, eps: float, K: int, seed, attempts: int = 200, budget: int | None = None,
                  method: str = "auto") -> FarInstance:
    """Unit y with ``||A x - y|| > eps`` for every x with at most K nonzeros.

    ``method="complement"`` draws y from the orthogonal complement of the range
    of A (residual 1 for every x; A must not span R^d).  ``"oracle"`` draws
    random unit vectors and certifies them by exhaustive search, raising
    :class:`CertificationFailure` after ``attempts`` failures.  ``"auto"`` uses
    the complement when it exists.
    """
    from .oracles import best_sparse_fit

    A = linalg.check_matrix(A, "dictionary")
    d = A.shape[0]
    if not 0 < eps < 1:
        raise InvalidArgument(f"eps must lie in (0, 1), got {eps}")
    if method not in ("auto", "complement", "oracle"):
        raise InvalidArgument(f"unknown method {method!r}")
    gen = linalg.rng(seed, "far")
    U, sv, _ = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(sv > sv.max() * max(A.shape) * np.finfo(float).eps))
    if method == "complement" and rank == d:
        raise InvalidArgument("dictionary spans R^d; no orthogonal complement")
    if rank < d and method != "oracle":
        comp = U[:, rank:]
        y = comp @ linalg.normalize_columns(gen.standard_normal((d - rank, 1)))[:, 0]
        return FarInstance(y=y, certified_residual=1.0, method="orthogonal-complement", K=K)
    for _ in range(attempts):
        y = linalg.unit_sphere(d, 1, gen)[:, 0]
        fit = best_sparse_fit(A, y, K, budget=budget)
        if fit.residual > eps:
            return FarInstance(y=y, certified_residual=fit.residual, method="oracle-certified", K=K)
    raise CertificationFailure(f"no certified far vector after {attempts} attempts (eps={eps}, K={K})")


# -- discretised sparse vectors ------------------------------------------------

def discretized_supports(gen: np.random.Generator, m: int, ell: int, count: int):
    """Uniform size-``ell`` supports and ``+-1/sqrt(ell)`` values, as
    ``(indices, values)`` arrays of shape ``(count, ell)``."""
    idx = np.argpartition(gen.random((count, m)), ell - 1, axis=1)[:, :ell] if ell < m \
        else np.tile(np.arange(m), (count, 1))
    vals = gen.choice([-1.0, 1.0], size=(count, ell)) / math.sqrt(ell)
    return idx, vals


@dataclass(frozen=True)
class DiscretizedSparseSample:
    vectors: np.ndarray = field(repr=False)  # m x count
    ell: int


def gen_discretized_sparse(m: int, ell: int, count: int, seed) -> DiscretizedSparseSample:
    if not 1 <= ell <= m:
        raise InvalidArgument(f"need 1 <= ell <= m, got ell={ell}, m={m}")
    idx, vals = discretized_supports(linalg.rng(seed, "discretized"), m, ell, count)
    V = np.zeros((count, m))
    np.put_along_axis(V, idx, vals, axis=1)
    return DiscretizedSparseSample(vectors=V.T, ell=ell)


def enumerate_discretized_sparse(m: int, ell: int) -> np.ndarray:
    """All ``C(m, ell) 2^ell`` discretised vectors, as columns."""
    cols = []
    signs = np.array(list(itertools.product([-1.0, 1.0], repeat=ell))) / math.sqrt(ell)
    for support in itertools.combinations(range(m), ell):
        block = np.zeros((len(signs), m))
        block[:, support] = signs
        cols.append(block)
    return np.vstack(cols).T


# -- RIP and incoherence --------------------------------------------------------

@dataclass(frozen=True)
class RIPCertificate:
    value: float
    k: int
    mode: str
    convention: str
    supports_checked: int
    is_lower_bound: bool
    worst_support: tuple


def certify_incoherence(A) -> float:
    """Largest ``|<a_i, a_j>|`` over distinct columns."""
    A = linalg.check_matrix(A, "dictionary")
    if A.shape[1] < 2:
        return 0.0
    G = np.abs(A.T @ A)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def _rip_values(A, supports, convention):
    sub = A[:, supports].transpose(1, 0, 2)
    sv = np.linalg.svd(sub, compute_uv=False)
    smax = sv[:, 0]
    smin = sv[:, -1] if supports.shape[1] <= A.shape[0] else np.zeros(len(sv))
    if convention == "energy":
        return np.maximum(1 - smin**2, smax**2 - 1)
    return np.maximum(1 - smin, smax - 1)


def certify_rip(A, k: int, mode: str = "exhaustive", budget: int | None = None, seed=0,
                convention: str = "norm") -> RIPCertificate:
    """Restricted isometry constant of order ``k``.

    ``convention="norm"`` measures ``max(1 - s_min, s_max - 1)`` over k-column
    submatrices; ``"energy"`` measures ``max(1 - s_min^2, s_max^2 - 1)``, the
    form in which ``(1 +- c)||x||^2`` bounds are stated.  Exhaustive mode is
    exact and refuses above ``budget`` supports; sampled mode checks ``budget``
    random supports and reports a lower bound.
    """
    from .oracles import support_budget

    A = linalg.check_matrix(A, "dictionary")
    m = A.shape[1]
    if not 1 <= k <= m:
        raise InvalidArgument(f"need 1 <= k <= m, got k={k}, m={m}")
    if convention not in ("norm", "energy"):
        raise InvalidArgument(f"unknown convention {convention!r}")
    budget = support_budget() if budget is None else budget

    if mode == "exhaustive":
        total = math.comb(m, k)
        if total > budget:
            raise BudgetExceeded(f"{total} supports exceed the budget of {budget}; use mode='sampled'", total)
        combos = itertools.combinations(range(m), k)
        worst, worst_s = -np.inf, ()
        while True:
            chunk = list(itertools.islice(combos, 4096))
            if not chunk:
                break
            supports = np.array(chunk, dtype=int)
            vals = _rip_values(A, supports, convention)
            j = int(np.argmax(vals))
            if vals[j] > worst:
                worst, worst_s = float(vals[j]), tuple(int(i) for i in supports[j])
        return RIPCertificate(worst, k, mode, convention, total, False, worst_s)

    if mode == "sampled":
        gen = linalg.rng(seed, "rip")
        supports = np.sort(np.argpartition(gen.random((budget, m)), k - 1, axis=1)[:, :k], axis=1) \
            if k < m else np.tile(np.arange(m), (budget, 1))
        vals = _rip_values(A, supports, convention)
        j = int(np.argmax(vals))
        return RIPCertificate(float(vals[j]), k, mode, convention, budget, True,
                              tuple(int(i) for i in supports[j]))

    raise InvalidArgument(f"unknown mode {mode!r}; expected 'exhaustive' or 'sampled'")
