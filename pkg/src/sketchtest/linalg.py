"""Seeded sampling and the dense linear algebra shared by every other module.

Matrices are plain ``float64`` numpy arrays.  Every random draw goes through
:func:`rng`, which builds a PCG64 generator from a :class:`numpy.random.SeedSequence`
keyed by ``(seed, *keys)``.  Equal seeds and keys give bit-identical streams,
and distinct keys give independent streams, so per-trial work can be
parallelised without coordination.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import DegenerateInput, InvalidArgument

# Tolerances; callers may override per call.
ORTHOGONALITY_TOL = 1e-10
UNIT_NORM_TOL = 1e-12

SEED_MAX = 2**64 - 1

SPTX_MAGIC = b"SPTX"
SPTX_VERSION = 1
_SPTX_HEADER = struct.Struct("<4sBQQ")


def check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgument(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _key(k) -> int:
    if isinstance(k, str):
        # stable across processes, unlike hash()
        return int.from_bytes(hashlib.blake2b(k.encode("utf-8"), digest_size=8).digest(), "little")
    return int(k)


def rng(seed, *keys) -> np.random.Generator:
    """Generator for the stream identified by ``seed`` and optional ``keys``.

    Keys may be ints or short strings, e.g. ``rng(seed, "sketch", trial)``.
    """
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *keys) -> int:
    """A fresh 64-bit seed deterministically derived from ``(seed, *keys)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(_key(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _as_generator(seed_or_gen) -> np.random.Generator:
    if isinstance(seed_or_gen, np.random.Generator):
        return seed_or_gen
    return rng(seed_or_gen)


def gaussian_matrix(rows: int, cols: int, scale: float, seed) -> np.ndarray:
    """``rows x cols`` matrix with i.i.d. N(0, scale**2) entries.

    ``seed`` may also be a ready-made :class:`numpy.random.Generator`.
    """
    if rows < 1 or cols < 1:
        raise InvalidArgument(f"dimensions must be positive, got {rows}x{cols}")
    if not scale > 0:
        raise InvalidArgument(f"scale must be positive, got {scale}")
    return scale * _as_generator(seed).standard_normal((rows, cols))


def random_rotation(d: int, seed) -> np.ndarray:
    """Haar-distributed orthogonal ``d x d`` matrix.

    QR of a square Gaussian matrix, with the columns of Q flipped so that R has
    a positive diagonal; without the flip the result is not rotation invariant.
    """
    if d < 1:
        raise InvalidArgument(f"dimension must be positive, got {d}")
    g = _as_generator(seed).standard_normal((d, d))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def normalize_columns(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    norms = np.linalg.norm(M, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateInput(f"column {int(zero[0])} has zero norm")
    return M / norms


def unit_sphere(d: int, count: int, seed) -> np.ndarray:
    """``count`` uniform points on the unit sphere in R^d, as columns."""
    return normalize_columns(_as_generator(seed).standard_normal((d, count)))


def check_matrix(M, name="matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidArgument(f"{name} must be 2-D, got shape {M.shape}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidArgument(f"{name} has an empty dimension: {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidArgument(f"{name} has non-finite entries")
    return M


# -- file formats -------------------------------------------------------------

def save_csv(path, M) -> None:
    """One matrix row per line, comma separated, no header."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def load_csv(path) -> np.ndarray:
    M = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return check_matrix(M, str(path))


def save_sptx(path, M) -> None:
    """Binary format: ``SPTX``, version byte, rows and cols as little-endian
    uint64, then row-major little-endian float64 entries."""
    M = np.atleast_2d(np.asarray(M, dtype="<f8"))
    rows, cols = M.shape
    with open(path, "wb") as fh:
        fh.write(_SPTX_HEADER.pack(SPTX_MAGIC, SPTX_VERSION, rows, cols))
        fh.write(np.ascontiguousarray(M).tobytes(order="C"))


def load_sptx(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _SPTX_HEADER.size:
        raise InvalidArgument(f"{path}: truncated header")
    magic, version, rows, cols = _SPTX_HEADER.unpack_from(data)
    if magic != SPTX_MAGIC:
        raise InvalidArgument(f"{path}: bad magic {magic!r}")
    if version != SPTX_VERSION:
        raise InvalidArgument(f"{path}: unsupported version {version}")
    body = data[_SPTX_HEADER.size:]
    if len(body) != 8 * rows * cols:
        raise InvalidArgument(f"{path}: expected {rows * cols} entries, got {len(body) // 8}")
    M = np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(float)
    return check_matrix(M, str(path))


def load_matrix(path) -> np.ndarray:
    """Load CSV or SPTX, chosen by sniffing the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    return load_sptx(path) if head == SPTX_MAGIC else load_csv(path)
