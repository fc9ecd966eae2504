"""Normalized secant sets of point clouds.

A secant of a finite set ``D`` is the unit vector ``(x - y) / |x - y|`` for
two distinct points ``x, y`` of ``D``.  Secants that differ only by sign carry
the same information for projected norms, so only one representative is
stored (first coordinate of magnitude above ``SIGN_TOL`` positive).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .basis import as_columns
from .errors import AllPointsCoincident, DimensionMismatch, InvalidInput

SIGN_TOL = 1e-12
COINCIDENT_TOL = 1e-10
DEDUP_TOL = 1e-9
DEFAULT_MAX_SECANTS = 2_000_000
CHUNK = 1 << 16


@dataclass(frozen=True)
class DataMatrix:
    """``N`` points in ``R^n`` stored row-major, plus a free-form label."""

    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise InvalidInput("points must be an N x n array")
        if pts.shape[0] < 2 or pts.shape[1] < 1:
            raise InvalidInput(f"need N >= 2 points of dimension n >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInput("points contain NaN or Inf")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class SecantSet:
    """Deduplicated unit secants (``M x n``).

    ``pairs`` records the point indices ``(i, j)``, ``i < j``, each row was
    built from (``x_j - x_i``, up to sign).
    """

    secants: np.ndarray
    subsampled: bool = False
    seed: Optional[int] = None
    pairs: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        s = np.array(self.secants, dtype=float)
        if s.ndim != 2 or s.shape[0] < 1:
            raise InvalidInput("secant set must be a non-empty M x n array")
        if self.subsampled != (self.seed is not None):
            raise InvalidInput("seed must be given exactly when the set is subsampled")
        s.setflags(write=False)
        object.__setattr__(self, "secants", s)

    @property
    def M(self) -> int:
        return self.secants.shape[0]

    @property
    def n(self) -> int:
        return self.secants.shape[1]


def canonicalize(rows: np.ndarray) -> np.ndarray:
    """Flip rows so the first coordinate with magnitude > SIGN_TOL is positive."""
    rows = np.array(rows, dtype=float, copy=True)
    big = np.abs(rows) > SIGN_TOL
    first = np.argmax(big, axis=1)
    lead = rows[np.arange(len(rows)), first]
    rows[lead < 0] *= -1.0
    return rows


def pair_index_to_ij(p: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over ``{(i, j): i < j}`` (row-major) to ``(i, j)``."""
    i_all = np.arange(N, dtype=np.int64)
    starts = i_all * (2 * N - i_all - 1) // 2
    i = np.searchsorted(starts, p, side="right") - 1
    j = p - starts[i] + i + 1
    return i, j


@numba.njit(cache=True)
def _dedup_scan(rows, proj, order, pos, tol):
    M, n = rows.shape
    drop = np.zeros(M, dtype=np.bool_)
    tol2 = tol * tol
    for r in range(M):
        if drop[r]:
            continue
        p = pos[r]
        for direction in (-1, 1):
            q = p + direction
            while 0 <= q < M and abs(proj[order[q]] - proj[r]) < tol:
                c = order[q]
                if c > r and not drop[c]:
                    d2 = 0.0
                    for k in range(n):
                        diff = rows[c, k] - rows[r, k]
                        d2 += diff * diff
                        if d2 >= tol2:
                            break
                    if d2 < tol2:
                        drop[c] = True
                q += direction
    return drop


def _dedup(rows: np.ndarray) -> np.ndarray:
    """Indices of rows kept after merging rows closer than DEDUP_TOL.

    Rows are visited in index order; a kept row drops every later row within
    DEDUP_TOL of it.  Candidates come from a window of the rows sorted by
    their projection on a fixed random direction.
    """
    M = len(rows)
    if M < 2:
        return np.arange(M)
    d = np.random.default_rng(0).standard_normal(rows.shape[1])
    proj = rows @ (d / np.linalg.norm(d))
    order = np.argsort(proj, kind="stable")
    pos = np.empty(M, dtype=np.int64)
    pos[order] = np.arange(M)
    drop = _dedup_scan(np.ascontiguousarray(rows), proj, order, pos, DEDUP_TOL)
    return np.flatnonzero(~drop)


def build_secants(data: DataMatrix, max_secants: Optional[int] = DEFAULT_MAX_SECANTS,
                  seed: Optional[int] = None) -> SecantSet:
    """All normalized, sign-canonical, deduplicated secants of ``data``.

    When the number of index pairs exceeds ``max_secants`` a uniform sample of
    pairs (without replacement, ``numpy.random.default_rng(seed)``) is drawn
    first; the result is then flagged ``subsampled``.  Pairs of (numerically)
    coincident points are skipped.
    """
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    X = data.points
    N = data.N
    n_pairs = N * (N - 1) // 2
    if max_secants is not None and max_secants < 1:
        raise InvalidInput("max_secants must be positive")

    subsampled = max_secants is not None and n_pairs > max_secants
    if subsampled:
        if seed is None:
            seed = 0
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(n_pairs, size=max_secants, replace=False))
        ii, jj = pair_index_to_ij(chosen, N)
    else:
        ii, jj = np.triu_indices(N, 1)

    coincident = COINCIDENT_TOL * (1.0 + np.linalg.norm(X, axis=1).max())
    rows, keep_i, keep_j = [], [], []
    for start in range(0, len(ii), CHUNK):
        ci, cj = ii[start:start + CHUNK], jj[start:start + CHUNK]
        diff = X[cj] - X[ci]
        norms = np.linalg.norm(diff, axis=1)
        ok = norms >= coincident
        rows.append(canonicalize(diff[ok] / norms[ok, None]))
        keep_i.append(ci[ok])
        keep_j.append(cj[ok])
    S = np.concatenate(rows) if rows else np.empty((0, data.n))
    if len(S) == 0:
        raise AllPointsCoincident("every pairwise distance is below the coincidence tolerance")
    pairs = np.column_stack([np.concatenate(keep_i), np.concatenate(keep_j)])

    keep = _dedup(S)
    return SecantSet(S[keep], subsampled=bool(subsampled),
                     seed=int(seed) if subsampled else None, pairs=pairs[keep])


def projected_sq_norms(secants, basis, chunk_size: int = CHUNK) -> np.ndarray:
    """Squared norms ``|B^T s|^2`` for every secant row, chunk by chunk."""
    S = secants.secants if isinstance(secants, SecantSet) else np.asarray(secants)
    B = as_columns(basis)
    if B.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"basis is for R^{B.shape[0]}, secants live in R^{S.shape[1]}")
    out = np.empty(len(S))
    for start in range(0, len(S), chunk_size):
        P = S[start:start + chunk_size] @ B
        out[start:start + chunk_size] = np.einsum("ij,ij->i", P, P)
    return out


def min_projected_norm(secants, basis, chunk_size: int = CHUNK,
                       threads: Optional[int] = None) -> tuple[float, int]:
    """Smallest projected secant norm and the (lowest) index attaining it.

    Chunks are reduced independently and combined by ``(value, index)`` so the
    answer does not depend on ``threads``.
    """
    S = secants.secants if isinstance(secants, SecantSet) else np.asarray(secants)
    B = as_columns(basis)
    if B.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"basis is for R^{B.shape[0]}, secants live in R^{S.shape[1]}")

    def chunk_min(start):
        P = S[start:start + chunk_size] @ B
        q = np.einsum("ij,ij->i", P, P)
        k = int(np.argmin(q))
        return q[k], start + k

    starts = range(0, len(S), chunk_size)
    if threads and threads > 1 and len(S) > chunk_size:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            mins = list(pool.map(chunk_min, starts))
    else:
        mins = [chunk_min(s) for s in starts]
    q, idx = min(mins)
    return float(np.sqrt(max(q, 0.0))), int(idx)


def span_reduce(data: DataMatrix, tol: float = 1e-12) -> tuple[DataMatrix, np.ndarray]:
    """Re-express ``data`` isometrically inside the span of its differences.

    Returns the reduced points and an ``n x r`` orthonormal frame ``F`` with
    ``(x - x_0) = F @ y``.  Every secant lies in the span, so secant norms (and
    hence kappa values) are unchanged while the ambient dimension drops to
    ``r <= N - 1``.  Bases found in the reduced space map back as ``F @ B``.
    """
    X = data.points
    D = X - X[0]
    U, s, _ = np.linalg.svd(D.T, full_matrices=False)
    r = int(np.sum(s > tol * max(s[0], 1.0))) if len(s) else 0
    if r == 0:
        raise AllPointsCoincident("all points coincide")
    F = U[:, :r]
    return DataMatrix(D @ F, label=data.label), F
