"""PCA bases and subspace comparison on the Grassmannian."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import ProjectionBasis
from .errors import DimensionMismatch, InvalidInput
from .secants import DataMatrix


@dataclass(frozen=True)
class SingularSpectrum:
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise InvalidInput("singular values must be non-negative and non-increasing")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class PrincipalAngles:
    """Angles ``theta_1 <= ... <= theta_q`` in radians.

    ``u_vectors`` / ``v_vectors`` hold the matching principal vectors as
    columns when they were requested.
    """

    angles: np.ndarray
    u_vectors: Optional[np.ndarray] = None
    v_vectors: Optional[np.ndarray] = None

    @property
    def q(self) -> int:
        return len(self.angles)


def _as_basis(b) -> ProjectionBasis:
    return b if isinstance(b, ProjectionBasis) else ProjectionBasis(b)


def pca_basis(data: DataMatrix, m: int, center: bool = False):
    """Top-``m`` left singular vectors of the points-as-columns matrix.

    No mean is subtracted unless ``center`` is set.  Each column is oriented
    so its largest-magnitude entry is positive.

    Returns
    -------
    (ProjectionBasis, SingularSpectrum)
    """
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    X = data.points
    if center:
        X = X - X.mean(axis=0)
    if not 1 <= m <= min(data.N, data.n):
        raise DimensionMismatch(f"m={m} outside 1..min(N, n)={min(data.N, data.n)}")
    U, s, _ = np.linalg.svd(X.T, full_matrices=False)
    U = U[:, :m]
    flip = U[np.argmax(np.abs(U), axis=0), np.arange(m)] < 0
    U[:, flip] *= -1
    return ProjectionBasis(U), SingularSpectrum(s, source=data.label)


def principal_angles(U, V, vectors: bool = False) -> PrincipalAngles:
    """Principal angles between span(U) and span(V) from the SVD of ``U^T V``."""
    U, V = _as_basis(U), _as_basis(V)
    if U.n != V.n:
        raise DimensionMismatch(f"subspaces live in R^{U.n} and R^{V.n}")
    if not vectors:
        # fixed argument order makes the result exactly symmetric in (U, V)
        A, B = sorted((U.columns, V.columns), key=lambda c: (c.shape[1], c.tobytes()))
        cos = np.linalg.svd(A.T @ B, compute_uv=False)
        return PrincipalAngles(np.sort(np.arccos(np.clip(cos, 0.0, 1.0))))
    Y, cos, Zt = np.linalg.svd(U.columns.T @ V.columns, full_matrices=False)
    angles = np.arccos(np.clip(cos, 0.0, 1.0))
    q = len(cos)
    return PrincipalAngles(angles, U.columns @ Y[:, :q], V.columns @ Zt.T[:, :q])


def geodesic_distance(U, V) -> float:
    """Arc-length distance ``sqrt(sum theta_k^2)`` between equal-dimension subspaces."""
    U, V = _as_basis(U), _as_basis(V)
    if U.m != V.m:
        raise DimensionMismatch(f"subspace dimensions differ: {U.m} vs {V.m}")
    theta = principal_angles(U, V).angles
    return float(np.sqrt(np.sum(theta ** 2)))
