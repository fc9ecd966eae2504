"""Orthonormal projection bases."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput

ORTHO_TOL = 1e-10


def orthonormalize(columns: np.ndarray) -> np.ndarray:
    """QR-orthonormalize ``columns`` keeping each column's orientation."""
    q, r = np.linalg.qr(columns)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


@dataclass(frozen=True)
class ProjectionBasis:
    """An ``n x m`` matrix with orthonormal columns.

    The columns span the target subspace of an orthogonal projection
    ``R^n -> R^m``; ``columns.T @ x`` are the projected coordinates of ``x``.
    """

    columns: np.ndarray

    def __post_init__(self):
        cols = np.array(self.columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        if cols.ndim != 2:
            raise InvalidInput("basis must be a 2-D array")
        n, m = cols.shape
        if not 1 <= m <= n:
            raise InvalidInput(f"need 1 <= m <= n, got n={n}, m={m}")
        if not np.all(np.isfinite(cols)):
            raise InvalidInput("basis has non-finite entries")
        err = np.abs(cols.T @ cols - np.eye(m)).max()
        if err >= ORTHO_TOL:
            raise InvalidInput(f"columns are not orthonormal (max deviation {err:.2e})")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def m(self) -> int:
        return self.columns.shape[1]

    @classmethod
    def from_matrix(cls, matrix) -> "ProjectionBasis":
        """Build a basis from any full-column-rank matrix via QR."""
        return cls(orthonormalize(np.atleast_2d(np.asarray(matrix, dtype=float))))

    @classmethod
    def identity(cls, n: int) -> "ProjectionBasis":
        return cls(np.eye(n))

    def project(self, points: np.ndarray) -> np.ndarray:
        """Coordinates of row-major ``points`` in this basis."""
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.n:
            raise DimensionMismatch(f"points have dimension {points.shape[-1]}, basis expects {self.n}")
        return points @ self.columns

    def transformed(self, q: np.ndarray) -> "ProjectionBasis":
        """The basis ``Q B`` for an orthogonal ``Q``."""
        return ProjectionBasis.from_matrix(np.asarray(q) @ self.columns)


def as_columns(basis) -> np.ndarray:
    if isinstance(basis, ProjectionBasis):
        return basis.columns
    cols = np.asarray(basis, dtype=float)
    return cols[:, None] if cols.ndim == 1 else cols
