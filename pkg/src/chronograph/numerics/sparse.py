"""Sparse CSR matrices and the propagation-operator normalization.

The propagation operator used by all graph convolutions is the
symmetric degree normalization of the adjacency with self-loops added:
``D^{-1/2} (A + I) D^{-1/2}`` where D holds the row sums of ``A + I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class ShapeError(ValueError):
    """Raised when matrix dimensions do not match an operation's contract."""


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable CSR matrix: sorted column indices, no explicit zeros."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    shape: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "indptr", np.asarray(self.indptr, dtype=np.int64))
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "data", np.asarray(self.data, dtype=np.float64))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))
        if len(self.indptr) != self.shape[0] + 1:
            raise ShapeError("indptr length must be rows + 1")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be monotone non-decreasing")
        if len(self.indices) != len(self.data):
            raise ValueError("indices and data must have equal length")
        if np.any(self.data == 0.0):
            raise ValueError("explicit zeros are not allowed")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("non-finite values are not allowed")
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.shape[1]:
                raise ValueError("column indices out of range")
            if self.indices.size > 1:
                # Consecutive indices must increase except across row starts.
                within_row = np.ones(self.indices.size - 1, dtype=bool)
                starts = self.indptr[1:-1]
                starts = starts[(starts > 0) & (starts < self.indices.size)]
                within_row[starts - 1] = False
                if np.any(np.diff(self.indices)[within_row] <= 0):
                    raise ValueError("column indices must be sorted and unique per row")

    @property
    def nnz(self) -> int:
        return int(len(self.data))

    @classmethod
    def from_scipy(cls, m: sp.spmatrix) -> "SparseMatrix":
        m = sp.csr_matrix(m)
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return cls(m.indptr, m.indices, m.data, m.shape)

    @classmethod
    def from_coo(
        cls, rows, cols, vals, shape: tuple[int, int]
    ) -> "SparseMatrix":
        """Build from coordinate triplets; duplicate entries are summed."""
        m = sp.coo_matrix(
            (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=shape
        )
        return cls.from_scipy(m)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(
            np.arange(n + 1, dtype=np.int64),
            np.arange(n, dtype=np.int64),
            np.ones(n, dtype=np.float64),
            (n, n),
        )

    @classmethod
    def block_diag(cls, blocks: list["SparseMatrix"]) -> "SparseMatrix":
        if not blocks:
            raise ValueError("need at least one block")
        return cls.from_scipy(sp.block_diag([b.to_scipy() for b in blocks], format="csr"))

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.data, self.indices, self.indptr), shape=self.shape
        )

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_scipy(self.to_scipy().T)


def normalize_adjacency(a: SparseMatrix, symmetrize: bool = False) -> SparseMatrix:
    """Degree-normalized adjacency with self-loops.

    Returns ``D^{-1/2} (A + I) D^{-1/2}`` with D the diagonal of row sums of
    ``A + I``. With ``symmetrize`` the input is first replaced by the binary
    union of itself and its transpose, which makes the result symmetric.
    """
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"adjacency must be square, got {a.shape}")
    n = a.shape[0]
    s = a.to_scipy()
    if symmetrize:
        s = s + s.T
        s.data[:] = 1.0
        s.sum_duplicates()
        s.data[:] = 1.0
    tilde = (s + sp.identity(n, format="csr")).tocoo()
    deg = np.asarray(tilde.sum(axis=1)).ravel()
    vals = tilde.data / np.sqrt(deg[tilde.row] * deg[tilde.col])
    return SparseMatrix.from_coo(tilde.row, tilde.col, vals, (n, n))


def spmm(s: SparseMatrix, d: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``S @ D``."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or s.shape[1] != d.shape[0]:
        raise ShapeError(f"cannot multiply {s.shape} by {d.shape}")
    return np.asarray(s.to_scipy() @ d)
