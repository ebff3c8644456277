"""Symmetric sparse matrices: upper triangle in CSC, single-pass matvec.

The stored triangle includes the diagonal; the diagonal is additionally
kept as a dense vector so the product can be computed in one sweep as

    A x = A_tri x + (x^T A_tri)^T - diag(A) * x,

which touches every stored entry exactly once.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

try:
    import numba as _nb
except ImportError:  # pragma: no cover
    _nb = None

_NB_COMPILED = _nb is not None

if _NB_COMPILED:
    @_nb.njit(cache=True)
    def _symspmv_jit(colptr, rowidx, values, diag, x, y):
        order = x.shape[0]
        for j in range(order):
            xj = x[j]
            acc = 0.0 * xj
            for p in range(colptr[j], colptr[j + 1]):
                i = rowidx[p]
                v = values[p]
                y[i] += v * xj
                acc += v * x[i]
            y[j] += acc
        for i in range(order):
            y[i] -= diag[i] * x[i]


@dataclass(frozen=True)
class SymmetricSparseMatrix:
    """Order-N real symmetric matrix, upper triangle (incl. diagonal) in CSC."""

    order: int
    colptr: np.ndarray  # int64, order + 1
    rowidx: np.ndarray  # int64, nnz
    values: np.ndarray  # float64, nnz
    diag: np.ndarray    # float64, order

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.order,):
            raise ValueError(f"vector has shape {x.shape}, expected ({self.order},)")
        if np.iscomplexobj(x):
            x = np.ascontiguousarray(x, dtype=np.complex128)
            y = np.zeros(self.order, dtype=np.complex128)
        else:
            x = np.ascontiguousarray(x, dtype=np.float64)
            y = np.zeros(self.order, dtype=np.float64)
        if _NB_COMPILED:
            _symspmv_jit(self.colptr, self.rowidx, self.values, self.diag, x, y)
        else:
            upper = self._scipy_upper()
            y = upper @ x + upper.T @ x - self.diag * x
        return y

    def trace(self) -> float:
        return float(self.diag.sum())

    def _scipy_upper(self) -> sp.csc_matrix:
        return sp.csc_matrix(
            (self.values, self.rowidx, self.colptr), shape=(self.order, self.order)
        )

    def to_scipy(self) -> sp.csc_matrix:
        upper = self._scipy_upper()
        return (upper + upper.T - sp.diags(self.diag)).tocsc()

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    @staticmethod
    def from_scipy(a: sp.spmatrix, drop_tol: float = 0.0) -> "SymmetricSparseMatrix":
        """Store the upper triangle of a (numerically) symmetric matrix."""
        a = sp.csc_matrix(a)
        upper = sp.triu(a, k=0, format="csc")
        upper.sort_indices()
        if drop_tol > 0.0:
            upper.data[np.abs(upper.data) < drop_tol] = 0.0
            upper.eliminate_zeros()
        diag = np.asarray(a.diagonal(), dtype=np.float64)
        if drop_tol > 0.0:
            diag[np.abs(diag) < drop_tol] = 0.0
        return SymmetricSparseMatrix(
            order=a.shape[0],
            colptr=np.asarray(upper.indptr, dtype=np.int64),
            rowidx=np.asarray(upper.indices, dtype=np.int64),
            values=np.asarray(upper.data, dtype=np.float64),
            diag=diag,
        )

    @staticmethod
    def from_dense(a: np.ndarray, drop_tol: float = 0.0) -> "SymmetricSparseMatrix":
        return SymmetricSparseMatrix.from_scipy(
            sp.csc_matrix(np.asarray(a, dtype=np.float64)), drop_tol
        )

    @staticmethod
    def from_triangle_arrays(order, colptr, rowidx, values) -> "SymmetricSparseMatrix":
        """Rebuild from raw upper-triangle CSC arrays (cache deserialization)."""
        colptr = np.ascontiguousarray(colptr, dtype=np.int64)
        rowidx = np.ascontiguousarray(rowidx, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        col_of_entry = np.repeat(np.arange(order, dtype=np.int64), np.diff(colptr))
        if np.any(rowidx > col_of_entry):
            raise ValueError("stored triangle has entries below the diagonal")
        diag = np.zeros(order, dtype=np.float64)
        on_diag = rowidx == col_of_entry
        np.add.at(diag, rowidx[on_diag], values[on_diag])
        return SymmetricSparseMatrix(
            order=order, colptr=colptr, rowidx=rowidx, values=values, diag=diag
        )
