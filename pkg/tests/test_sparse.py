import numpy as np
import pytest
import scipy.sparse as sp

from fockshadow import SymmetricSparseMatrix


def random_symmetric_sparse(order, density, rng):
    raw = sp.random(order, order, density=density, random_state=rng, format="csc")
    sym = (raw + raw.T) / 2.0
    return sym.tocsc()


def test_diagonal_matrix_matvec_is_elementwise():
    diag = np.array([2.0, -1.0, 0.5, 3.0])
    mat = SymmetricSparseMatrix.from_dense(np.diag(diag))
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(mat.matvec(x), diag * x, atol=1e-15)


def test_zero_matrix_gives_zero_vector():
    mat = SymmetricSparseMatrix.from_dense(np.zeros((5, 5)))
    assert mat.nnz == 0
    assert np.all(mat.matvec(np.ones(5)) == 0.0)


@pytest.mark.parametrize("order,density", [(100, 0.1), (100, 0.02), (250, 0.01)])
def test_matvec_matches_dense_oracle(order, density):
    rng = np.random.default_rng(order)
    sym = random_symmetric_sparse(order, density, rng)
    mat = SymmetricSparseMatrix.from_scipy(sym)
    dense = sym.toarray()
    x = rng.standard_normal(order)
    assert np.max(np.abs(mat.matvec(x) - dense @ x)) < 1e-12


def test_complex_vector_path():
    rng = np.random.default_rng(7)
    sym = random_symmetric_sparse(80, 0.05, rng)
    mat = SymmetricSparseMatrix.from_scipy(sym)
    x = rng.standard_normal(80) + 1j * rng.standard_normal(80)
    assert np.max(np.abs(mat.matvec(x) - sym.toarray() @ x)) < 1e-12


def test_only_upper_triangle_stored():
    a = np.array([[1.0, 2.0], [2.0, 5.0]])
    mat = SymmetricSparseMatrix.from_dense(a)
    assert mat.nnz == 3  # (0,0), (0,1), (1,1); the mirrored (1,0) is implicit
    assert np.allclose(mat.to_dense(), a)


def test_round_trip_through_triangle_arrays():
    rng = np.random.default_rng(13)
    sym = random_symmetric_sparse(60, 0.08, rng)
    mat = SymmetricSparseMatrix.from_scipy(sym)
    rebuilt = SymmetricSparseMatrix.from_triangle_arrays(
        mat.order, mat.colptr, mat.rowidx, mat.values
    )
    assert np.array_equal(rebuilt.diag, mat.diag)
    assert np.allclose(rebuilt.to_dense(), mat.to_dense())


def test_lower_triangle_entries_rejected():
    # a strictly-lower entry in the stored arrays is a format violation
    with pytest.raises(ValueError):
        SymmetricSparseMatrix.from_triangle_arrays(
            2, np.array([0, 1, 1]), np.array([1]), np.array([3.0])
        )


def test_shape_mismatch_rejected():
    mat = SymmetricSparseMatrix.from_dense(np.eye(4))
    with pytest.raises(ValueError):
        mat.matvec(np.ones(5))
