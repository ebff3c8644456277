"""The photon-number measurement channel and its isotypic projectors.

The Haar average of "evolve, measure in the Fock basis, undo the evolution"
acts on the n-photon operator space as sum_k s_k P_k, where P_k projects
onto the k-th isotypic block of the conjugation representation and

    s_k = (m - 1) / ((2k + m - 1) * C(k + m - 2, k)),      s_0 = 1,
    dim_k = (2k + m - 1) / (m - 1) * C(k + m - 2, k)^2.

The projectors are built constructively: the quadratic invariant
C = sum_ij ad(E_ij) ad(E_ji) of the generator algebra takes the distinct
integer value 2k(k + m - 1) on block k, so Lagrange interpolation in C
yields every P_k without any explicit coupling-coefficient machinery.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import GuardError
from .fock import SectorBasis, enumerate_sector_basis, lift_to_sector
from .generators import build_generator_table
from .sparsemat import SymmetricSparseMatrix

#: Cap on dense entries of the order-d^2 superoperator, (d^2)^2 <= this.
DEFAULT_SUPEROP_ENTRY_CAP = 10**8

#: Largest superoperator order for which Lagrange products use dense
#: intermediates; above this a sparse polynomial-product path takes over.
DENSE_LAGRANGE_MAX_ORDER = 40_000

#: Entries below this are dropped from finished projectors; re-validated by
#: the idempotency tests.
PROJECTOR_DROP_TOL = 1e-12


def irrep_count(m: int, n: int) -> int:
    return 1 if m == 1 else n + 1


def casimir_eigenvalue(m: int, k: int) -> int:
    return 2 * k * (k + m - 1)


def irrep_dimension(m: int, k: int) -> int:
    if k == 0:
        return 1
    num = (2 * k + m - 1) * math.comb(k + m - 2, k) ** 2
    if num % (m - 1):
        raise ValueError(f"dimension formula not integral for m={m}, k={k}")
    return num // (m - 1)


def channel_eigenvalue_closed_form(m: int, k: int) -> float:
    if k == 0:
        return 1.0
    return (m - 1) / ((2 * k + m - 1) * math.comb(k + m - 2, k))


def sector_casimir_constant(m: int, n: int) -> int:
    """Value of sum_ij E_ij E_ji on the (irreducible) n-photon sector."""
    return n * (n + m - 1)


def guard_superoperator(m: int, n: int, max_entries: int = DEFAULT_SUPEROP_ENTRY_CAP) -> int:
    d = math.comb(n + m - 1, n)
    order = d * d
    if order * order > max_entries:
        raise GuardError(
            f"superoperator for (m={m}, n={n}) has order {order} "
            f"({order * order:.2e} dense entries > cap {max_entries:.0e})"
        )
    return d


def casimir_superoperator(m: int, n: int, max_entries: int = DEFAULT_SUPEROP_ENTRY_CAP) -> SymmetricSparseMatrix:
    """sum_ij ad(E_ij) ad(E_ji) on the vectorized operator space (row-major).

    With ad(X) = X (x) I - I (x) X^T this reduces to
    2 c(m, n) I - 2 sum_ij E_ij (x) E_ji^T, where c(m, n) = n(n + m - 1).
    Real symmetric; annihilates the vectorized identity.
    """
    d = guard_superoperator(m, n, max_entries)
    basis = enumerate_sector_basis(m, n)
    gens = build_generator_table(basis)
    order = d * d
    k_sum = sp.csc_matrix((order, order))
    for i in range(m):
        for j in range(m):
            k_sum = k_sum + sp.kron(gens[(i, j)], gens[(j, i)].T, format="csc")
    c = sector_casimir_constant(m, n)
    cas = 2.0 * c * sp.identity(order, format="csc") - 2.0 * k_sum
    cas.eliminate_zeros()
    return SymmetricSparseMatrix.from_scipy(cas)


@dataclass(frozen=True)
class IrrepProjector:
    k: int
    dim: int
    matrix: SymmetricSparseMatrix


@dataclass(frozen=True)
class MeasurementChannel:
    m: int
    n: int
    basis: SectorBasis
    eigenvalues: np.ndarray  # s_0 .. s_n
    projectors: tuple  # of IrrepProjector

    @property
    def sector_dim(self) -> int:
        return self.basis.size

    @property
    def superop_order(self) -> int:
        return self.basis.size ** 2


def _lagrange_dense(cas_dense, mus, k):
    d2 = cas_dense.shape[0]
    out = np.eye(d2)
    for j, mu in enumerate(mus):
        if j == k:
            continue
        out = out @ (cas_dense - mu * np.eye(d2))
        out /= mus[k] - mu
    return out


def _lagrange_sparse(cas, mus, k, drop_tol=1e-14):
    d2 = cas.shape[0]
    out = sp.identity(d2, format="csc")
    for j, mu in enumerate(mus):
        if j == k:
            continue
        out = out @ (cas - mu * sp.identity(d2, format="csc"))
        out /= mus[k] - mu
        out.data[np.abs(out.data) < drop_tol] = 0.0
        out.eliminate_zeros()
    return out


def build_irrep_projectors(
    m: int,
    n: int,
    max_entries: int = DEFAULT_SUPEROP_ENTRY_CAP,
    dense_max_order: int = DENSE_LAGRANGE_MAX_ORDER,
) -> list[IrrepProjector]:
    """Spectral projectors of the sector Casimir, one per isotypic block.

    Eigenvalues 2k(k+m-1) are integers at least 2m apart, so the spectral
    split is unconditionally well separated at any valid (m, n).
    """
    d = guard_superoperator(m, n, max_entries)
    count = irrep_count(m, n)
    if count == 1:
        eye = SymmetricSparseMatrix.from_scipy(sp.identity(d * d, format="csc"))
        return [IrrepProjector(k=0, dim=d * d, matrix=eye)]
    cas = casimir_superoperator(m, n, max_entries)
    mus = [float(casimir_eigenvalue(m, k)) for k in range(count)]
    order = d * d
    projectors = []
    use_dense = order <= dense_max_order
    cas_for_products = cas.to_dense() if use_dense else cas.to_scipy()
    for k in range(count):
        if use_dense:
            raw = _lagrange_dense(cas_for_products, mus, k)
            raw = (raw + raw.T) / 2.0
            mat = SymmetricSparseMatrix.from_dense(raw, drop_tol=PROJECTOR_DROP_TOL)
        else:
            raw = _lagrange_sparse(cas_for_products, mus, k)
            raw = (raw + raw.T) / 2.0
            mat = SymmetricSparseMatrix.from_scipy(raw, drop_tol=PROJECTOR_DROP_TOL)
        dim = irrep_dimension(m, k)
        trace = mat.trace()
        if abs(trace - dim) > 1e-6 * max(1.0, dim):
            raise RuntimeError(
                f"projector k={k} for (m={m}, n={n}) has trace {trace!r}, expected {dim}; "
                "eigenvalue clustering failed"
            )
        projectors.append(IrrepProjector(k=k, dim=dim, matrix=mat))
    return projectors


def build_measurement_channel(
    m: int, n: int, max_entries: int = DEFAULT_SUPEROP_ENTRY_CAP
) -> MeasurementChannel:
    basis = enumerate_sector_basis(m, n)
    projectors = tuple(build_irrep_projectors(m, n, max_entries))
    eigenvalues = np.array(
        [channel_eigenvalue_closed_form(m, p.k) for p in projectors]
    )
    return MeasurementChannel(m=m, n=n, basis=basis, eigenvalues=eigenvalues, projectors=projectors)


def schur_oracle_eigenvalue(projector: IrrepProjector, d: int) -> float:
    """tr(M P_k) / tr(P_k) with M the Fock-basis dephasing map, evaluated
    exactly from the stored projector diagonal."""
    idx = np.arange(d) * d + np.arange(d)
    return float(projector.matrix.diag[idx].sum() / projector.matrix.trace())


def channel_eigenvalue(
    m: int, k: int, mode: str = "closed_form", channel: MeasurementChannel | None = None
) -> float:
    """Channel eigenvalue s_k, either in closed form or from the Schur trace."""
    if mode == "closed_form":
        if k < 0 or (m > 1 and channel is not None and k >= len(channel.projectors)):
            raise ValueError(f"irrep index k={k} out of range")
        if m == 1 and k != 0:
            raise ValueError("m=1 has only the trivial irrep")
        return channel_eigenvalue_closed_form(m, k)
    if mode == "schur_oracle":
        if channel is None:
            raise ValueError("schur_oracle mode needs a built channel")
        if not 0 <= k < len(channel.projectors):
            raise ValueError(f"irrep index k={k} out of range")
        return schur_oracle_eigenvalue(channel.projectors[k], channel.sector_dim)
    raise ValueError(f"unknown mode {mode!r}")


def apply_channel(channel: MeasurementChannel, x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """sum_k s_k^{+-1} P_k(X) via sparse symmetric matvecs on vec(X)."""
    d = channel.sector_dim
    x = np.asarray(x)
    if x.shape != (d, d):
        raise ValueError(f"operator has shape {x.shape}, expected ({d}, {d})")
    vec = np.ascontiguousarray(x, dtype=np.complex128).reshape(-1)
    out = np.zeros_like(vec)
    for s, proj in zip(channel.eigenvalues, channel.projectors):
        weight = 1.0 / s if inverse else s
        out += weight * proj.matrix.matvec(vec)
    return out.reshape(d, d)


def snapshot_operator(channel: MeasurementChannel, u: np.ndarray, s) -> np.ndarray:
    """Inverse-channel image of the measured projector, M^{-1}(phi^dag |s><s| phi).

    Hermitian with unit trace (s_0 = 1 makes the inverse trace-preserving);
    averaging snapshots over the Haar-and-outcome law reproduces the state.
    """
    basis = channel.basis
    if sum(int(x) for x in s) != channel.n:
        raise ValueError(f"outcome {tuple(s)} does not carry n={channel.n} photons")
    phi = lift_to_sector(u, channel.n, basis=basis)
    ket = phi.conj().T[:, basis.position(s)]
    return apply_channel(channel, np.outer(ket, ket.conj()), inverse=True)


def channel_superoperator_dense(channel: MeasurementChannel, inverse: bool = False) -> np.ndarray:
    """Dense order-d^2 matrix of the channel (tests and small demos only)."""
    out = np.zeros((channel.superop_order, channel.superop_order))
    for s, proj in zip(channel.eigenvalues, channel.projectors):
        weight = 1.0 / s if inverse else s
        out += weight * proj.matrix.to_dense()
    return out


def validate_channel(channel: MeasurementChannel, rng=None, tol: float = 1e-8) -> None:
    """Fast spot-check of the projector algebra (used after cache loads).

    Verifies eigenvalues against the closed form, traces against the
    dimension formula, and completeness/idempotency on random vectors.
    """
    m, d = channel.m, channel.sector_dim
    rng = np.random.default_rng(rng)
    for s, proj in zip(channel.eigenvalues, channel.projectors):
        closed = channel_eigenvalue_closed_form(m, proj.k)
        if abs(s - closed) > 1e-12:
            raise RuntimeError(f"stored eigenvalue {s} != closed form {closed} at k={proj.k}")
        if abs(proj.matrix.trace() - proj.dim) > 1e-6 * max(1.0, proj.dim):
            raise RuntimeError(f"projector k={proj.k} trace deviates from dim {proj.dim}")
    x = rng.standard_normal(d * d)
    total = np.zeros_like(x)
    for proj in channel.projectors:
        px = proj.matrix.matvec(x)
        if np.linalg.norm(proj.matrix.matvec(px) - px) > tol * max(1.0, np.linalg.norm(px)):
            raise RuntimeError(f"projector k={proj.k} fails idempotency spot-check")
        total += px
    if np.linalg.norm(total - x) > tol * np.linalg.norm(x):
        raise RuntimeError("projectors fail completeness spot-check")
