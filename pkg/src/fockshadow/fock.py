"""Fock-sector combinatorics, permanents-based lifting and Haar sampling.

A *mode occupation* is a tuple of m nonnegative ints summing to n. The
n-photon sector over m modes has dimension C(n+m-1, n); its canonical
ordering here is lexicographic descending, so (m=2, n=1) enumerates as
[(1,0), (0,1)]. All caches, file formats and lifted matrices rely on this
ordering being deterministic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, PhotonNumberMismatch
from .permanent import permanent

#: Default cap on the sector dimension C(n+m-1, n); the protocol is
#: exponential by design, so anything bigger than this is refused loudly
#: instead of thrashing the machine.
DEFAULT_SECTOR_CAP = 10_000


def sector_dimension(m: int, n: int) -> int:
    return math.comb(n + m - 1, n)


def _descending_occupations(m, n):
    if m == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _descending_occupations(m - 1, n - first):
            yield (first, *rest)


@dataclass(frozen=True)
class SectorBasis:
    """Ordered basis of the n-photon sector over m modes."""

    m: int
    n: int
    states: tuple = field(repr=False)
    index: dict = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.states)

    def __len__(self):
        return len(self.states)

    def position(self, occupation) -> int:
        key = tuple(int(x) for x in occupation)
        if key not in self.index:
            raise KeyError(f"{key} is not an occupation of sector (m={self.m}, n={self.n})")
        return self.index[key]

    def occupancy_matrix(self) -> np.ndarray:
        """(size, m) int array; row i is the i-th occupation tuple."""
        return np.array(self.states, dtype=np.int64)

    def factorial_norms(self) -> np.ndarray:
        """sqrt(prod_i s_i!) for every basis element."""
        return np.array([math.sqrt(_occupation_factorial(s)) for s in self.states])


def _occupation_factorial(s):
    out = 1
    for x in s:
        out *= math.factorial(x)
    return out


_BASIS_CACHE: dict = {}


def enumerate_sector_basis(m: int, n: int, max_dim: int = DEFAULT_SECTOR_CAP) -> SectorBasis:
    """Enumerate the sector basis in lexicographic descending order.

    Raises GuardError when C(n+m-1, n) exceeds ``max_dim`` — the signal that
    a request has left desk scale.
    """
    if m < 1:
        raise ValueError("mode count must be >= 1")
    if n < 0:
        raise ValueError("photon count must be >= 0")
    d = sector_dimension(m, n)
    if d > max_dim:
        raise GuardError(
            f"sector (m={m}, n={n}) has dimension {d} > cap {max_dim}"
        )
    key = (m, n)
    cached = _BASIS_CACHE.get(key)
    if cached is None:
        states = tuple(_descending_occupations(m, n))
        cached = SectorBasis(m=m, n=n, states=states, index={s: i for i, s in enumerate(states)})
        _BASIS_CACHE[key] = cached
    return cached


def occupation_indices(s) -> np.ndarray:
    """Flatten an occupation into a list of mode indices, e.g. (2,0,1) -> [0,0,2]."""
    s = np.asarray(s, dtype=np.int64)
    return np.repeat(np.arange(s.size), s)


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def assert_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValueError(f"matrix is not unitary: max |U^H U - I| = {defect:.3e} > {tol:.1e}")


def transition_amplitude(u: np.ndarray, s, t) -> complex:
    """<s| lifted(u) |t> = per(U_{s,t}) / sqrt(prod s_i! t_i!).

    U_{s,t} repeats row i of u s_i times and column j t_j times.
    """
    s = tuple(int(x) for x in s)
    t = tuple(int(x) for x in t)
    if sum(s) != sum(t):
        raise PhotonNumberMismatch(f"photon numbers differ: sum{s}={sum(s)}, sum{t}={sum(t)}")
    rows = occupation_indices(s)
    cols = occupation_indices(t)
    sub = np.asarray(u)[np.ix_(rows, cols)]
    norm = math.sqrt(_occupation_factorial(s) * _occupation_factorial(t))
    return permanent(sub) / norm


def lift_to_sector(
    u: np.ndarray, n: int, basis: SectorBasis | None = None, max_dim: int = DEFAULT_SECTOR_CAP
) -> np.ndarray:
    """Lift an m x m unitary to its d x d action on the n-photon sector.

    Entry (i, j) is the normalized permanent of the (s_i, t_j) submatrix.
    The result is unitary to ~1e-8 (permanent round-off) and a group
    homomorphism: lift(UV) = lift(U) lift(V).
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    if basis is None:
        basis = enumerate_sector_basis(m, n, max_dim=max_dim)
    elif basis.m != m or basis.n != n:
        raise ValueError("basis does not match the requested sector")
    d = basis.size
    rows = [occupation_indices(s) for s in basis.states]
    norms = basis.factorial_norms()
    out = np.empty((d, d), dtype=np.complex128)
    for i, s_rows in enumerate(rows):
        for j, t_cols in enumerate(rows):
            sub = u[np.ix_(s_rows, t_cols)]
            out[i, j] = permanent(sub) / (norms[i] * norms[j])
    return out


def sample_haar_unitary(m: int, seed=None) -> np.ndarray:
    """One Haar-random element of U(m).

    QR of a complex Ginibre matrix with the phases of diag(R) folded back
    in, which makes the factorization unique and the law exactly Haar.
    """
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def sample_haar_unitaries(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, m, m) stack of independent Haar unitaries (batched QR)."""
    z = (rng.standard_normal((count, m, m)) + 1j * rng.standard_normal((count, m, m))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def fourier_interferometer(p: int) -> np.ndarray:
    """p-mode discrete-Fourier interferometer, omega = exp(-2 pi i / p)."""
    k = np.arange(p)
    omega = np.exp(-2j * np.pi / p)
    return omega ** np.outer(k, k) / math.sqrt(p)


def beamsplitter_50_50() -> np.ndarray:
    """The real 50:50 beamsplitter [[1, 1], [1, -1]] / sqrt(2)."""
    return np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
