"""Photon-number-preserving generators a_i^dag a_j restricted to a sector."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import SectorBasis


def generator_in_sector(i: int, j: int, basis: SectorBasis) -> sp.csr_matrix:
    """Sparse d x d matrix of a_i^dag a_j in the sector basis (0-based modes).

    <s| a_i^dag a_j |t> = sqrt(t_j (t_i + 1)) when s = t - e_j + e_i, and the
    i = j case is diagonal with entries t_i.
    """
    m, d = basis.m, basis.size
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"mode indices ({i}, {j}) out of range for m={m}")
    if i == j:
        occ = basis.occupancy_matrix()[:, i].astype(np.float64)
        return sp.diags(occ, format="csr")
    rows, cols, vals = [], [], []
    for col, t in enumerate(basis.states):
        if t[j] == 0:
            continue
        s = list(t)
        s[j] -= 1
        s[i] += 1
        rows.append(basis.position(s))
        cols.append(col)
        vals.append(np.sqrt(t[j] * (t[i] + 1)))
    return sp.csr_matrix((vals, (rows, cols)), shape=(d, d))


@dataclass(frozen=True)
class GeneratorTable:
    """All m^2 sector generators, keyed by (i, j)."""

    basis: SectorBasis
    table: dict

    def __getitem__(self, key):
        return self.table[key]


def build_generator_table(basis: SectorBasis) -> GeneratorTable:
    m = basis.m
    table = {(i, j): generator_in_sector(i, j, basis) for i in range(m) for j in range(m)}
    return GeneratorTable(basis=basis, table=table)


def number_operator_diagonal(i: int, basis: SectorBasis) -> np.ndarray:
    """Diagonal of the i-th mode number operator, in basis order."""
    return basis.occupancy_matrix()[:, i].astype(np.float64)


def lift_single_particle(h: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Dense sector matrix of sum_ij h_ij a_i^dag a_j."""
    h = np.asarray(h, dtype=np.complex128)
    m = basis.m
    if h.shape != (m, m):
        raise ValueError(f"single-particle matrix has shape {h.shape}, expected ({m}, {m})")
    out = np.zeros((basis.size, basis.size), dtype=np.complex128)
    for i in range(m):
        for j in range(m):
            if h[i, j] != 0:
                out += h[i, j] * generator_in_sector(i, j, basis).toarray()
    return out
