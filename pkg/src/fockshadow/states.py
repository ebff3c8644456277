"""Block-diagonal Fock states and exact output distributions.

PNR measurement erases coherence between photon-number sectors, so every
state this package manipulates is a direct sum of per-sector blocks. Each
block keeps a normalized payload (amplitude vector for pure blocks, dense
trace-one density matrix otherwise) plus a scalar weight; weights sum to 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PhotonNumberMismatch
from .fock import enumerate_sector_basis, lift_to_sector


@dataclass(frozen=True)
class SectorBlock:
    n: int
    weight: float
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def density(self) -> np.ndarray:
        """Unnormalized density block; trace equals the block weight."""
        if self.vector is not None:
            return self.weight * np.outer(self.vector, self.vector.conj())
        return self.weight * self.matrix

    @property
    def is_pure(self) -> bool:
        return self.vector is not None


@dataclass(frozen=True)
class BlockDiagonalState:
    m: int
    blocks: dict  # n -> SectorBlock

    def block(self, n: int) -> SectorBlock:
        if n not in self.blocks:
            raise PhotonNumberMismatch(f"state has no {n}-photon block")
        return self.blocks[n]

    @property
    def photon_numbers(self):
        return sorted(self.blocks)

    def trace(self) -> float:
        return float(sum(b.weight for b in self.blocks.values()))


def _check_density(rho: np.ndarray, herm_tol=1e-10, psd_floor=-1e-8):
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density block is not Hermitian")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < psd_floor:
        raise ValueError(f"density block has eigenvalue {eigs.min():.3e} below the PSD floor")


def prepare_basis_state(m: int, occupation) -> BlockDiagonalState:
    """Pure Fock basis state |occupation>."""
    occupation = tuple(int(x) for x in occupation)
    if len(occupation) != m:
        raise PhotonNumberMismatch(f"occupation has {len(occupation)} modes, expected {m}")
    n = sum(occupation)
    basis = enumerate_sector_basis(m, n)
    vec = np.zeros(basis.size, dtype=np.complex128)
    vec[basis.position(occupation)] = 1.0
    return BlockDiagonalState(m=m, blocks={n: SectorBlock(n=n, weight=1.0, vector=vec)})


def from_sector_vector(m: int, n: int, psi: np.ndarray) -> BlockDiagonalState:
    psi = np.asarray(psi, dtype=np.complex128)
    basis = enumerate_sector_basis(m, n)
    if psi.shape != (basis.size,):
        raise ValueError(f"amplitude vector has shape {psi.shape}, expected ({basis.size},)")
    norm = np.linalg.norm(psi)
    return BlockDiagonalState(m=m, blocks={n: SectorBlock(n=n, weight=1.0, vector=psi / norm)})


def from_sector_density(m: int, n: int, rho: np.ndarray, weight: float = 1.0) -> BlockDiagonalState:
    rho = np.asarray(rho, dtype=np.complex128)
    basis = enumerate_sector_basis(m, n)
    if rho.shape != (basis.size, basis.size):
        raise ValueError(f"density block has shape {rho.shape}, expected {(basis.size,) * 2}")
    _check_density(rho)
    rho = rho / np.trace(rho).real
    return BlockDiagonalState(m=m, blocks={n: SectorBlock(n=n, weight=weight, matrix=rho)})


def mixture(states_and_weights) -> BlockDiagonalState:
    """Convex combination of BlockDiagonalStates (blocks merged densely)."""
    items = list(states_and_weights)
    m = items[0][0].m
    acc: dict = {}
    for state, w in items:
        if state.m != m:
            raise PhotonNumberMismatch("cannot mix states with different mode counts")
        for n, blk in state.blocks.items():
            acc[n] = acc.get(n, 0) + w * blk.density()
    blocks = {}
    for n, rho in acc.items():
        weight = float(np.trace(rho).real)
        blocks[n] = SectorBlock(n=n, weight=weight, matrix=rho / weight)
    return BlockDiagonalState(m=m, blocks=blocks)


def evolve(state: BlockDiagonalState, u: np.ndarray) -> BlockDiagonalState:
    """Conjugate every block by the lifted unitary; trace is preserved."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (state.m, state.m):
        raise PhotonNumberMismatch(f"unitary shape {u.shape} does not match m={state.m}")
    blocks = {}
    for n, blk in state.blocks.items():
        phi = lift_to_sector(u, n)
        if blk.is_pure:
            blocks[n] = SectorBlock(n=n, weight=blk.weight, vector=phi @ blk.vector)
        else:
            blocks[n] = SectorBlock(n=n, weight=blk.weight, matrix=phi @ blk.matrix @ phi.conj().T)
    return BlockDiagonalState(m=state.m, blocks=blocks)


def output_distribution(u: np.ndarray, state: BlockDiagonalState, n: int) -> np.ndarray:
    """Exact PNR outcome probabilities over the sector basis, in basis order.

    Entries are nonnegative and sum to the weight of the n-photon block.
    """
    blk = state.block(n)
    phi = lift_to_sector(np.asarray(u, dtype=np.complex128), n)
    if blk.is_pure:
        amps = phi @ blk.vector
        probs = blk.weight * np.abs(amps) ** 2
    else:
        evolved = phi @ blk.matrix @ phi.conj().T
        probs = blk.weight * np.real(np.diagonal(evolved))
    return np.clip(probs, 0.0, None)
