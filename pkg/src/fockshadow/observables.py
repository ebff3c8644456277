"""Experiment workloads: correlators, Lie invariants, binned distributions.

Every quantity has two routes sharing one formula layer: an exact route
evaluating tr(O rho) against a known state, and a shadow route replacing
each expectation with its snapshot estimate. Sources are dispatched on
type: pass a BlockDiagonalState, or a ClassicalShadow plus its channel.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import MeasurementChannel
from .errors import ConfigError, PhotonNumberMismatch
from .fock import SectorBasis, enumerate_sector_basis
from .generators import lift_single_particle
from .shadows import ClassicalShadow, record_values
from .states import BlockDiagonalState


# ---------------------------------------------------------------------------
# expectation providers


def _exact_expectations(state: BlockDiagonalState, n: int, mats) -> np.ndarray:
    rho = state.block(n).density()
    return np.array([np.trace(rho @ mat) for mat in mats])


def _shadow_expectations(shadow, channel, mats, halves: bool = False):
    vals, _ = record_values(shadow, mats, channel)
    mask = ~np.isnan(vals[0])
    finite = vals[:, mask]
    if finite.shape[1] == 0:
        raise ConfigError("shadow has no resolved outcomes")
    if not halves:
        return finite.mean(axis=1)
    half = finite.shape[1] // 2
    if half == 0:
        raise ConfigError("split-half estimation needs at least two records")
    return finite[:, :half].mean(axis=1), finite[:, half:].mean(axis=1)


def expectations(source, mats, channel: MeasurementChannel | None = None, n: int | None = None):
    """Batch of <O> values for a state (exact) or a shadow (estimated)."""
    if isinstance(source, BlockDiagonalState):
        if n is None:
            n = max(source.photon_numbers)
        return _exact_expectations(source, n, mats)
    if isinstance(source, ClassicalShadow):
        if channel is None:
            raise ConfigError("shadow sources need the measurement channel")
        return _shadow_expectations(source, channel, mats)
    raise TypeError(f"unsupported source type {type(source).__name__}")


def _sector_of(source, channel, n):
    if isinstance(source, BlockDiagonalState):
        m = source.m
        n = max(source.photon_numbers) if n is None else n
    else:
        m, n = source.m, source.n
    return m, n


# ---------------------------------------------------------------------------
# two-mode correlators


@dataclass(frozen=True)
class CorrelationMatrix:
    matrix: np.ndarray  # m x m real symmetric; diagonal is per-mode variance


def _number_product_matrices(basis: SectorBasis):
    occ = basis.occupancy_matrix().astype(float)
    m = basis.m
    singles = [np.diag(occ[:, i]) for i in range(m)]
    products = {}
    for i in range(m):
        for j in range(i, m):
            products[(i, j)] = np.diag(occ[:, i] * occ[:, j])
    return singles, products


def correlator_matrix(
    source,
    channel: MeasurementChannel | None = None,
    split_half: bool = False,
    n: int | None = None,
) -> CorrelationMatrix:
    """C_ij = <n_i n_j> - <n_i><n_j>.

    The shadow route plugs in products of two estimates; split_half uses
    disjoint record halves for the two factors of the product term, which
    removes the O(1/N) plug-in bias for convergence studies.
    """
    m, n = _sector_of(source, channel, n)
    basis = enumerate_sector_basis(m, n)
    singles, products = _number_product_matrices(basis)
    pair_keys = list(products)
    mats = singles + [products[k] for k in pair_keys]
    c = np.zeros((m, m))
    if split_half and isinstance(source, ClassicalShadow):
        first, second = _shadow_expectations(source, channel, mats, halves=True)
        sing_a, sing_b = first[:m].real, second[:m].real
        pair_est = ((first[m:] + second[m:]) / 2.0).real
        for idx, (i, j) in enumerate(pair_keys):
            cross = (sing_a[i] * sing_b[j] + sing_b[i] * sing_a[j]) / 2.0
            c[i, j] = c[j, i] = pair_est[idx] - cross
        return CorrelationMatrix(matrix=c)
    exp = expectations(source, mats, channel, n=n)
    sing = exp[:m].real
    pair = exp[m:].real
    for idx, (i, j) in enumerate(pair_keys):
        c[i, j] = c[j, i] = pair[idx] - sing[i] * sing[j]
    return CorrelationMatrix(matrix=c)


# ---------------------------------------------------------------------------
# Lie-algebraic invariants


@dataclass(frozen=True)
class LieBasis:
    """m^2 sector observables lifted from an orthonormal Hermitian basis of
    single-particle Hamiltonians (trace inner product)."""

    m: int
    single_particle: tuple  # m x m Hermitian matrices
    lifted: tuple           # d x d sector matrices, same order
    labels: tuple


def lie_hamiltonian_basis(m: int, basis: SectorBasis) -> LieBasis:
    """Diagonal number operators plus symmetric/antisymmetric hop pairs."""
    singles, labels = [], []
    for i in range(m):
        h = np.zeros((m, m), dtype=np.complex128)
        h[i, i] = 1.0
        singles.append(h)
        labels.append(f"n{i + 1}")
    for i in range(m):
        for j in range(i + 1, m):
            h = np.zeros((m, m), dtype=np.complex128)
            h[i, j] = h[j, i] = 1.0 / np.sqrt(2.0)
            singles.append(h)
            labels.append(f"x{i + 1}{j + 1}")
            h = np.zeros((m, m), dtype=np.complex128)
            h[i, j] = -1j / np.sqrt(2.0)
            h[j, i] = 1j / np.sqrt(2.0)
            singles.append(h)
            labels.append(f"y{i + 1}{j + 1}")
    lifted = tuple(lift_single_particle(h, basis) for h in singles)
    return LieBasis(m=m, single_particle=tuple(singles), lifted=lifted, labels=tuple(labels))


@dataclass(frozen=True)
class InvariantReport:
    invariant: float
    rhoT_spectrum: np.ndarray  # length C(n+m-1, n), descending
    gamma_spectrum: np.ndarray  # length m^2, descending


def invariant_I(source, lie_basis: LieBasis, channel=None, split_half: bool = False) -> float:
    """sum_a <O_a>^2; equals the squared Frobenius norm of the one-particle
    reduced state, hence invariant under linear-optical evolution."""
    if split_half and isinstance(source, ClassicalShadow):
        first, second = _shadow_expectations(source, channel, list(lie_basis.lifted), halves=True)
        return float(np.dot(first.real, second.real))
    exp = expectations(source, list(lie_basis.lifted), channel).real
    return float(np.dot(exp, exp))


def invariant_rhoT_spectrum(source, lie_basis: LieBasis, channel=None) -> np.ndarray:
    """Spectrum (descending) of sum_a <O_a> O_a."""
    exp = expectations(source, list(lie_basis.lifted), channel).real
    d = lie_basis.lifted[0].shape[0]
    rho_t = np.zeros((d, d), dtype=np.complex128)
    for coeff, op in zip(exp, lie_basis.lifted):
        rho_t += coeff * op
    return np.sort(np.linalg.eigvalsh(rho_t))[::-1]


def invariant_gamma_spectrum(
    source, lie_basis: LieBasis, channel=None, variant: str = "literal"
) -> np.ndarray:
    """Spectrum (descending) of the m^2 x m^2 covariance-like matrix.

    variant="literal": Gamma_ij = <O_i><O_j> - <[O_i, O_j]>/2 (commutator
    form, as printed in the source experiment). variant="symmetrized":
    Gamma_ij = <{O_i, O_j}>/2 - <O_i><O_j>. Both transform by a real
    orthogonal similarity under evolution, so both spectra are invariant.
    """
    if variant not in ("literal", "symmetrized"):
        raise ValueError(f"unknown gamma variant {variant!r}")
    ops = lie_basis.lifted
    count = len(ops)
    pair_keys = [(i, j) for i in range(count) for j in range(i + 1, count)]
    if variant == "literal":
        pair_mats = [ops[i] @ ops[j] - ops[j] @ ops[i] for i, j in pair_keys]
        diag_mats = []
    else:
        pair_mats = [ops[i] @ ops[j] + ops[j] @ ops[i] for i, j in pair_keys]
        diag_mats = [op @ op for op in ops]
    exp = expectations(source, list(ops) + pair_mats + diag_mats, channel)
    means = exp[:count].real
    pair_exp = exp[count : count + len(pair_keys)]
    gamma = np.zeros((count, count), dtype=np.complex128)
    if variant == "literal":
        for idx, (i, j) in enumerate(pair_keys):
            gamma[i, j] = means[i] * means[j] - 0.5 * pair_exp[idx]
            gamma[j, i] = means[i] * means[j] + 0.5 * pair_exp[idx]
        for i in range(count):
            gamma[i, i] = means[i] * means[i]
    else:
        diag_exp = exp[count + len(pair_keys) :].real
        for idx, (i, j) in enumerate(pair_keys):
            gamma[i, j] = gamma[j, i] = 0.5 * pair_exp[idx] - means[i] * means[j]
        for i in range(count):
            gamma[i, i] = diag_exp[i] - means[i] * means[i]
    gamma = (gamma + gamma.conj().T) / 2.0
    return np.sort(np.linalg.eigvalsh(gamma))[::-1]


def invariant_report(source, lie_basis: LieBasis, channel=None, variant="literal") -> InvariantReport:
    return InvariantReport(
        invariant=invariant_I(source, lie_basis, channel),
        rhoT_spectrum=invariant_rhoT_spectrum(source, lie_basis, channel),
        gamma_spectrum=invariant_gamma_spectrum(source, lie_basis, channel, variant),
    )


# ---------------------------------------------------------------------------
# binned distributions


@dataclass(frozen=True)
class BinPartition:
    """Assignment of each mode to one of K nonempty bins."""

    assignment: tuple  # length m, values in 0..K-1
    K: int

    def __post_init__(self):
        used = set(self.assignment)
        if used != set(range(self.K)):
            raise ConfigError(
                f"every bin 0..{self.K - 1} needs at least one mode; assignment {self.assignment}"
            )

    @property
    def m(self) -> int:
        return len(self.assignment)

    @staticmethod
    def from_subsets(subsets, m: int) -> "BinPartition":
        assignment = [-1] * m
        for label, subset in enumerate(subsets):
            for mode in subset:
                assignment[mode] = label
        if any(a < 0 for a in assignment):
            raise ConfigError("subsets do not cover all modes")
        return BinPartition(assignment=tuple(assignment), K=len(subsets))


def all_bipartitions(m: int):
    """Unordered two-block partitions; the block containing mode 0 is bin 0."""
    out = []
    for size in range(1, m):
        for subset in itertools.combinations(range(m), size):
            if 0 not in subset:
                continue
            rest = tuple(sorted(set(range(m)) - set(subset)))
            out.append(BinPartition.from_subsets([subset, rest], m))
    return out


def bin_count_matrix(partition: BinPartition, basis: SectorBasis) -> np.ndarray:
    """(d, K) matrix of per-bin photon totals for every basis outcome."""
    occ = basis.occupancy_matrix()
    out = np.zeros((basis.size, partition.K), dtype=np.int64)
    for mode, label in enumerate(partition.assignment):
        out[:, label] += occ[:, mode]
    return out


def _phase_matrices(source, partition, channel, n):
    m, n = _sector_of(source, channel, n)
    if partition.m != m:
        raise PhotonNumberMismatch(f"partition covers {partition.m} modes, source has {m}")
    basis = enumerate_sector_basis(m, n)
    return m, n, basis, bin_count_matrix(partition, basis)


def characteristic_function(source, partition: BinPartition, eta, channel=None, n=None) -> complex:
    """<exp(i eta . N_bins)>: expectation of a diagonal phase unitary."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (partition.K,):
        raise ConfigError(f"eta has shape {eta.shape}, expected ({partition.K},)")
    _, n, basis, bins = _phase_matrices(source, partition, channel, n)
    phases = np.exp(1j * (bins @ eta))
    value = expectations(source, [np.diag(phases)], channel, n=n)[0]
    return complex(value)


@dataclass(frozen=True)
class BinnedDistribution:
    partition: BinPartition
    outcomes: tuple  # bin-count vectors, descending lexicographic
    probabilities: np.ndarray

    def as_dict(self) -> dict:
        return {occ: float(p) for occ, p in zip(self.outcomes, self.probabilities)}


def binned_distribution(source, partition: BinPartition, channel=None, n=None) -> BinnedDistribution:
    """Distribution of per-bin photon totals, via the inverse DFT of the
    characteristic function on the grid (2 pi / (n+1)) {0..n}^(K-1).

    The total is fixed at n, so one bin axis is redundant and dropped; the
    K-1 dimensional transform is exact, not a truncation. Small negative
    round-off (> -1e-9) is clipped and the table renormalized.
    """
    _, n, basis, bins = _phase_matrices(source, partition, channel, n)
    k_bins = partition.K
    targets = enumerate_sector_basis(k_bins, n)
    if k_bins == 1:
        return BinnedDistribution(partition=partition, outcomes=targets.states, probabilities=np.array([1.0]))
    axes = k_bins - 1
    size = n + 1
    grid = np.array(list(itertools.product(range(size), repeat=axes)), dtype=np.int64)
    step = 2.0 * np.pi / size
    phase_mats = []
    for t_vec in grid:
        eta = step * (bins[:, :axes] @ t_vec)
        phase_mats.append(np.diag(np.exp(1j * eta)))
    x_values = np.asarray(expectations(source, phase_mats, channel, n=n))
    counts = np.array([occ[:axes] for occ in targets.states], dtype=np.int64)
    kernel = np.exp(-1j * step * (grid @ counts.T))  # (grid, outcomes)
    probs = (x_values @ kernel).real / size**axes
    if probs.min() < -1e-9 and isinstance(source, BlockDiagonalState):
        raise RuntimeError(f"binned DFT produced probability {probs.min():.3e} < -1e-9")
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if total > 0:
        probs = probs / total
    return BinnedDistribution(partition=partition, outcomes=targets.states, probabilities=probs)


def merge_bins(dist: BinnedDistribution, a: int, b: int) -> BinnedDistribution:
    """Collapse bins a and b of a table into one (consistency checks)."""
    if a == b:
        raise ValueError("cannot merge a bin with itself")
    lo, hi = sorted((a, b))
    old_k = dist.partition.K

    def relabel(label):
        if label == hi:
            return lo
        return label - 1 if label > hi else label

    new_assignment = tuple(relabel(x) for x in dist.partition.assignment)
    new_partition = BinPartition(assignment=new_assignment, K=old_k - 1)
    n = sum(dist.outcomes[0])
    targets = enumerate_sector_basis(old_k - 1, n)
    probs = np.zeros(targets.size)
    for occ, p in zip(dist.outcomes, dist.probabilities):
        merged = [0] * (old_k - 1)
        for label, count in enumerate(occ):
            merged[relabel(label)] += count
        probs[targets.position(tuple(merged))] += p
    return BinnedDistribution(partition=new_partition, outcomes=targets.states, probabilities=probs)
