"""Shadow collection, the snapshot estimator, and robust aggregation.

A shadow is a list of (unitary, outcome multiset) records. Nothing heavier
is ever stored: the estimator

    f_O(U, s) = <s| lift(U) Minv(O) lift(U)^dag |s>

is evaluated exactly per shot, with Minv(O) computed once per observable.
Records are the independence units: shots sharing a unitary are pooled into
one record average, and median-of-means runs over record averages.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import MeasurementChannel, apply_channel, snapshot_operator
from .detector import (
    DetectorConfig,
    mitigate_histogram,
    resample_mitigated,
    sample_pnr_outcomes,
    sample_pseudo_pnr_outcomes,
)
from .errors import ConfigError, PhotonNumberMismatch
from .fock import enumerate_sector_basis, lift_to_sector, sample_haar_unitary
from .rng import STREAM_MITIGATE, STREAM_SHOTS, record_seed, substream
from .states import BlockDiagonalState

SHADOW_FORMAT = "fshadow-v1"


@dataclass(frozen=True)
class ShadowRecord:
    """One randomized-measurement setting and its outcome multiset."""

    n: int
    outcomes: tuple  # ((occupation, multiplicity), ...)
    seed: int | None = None
    unitary: np.ndarray | None = None

    def __post_init__(self):
        if self.seed is None and self.unitary is None:
            raise ValueError("record needs a unitary or its generating seed")
        if any(mult < 1 for _, mult in self.outcomes):
            raise ValueError("outcome multiplicities must be >= 1")
        if any(sum(occ) != self.n for occ, _ in self.outcomes):
            raise PhotonNumberMismatch("record outcomes do not all carry n photons")

    def unitary_for(self, m: int) -> np.ndarray:
        if self.unitary is not None:
            return self.unitary
        return sample_haar_unitary(m, self.seed)

    @property
    def shot_count(self) -> int:
        return sum(mult for _, mult in self.outcomes)


@dataclass(frozen=True)
class ClassicalShadow:
    m: int
    n: int
    records: tuple
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    @property
    def shot_count(self) -> int:
        return sum(r.shot_count for r in self.records)


@dataclass(frozen=True)
class EstimationPlan:
    """Median-of-means shape: K disjoint means of N record averages each."""

    N: int
    K: int
    epsilon: float | None = None
    delta: float | None = None
    T: int | None = None

    def __post_init__(self):
        if self.N < 1 or self.K < 1:
            raise ValueError("need N >= 1 and K >= 1")


@dataclass(frozen=True)
class ObservableSpec:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("observable must be a square matrix")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
            raise ValueError(f"observable {self.label!r} is not Hermitian within 1e-10")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _as_matrix(obs) -> np.ndarray:
    if isinstance(obs, ObservableSpec):
        return obs.matrix
    return np.asarray(obs, dtype=np.complex128)


# ---------------------------------------------------------------------------
# collection


def collect_shadow(
    state: BlockDiagonalState,
    num_unitaries: int,
    shots_per_unitary: int,
    seed: int,
    detector: DetectorConfig | None = None,
    n: int | None = None,
) -> ClassicalShadow:
    """Simulate the data-collection loop against an exact source state.

    One Haar unitary per record (its 64-bit seed is stored, making records
    self-contained); outcomes are ideal-PNR draws, or debiased pseudo-PNR
    when a detector config is given. Records that end up with zero resolved
    shots are kept with empty outcomes.
    """
    if num_unitaries < 1:
        raise ConfigError("need at least one unitary")
    m = state.m
    if n is None:
        n = max(state.photon_numbers)
    records = []
    for i in range(num_unitaries):
        useed = record_seed(seed, i)
        u = sample_haar_unitary(m, useed)
        shot_rng = substream(seed, STREAM_SHOTS, i)
        if detector is None:
            hist = sample_pnr_outcomes(u, state, shots_per_unitary, shot_rng, n=n)
            outcomes = sorted(hist.counts.items(), reverse=True)
        else:
            hist = sample_pseudo_pnr_outcomes(u, state, shots_per_unitary, detector, shot_rng, n=n)
            kept = hist.resolved_total
            if kept:
                draws = resample_mitigated(hist, detector, kept, substream(seed, STREAM_MITIGATE, i))
                counts: dict = {}
                for occ in draws:
                    counts[occ] = counts.get(occ, 0) + 1
                outcomes = sorted(counts.items(), reverse=True)
            else:
                outcomes = []
        records.append(ShadowRecord(n=n, outcomes=tuple(outcomes), seed=useed))
    provenance = {
        "root_seed": int(seed),
        "detector": None if detector is None else detector.to_dict(),
        "shots_per_unitary": int(shots_per_unitary),
    }
    return ClassicalShadow(m=m, n=n, records=tuple(records), provenance=provenance)


# ---------------------------------------------------------------------------
# serialization (JSON-lines, header + one record per line)


def write_shadow(shadow: ClassicalShadow, path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"format": SHADOW_FORMAT, "m": shadow.m}, sort_keys=True) + "\n")
        for rec in shadow.records:
            entry: dict = {"n": rec.n, "outcomes": [[list(occ), mult] for occ, mult in rec.outcomes]}
            if rec.seed is not None:
                entry["seed"] = rec.seed
            else:
                flat = rec.unitary.reshape(-1)
                entry["unitary"] = [[z.real, z.imag] for z in flat]
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def read_shadow(path) -> ClassicalShadow:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != SHADOW_FORMAT:
            raise ConfigError(f"unsupported shadow format {header.get('format')!r}")
        m = int(header["m"])
        records = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            outcomes = tuple((tuple(occ), int(mult)) for occ, mult in entry["outcomes"])
            if "seed" in entry:
                rec = ShadowRecord(n=int(entry["n"]), outcomes=outcomes, seed=int(entry["seed"]))
            else:
                flat = np.array([complex(re, im) for re, im in entry["unitary"]])
                rec = ShadowRecord(
                    n=int(entry["n"]), outcomes=outcomes, unitary=flat.reshape(m, m)
                )
            records.append(rec)
    if not records:
        raise ConfigError(f"shadow file {path} has no records")
    n = records[0].n
    if any(r.n != n for r in records):
        raise PhotonNumberMismatch("shadow file mixes photon numbers")
    return ClassicalShadow(m=m, n=n, records=tuple(records))


# ---------------------------------------------------------------------------
# estimation


def record_values(
    shadow: ClassicalShadow, observables, channel: MeasurementChannel
) -> tuple[np.ndarray, np.ndarray]:
    """Per-record shot averages of f_O for a batch of observables.

    Returns (values, weights): values is complex (n_obs, n_records) with
    NaN for empty records, weights the per-record shot counts. The lift is
    computed once per record and shared across observables.
    """
    if len(shadow) == 0:
        raise ConfigError("empty shadow")
    if channel.m != shadow.m or channel.n != shadow.n:
        raise PhotonNumberMismatch(
            f"channel sector (m={channel.m}, n={channel.n}) does not match "
            f"shadow (m={shadow.m}, n={shadow.n})"
        )
    basis = channel.basis
    mats = [_as_matrix(o) for o in observables]
    for mat in mats:
        if mat.shape != (basis.size, basis.size):
            raise PhotonNumberMismatch(f"observable shape {mat.shape} does not match sector")
    inverted = [apply_channel(channel, mat, inverse=True) for mat in mats]
    values = np.full((len(mats), len(shadow)), np.nan, dtype=np.complex128)
    weights = np.zeros(len(shadow))
    for r, rec in enumerate(shadow.records):
        if not rec.outcomes:
            continue
        phi = lift_to_sector(rec.unitary_for(shadow.m), shadow.n, basis=basis)
        idx = [basis.position(occ) for occ, _ in rec.outcomes]
        mults = np.array([mult for _, mult in rec.outcomes], dtype=float)
        rows = phi[idx, :]
        weights[r] = mults.sum()
        for o, oinv in enumerate(inverted):
            per_shot = np.einsum("ij,jk,ik->i", rows, oinv, rows.conj())
            values[o, r] = np.dot(per_shot, mults) / weights[r]
    return values, weights


def median_of_means(values, N: int, K: int) -> float:
    """Median of K disjoint means of N consecutive values (lower median)."""
    values = np.asarray(values, dtype=float)
    if values.size < N * K:
        raise ValueError(f"need at least N*K = {N * K} values, got {values.size}")
    means = values[: N * K].reshape(K, N).mean(axis=1)
    return float(np.sort(means)[(K - 1) // 2])


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    spread: float
    record_values: np.ndarray


def estimate_observable(
    shadow: ClassicalShadow,
    observable,
    channel: MeasurementChannel,
    plan: EstimationPlan | None = None,
) -> EstimateResult:
    """Estimate tr(O rho) from a shadow.

    With a plan, record averages are aggregated by median-of-means and the
    spread is the sample deviation of the K group means; without one, a
    plain mean with its standard error.
    """
    vals, _ = record_values(shadow, [observable], channel)
    finite = vals[0][~np.isnan(vals[0])]
    if finite.size == 0:
        raise ConfigError("shadow has no resolved outcomes")
    reals = finite.real
    if plan is not None:
        est = median_of_means(reals, plan.N, plan.K)
        means = reals[: plan.N * plan.K].reshape(plan.K, plan.N).mean(axis=1)
        spread = float(means.std(ddof=1)) if plan.K > 1 else _standard_error(reals)
    else:
        est = float(reals.mean())
        spread = _standard_error(reals)
    return EstimateResult(estimate=est, spread=spread, record_values=reals)


def _standard_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def observable_degree(observable, projectors, tol: float = 1e-8) -> int:
    """Largest k >= 1 whose isotypic component of O is nonzero (0 if O ~ I).

    Degree-d observables are exactly the polynomials of degree d in the
    mode-hopping generators, so this is the sample-complexity driver.
    """
    mat = _as_matrix(observable)
    vec = np.ascontiguousarray(mat).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm == 0:
        return 0
    degree = 0
    for proj in projectors:
        if proj.k == 0:
            continue
        comp = np.linalg.norm(proj.matrix.matvec(vec))
        if comp > tol * norm:
            degree = max(degree, proj.k)
    return degree


def traceless_part(observable) -> np.ndarray:
    mat = _as_matrix(observable)
    d = mat.shape[0]
    return mat - (np.trace(mat) / d) * np.eye(d)


def shadow_norm_bound(observable, channel: MeasurementChannel, tol: float = 1e-8) -> float:
    """Upper bound on the squared photonic shadow norm of the traceless part:
    ||O_0||_inf^2 * dim(lambda_deg)^2 / s_deg."""
    o0 = traceless_part(observable)
    norm_inf = float(np.linalg.norm(o0, ord=2))
    if norm_inf == 0.0:
        return 0.0
    deg = observable_degree(o0, channel.projectors, tol)
    if deg == 0:
        return 0.0
    proj = channel.projectors[deg]
    return norm_inf**2 * proj.dim**2 / float(channel.eigenvalues[deg])


def plan_shadow_size(
    observables, epsilon: float, delta: float, channel: MeasurementChannel
) -> EstimationPlan:
    """N = ceil(34 max_t bound_t / eps^2) per mean, K = ceil(2 ln(2T/delta))."""
    bounds = [shadow_norm_bound(o, channel) for o in observables]
    t = len(bounds)
    n_per_mean = max(1, math.ceil(34.0 * max(bounds) / epsilon**2))
    k_means = max(1, math.ceil(2.0 * math.log(2.0 * t / delta)))
    return EstimationPlan(N=n_per_mean, K=k_means, epsilon=epsilon, delta=delta, T=t)


def reconstruct_sector_state(
    shadow: ClassicalShadow, channel: MeasurementChannel, psd: bool = False
) -> np.ndarray:
    """Average snapshot: unbiased d x d estimate of the sector block.

    Applies the channel inverse once to the shot-averaged measured
    projector (identical to averaging per-shot snapshots, by linearity).
    Optionally clips to the PSD cone and renormalizes.
    """
    basis = channel.basis
    acc = np.zeros((basis.size, basis.size), dtype=np.complex128)
    shots = 0
    for rec in shadow.records:
        if not rec.outcomes:
            continue
        phi = lift_to_sector(rec.unitary_for(shadow.m), shadow.n, basis=basis)
        for occ, mult in rec.outcomes:
            row = phi[basis.position(occ), :]
            acc += mult * np.outer(row.conj(), row)
            shots += mult
    if shots == 0:
        raise ConfigError("shadow has no resolved outcomes")
    est = apply_channel(channel, acc / shots, inverse=True)
    est = (est + est.conj().T) / 2.0
    if psd:
        eigs, vecs = np.linalg.eigh(est)
        eigs = np.clip(eigs, 0.0, None)
        est = (vecs * eigs) @ vecs.conj().T
        est /= np.trace(est).real
    return est


def single_snapshot(channel: MeasurementChannel, u: np.ndarray, occupation) -> np.ndarray:
    """Convenience alias for one snapshot operator."""
    return snapshot_operator(channel, u, occupation)
