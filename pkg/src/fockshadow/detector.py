"""Detection physics: exact PNR sampling, pseudo-PNR emulation, debiasing.

Pseudo-PNR reads each logical mode through a p-mode Fourier fan-out ending
on limited-resolution detectors. A Fourier fan-out scatters s photons
uniformly and independently over the p outputs, so the emulation here is a
per-mode multinomial: the full (m p)-mode interferometer is only ever built
as a tiny-scale oracle (see ``build_pseudo_pnr_interferometer``).

An event is *resolved* when no detector saw more photons than its
resolution; resolved outcomes are biased by a known per-outcome factor
h <= 1, removed by importance weights 1/h.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PhotonNumberMismatch
from .fock import (
    enumerate_sector_basis,
    fourier_interferometer,
    transition_amplitude,
)
from .states import BlockDiagonalState, output_distribution


@dataclass(frozen=True)
class DetectorConfig:
    """Fan-out p per logical mode plus per-detector resolutions (length m*p)."""

    p: int
    resolutions: tuple

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError("fan-out p must be >= 1")
        if len(self.resolutions) % self.p:
            raise ConfigError(
                f"{len(self.resolutions)} resolutions do not split into blocks of p={self.p}"
            )
        if any(r < 1 for r in self.resolutions):
            raise ConfigError("detector resolutions must be >= 1 (1 = threshold)")

    @property
    def m(self) -> int:
        return len(self.resolutions) // self.p

    def block(self, mode: int) -> tuple:
        """Resolutions of the detectors fed by one logical mode."""
        return self.resolutions[mode * self.p : (mode + 1) * self.p]

    @staticmethod
    def uniform(m: int, p: int, r: int = 1) -> "DetectorConfig":
        return DetectorConfig(p=p, resolutions=(r,) * (m * p))

    @staticmethod
    def from_dict(data: dict) -> "DetectorConfig":
        try:
            return DetectorConfig(p=int(data["p"]), resolutions=tuple(int(r) for r in data["resolutions"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad detector config: {exc}") from exc

    def to_dict(self) -> dict:
        return {"p": self.p, "resolutions": list(self.resolutions)}


@dataclass(frozen=True)
class ClickPattern:
    """Per-detector reported counts for one shot (saturating at resolution)."""

    clicks: tuple
    resolved: bool
    occupation: tuple | None  # implied logical occupation, resolved shots only


@dataclass
class OutcomeHistogram:
    m: int
    n: int
    counts: dict = field(default_factory=dict)  # occupation -> count
    discarded: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.discarded

    @property
    def resolved_total(self) -> int:
        return sum(self.counts.values())

    def add(self, occupation, count: int = 1) -> None:
        key = tuple(int(x) for x in occupation)
        self.counts[key] = self.counts.get(key, 0) + count

    def merge(self, other: "OutcomeHistogram") -> "OutcomeHistogram":
        if (other.m, other.n) != (self.m, self.n):
            raise PhotonNumberMismatch("cannot merge histograms from different sectors")
        merged = OutcomeHistogram(self.m, self.n, dict(self.counts), self.discarded + other.discarded)
        for occ, cnt in other.counts.items():
            merged.counts[occ] = merged.counts.get(occ, 0) + cnt
        return merged

    def probabilities(self, basis=None) -> np.ndarray:
        """Empirical distribution over the sector basis (resolved events)."""
        basis = basis or enumerate_sector_basis(self.m, self.n)
        out = np.zeros(basis.size)
        for occ, cnt in self.counts.items():
            out[basis.position(occ)] = cnt
        total = out.sum()
        return out / total if total > 0 else out

    def write_csv(self, path, config: "DetectorConfig | None" = None) -> None:
        """occupation (dash-separated), count, debias weight."""
        basis = enumerate_sector_basis(self.m, self.n)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["occupation", "count", "weight"])
            for occ in basis.states:
                cnt = self.counts.get(occ, 0)
                weight = 1.0 if config is None else 1.0 / outcome_resolution_factor(occ, config)
                writer.writerow(["-".join(str(x) for x in occ), cnt, repr(weight)])


def resolution_factor(p: int, n: int, r: int = 1) -> float:
    """Probability that a Fourier p-fan-out resolves n photons at resolution r.

    r = 1 reduces to C(p, n) n! / p^n (0 when n > p); any r >= n gives 1.
    The general value sums over partitions of n into at most p parts of size
    at most r, weighted by the multiplicity multinomial.
    """
    if p < 1 or r < 1 or n < 0:
        raise ValueError("need p >= 1, r >= 1, n >= 0")
    if n == 0:
        return 1.0
    if r == 1:
        if n > p:
            return 0.0
        return math.comb(p, n) * math.factorial(n) / p**n
    total = 0.0
    for lam in _partitions_capped(n, p, r):
        counts = {}
        for part in lam:
            counts[part] = counts.get(part, 0) + 1
        counts[0] = p - len(lam)
        multi = math.factorial(p)
        for c in counts.values():
            multi //= math.factorial(c)
        denom = p**n
        for part in lam:
            denom *= math.factorial(part)
        total += multi * math.factorial(n) / denom
    return total


def _partitions_capped(n, max_len, max_part):
    """Partitions of n with at most max_len parts, each part <= max_part."""
    def rec(remaining, largest, length):
        if remaining == 0:
            yield ()
            return
        if length == 0:
            return
        for part in range(min(remaining, largest), 0, -1):
            for tail in rec(remaining - part, part, length - 1):
                yield (part, *tail)

    yield from rec(n, max_part, max_len)


def block_resolution_probability(p: int, n: int, resolutions) -> float:
    """Resolution probability for one fan-out block with per-detector caps.

    Exact sum of multinomial weights over load tuples within the caps;
    equals resolution_factor(p, n, r) when all caps are r.
    """
    resolutions = tuple(resolutions)
    if len(resolutions) != p:
        raise ValueError(f"expected {p} detector resolutions, got {len(resolutions)}")
    if n == 0:
        return 1.0
    total = 0.0
    for loads in enumerate_sector_basis(p, n).states:
        if all(b <= r for b, r in zip(loads, resolutions)):
            w = math.factorial(n)
            for b in loads:
                w //= math.factorial(b)
            total += w
    return total / p**n


def outcome_resolution_factor(occupation, config: DetectorConfig) -> float:
    """prod_i h(p, s_i, r_block_i): the bias factor of one resolved outcome."""
    out = 1.0
    for i, s_i in enumerate(occupation):
        out *= block_resolution_probability(config.p, int(s_i), config.block(i))
    return out


def simulate_pseudo_pnr_shot(occupation, config: DetectorConfig, rng) -> ClickPattern:
    """Spread each mode's photons uniformly over its fan-out and read detectors."""
    occupation = tuple(int(x) for x in occupation)
    if len(occupation) != config.m:
        raise PhotonNumberMismatch(
            f"occupation covers {len(occupation)} modes, config covers {config.m}"
        )
    rng = np.random.default_rng(rng)
    clicks = []
    resolved = True
    for i, s_i in enumerate(occupation):
        loads = np.bincount(rng.integers(0, config.p, size=s_i), minlength=config.p)
        block = config.block(i)
        resolved &= bool(np.all(loads <= np.asarray(block)))
        clicks.extend(int(min(load, r)) for load, r in zip(loads, block))
    return ClickPattern(
        clicks=tuple(clicks),
        resolved=resolved,
        occupation=occupation if resolved else None,
    )


def sample_pnr_outcomes(
    u: np.ndarray, state: BlockDiagonalState, shots: int, seed, n: int | None = None
) -> OutcomeHistogram:
    """Ideal-PNR histogram: i.i.d. inverse-CDF draws from the exact distribution."""
    if n is None:
        n = max(state.photon_numbers)
    probs = output_distribution(u, state, n)
    total = probs.sum()
    if total <= 0:
        raise PhotonNumberMismatch(f"state has zero weight in the {n}-photon sector")
    probs = probs / total
    basis = enumerate_sector_basis(state.m, n)
    hist = OutcomeHistogram(m=state.m, n=n)
    if shots == 0:
        return hist
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    for idx, cnt in zip(*np.unique(draws, return_counts=True)):
        hist.add(basis.states[idx], int(cnt))
    return hist


def sample_pseudo_pnr_outcomes(
    u: np.ndarray,
    state: BlockDiagonalState,
    shots: int,
    config: DetectorConfig,
    seed,
    n: int | None = None,
) -> OutcomeHistogram:
    """Pseudo-PNR histogram of resolved events; saturated shots are discarded.

    Equivalent in law to running the (m p)-mode fan-out interferometer and
    keeping events whose total click count reaches n.
    """
    if n is None:
        n = max(state.photon_numbers)
    rng = np.random.default_rng(seed)
    true_hist = sample_pnr_outcomes(u, state, shots, rng, n=n)
    hist = OutcomeHistogram(m=state.m, n=n)
    res_arrays = [np.asarray(config.block(i)) for i in range(config.m)]
    for occ, cnt in sorted(true_hist.counts.items(), reverse=True):
        resolved = np.ones(cnt, dtype=bool)
        for i, s_i in enumerate(occ):
            if s_i == 0:
                continue
            draws = rng.integers(0, config.p, size=(cnt, s_i))
            loads = (draws[:, :, None] == np.arange(config.p)).sum(axis=1)
            resolved &= np.all(loads <= res_arrays[i], axis=1)
        kept = int(resolved.sum())
        if kept:
            hist.add(occ, kept)
        hist.discarded += cnt - kept
    return hist


def mitigate_histogram(hist: OutcomeHistogram, config: DetectorConfig, basis=None) -> np.ndarray:
    """Debiased outcome distribution over the sector basis.

    Each resolved count is divided by its bias factor h (importance
    weighting), then renormalized; as the shot count grows this converges in
    TVD to the ideal-PNR distribution.
    """
    basis = basis or enumerate_sector_basis(hist.m, hist.n)
    weights = np.zeros(basis.size)
    for occ, cnt in hist.counts.items():
        factor = outcome_resolution_factor(occ, config)
        if factor == 0.0:
            raise ConfigError(
                f"outcome {occ} cannot be resolved by this detector layout; corrupt histogram"
            )
        weights[basis.position(occ)] = cnt / factor
    total = weights.sum()
    if total <= 0:
        return weights
    return weights / total


def resample_mitigated(
    hist: OutcomeHistogram, config: DetectorConfig, t: int, seed
) -> list:
    """t i.i.d. occupations drawn from the debiased distribution."""
    basis = enumerate_sector_basis(hist.m, hist.n)
    probs = mitigate_histogram(hist, config, basis)
    if t == 0 or probs.sum() == 0:
        return []
    rng = np.random.default_rng(seed)
    draws = rng.choice(basis.size, size=t, p=probs)
    return [basis.states[i] for i in draws]


def total_variation_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"distributions have shapes {p.shape} != {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def build_pseudo_pnr_interferometer(u: np.ndarray, p: int) -> np.ndarray:
    """Explicit (m p)-mode fan-out circuit: F_p blocks after routing each
    output of u to the top of its block. Tiny-scale oracle for the per-mode
    multinomial model."""
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    big = m * p
    core = np.eye(big, dtype=np.complex128)
    core[:m, :m] = u
    perm = np.zeros((big, big))
    spare = [j for j in range(big) if j % p != 0]
    for src in range(big):
        dest = src * p if src < m else spare[src - m]
        perm[dest, src] = 1.0
    fp = fourier_interferometer(p)
    fan = np.zeros((big, big), dtype=np.complex128)
    for i in range(m):
        fan[i * p : (i + 1) * p, i * p : (i + 1) * p] = fp
    return fan @ perm @ core


def pseudo_pnr_oracle_distribution(u: np.ndarray, input_occupation, p: int):
    """Exact joint law of detector loads from the full fan-out circuit.

    Returns (load_tuples, probabilities) over all C(n + mp - 1, n) load
    patterns; load tuple entries are per-detector photon counts.
    """
    input_occupation = tuple(int(x) for x in input_occupation)
    m = len(input_occupation)
    n = sum(input_occupation)
    big_u = build_pseudo_pnr_interferometer(u, p)
    big_basis = enumerate_sector_basis(m * p, n)
    padded_input = input_occupation + (0,) * (m * p - m)
    probs = np.array(
        [abs(transition_amplitude(big_u, loads, padded_input)) ** 2 for loads in big_basis.states]
    )
    return big_basis.states, probs / probs.sum()
