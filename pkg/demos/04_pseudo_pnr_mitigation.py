"""Pseudo-PNR detection and histogram debiasing.

Threshold detectors behind a Fourier fan-out under-count bunched
outcomes; the per-outcome bias factor is known in closed form, so the
distribution is recovered by importance weighting. The raw TVD plateaus,
the debiased one falls to zero.
"""

import numpy as np

from fockshadow import (
    DetectorConfig,
    evolve,
    mitigate_histogram,
    output_distribution,
    prepare_basis_state,
    resolution_factor,
    sample_haar_unitary,
    sample_pseudo_pnr_outcomes,
    total_variation_distance,
)

# Resolution factors for a 3-way fan-out read by threshold detectors:
# the chance that s photons land on s distinct detectors.
print("fan-out p=3, threshold detectors:")
for photons in range(5):
    print(f"  h(3, {photons}, r=1) = {resolution_factor(3, photons, 1):.4f}")
print("PNR detectors of resolution 2 recover some of it:")
for photons in range(5):
    print(f"  h(3, {photons}, r=2) = {resolution_factor(3, photons, 2):.4f}")

# The experiment-scale configuration: 3 photons in 4 modes, each output
# mode read through a 3-mode fan-out with threshold detectors.
m, n, p = 4, 3, 3
state = evolve(prepare_basis_state(m, (1, 1, 1, 0)), sample_haar_unitary(m, seed=2024))
exact = output_distribution(np.eye(m), state, n)
cfg = DetectorConfig.uniform(m, p, 1)

print("\n     shots   resolved    raw TVD   debiased TVD")
for shots in (10**3, 10**4, 10**5, 10**6):
    hist = sample_pseudo_pnr_outcomes(np.eye(m), state, shots, cfg, seed=9)
    raw = total_variation_distance(hist.probabilities(), exact)
    mitigated = total_variation_distance(mitigate_histogram(hist, cfg), exact)
    print(f"  {shots:>8d}   {hist.resolved_total:>8d}   {raw:8.4f}   {mitigated:10.4f}")
print("\nthe raw curve stalls at the bias floor; the debiased one keeps improving")
