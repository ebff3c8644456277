"""The three property-estimation workloads from one shadow.

A single shadow of a scrambled |1,1,1,0> state feeds all three analyses:
two-mode correlators, linear-optical invariants, and binned photon
distributions. Scaled down from the full replication (see the
`fockshadow experiment` command) to run in seconds.
"""

import numpy as np

from fockshadow import (
    all_bipartitions,
    binned_distribution,
    build_measurement_channel,
    collect_shadow,
    correlator_matrix,
    enumerate_sector_basis,
    evolve,
    invariant_I,
    invariant_rhoT_spectrum,
    lie_hamiltonian_basis,
    prepare_basis_state,
    sample_haar_unitary,
    total_variation_distance,
)

m, n = 4, 3
channel = build_measurement_channel(m, n)
state = evolve(prepare_basis_state(m, (1, 1, 1, 0)), sample_haar_unitary(m, seed=2024))
shadow = collect_shadow(state, num_unitaries=400, shots_per_unitary=19, seed=11)
print(f"one shadow: {len(shadow)} settings x ~{shadow.shot_count / len(shadow):.0f} shots\n")

# workload 1: two-mode correlators
est_c = correlator_matrix(shadow, channel).matrix
exact_c = correlator_matrix(state).matrix
print("correlators, entrywise mean |error|:", np.round(np.mean(np.abs(est_c - exact_c)), 4))

# workload 2: Lie-algebraic invariants
lie = lie_hamiltonian_basis(m, enumerate_sector_basis(m, n))
i_est = invariant_I(shadow, lie, channel)
i_exact = invariant_I(state, lie)
print(f"invariant I: estimated {i_est:.3f} vs exact {i_exact:.3f}")
spec_est = invariant_rhoT_spectrum(shadow, lie, channel)
spec_exact = invariant_rhoT_spectrum(state, lie)
print(f"rho_T spectrum, max |error|: {np.max(np.abs(spec_est - spec_exact)):.3f}")

# workload 3: binned distributions over every bipartition of the modes
tvds = []
for part in all_bipartitions(m):
    est_table = binned_distribution(shadow, part, channel)
    exact_table = binned_distribution(state, part)
    tvds.append(total_variation_distance(est_table.probabilities, exact_table.probabilities))
print(f"binned distributions: mean TVD over {len(tvds)} bipartitions = {np.mean(tvds):.4f}")
