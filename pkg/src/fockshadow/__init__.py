"""Classical shadows of photonic Fock states under passive linear optics.

The package simulates the full randomized-measurement loop — Haar-random
interferometers, (pseudo-)photon-number-resolving detection, debiasing —
builds the measurement channel from irreducible-representation projectors,
and estimates state properties with statistical guarantees.
"""

from .channel import (
    MeasurementChannel,
    apply_channel,
    build_irrep_projectors,
    build_measurement_channel,
    casimir_superoperator,
    channel_eigenvalue,
    irrep_dimension,
    snapshot_operator,
    validate_channel,
)
from .cache import load_channel, load_or_build_channel, resolve_cache_dir, save_channel
from .detector import (
    ClickPattern,
    DetectorConfig,
    OutcomeHistogram,
    block_resolution_probability,
    build_pseudo_pnr_interferometer,
    mitigate_histogram,
    resample_mitigated,
    resolution_factor,
    sample_pnr_outcomes,
    sample_pseudo_pnr_outcomes,
    simulate_pseudo_pnr_shot,
    total_variation_distance,
)
from .errors import CacheError, ConfigError, FockShadowError, GuardError, PhotonNumberMismatch
from .fock import (
    SectorBasis,
    beamsplitter_50_50,
    enumerate_sector_basis,
    fourier_interferometer,
    lift_to_sector,
    sample_haar_unitary,
    sample_haar_unitaries,
    sector_dimension,
    transition_amplitude,
    unitarity_defect,
)
from .generators import build_generator_table, generator_in_sector, lift_single_particle
from .observables import (
    BinPartition,
    BinnedDistribution,
    CorrelationMatrix,
    InvariantReport,
    LieBasis,
    all_bipartitions,
    binned_distribution,
    characteristic_function,
    correlator_matrix,
    invariant_I,
    invariant_gamma_spectrum,
    invariant_report,
    invariant_rhoT_spectrum,
    lie_hamiltonian_basis,
    merge_bins,
)
from .permanent import permanent, permanent_naive
from .shadows import (
    ClassicalShadow,
    EstimationPlan,
    EstimateResult,
    ObservableSpec,
    ShadowRecord,
    collect_shadow,
    estimate_observable,
    median_of_means,
    observable_degree,
    plan_shadow_size,
    read_shadow,
    reconstruct_sector_state,
    record_values,
    shadow_norm_bound,
    write_shadow,
)
from .sparsemat import SymmetricSparseMatrix
from .states import (
    BlockDiagonalState,
    SectorBlock,
    evolve,
    from_sector_density,
    from_sector_vector,
    mixture,
    output_distribution,
    prepare_basis_state,
)

__version__ = "0.1.0"
