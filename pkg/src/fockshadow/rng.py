"""Deterministic random-stream derivation.

Every stochastic choice in the package is a pure function of a root seed.
The derivation rule is counter-based and documented here so that runs are
auditable:

* a named stream is ``default_rng(SeedSequence(root, spawn_key=(STREAM,)))``,
* a per-record stream appends the record index,
  ``SeedSequence(root, spawn_key=(STREAM, index))``,
* the 64-bit seed stored in shadow files for record ``i`` is the first
  ``uint64`` word of ``SeedSequence(root, spawn_key=(STREAM_HAAR, i))``, and
  the record's unitary is regenerated as ``sample_haar_unitary(m, seed)``
  from that stored value alone.

Stream indices are frozen constants; adding new ones is append-only.
"""

import numpy as np

STREAM_PREP = 0
STREAM_HAAR = 1
STREAM_SHOTS = 2
STREAM_MITIGATE = 3


def substream(root_seed: int, stream: int, index: int | None = None) -> np.random.Generator:
    """Generator for the named stream (optionally per-record)."""
    key = (stream,) if index is None else (stream, index)
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=key))


def record_seed(root_seed: int, index: int, stream: int = STREAM_HAAR) -> int:
    """Self-contained 64-bit seed for record ``index`` of a stream."""
    ss = np.random.SeedSequence(root_seed, spawn_key=(stream, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
