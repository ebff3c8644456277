"""Bit-exact on-disk cache for measurement channels.

Layout per channel: ``<cache_dir>/m{m}n{n}/manifest.json`` plus one
``proj_{k}.bin`` per projector. The manifest records dimensions,
eigenvalues, per-projector nnz and SHA-256 checksums; blobs start with the
magic ``FKPJ`` and hold the upper triangle (including diagonal) in CSC as
little-endian u64 column pointers, u64 row indices and f64 values. Files
are written to a temp name and renamed, so concurrent readers never see a
partial channel.
"""

import hashlib
import json
import os
import struct
from pathlib import Path

import numpy as np

from .channel import IrrepProjector, MeasurementChannel, validate_channel
from .errors import CacheError
from .fock import enumerate_sector_basis
from .sparsemat import SymmetricSparseMatrix

CACHE_ENV_VAR = "FSHADOW_CACHE"
FORMAT_VERSION = 1
_MAGIC = b"FKPJ"
_HEADER = struct.Struct("<4sIIIIQQ")  # magic, version, m, n, k, order, nnz


def resolve_cache_dir(explicit: str | None = None) -> Path:
    """Cache directory from an explicit flag or the FSHADOW_CACHE variable."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    raise CacheError(f"no cache directory: pass one explicitly or set {CACHE_ENV_VAR}")


def channel_cache_path(cache_dir, m: int, n: int) -> Path:
    return Path(cache_dir) / f"m{m}n{n}"


def _projector_blob(m: int, n: int, proj: IrrepProjector) -> bytes:
    mat = proj.matrix
    header = _HEADER.pack(_MAGIC, FORMAT_VERSION, m, n, proj.k, mat.order, mat.nnz)
    return b"".join(
        (
            header,
            np.ascontiguousarray(mat.colptr, dtype="<u8").tobytes(),
            np.ascontiguousarray(mat.rowidx, dtype="<u8").tobytes(),
            np.ascontiguousarray(mat.values, dtype="<f8").tobytes(),
        )
    )


def _parse_blob(blob: bytes, m: int, n: int, k: int) -> SymmetricSparseMatrix:
    if len(blob) < _HEADER.size:
        raise CacheError(f"projector blob k={k} is truncated")
    magic, version, bm, bn, bk, order, nnz = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise CacheError(f"projector blob k={k} has bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CacheError(f"projector blob k={k} has version {version}, expected {FORMAT_VERSION}")
    if (bm, bn, bk) != (m, n, k):
        raise CacheError(f"projector blob labeled (m={bm}, n={bn}, k={bk}), expected ({m}, {n}, {k})")
    expected = _HEADER.size + 8 * (order + 1) + 8 * nnz + 8 * nnz
    if len(blob) != expected:
        raise CacheError(f"projector blob k={k} has {len(blob)} bytes, expected {expected}")
    off = _HEADER.size
    colptr = np.frombuffer(blob, dtype="<u8", count=order + 1, offset=off).astype(np.int64)
    off += 8 * (order + 1)
    rowidx = np.frombuffer(blob, dtype="<u8", count=nnz, offset=off).astype(np.int64)
    off += 8 * nnz
    values = np.frombuffer(blob, dtype="<f8", count=nnz, offset=off).astype(np.float64)
    return SymmetricSparseMatrix.from_triangle_arrays(order, colptr, rowidx, values)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def save_channel(cache_dir, channel: MeasurementChannel) -> Path:
    """Write the channel; returns its directory. Load-after-save is bit-exact."""
    target = channel_cache_path(cache_dir, channel.m, channel.n)
    target.mkdir(parents=True, exist_ok=True)
    entries = []
    for proj in channel.projectors:
        blob = _projector_blob(channel.m, channel.n, proj)
        _atomic_write(target / f"proj_{proj.k}.bin", blob)
        entries.append(
            {
                "k": proj.k,
                "nnz": proj.matrix.nnz,
                "dim": proj.dim,
                "sha256": hashlib.sha256(blob).hexdigest(),
            }
        )
    manifest = {
        "version": FORMAT_VERSION,
        "m": channel.m,
        "n": channel.n,
        "d": channel.sector_dim,
        "eigenvalues": [float(s) for s in channel.eigenvalues],
        "projectors": entries,
    }
    _atomic_write(target / "manifest.json", (json.dumps(manifest, indent=1) + "\n").encode())
    return target


def load_channel(cache_dir, m: int, n: int, validate: bool = True) -> MeasurementChannel:
    """Load a cached channel, verifying version, checksums and (optionally)
    running the projector-algebra spot-check."""
    target = channel_cache_path(cache_dir, m, n)
    manifest_path = target / "manifest.json"
    if not manifest_path.is_file():
        raise CacheError(f"no cached channel at {target}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise CacheError(f"manifest at {manifest_path} is not valid JSON: {exc}") from exc
    if manifest.get("version") != FORMAT_VERSION:
        raise CacheError(
            f"cache version {manifest.get('version')} != supported {FORMAT_VERSION}"
        )
    if manifest.get("m") != m or manifest.get("n") != n:
        raise CacheError(f"manifest labeled (m={manifest.get('m')}, n={manifest.get('n')})")
    basis = enumerate_sector_basis(m, n)
    if manifest.get("d") != basis.size:
        raise CacheError(f"manifest d={manifest.get('d')} != sector dimension {basis.size}")
    projectors = []
    for entry in manifest["projectors"]:
        k = entry["k"]
        blob_path = target / f"proj_{k}.bin"
        if not blob_path.is_file():
            raise CacheError(f"missing projector blob {blob_path.name}")
        blob = blob_path.read_bytes()
        digest = hashlib.sha256(blob).hexdigest()
        if digest != entry["sha256"]:
            raise CacheError(f"checksum mismatch for {blob_path.name}")
        mat = _parse_blob(blob, m, n, k)
        if mat.nnz != entry["nnz"]:
            raise CacheError(f"{blob_path.name}: nnz {mat.nnz} != manifest {entry['nnz']}")
        projectors.append(IrrepProjector(k=k, dim=entry["dim"], matrix=mat))
    channel = MeasurementChannel(
        m=m,
        n=n,
        basis=basis,
        eigenvalues=np.array(manifest["eigenvalues"], dtype=float),
        projectors=tuple(projectors),
    )
    if validate:
        try:
            validate_channel(channel, rng=0)
        except RuntimeError as exc:
            raise CacheError(f"cached channel failed validation: {exc}") from exc
    return channel


def load_or_build_channel(cache_dir, m: int, n: int, max_entries=None):
    """Warm-cache fast path; builds and saves on a miss.

    Returns (channel, was_cached).
    """
    from .channel import DEFAULT_SUPEROP_ENTRY_CAP, build_measurement_channel

    try:
        return load_channel(cache_dir, m, n), True
    except CacheError:
        pass
    cap = DEFAULT_SUPEROP_ENTRY_CAP if max_entries is None else max_entries
    channel = build_measurement_channel(m, n, cap)
    save_channel(cache_dir, channel)
    return channel, False
