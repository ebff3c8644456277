import json
import time

import numpy as np
import pytest

from fockshadow import (
    CacheError,
    build_measurement_channel,
    load_channel,
    load_or_build_channel,
    save_channel,
)
from fockshadow.cache import CACHE_ENV_VAR, channel_cache_path, resolve_cache_dir


@pytest.fixture(scope="module")
def channel43():
    return build_measurement_channel(4, 3)


def test_round_trip_is_bit_exact(tmp_path, channel43):
    save_channel(tmp_path, channel43)
    loaded = load_channel(tmp_path, 4, 3)
    assert np.array_equal(loaded.eigenvalues, channel43.eigenvalues)
    for got, want in zip(loaded.projectors, channel43.projectors):
        assert got.k == want.k and got.dim == want.dim
        assert np.array_equal(got.matrix.colptr, want.matrix.colptr)
        assert np.array_equal(got.matrix.rowidx, want.matrix.rowidx)
        assert np.array_equal(got.matrix.values, want.matrix.values)


def test_save_twice_is_stable(tmp_path, channel43):
    target = save_channel(tmp_path, channel43)
    first = {p.name: p.read_bytes() for p in target.iterdir()}
    save_channel(tmp_path, channel43)
    second = {p.name: p.read_bytes() for p in target.iterdir()}
    assert first == second


def test_corrupted_blob_detected(tmp_path, channel43):
    target = save_channel(tmp_path, channel43)
    blob_path = target / "proj_1.bin"
    data = bytearray(blob_path.read_bytes())
    data[-3] ^= 0xFF
    blob_path.write_bytes(bytes(data))
    with pytest.raises(CacheError, match="checksum"):
        load_channel(tmp_path, 4, 3)


def test_version_mismatch_detected(tmp_path, channel43):
    target = save_channel(tmp_path, channel43)
    manifest_path = target / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["version"] = 99
    manifest_path.write_text(json.dumps(manifest))
    with pytest.raises(CacheError, match="version"):
        load_channel(tmp_path, 4, 3)


def test_missing_blob_detected(tmp_path, channel43):
    target = save_channel(tmp_path, channel43)
    (target / "proj_2.bin").unlink()
    with pytest.raises(CacheError, match="missing"):
        load_channel(tmp_path, 4, 3)


def test_missing_cache_is_clean_error(tmp_path):
    with pytest.raises(CacheError, match="no cached channel"):
        load_channel(tmp_path, 2, 1)


def test_cache_hit_skips_rebuild(tmp_path):
    # warm the numba kernels so both timings measure the algorithms
    warm = build_measurement_channel(4, 3)
    warm.projectors[0].matrix.matvec(np.zeros(warm.superop_order))

    t0 = time.perf_counter()
    channel, cached = load_or_build_channel(tmp_path, 4, 3)
    build_time = time.perf_counter() - t0
    assert not cached

    t1 = time.perf_counter()
    channel2, cached2 = load_or_build_channel(tmp_path, 4, 3)
    load_time = time.perf_counter() - t1
    assert cached2
    assert np.array_equal(channel2.eigenvalues, channel.eigenvalues)
    assert load_time < build_time


def test_env_var_resolution(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path))
    assert resolve_cache_dir(None) == tmp_path
    monkeypatch.delenv(CACHE_ENV_VAR)
    with pytest.raises(CacheError):
        resolve_cache_dir(None)
    assert resolve_cache_dir("/elsewhere").name == "elsewhere"


def test_cache_layout(tmp_path, channel43):
    target = save_channel(tmp_path, channel43)
    assert target == channel_cache_path(tmp_path, 4, 3)
    manifest = json.loads((target / "manifest.json").read_text())
    assert manifest["version"] == 1
    assert manifest["d"] == 20
    assert [e["k"] for e in manifest["projectors"]] == [0, 1, 2, 3]
    blob = (target / "proj_0.bin").read_bytes()
    assert blob[:4] == b"FKPJ"
