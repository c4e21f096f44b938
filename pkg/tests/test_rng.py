import numpy as np
import pytest

from motional import kernels
from motional.kernels import formulas
from motional.rng import TAG_ENSEMBLE, RandomStream, seed_key


def _numpy_philox_block(counter, key):
    """One Philox4x64-10 output block from numpy's reference generator."""
    bg = np.random.Philox(key=np.array(key, dtype=np.uint64))
    st = bg.state
    # numpy increments the counter before producing a block
    prev = list(counter)
    prev[0] -= 1
    st["state"]["counter"] = np.array(prev, dtype=np.uint64)
    st["buffer_pos"] = 4
    bg.state = st
    return bg.random_raw(4)


def _philox(counter, key):
    # 1-element arrays: array arithmetic wraps silently, scalar arithmetic warns
    return formulas.philox4x64(*(np.array([c], dtype=np.uint64) for c in (*counter, *key)))


@pytest.mark.parametrize("counter,key", [
    ((1, 0, 0, 0), (0, 0)),
    ((7, 5, 1, 0), (123456789, 987654321)),
    ((2 ** 40, 3, 2, 0), (2 ** 64 - 1, 17)),
])
def test_philox_matches_numpy_reference(counter, key):
    ours = _philox(counter, key)
    assert [int(x[0]) for x in ours] == [int(x) for x in _numpy_philox_block(counter, key)]


def test_philox_known_answer_zero():
    # Random123 known-answer vector for philox4x64-10 with zero counter and key
    out = _philox((0, 0, 0, 0), (0, 0))
    assert [f"{int(x[0]):016x}" for x in out] == [
        "16554d9eca36314c", "db20fe9d672d0fdc", "d7e772cee186176b", "7e68b68aec7ba23b"]


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_uniforms_open_interval_and_unaligned_start(backend):
    k0, k1 = seed_key(42)
    full = kernels.uniforms(k0, k1, 3, TAG_ENSEMBLE, 0, 40, backend=backend)
    part = kernels.uniforms(k0, k1, 3, TAG_ENSEMBLE, 5, 30, backend=backend)
    assert np.all((full > 0) & (full < 1))
    np.testing.assert_array_equal(full[5:35], part)


def test_backends_give_identical_uniforms():
    if len(kernels.available_backends()) < 2:
        pytest.skip("numba not available")
    k0, k1 = seed_key(2 ** 70 + 5)
    a = kernels.uniforms(k0, k1, 11, 2, 3, 1000, backend="numba")
    b = kernels.uniforms(k0, k1, 11, 2, 3, 1000, backend="numpy")
    np.testing.assert_array_equal(a, b)


def test_stream_position_advances():
    s = RandomStream(7, stream=2)
    a = s.uniforms(5)
    b = s.uniforms(3)
    c = RandomStream(7, stream=2).uniforms(8)
    np.testing.assert_array_equal(np.concatenate((a, b)), c)
    assert s.position == 8


def test_streams_and_tags_differ():
    base = RandomStream(1, 0, 0).uniforms(16)
    assert not np.array_equal(base, RandomStream(1, 1, 0).uniforms(16))
    assert not np.array_equal(base, RandomStream(1, 0, 1).uniforms(16))
    assert not np.array_equal(base, RandomStream(2, 0, 0).uniforms(16))


def test_uniformity_ks():
    from scipy import stats
    u = RandomStream(99).uniforms(50_000)
    assert stats.kstest(u, "uniform").pvalue > 1e-3


@pytest.mark.parametrize("seed", [-1, 2 ** 128])
def test_seed_range(seed):
    with pytest.raises(ValueError):
        seed_key(seed)
