import os
import subprocess
import sys

import numpy as np

from levyrec.rng import stream_key, stream_keys, uniform, uniform_array


def test_scalar_and_array_agree():
    keys = stream_keys(42, np.arange(5), 1)
    assert int(keys[3]) == int(stream_key(42, 3, 1))
    assert uniform_array(keys[3:4], np.array([7], dtype=np.uint64))[0] == uniform(keys[3], 7)


def test_uniform_moments_and_range():
    u = uniform_array(stream_keys(1, np.zeros(1), 0)[0], np.arange(1_000_000, dtype=np.uint64))
    assert 0 < u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 2e-3
    assert abs(12 * u.var() - 1) < 1e-2


def test_streams_are_distinct():
    a = uniform_array(stream_keys(1, np.arange(1000), 0), np.zeros(1000, dtype=np.uint64))
    b = uniform_array(stream_keys(1, np.arange(1000), 1), np.zeros(1000, dtype=np.uint64))
    c = uniform_array(stream_keys(2, np.arange(1000), 0), np.zeros(1000, dtype=np.uint64))
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.1 and abs(np.corrcoef(a, c)[0, 1]) < 0.1
    assert len(np.unique(a)) == 1000


def test_backends_produce_identical_draws():
    code = ("from levyrec.rng import stream_key, uniform; k = stream_key(2026, 17, 3); "
            "print(int(k), repr(uniform(k, 123456)))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, LEVYREC_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                   check=True).stdout.strip())
    assert outs[0] == outs[1]
