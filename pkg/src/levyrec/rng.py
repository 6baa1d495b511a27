"""Counter-based uniforms: u = mix(key(seed, path, stream) ^ mix(counter)).

The mixer is SplitMix64's finaliser.  A draw depends only on its
(seed, path, stream, counter) coordinates, so paths can be generated in
any order or batch split with identical results.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, optional_njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_PATH_MUL = np.uint64(0xD1B54A32D192ED03)
_STREAM_MUL = np.uint64(0xABC98388FB8FAC03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@optional_njit
def _mix64(x):
    z = np.uint64(x) + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@optional_njit
def _stream_key(seed, path, stream):
    return _mix64(_mix64(np.uint64(seed)) ^ (np.uint64(path) * _PATH_MUL + np.uint64(stream) * _STREAM_MUL))


@optional_njit
def _uniform(key, counter):
    z = _mix64(np.uint64(key) ^ _mix64(np.uint64(counter)))
    return (float(z >> _S11) + 0.5) * _INV53


def mix64_array(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def stream_keys(seed, paths, stream):
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        mixed = paths * _PATH_MUL + np.uint64(stream) * _STREAM_MUL
    return mix64_array(mix64_array(np.uint64(seed)) ^ mixed)


def uniform_array(keys, counters):
    z = mix64_array(np.asarray(keys, dtype=np.uint64) ^ mix64_array(np.asarray(counters, dtype=np.uint64)))
    return ((z >> _S11).astype(np.float64) + 0.5) * _INV53


if NUMBA_ENABLED:
    mix64, stream_key, uniform = _mix64, _stream_key, _uniform
else:
    def mix64(x):
        return np.uint64(mix64_array(np.uint64(x)))

    def stream_key(seed, path, stream):
        return np.uint64(stream_keys(seed, [path], stream)[0])

    def uniform(key, counter):
        """Uniform on the open interval (0, 1)."""
        return float(uniform_array([key], [counter])[0])
