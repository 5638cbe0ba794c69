"""Counter-based random streams.

Draw ``k`` of stream ``seed`` is ``mix(mix(seed) + (k + 1) * GAMMA)`` where
``mix`` is the SplitMix64 finaliser and all arithmetic wraps modulo 2**64.
Uniforms take the top 53 bits; normals use Box-Muller on consecutive
uniform pairs ``(u1, u2)`` as ``sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)``.
Because every draw is a pure function of ``(seed, k)``, any language can
reproduce the streams exactly.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray, inplace: bool = False) -> np.ndarray:
    if not inplace:
        z = z.copy()
    t = np.empty_like(z)
    for shift, mult in ((30, _M1), (27, _M2)):
        np.right_shift(z, np.uint64(shift), out=t)
        z ^= t
        z *= mult
    np.right_shift(z, np.uint64(31), out=t)
    z ^= t
    return z


def _key(seed: int) -> np.uint64:
    return _mix(np.array([int(seed) & _MASK64], dtype=np.uint64))[0]


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a sub-stream, e.g. ``derive_seed(seed, pair, 0)``."""
    key = int(seed) & _MASK64
    for p in path:
        word = np.array([(key ^ ((int(p) + 1) * int(GAMMA))) & _MASK64], dtype=np.uint64)
        key = int(_mix(word)[0])
    return key


def uint64_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    z = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z *= GAMMA
        z += _key(seed)
    return _mix(z, inplace=True)


def uniform_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Uniform doubles in ``[0, 1)``."""
    z = uint64_stream(seed, count, offset)
    z >>= np.uint64(11)
    u = z.astype(np.float64)
    u *= 2.0**-53
    return u


def normal_stream(seed: int, count: int) -> np.ndarray:
    """``count`` standard normals from draws ``0 .. 2*ceil(count/2)-1``."""
    pairs = (count + 1) // 2
    u = uniform_stream(seed, 2 * pairs).reshape(pairs, 2)
    r = np.negative(u[:, 0])
    np.log1p(r, out=r)
    r *= -2.0
    np.sqrt(r, out=r)
    theta = u[:, 1] * (2.0 * np.pi)
    np.cos(theta, out=u[:, 0])
    np.sin(theta, out=u[:, 1])
    u *= r[:, None]
    return u.reshape(-1)[:count]
