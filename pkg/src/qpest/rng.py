"""Counter-based random numbers for reproducible parallel sampling.

Implements the Philox-4x32-10 block function.  Every uniform double is a
pure function of ``(seed, index, stream)``:

* ``seed``   - the user-supplied 64-bit run seed (the Philox key),
* ``index``  - the sample index (counter words 0-1),
* ``stream`` - a small draw-slot label within one sample (counter words 2-3).

Because no generator state is carried between draws, results do not depend
on execution order, chunking, or worker count.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

# Stream labels reserved for seed derivation (outside the sampler's small
# per-slot stream range).
_DERIVE_STREAM = 1 << 48


def _key(seed: int) -> tuple[np.uint64, np.uint64]:
    s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    return s & _MASK32, (s >> _SHIFT32) & _MASK32


def philox_words(seed: int, index: np.ndarray | int, stream: int):
    """Run the 10-round Philox-4x32 block; returns four 32-bit word arrays.

    ``index`` may be a scalar or a uint64 array; the words are vectorized
    over it.
    """
    idx = np.asarray(index, dtype=np.uint64)
    c0 = idx & _MASK32
    c1 = (idx >> _SHIFT32) & _MASK32
    s = np.uint64(stream & 0xFFFFFFFFFFFFFFFF)
    c2 = np.broadcast_to(s & _MASK32, c0.shape).copy()
    c3 = np.broadcast_to((s >> _SHIFT32) & _MASK32, c0.shape).copy()
    k0, k1 = _key(seed)
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def uniforms(seed: int, index: np.ndarray | int, stream: int) -> np.ndarray:
    """Uniform doubles in [0, 1), one per entry of ``index``."""
    c0, c1, _, _ = philox_words(seed, index, stream)
    bits = (c0 << _SHIFT32) | c1
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def uniform(seed: int, index: int, stream: int) -> float:
    """Scalar convenience wrapper around :func:`uniforms`."""
    return float(uniforms(seed, np.uint64(index), stream))


def derive_seed(seed: int, index: int, stream: int = 0) -> int:
    """Deterministically derive an independent 64-bit sub-seed.

    Used to fan a master seed out into per-task seeds (e.g. one per
    generated circuit and one per estimation run) without overlapping the
    sampler's own draw streams.
    """
    c0, c1, _, _ = philox_words(seed, np.uint64(index), _DERIVE_STREAM + stream)
    return int((np.uint64(c0) << _SHIFT32) | np.uint64(c1))
