"""Counter-based random digit streams.

Philox is keyed by ``(seed, replicate)``; the coordinate index occupies a
separate word of the 256-bit counter, so streams for different coordinates
never overlap and any digit can be regenerated without replaying others.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def _philox(seed, replicate, coord):
    key = np.array([int(seed) & _MASK64, int(replicate) & _MASK64], dtype=np.uint64)
    counter = np.array([0, int(coord) & _MASK64, 0, 0], dtype=np.uint64)
    return np.random.Philox(key=key, counter=counter)


def raw_words(seed, replicate, coord, count):
    """``count`` raw 64-bit words of the stream for ``(seed, replicate, coord)``."""
    return _philox(seed, replicate, coord).random_raw(count)


def uniform_digits(p, count, seed, replicate, coord):
    """``count`` digits uniform on {0, ..., p-1}; bias is below p * 2**-64."""
    return [(int(w) * p) >> 64 for w in raw_words(seed, replicate, coord, count)]


def uniform01(count, seed, replicate=0, coord=0):
    """Doubles uniform on [0, 1) from the top 53 bits of each word."""
    words = raw_words(seed, replicate, coord, count)
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


def integers(low, high, count, seed, replicate=0, coord=0):
    """Integers uniform on [low, high) (bias below (high - low) * 2**-64)."""
    span = int(high) - int(low)
    return np.array([int(low) + ((int(w) * span) >> 64)
                     for w in raw_words(seed, replicate, coord, count)], dtype=np.int64)
