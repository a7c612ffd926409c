"""Stable seed derivation so parallel and serial runs agree bit-for-bit.

mix64 folds any number of integers through the SplitMix64 finalizer.  The
function is pure arithmetic on 64-bit words, so the derived stream is
identical across platforms, Python versions, and worker counts.
"""

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix64(*parts: int) -> int:
    """Deterministically mix integers into one 64-bit seed."""
    acc = 0x9E3779B97F4A7C15
    for p in parts:
        acc = _splitmix64(acc ^ (p & _MASK))
    return acc
